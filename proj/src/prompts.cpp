#include "cordon/prompts.hpp"

#include <fstream>
#include <sstream>

#include "cordon/errors.hpp"

namespace cordon {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open prompt file: " + path.string());
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

PromptSet PromptSet::load(const std::filesystem::path& dir) {
    PromptSet set;
    const std::pair<Role, const char*> files[] = {
        {Role::extractor, "extractor.txt"},
        {Role::auditor, "auditor.txt"},
        {Role::gate, "gate.txt"},
        {Role::synthesizer, "synthesizer.txt"},
        {Role::judge, "judge.txt"},
        {Role::correctness, "correctness.txt"},
        {Role::vanilla, "vanilla.txt"},
        {Role::cot_detect, "cot_detect.txt"},
        {Role::danger_classify, "danger_classify.txt"},
        {Role::internal_answer, "internal_answer.txt"},
        {Role::draft, "draft.txt"},
    };
    for (const auto& [role, name] : files) {
        set.templates_[role] = read_file(dir / name);
    }
    set.auditor_enhanced_ = read_file(dir / "auditor_enhanced.txt");
    return set;
}

const std::string& PromptSet::for_role(Role role) const {
    auto it = templates_.find(role);
    if (it == templates_.end()) {
        throw InputError("no prompt template for role: " + to_string(role));
    }
    return it->second;
}

std::string PromptSet::fill(std::string tmpl,
                            const std::vector<std::pair<std::string, std::string>>& slots) {
    for (const auto& [slot, value] : slots) {
        std::size_t pos = 0;
        while ((pos = tmpl.find(slot, pos)) != std::string::npos) {
            tmpl.replace(pos, slot.size(), value);
            pos += value.size();
        }
    }
    return tmpl;
}

}  // namespace cordon
