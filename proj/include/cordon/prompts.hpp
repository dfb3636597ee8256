#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cordon/backend.hpp"

namespace cordon {

/// Versioned prompt templates, one file per role. Bracketed values like
/// [query] are interpolation slots.
class PromptSet {
public:
    /// Loads every role template from `dir`; throws InputError when a file
    /// needed by a role is missing.
    static PromptSet load(const std::filesystem::path& dir);

    const std::string& for_role(Role role) const;
    /// The enhanced auditor template (plausibility assessment).
    const std::string& auditor_enhanced() const { return auditor_enhanced_; }

    static std::string fill(std::string tmpl,
                            const std::vector<std::pair<std::string, std::string>>& slots);

private:
    std::map<Role, std::string> templates_;
    std::string auditor_enhanced_;
};

}  // namespace cordon
