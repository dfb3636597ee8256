#include "cordon/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "cordon/errors.hpp"

namespace cordon {

std::string fold_case(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

namespace {

bool is_edge_punct(unsigned char c) {
    return std::ispunct(c) && c != '_';  // keep verb-phrase underscores intact
}

std::string strip_edges(const std::string& token) {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && is_edge_punct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && is_edge_punct(static_cast<unsigned char>(token[e - 1]))) --e;
    return token.substr(b, e - b);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(fold_case(text));
    std::string raw;
    while (in >> raw) {
        std::string tok = strip_edges(raw);
        if (!tok.empty()) tokens.push_back(std::move(tok));
    }
    return tokens;
}

std::set<std::string> token_set(const std::string& text) {
    auto tokens = tokenize(text);
    return std::set<std::string>(tokens.begin(), tokens.end());
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a) {
        if (b.count(t)) ++inter;
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> stopwords = {
        "a",  "an", "the", "of",   "for", "and", "or",  "to",
        "in", "on", "by",  "with", "is",  "are", "was", "were"};
    return stopwords;
}

std::vector<std::string> content_tokens(const std::string& text) {
    std::vector<std::string> out;
    for (auto& tok : tokenize(text)) {
        if (!default_stopwords().count(tok)) out.push_back(std::move(tok));
    }
    return out;
}

EntityNormalizer::EntityNormalizer() {
    stopwords_ = default_stopwords();
    add_abbreviation("CDC", "Centers for Disease Control");
}

void EntityNormalizer::add_abbreviation(const std::string& abbrev, const std::string& expansion) {
    abbreviations_[fold_case(abbrev)] = tokenize(expansion);
}

std::string EntityNormalizer::normalize(const std::string& entity) const {
    std::vector<std::string> expanded;
    for (const auto& tok : tokenize(entity)) {
        auto it = abbreviations_.find(tok);
        if (it != abbreviations_.end()) {
            expanded.insert(expanded.end(), it->second.begin(), it->second.end());
        } else {
            expanded.push_back(tok);
        }
    }
    std::vector<std::string> kept;
    for (auto& tok : expanded) {
        if (!stopwords_.count(tok)) kept.push_back(std::move(tok));
    }
    return join_tokens(kept);
}

RelationEquivalence::RelationEquivalence()
    : RelationEquivalence({
          {"supports", "confirms", "demonstrates", "shows", "validates"},
          {"inhibits", "reduces", "blocks", "suppresses"},
          {"causes", "induces", "triggers", "leads_to"},
          {"contains", "includes", "comprises"},
          {"associated_with", "linked_to", "correlated_with"},
      }) {}

RelationEquivalence::RelationEquivalence(std::vector<std::set<std::string>> classes) {
    for (const auto& cls : classes) add_class(cls);
}

void RelationEquivalence::add_class(const std::set<std::string>& cls) {
    std::set<std::string> folded;
    for (const auto& r : cls) folded.insert(fold_case(r));
    for (const auto& existing : classes_) {
        for (const auto& r : folded) {
            if (existing.count(r)) {
                throw ConfigError("relation equivalence classes overlap on: " + r);
            }
        }
    }
    classes_.push_back(std::move(folded));
}

int RelationEquivalence::class_of(const std::string& relation) const {
    const std::string r = fold_case(relation);
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i].count(r)) return static_cast<int>(i);
    }
    return -1;
}

bool RelationEquivalence::same_class(const std::string& a, const std::string& b) const {
    const int ca = class_of(a);
    return ca >= 0 && ca == class_of(b);
}

bool is_negated_relation(const std::string& relation) {
    return fold_case(relation).rfind(kNegationPrefix, 0) == 0;
}

std::string strip_negation(const std::string& relation) {
    std::string r = fold_case(relation);
    if (r.rfind(kNegationPrefix, 0) == 0) return r.substr(std::string(kNegationPrefix).size());
    return r;
}

const std::set<std::string>& sensational_blocklist() {
    static const std::set<std::string> blocklist = {
        "shocking",      "breakthrough", "miracle",   "urgent",   "revolutionary",
        "astonishing",   "guaranteed",   "explosive", "stunning", "unbelievable",
    };
    return blocklist;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace cordon
