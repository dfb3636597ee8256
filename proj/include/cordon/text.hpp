#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace cordon {

/// Case-folded, whitespace-delimited tokens with punctuation stripped at
/// token edges. Empty tokens are dropped.
std::vector<std::string> tokenize(const std::string& text);

std::set<std::string> token_set(const std::string& text);

/// |a ∩ b| / |a ∪ b|; 0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Entity normalization: case-fold, expand abbreviations, drop stopwords.
/// Idempotent by construction (expansions contain no abbreviations).
class EntityNormalizer {
public:
    EntityNormalizer();  // seeded with the default abbreviation map + stopwords

    void add_abbreviation(const std::string& abbrev, const std::string& expansion);

    std::string normalize(const std::string& entity) const;

private:
    std::map<std::string, std::vector<std::string>> abbreviations_;  // folded token -> expansion tokens
    std::set<std::string> stopwords_;
};

/// Relation synonym groups. Two relations agree when they match
/// case-insensitively or belong to the same class. Classes must be
/// pairwise disjoint.
class RelationEquivalence {
public:
    // The five default synonym groups.
    RelationEquivalence();
    explicit RelationEquivalence(std::vector<std::set<std::string>> classes);

    /// Throws ConfigError if the class overlaps an existing one.
    void add_class(const std::set<std::string>& cls);

    bool same_class(const std::string& a, const std::string& b) const;
    /// Index of the class containing the relation, or -1.
    int class_of(const std::string& relation) const;
    const std::vector<std::set<std::string>>& classes() const { return classes_; }

private:
    std::vector<std::set<std::string>> classes_;  // folded tokens
};

/// Relation prefix marking a negated assertion; "does_not_X" never agrees
/// with "X" and forms a polarity conflict with it.
inline constexpr const char* kNegationPrefix = "does_not_";

bool is_negated_relation(const std::string& relation);
std::string strip_negation(const std::string& relation);

/// Sensational-language tokens the mimicry generator must avoid and the
/// danger-classifier rule checks for.
const std::set<std::string>& sensational_blocklist();

const std::set<std::string>& default_stopwords();

/// tokens(text) minus stopwords; the judge's endorsement rule counts these.
std::vector<std::string> content_tokens(const std::string& text);

std::string fold_case(const std::string& s);
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace cordon
