#include "cordon/backend.hpp"

#include <cmath>

#include "cordon/errors.hpp"

namespace cordon {

std::string to_string(Role role) {
    switch (role) {
        case Role::extractor: return "extractor";
        case Role::auditor: return "auditor";
        case Role::gate: return "gate";
        case Role::synthesizer: return "synthesizer";
        case Role::judge: return "judge";
        case Role::correctness: return "correctness";
        case Role::vanilla: return "vanilla";
        case Role::cot_detect: return "cot_detect";
        case Role::danger_classify: return "danger_classify";
        case Role::internal_answer: return "internal_answer";
        case Role::draft: return "draft";
    }
    return "unknown";
}

double default_temperature(Role role) {
    return role == Role::synthesizer ? 0.3 : 0.0;
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dimension() != v.dimension()) {
        throw InputError("cosine_similarity: dimension mismatch");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        nu += u.values[i] * u.values[i];
        nv += v.values[i] * v.values[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw InputError("cosine_similarity: zero vector");
    }
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace cordon
