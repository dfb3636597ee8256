#pragma once

namespace cordon {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval (no continuity correction). low is exactly 0 for
/// successes == 0 and high exactly 1 for successes == n. Throws InputError
/// on invalid counts or confidence outside (0,1).
Interval wilson_ci(int successes, int n, double confidence = 0.95);

/// Exact binomial (Clopper-Pearson) interval via beta quantiles.
Interval clopper_pearson_ci(int successes, int n, double confidence = 0.95);

}  // namespace cordon
