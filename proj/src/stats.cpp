#include "cordon/stats.hpp"

#include <cmath>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "cordon/errors.hpp"

namespace cordon {

namespace {

void check_counts(int successes, int n, double confidence) {
    if (n < 1 || successes < 0 || successes > n) {
        throw InputError("binomial interval: need 0 <= successes <= n, n >= 1");
    }
    if (confidence <= 0.0 || confidence >= 1.0) {
        throw InputError("binomial interval: confidence must be in (0,1)");
    }
}

}  // namespace

Interval wilson_ci(int successes, int n, double confidence) {
    check_counts(successes, n, confidence);
    const boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 0.5 + confidence / 2.0);
    const double z2 = z * z;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;

    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half =
        (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));

    Interval ci;
    ci.low = successes == 0 ? 0.0 : std::max(0.0, center - half);
    ci.high = successes == n ? 1.0 : std::min(1.0, center + half);
    return ci;
}

Interval clopper_pearson_ci(int successes, int n, double confidence) {
    check_counts(successes, n, confidence);
    const double alpha = 1.0 - confidence;
    Interval ci;
    if (successes == 0) {
        ci.low = 0.0;
    } else {
        const boost::math::beta_distribution<double> lower(successes, n - successes + 1);
        ci.low = boost::math::quantile(lower, alpha / 2.0);
    }
    if (successes == n) {
        ci.high = 1.0;
    } else {
        const boost::math::beta_distribution<double> upper(successes + 1, n - successes);
        ci.high = boost::math::quantile(upper, 1.0 - alpha / 2.0);
    }
    return ci;
}

}  // namespace cordon
