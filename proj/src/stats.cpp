#include "evpr/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "evpr/error.hpp"

namespace evpr {

double student_t_two_sided_p(double t, int dof) {
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("paired_t_test: length mismatch");
    if (a.size() < 2) throw DataError("paired_t_test: need at least 2 pairs");
    const double n = static_cast<double>(a.size());
    double sum = 0.0;
    bool all_zero = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d;
        all_zero = all_zero && d == 0.0;
    }
    TTestResult r;
    r.dof = static_cast<int>(a.size()) - 1;
    if (all_zero) return r;

    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double sd = std::max(std::sqrt(ss / (n - 1.0)), kTTestSdFloor);
    r.t = mean / (sd / std::sqrt(n));
    r.p = student_t_two_sided_p(r.t, r.dof);
    return r;
}

double one_sided_p_greater(const TTestResult& r) { return r.t > 0.0 ? r.p / 2.0 : 1.0 - r.p / 2.0; }

}  // namespace evpr
