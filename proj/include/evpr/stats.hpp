#pragma once

#include <span>

namespace evpr {

struct TTestResult {
    double t = 0.0;
    double p = 1.0;  // two-sided
    int dof = 0;
};

/// Differences with zero sample variance use this floor on the standard
/// deviation, so a constant nonzero difference gives p ~ 0.
inline constexpr double kTTestSdFloor = 1e-12;

/// Paired t-test on a - b. All-zero differences return t = 0, p = 1.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// One-sided p-value for the alternative mean(a - b) > 0.
double one_sided_p_greater(const TTestResult& r);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, int dof);

}  // namespace evpr
