#pragma once

#include <span>

namespace fleetroll {

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // n-1 denominator; 0 for n < 2
double std_error(std::span<const double> x);

/// One-sided paired t-test of H1: mean(a - b) < 0.
struct PairedTest {
  double mean_diff = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  int df = 0;
  double p_less = 1.0;
};

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

/// Least-squares slope of y on x with a one-sided test of H1: slope > 0.
struct SlopeTest {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  long df = 0;
  double p_positive = 1.0;
};

SlopeTest slope_test(std::span<const double> x, std::span<const double> y);

/// P(T <= t) for Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

}  // namespace fleetroll
