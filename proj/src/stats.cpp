#include "fleetroll/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "fleetroll/error.hpp"

namespace fleetroll {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return ss / static_cast<double>(x.size() - 1);
}

double std_error(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  boost::math::students_t dist(df);
  return boost::math::cdf(dist, t);
}

// Degenerate tests (zero spread) resolve by the sign of the estimate.
static double one_sided_p(double estimate, double se, double df, bool upper) {
  if (se == 0.0 || df < 1) {
    if (estimate == 0.0) return 1.0;
    return (upper ? estimate > 0 : estimate < 0) ? 0.0 : 1.0;
  }
  const double t = estimate / se;
  return upper ? 1.0 - student_t_cdf(t, df) : student_t_cdf(t, df);
}

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "paired samples differ in length");
  if (a.size() < 2) throw Error(ErrorCode::InvalidArgument, "paired t-test needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  PairedTest r;
  r.mean_diff = mean(d);
  r.std_error = std_error(d);
  r.df = static_cast<int>(d.size()) - 1;
  r.t = r.std_error > 0 ? r.mean_diff / r.std_error : 0.0;
  r.p_less = one_sided_p(r.mean_diff, r.std_error, r.df, false);
  return r;
}

SlopeTest slope_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "x and y differ in length");
  if (x.size() < 3) throw Error(ErrorCode::InvalidArgument, "slope test needs at least three points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "slope test needs distinct x values");
  SlopeTest r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    sse += e * e;
  }
  r.df = static_cast<long>(x.size()) - 2;
  r.std_error = std::sqrt(sse / static_cast<double>(r.df) / sxx);
  // Residuals at rounding level count as an exact fit.
  if (r.std_error <= 1e-12 * std::max(1.0, std::abs(r.slope))) r.std_error = 0.0;
  r.t = r.std_error > 0 ? r.slope / r.std_error : 0.0;
  r.p_positive = one_sided_p(r.slope, r.std_error, static_cast<double>(r.df), true);
  return r;
}

}  // namespace fleetroll
