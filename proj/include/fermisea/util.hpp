#pragma once
// Shared helpers: error taxonomy, deterministic parallel map, small math utilities.
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fermisea {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Invalid argument combinations (wrong dimension, non-admissible pair, bad config value).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
// Evaluation requested on (or numerically at) a singular set.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Lookup outside tabulated/representable range.
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Iterations diverged or failed to settle.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// surface measure of the unit sphere S^{m} in R^{m+1}
inline double sphere_measure(int m) {
  switch (m) {
    case 0: return 2.0;
    case 1: return kTwoPi;
    case 2: return 4.0 * kPi;
    case 3: return 2.0 * kPi * kPi;
    default: throw ParameterError("sphere_measure: unsupported dimension");
  }
}

inline double sq(double x) { return x * x; }
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }  // <x>

// Runs fn(i) for i in [0,count). Each index writes its own slot in the caller's
// output, so the result is identical for any worker count.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t w = std::min<std::size_t>(workers, count);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < count; i += w) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// least-squares fit of y = a + b x; returns {intercept, slope, r2}
struct LineFit {
  double intercept = 0.0, slope = 0.0, r2 = 1.0;
};
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_line: need >= 2 points");
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw ParameterError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double yi = f.intercept + f.slope * x[i];
    ss_res += sq(y[i] - yi);
    ss_tot += sq(y[i] - ybar);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace fermisea
