#include "fermisea/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace fermisea {

namespace {
GaussRule build_rule(int n) {
  // Newton iteration on P_n with the three-term recurrence; standard double-precision
  // construction, symmetric nodes.
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[n - 1 - i] = r.w[i];
  }
  return r;
}
}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw ParameterError("gauss_legendre: order must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
  for (int i = 0; i < n; ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

cplx integrate_gl_c(const std::function<cplx(double)>& f, double a, double b, int n) {
  const GaussRule& r = gauss_legendre(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

double integrate_panels(const std::function<double(double)>& f, const std::vector<double>& bp, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) s += integrate_gl(f, bp[i], bp[i + 1], n);
  return s;
}

cplx integrate_panels_c(const std::function<cplx(double)>& f, const std::vector<double>& bp, int n) {
  cplx s = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) s += integrate_gl_c(f, bp[i], bp[i + 1], n);
  return s;
}

std::vector<double> uniform_breakpoints(double a, double b, double hmax, int min_panels) {
  if (b < a) throw ParameterError("uniform_breakpoints: b < a");
  int m = std::max<int>(min_panels, int(std::ceil((b - a) / hmax)));
  std::vector<double> bp(m + 1);
  for (int i = 0; i <= m; ++i) bp[i] = a + (b - a) * double(i) / m;
  return bp;
}

std::vector<double> graded_breakpoints(double a, double b, double toward, int levels) {
  std::vector<double> bp;
  bool at_a = std::abs(toward - a) < std::abs(toward - b);
  double len = b - a;
  bp.push_back(a);
  if (at_a) {
    for (int l = levels; l >= 1; --l) bp.push_back(a + len * std::pow(0.5, l));
  } else {
    for (int l = 1; l <= levels; ++l) bp.push_back(a + len * (1.0 - std::pow(0.5, l)));
  }
  bp.push_back(b);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

std::vector<double> trapezoid_weights(int m, double dt) {
  if (m < 1) throw ParameterError("trapezoid_weights: need at least one interval");
  std::vector<double> w(m + 1, dt);
  w.front() = 0.5 * dt;
  w.back() = 0.5 * dt;
  return w;
}

}  // namespace fermisea
