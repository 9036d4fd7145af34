#include "fermisea/reference_state.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "fermisea/quadrature.hpp"

namespace fermisea {

ReferenceState ReferenceState::fermi_dirac(double beta, double mu) {
  if (!(beta > 0)) throw ParameterError("ReferenceState: beta must be positive");
  ReferenceState s;
  s.kind_ = StateKind::FermiDirac;
  s.beta_ = beta;
  s.mu_ = mu;
  return s;
}

ReferenceState ReferenceState::zero_temperature(double mu) {
  if (!(mu > 0)) throw ParameterError("ReferenceState: zero-temperature state needs mu > 0");
  ReferenceState s;
  s.kind_ = StateKind::ZeroTemperature;
  s.mu_ = mu;
  return s;
}

ReferenceState ReferenceState::tabulated(std::vector<double> r, std::vector<double> f) {
  if (r.size() != f.size() || r.size() < 4) throw ParameterError("ReferenceState: tabulated needs >= 4 nodes");
  for (std::size_t i = 0; i + 1 < r.size(); ++i)
    if (!(r[i + 1] > r[i])) throw ParameterError("ReferenceState: tabulated nodes must increase");
  for (double v : f)
    if (v < -1e-12 || v > 1.0 + 1e-12) throw ParameterError("ReferenceState: occupation must lie in [0,1]");
  ReferenceState s;
  s.kind_ = StateKind::Tabulated;
  s.tab_r_ = std::move(r);
  s.tab_f_ = std::move(f);
  // centered differences at interior nodes, one-sided at the ends
  std::size_t m = s.tab_r_.size();
  s.tab_df_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == m ? i : i + 1;
    s.tab_df_[i] = (s.tab_f_[hi] - s.tab_f_[lo]) / (s.tab_r_[hi] - s.tab_r_[lo]);
  }
  s.mu_ = s.tab_r_.back();
  return s;
}

double ReferenceState::occupation(double r) const {
  if (r < 0) throw ParameterError("occupation: energy must be >= 0");
  switch (kind_) {
    case StateKind::FermiDirac: {
      double y = beta_ * (r - mu_);
      if (y > 700.0) return 0.0;  // overflow guard
      return 1.0 / (std::exp(y) + 1.0);
    }
    case StateKind::ZeroTemperature:
      return r <= mu_ ? 1.0 : 0.0;
    case StateKind::Tabulated: {
      if (r <= tab_r_.front()) return tab_f_.front();
      if (r >= tab_r_.back()) return tab_f_.back();
      auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
      std::size_t i = it - tab_r_.begin() - 1;
      double t = (r - tab_r_[i]) / (tab_r_[i + 1] - tab_r_[i]);
      return (1.0 - t) * tab_f_[i] + t * tab_f_[i + 1];
    }
  }
  return 0.0;
}

double ReferenceState::occupation_deriv(double r) const {
  if (r < 0) throw ParameterError("occupation_deriv: energy must be >= 0");
  switch (kind_) {
    case StateKind::FermiDirac: {
      double y = beta_ * (r - mu_);
      if (std::abs(y) > 700.0) return 0.0;
      double e = std::exp(y);
      return -beta_ * e / sq(e + 1.0);
    }
    case StateKind::ZeroTemperature:
      throw ParameterError("occupation_deriv: distributional at zero temperature");
    case StateKind::Tabulated: {
      if (r <= tab_r_.front()) return tab_df_.front();
      if (r >= tab_r_.back()) return 0.0;
      auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
      std::size_t i = it - tab_r_.begin() - 1;
      double t = (r - tab_r_[i]) / (tab_r_[i + 1] - tab_r_[i]);
      return (1.0 - t) * tab_df_[i] + t * tab_df_[i + 1];
    }
  }
  return 0.0;
}

double ReferenceState::support_cut() const {
  switch (kind_) {
    case StateKind::FermiDirac: return mu_ + 42.0 / beta_;
    case StateKind::ZeroTemperature: return mu_;
    case StateKind::Tabulated: return tab_r_.back();
  }
  return 0.0;
}

std::string ReferenceState::label() const {
  char buf[96];
  switch (kind_) {
    case StateKind::FermiDirac:
      std::snprintf(buf, sizeof buf, "fermi_dirac(beta=%.17g,mu=%.17g)", beta_, mu_);
      break;
    case StateKind::ZeroTemperature:
      std::snprintf(buf, sizeof buf, "zero_temperature(mu=%.17g)", mu_);
      break;
    case StateKind::Tabulated:
      std::snprintf(buf, sizeof buf, "tabulated(%zu nodes,r_max=%.17g)", tab_r_.size(), tab_r_.back());
      break;
  }
  return buf;
}

double CorrelationTable::operator()(double r) const {
  if (r < 0) r = -r;  // radial
  if (r > r_max * (1.0 + 1e-12)) throw RangeError("CorrelationTable: radius beyond table range");
  double u = std::min(r, r_max) / dr;
  long i = long(u);
  long m = long(val.size()) - 1;
  if (i >= m) return val.back();
  double t = u - i;
  // Catmull-Rom with clamped ends
  double p0 = val[i > 0 ? i - 1 : 0], p1 = val[i], p2 = val[i + 1], p3 = val[std::min(i + 2, m)];
  double a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
  double b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
  double c = 0.5 * (p2 - p0);
  return ((a * t + b) * t + c) * t + p1;
}

namespace {
// closed forms for the sharp state (g = indicator of k <= sqrt(mu))
double sharp_gcheck(int d, double mu, double r) {
  double kf = std::sqrt(mu);
  if (r < 1e-8) {
    switch (d) {
      case 1: return kf / kPi;
      case 2: return mu / (4.0 * kPi);
      case 3: return kf * mu / (6.0 * kPi * kPi);
    }
  }
  switch (d) {
    case 1: return std::sin(kf * r) / (kPi * r);
    case 2: return kf * std::cyl_bessel_j(1.0, kf * r) / (kTwoPi * r);
    case 3: return (std::sin(kf * r) - kf * r * std::cos(kf * r)) / (2.0 * kPi * kPi * r * r * r);
  }
  throw ParameterError("correlation_table: d must be 1, 2 or 3");
}
}  // namespace

CorrelationTable correlation_table(const ReferenceState& st, int d, double r_max, int nodes) {
  if (d < 1 || d > 3) throw ParameterError("correlation_table: d must be 1, 2 or 3");
  if (!(r_max > 0) || nodes < 64) throw ParameterError("correlation_table: need r_max > 0, nodes >= 64");
  CorrelationTable tab;
  tab.d = d;
  tab.r_max = r_max;
  const int m = 8192;
  tab.dr = r_max / m;
  tab.val.resize(m + 1);

  if (st.kind() == StateKind::ZeroTemperature) {
    for (int i = 0; i <= m; ++i) tab.val[i] = sharp_gcheck(d, st.mu(), i * tab.dr);
  } else {
    // one composite Gauss grid in k shared by every radius; g evaluated once
    double k_cut = std::sqrt(st.support_cut());
    int panels = std::max(nodes / 8, int(std::ceil(k_cut * r_max / (0.5 * kPi))));
    auto bp = uniform_breakpoints(0.0, k_cut, k_cut / panels);
    const GaussRule& gr = gauss_legendre(8);
    std::vector<double> kn, kw, gv;
    for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
      double mid = 0.5 * (bp[p] + bp[p + 1]), half = 0.5 * (bp[p + 1] - bp[p]);
      for (int i = 0; i < 8; ++i) {
        double k = mid + half * gr.x[i];
        kn.push_back(k);
        kw.push_back(half * gr.w[i]);
        gv.push_back(st.occupation(k * k));
      }
    }
    for (int i = 0; i <= m; ++i) {
      double r = i * tab.dr, acc = 0.0;
      switch (d) {
        case 1:
          for (std::size_t j = 0; j < kn.size(); ++j) acc += kw[j] * gv[j] * std::cos(kn[j] * r);
          acc /= kPi;
          break;
        case 2:
          for (std::size_t j = 0; j < kn.size(); ++j) acc += kw[j] * gv[j] * kn[j] * std::cyl_bessel_j(0.0, kn[j] * r);
          acc /= kTwoPi;
          break;
        case 3:
          if (r < 1e-9) {
            for (std::size_t j = 0; j < kn.size(); ++j) acc += kw[j] * gv[j] * kn[j] * kn[j];
            acc /= kTwoPi * kPi;
          } else {
            for (std::size_t j = 0; j < kn.size(); ++j) acc += kw[j] * gv[j] * kn[j] * std::sin(kn[j] * r);
            acc /= kTwoPi * kPi * r;
          }
          break;
      }
      tab.val[i] = acc;
    }
  }
  tab.value0 = tab.val[0];
  // moments int |gcheck|/|x|^{d-2} dx = |S^{d-1}| int_0^rmax gcheck(r) r dr (trapezoid on the fine grid)
  double sd = sphere_measure(d - 1);
  double ma = 0.0, ms = 0.0;
  for (int i = 0; i <= m; ++i) {
    double w = (i == 0 || i == m) ? 0.5 : 1.0;
    double r = i * tab.dr;
    ma += w * std::abs(tab.val[i]) * r;
    ms += w * tab.val[i] * r;
  }
  tab.moment_abs = sd * ma * tab.dr;
  tab.moment_signed = sd * ms * tab.dr;
  return tab;
}

const CorrelationTable& cached_correlation(const ReferenceState& st, int d, double r_max) {
  static std::map<std::string, CorrelationTable> cache;
  static std::mutex mu;
  char key[160];
  std::snprintf(key, sizeof key, "%s|d=%d|r=%.17g", st.label().c_str(), d, r_max);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, correlation_table(st, d, r_max)).first;
  return it->second;
}

}  // namespace fermisea
