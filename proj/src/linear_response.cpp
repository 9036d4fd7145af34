#include "fermisea/linear_response.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fermisea/quadrature.hpp"

namespace fermisea {

namespace {
constexpr double kBigSentinel = 1e300;  // stands in for an infinite bound in reports
const double kSqrt2Pi = std::sqrt(kTwoPi);

// breakpoints where the sharp 1d multiplier at level mu*(1-r^2) is singular
void add_root(std::vector<double>& bp, double w, double mu) {
  if (mu <= 0) return;
  double r2 = 1.0 - w / mu;
  if (r2 > 0.0 && r2 < 1.0) bp.push_back(std::sqrt(r2));
}
}  // namespace

cplx sharp_multiplier_1d(double mu, double tau, double xi_abs) {
  if (!(xi_abs > 0)) throw ParameterError("sharp_multiplier_1d: xi_abs must be positive");
  if (mu < 0) throw ParameterError("sharp_multiplier_1d: mu must be >= 0");
  if (mu == 0.0) return 0.0;
  double root = std::sqrt(mu);
  double A = xi_abs * xi_abs + 2.0 * xi_abs * root;
  double B = xi_abs * xi_abs - 2.0 * xi_abs * root;
  double scale = std::abs(A) + std::abs(tau) + 1.0;
  for (double f : {A - tau, A + tau, B - tau, B + tau}) {
    if (std::abs(f) < 1e-13 * scale) throw SingularityError("sharp_multiplier_1d: on the singular set");
  }
  double re = std::log(std::abs((A * A - tau * tau) / (B * B - tau * tau))) / (2.0 * kSqrt2Pi * xi_abs);
  double edge = 2.0 * root * xi_abs;
  double im = 0.0;
  if (std::abs(tau + xi_abs * xi_abs) <= edge) im += 1.0;
  if (std::abs(tau - xi_abs * xi_abs) <= edge) im -= 1.0;
  im *= std::sqrt(kPi) / (2.0 * std::sqrt(2.0) * xi_abs);
  return cplx(re, im);
}

namespace {
cplx sharp_multiplier_try(int d, double mu, double tau, double xi_abs, int nodes, int shift) {
  // panels split at the radii where the level mu(1-r^2) crosses the singular
  // parabolas, graded toward those edges and toward r = 1
  std::vector<double> base{0.0, 1.0};
  double wp = sq(tau + xi_abs * xi_abs) / (4.0 * sq(xi_abs));
  double wm = sq(tau - xi_abs * xi_abs) / (4.0 * sq(xi_abs));
  add_root(base, wp, mu);
  add_root(base, wm, mu);
  std::sort(base.begin(), base.end());
  // tolerant dedupe: at tau ~ 0 the two crossing radii coincide to roundoff
  base.erase(std::unique(base.begin(), base.end(), [](double a, double b) { return b - a < 1e-9; }), base.end());
  if (base.back() < 1.0) base.back() = 1.0;

  int order = std::clamp(nodes / 4, 8, 64) + shift;
  double pref = sphere_measure(d - 2) * std::pow(mu, 0.5 * (d - 1)) / std::pow(kTwoPi, d - 1.0);
  cplx acc = 0.0;
  for (std::size_t s = 0; s + 1 < base.size(); ++s) {
    // grade toward both panel ends (log endpoints are integrable)
    auto bp1 = graded_breakpoints(base[s], 0.5 * (base[s] + base[s + 1]), base[s], 5);
    auto bp2 = graded_breakpoints(0.5 * (base[s] + base[s + 1]), base[s + 1], base[s + 1], 5);
    bp1.insert(bp1.end(), bp2.begin() + 1, bp2.end());
    acc += integrate_panels_c(
        [&](double r) {
          return sharp_multiplier_1d(mu * (1.0 - r * r), tau, xi_abs) * std::pow(r, d - 2);
        },
        bp1, order);
  }
  return pref * acc;
}
}  // namespace

cplx sharp_multiplier(int d, double mu, double tau, double xi_abs, int nodes) {
  if (d < 2 || d > 4) throw ParameterError("sharp_multiplier: d must be in {2,3,4}");
  if (!(xi_abs > 0)) throw ParameterError("sharp_multiplier: xi_abs must be positive");
  if (mu < 0) throw ParameterError("sharp_multiplier: mu must be >= 0");
  if (mu == 0.0) return 0.0;
  try {
    return sharp_multiplier_try(d, mu, tau, xi_abs, nodes, 0);
  } catch (const SingularityError&) {
    // shift every node once by bumping the order, then give up
    return sharp_multiplier_try(d, mu, tau, xi_abs, nodes, 1);
  }
}

cplx multiplier_spectral(const ReferenceState& st, int d, double tau, double xi_abs, int nodes) {
  if (d < 1 || d > 4) throw ParameterError("multiplier_spectral: d must be in {1,..,4}");
  if (!(xi_abs > 0)) throw ParameterError("multiplier_spectral: xi_abs must be positive");
  if (st.kind() == StateKind::ZeroTemperature) {
    // sharp state: the energy integral collapses onto the level mu (shared code path)
    return d == 1 ? sharp_multiplier_1d(st.mu(), tau, xi_abs) : sharp_multiplier(d, st.mu(), tau, xi_abs, nodes);
  }
  double s_cut = st.support_cut();
  std::vector<double> bp = uniform_breakpoints(0.0, s_cut, s_cut / std::max(8, nodes / 8));
  // kinks where the shell touches the level
  for (double w : {sq(tau + xi_abs * xi_abs) / (4.0 * sq(xi_abs)), sq(tau - xi_abs * xi_abs) / (4.0 * sq(xi_abs))}) {
    if (w > 0.0 && w < s_cut) bp.push_back(w);
  }
  std::sort(bp.begin(), bp.end());
  double tol = 1e-9 * s_cut;
  bp.erase(std::unique(bp.begin(), bp.end(), [tol](double a, double b) { return b - a < tol; }), bp.end());
  if (bp.back() < s_cut) bp.back() = s_cut;
  int inner = std::clamp(nodes / 2, 8, 64);
  return -integrate_panels_c(
      [&](double s) -> cplx {
        if (s <= 0.0) return 0.0;
        cplx level = d == 1 ? sharp_multiplier_1d(s, tau, xi_abs) : sharp_multiplier(d, s, tau, xi_abs, inner);
        return level * st.occupation_deriv(s);
      },
      bp, 12);
}

cplx multiplier_timedomain(const ReferenceState& st, int d, double tau, double xi_abs, double t_cut, int t_nodes) {
  if (d < 1 || d > 3) throw ParameterError("multiplier_timedomain: d must be in {1,2,3}");
  if (xi_abs < 0 || !(t_cut > 0)) throw ParameterError("multiplier_timedomain: need xi_abs >= 0, t_cut > 0");
  if (xi_abs == 0.0) return 0.0;  // sin(t*0) kills the integrand
  double r_need = 2.0 * t_cut * xi_abs;
  double r_max = 16.0 * std::ceil(std::max(48.0, 1.002 * r_need) / 16.0);
  const CorrelationTable& tab = cached_correlation(st, d, r_max);
  double k_cut = std::sqrt(st.support_cut());
  double omega = std::abs(tau) + xi_abs * xi_abs + 2.0 * xi_abs * k_cut;
  int panels = std::max(16, int(std::ceil(t_cut * omega * 4.0 / kPi)));
  if (t_nodes > 0) panels = std::max(panels, t_nodes / 12);
  auto bp = uniform_breakpoints(0.0, t_cut, t_cut / panels);
  double xi2 = xi_abs * xi_abs;
  return integrate_panels_c(
      [&](double t) {
        double kern = 2.0 * kSqrt2Pi * std::sin(t * xi2) * tab(2.0 * t * xi_abs);
        return std::exp(cplx(0.0, -tau * t)) * kern;
      },
      bp, 12);
}

double multiplier_imag(const ReferenceState& st, int d, double tau, double xi_abs, int nodes) {
  if (d < 2 || d > 4) throw ParameterError("multiplier_imag: d must be in {2,3,4}");
  if (!(tau > 0) || !(xi_abs > 0)) throw ParameterError("multiplier_imag: need tau > 0 and xi_abs > 0");
  if (st.kind() == StateKind::ZeroTemperature) return sharp_multiplier(d, st.mu(), tau, xi_abs, nodes).imag();
  double wp = sq(tau + xi_abs * xi_abs) / (4.0 * sq(xi_abs));
  double wm = sq(tau - xi_abs * xi_abs) / (4.0 * sq(xi_abs));
  double s_cut = st.support_cut();
  if (wm >= s_cut) return 0.0;
  double r_hi = std::sqrt(std::max(0.0, 1.0 - wm / s_cut));
  int order = std::clamp(nodes / 2, 8, 64);
  double outer = integrate_panels(
      [&](double r) {
        double om = 1.0 - r * r;
        double lo = wm / om, hi = std::min(wp / om, s_cut);
        if (lo >= hi) return 0.0;
        std::vector<double> ibp{lo, hi};
        if (st.mu() > lo && st.mu() < hi) ibp.insert(ibp.begin() + 1, st.mu());
        double inner = integrate_panels(
            [&](double s) { return std::pow(s, 0.5 * (d - 1)) * st.occupation_deriv(s); }, ibp, order);
        return std::pow(r, d - 2) * inner;
      },
      uniform_breakpoints(0.0, r_hi, r_hi / 24, 8), 12);
  double pref = sphere_measure(d - 2) / (4.0 * std::pow(kTwoPi, d - 1.5) * xi_abs);
  return pref * outer;
}

OriginDeficit origin_deficit(const ReferenceState& st, int d, std::vector<double> radii, int samples_per_annulus) {
  if (radii.empty()) radii = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i + 1] < radii[i])) throw ParameterError("origin_deficit: radii must decrease");
  int n_ang = std::max(8, int(std::sqrt(double(samples_per_annulus)) * 2));
  int n_rad = std::max(4, samples_per_annulus / n_ang);

  auto eval_min = [&](double r_lo, double r_hi) {
    double m = std::numeric_limits<double>::infinity();
    for (int ir = 0; ir < n_rad; ++ir) {
      double rho = r_hi - (r_hi - r_lo) * double(ir) / n_rad;
      for (int ia = 1; ia <= n_ang; ++ia) {
        double th = 0.5 * kPi * double(ia) / n_ang;  // tau >= 0 suffices: Re is even in tau
        double tau = rho * std::cos(th), xi = rho * std::sin(th);
        if (xi < 1e-12) continue;
        m = std::min(m, multiplier_spectral(st, d, tau, xi, 16).real());
      }
    }
    return m;
  };

  OriginDeficit out;
  out.radii = radii;
  std::size_t K = radii.size();
  std::vector<double> annulus_min(K);
  for (std::size_t k = 0; k < K; ++k) {
    double lo = (k + 1 < K) ? radii[k + 1] : 0.1 * radii.back();
    annulus_min[k] = eval_min(lo, radii[k]);
  }
  // cumulative min from the innermost annulus outward keeps the per-radius
  // minima monotone under shrinking by construction
  out.minima.assign(K, 0.0);
  double running = std::numeric_limits<double>::infinity();
  for (std::size_t k = K; k-- > 0;) {
    running = std::min(running, annulus_min[k]);
    out.minima[k] = running;
  }
  double last = out.minima.back(), prev = K >= 2 ? out.minima[K - 2] : last;
  out.converged = std::abs(last - prev) <= 0.05 * std::max(std::abs(last), 1e-12);
  out.epsilon = -out.minima.back() / (2.0 * sphere_measure(d - 1));
  return out;
}

MultiplierTable multiplier_table(const ReferenceState& st, int d, const std::vector<double>& tau_grid,
                                 const std::vector<double>& xi_grid, int nodes) {
  if (tau_grid.empty() || xi_grid.empty()) throw ParameterError("multiplier_table: empty grids");
  for (double x : xi_grid)
    if (!(x > 0)) throw ParameterError("multiplier_table: xi grid must be positive");
  MultiplierTable tab;
  tab.tau_grid = tau_grid;
  tab.xi_grid = xi_grid;
  tab.state_label = st.label();
  char note[64];
  std::snprintf(note, sizeof note, "spectral;nodes=%d", nodes);
  tab.quadrature_note = note;
  tab.values.resize(tau_grid.size());
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    tab.values[i].resize(xi_grid.size());
    for (std::size_t j = 0; j < xi_grid.size(); ++j)
      tab.values[i][j] = multiplier_spectral(st, d, tau_grid[i], xi_grid[j], nodes);
  }
  // imaginary part must be antisymmetric across tau pairs present in the grid
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    for (std::size_t i2 = 0; i2 < tau_grid.size(); ++i2) {
      if (std::abs(tau_grid[i] + tau_grid[i2]) > 1e-12) continue;
      for (std::size_t j = 0; j < xi_grid.size(); ++j) {
        double s = tab.values[i][j].imag() + tab.values[i2][j].imag();
        if (std::abs(s) > 1e-8 * (1.0 + std::abs(tab.values[i][j].imag())))
          throw ConvergenceError("multiplier_table: imaginary part failed the antisymmetry check");
      }
    }
  }
  return tab;
}

InvertibilityReport invertibility_scan(const ReferenceState& st, const Potential& pot, int d,
                                       const std::vector<double>& tau_grid, const std::vector<double>& xi_grid,
                                       double delta) {
  if (!(delta > 0)) throw ParameterError("invertibility_scan: delta must be positive");
  InvertibilityReport rep;
  rep.delta = delta;
  rep.min_abs = std::numeric_limits<double>::infinity();
  rep.offaxis_max_im = -std::numeric_limits<double>::infinity();
  for (double xi : xi_grid) {
    double w = pot.symbol(xi);
    for (double tau : tau_grid) {
      cplx m = multiplier_spectral(st, d, tau, xi, 32);
      double v = std::abs(1.0 + w * m);
      if (v < rep.min_abs) {
        rep.min_abs = v;
        rep.tau_at_min = tau;
        rep.xi_at_min = xi;
      }
      if (tau > 0) rep.offaxis_max_im = std::max(rep.offaxis_max_im, m.imag());
    }
  }
  rep.static_row_min = std::numeric_limits<double>::infinity();
  for (double xi : xi_grid) {
    cplx m = multiplier_spectral(st, d, 0.0, xi, 32);
    rep.static_row_min = std::min(rep.static_row_min, std::abs(1.0 + pot.symbol(xi) * m));
  }
  double tau1 = 1.0;
  for (double t : tau_grid)
    if (t > 0) {
      tau1 = t;
      break;
    }
  cplx m_small = multiplier_spectral(st, d, tau1, 1e-6, 32);
  rep.small_xi_deviation = std::abs(cplx(1.0, 0.0) + pot.symbol(1e-6) * m_small - cplx(1.0, 0.0));
  OriginDeficit od = origin_deficit(st, d, {0.25, 0.125, 0.0625}, 256);
  rep.origin_epsilon = od.epsilon;
  double w0p = std::max(pot.symbol(0.0), 0.0);
  rep.origin_condition_pass = od.epsilon <= 0.0 || w0p < 2.0 * sphere_measure(d - 1) / od.epsilon;
  rep.pass = rep.min_abs > delta;
  return rep;
}

double alpha0_from_alpha(double alpha, int d) {
  double edge = 0.5 * (d - 1);
  if (alpha < edge) return 2.0 * alpha - edge;
  if (alpha > edge) return alpha;
  return alpha - 0.1;  // borderline: any value strictly below alpha
}

namespace {
AuditItem sup_item(const std::string& name, double value, double bound) {
  AuditItem it;
  it.item = name;
  it.value = value;
  it.bound = bound;
  it.pass = value < bound;
  it.margin = bound - value;
  return it;
}

double radial_lp(const RadialSymbol& s, double p, int d) {
  // (|S^{d-1}| int |s(k)|^p k^{d-1} dk)^{1/p}; symbols decay fast, 40 is far past support
  double v = integrate_panels([&](double k) { return std::pow(std::abs(s(k)), p) * std::pow(k, d - 1); },
                              uniform_breakpoints(0.0, 40.0, 0.25), 16);
  return std::pow(sphere_measure(d - 1) * v, 1.0 / p);
}

double sampled_sup(const std::function<double(double)>& f, double lo, double hi, int n) {
  double m = 0.0;
  for (int i = 0; i <= n; ++i) {
    double k = lo * std::pow(hi / lo, double(i) / n);
    m = std::max(m, f(k));
  }
  return m;
}
}  // namespace

AuditReport hypothesis_audit(const ReferenceState& st, const Potential& pot, const SobolevWeights& w, int d) {
  if (d != 3 && d != 4) throw ParameterError("hypothesis_audit: supported for d in {3,4}");
  AuditReport rep;
  rep.alpha0 = alpha0_from_alpha(w.alpha, d);
  double a0 = rep.alpha0;
  double p = 2.0 * d / (d - 2.0);

  rep.items.push_back(sup_item("w1_lebesgue_2d_over_dm2", radial_lp(pot.w1, p, d), kBigSentinel));
  rep.items.push_back(sup_item("w2_lebesgue_2d_over_dm2", radial_lp(pot.w2, p, d), kBigSentinel));
  rep.items.push_back(sup_item(
      "w1_bracket_weighted_sup",
      sampled_sup([&](double k) { return std::pow(bracket(k), a0 + 0.5) * std::abs(pot.w1(k)); }, 1e-6, 30.0, 4000),
      kBigSentinel));
  rep.items.push_back(
      sup_item("w2_sup", sampled_sup([&](double k) { return std::abs(pot.w2(k)); }, 1e-6, 30.0, 4000), kBigSentinel));

  // |k|^{-1/2} <k>^{-a0} w2 sup: diverges iff w2 does not vanish at the origin
  double low_val;
  {
    auto f = [&](double k) { return std::abs(pot.w2(k)) / (std::sqrt(k) * std::pow(bracket(k), a0)); };
    double v6 = f(1e-6), v8 = f(1e-8);
    low_val = (v8 > 3.0 * v6) ? kBigSentinel : std::max(sampled_sup(f, 1e-6, 30.0, 4000), v8);
  }
  AuditItem lowf = sup_item("w2_low_frequency_sup", low_val, kBigSentinel);
  lowf.pass = low_val < kBigSentinel;
  lowf.margin = lowf.pass ? lowf.margin : -kBigSentinel;
  rep.items.push_back(lowf);

  // occupation integrability: int (r^{d/2-1}|f| + |f'|) dr
  double occ;
  if (st.kind() == StateKind::ZeroTemperature) {
    occ = std::pow(st.mu(), 0.5 * d) / (0.5 * d) + 1.0;  // sharp jump has unit variation
  } else {
    double cut = st.support_cut();
    occ = integrate_panels(
        [&](double r) {
          return std::pow(r, 0.5 * d - 1.0) * st.occupation(r) + std::abs(st.occupation_deriv(r));
        },
        uniform_breakpoints(0.0, cut, cut / 64), 12);
  }
  rep.items.push_back(sup_item("occupation_integral", occ, kBigSentinel));
  rep.items.push_back(sup_item(
      "occupation_weighted_sup",
      sampled_sup([&](double r) { return std::pow(bracket(r), w.beta_decay) * st.occupation(r); }, 1e-6,
                  st.support_cut() + 10.0, 4000),
      kBigSentinel));

  const CorrelationTable& tab = cached_correlation(st, d, 64.0);
  // truncation check: moment on [0, r_max/2] must carry nearly all of the mass
  double half = 0.0;
  {
    int m = int(tab.val.size()) - 1;
    for (int i = 0; i <= m / 2; ++i) {
      double wgt = (i == 0 || i == m / 2) ? 0.5 : 1.0;
      half += wgt * std::abs(tab.val[i]) * (i * tab.dr);
    }
    half *= sphere_measure(d - 1) * tab.dr;
  }
  AuditItem mom = sup_item("correlation_moment", tab.moment_abs, kBigSentinel);
  mom.pass = tab.moment_abs > 0 && (tab.moment_abs - half) < 0.002 * tab.moment_abs;
  rep.items.push_back(mom);

  double w_min = std::min(0.0, -sampled_sup([&](double k) { return -pot.symbol(k); }, 1e-6, 30.0, 4000));
  double w_minus_sup = -w_min;
  rep.items.push_back(sup_item("w_minus_sup", w_minus_sup, 2.0 * sphere_measure(d - 1) / tab.moment_abs));

  OriginDeficit od = origin_deficit(st, d, {0.25, 0.125, 0.0625}, 256);
  double w0p = std::max(pot.symbol(0.0), 0.0);
  AuditItem orig = sup_item("w_plus_origin_vs_deficit", w0p,
                            od.epsilon > 0 ? 2.0 * sphere_measure(d - 1) / od.epsilon : kBigSentinel);
  rep.items.push_back(orig);

  rep.items.push_back(sup_item("alpha_above_(d-2)/2", 0.5 * (d - 2), w.alpha));
  rep.items.push_back(sup_item("beta_decay_above_(d+2)/2", 0.5 * (d + 2), w.beta_decay));
  rep.items.push_back(sup_item("beta0_above_1/4", 0.25, w.beta0));

  rep.all_pass = true;
  for (const auto& it : rep.items) rep.all_pass = rep.all_pass && it.pass;
  return rep;
}

}  // namespace fermisea
