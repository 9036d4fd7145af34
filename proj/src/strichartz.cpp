#include "fermisea/strichartz.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fermisea/grid.hpp"
#include "fermisea/quadrature.hpp"

namespace fermisea {

namespace {

// int_{R^{d-1}} d eta' / (<(p,eta')>^{2a1} <(q,eta')>^{2a2}); convergent for
// a1+a2 > (d-1)/2
double transverse_integral(int d, double p, double q, double a1, double a2) {
  double ap = 1.0 + p * p, aq = 1.0 + q * q;
  if (d == 1) return std::pow(ap, -a1) * std::pow(aq, -a2);
  // rho = t/(1-t); endpoint behavior (1-t)^{2(a1+a2)-d} is integrable in-regime
  std::vector<double> bp{0.0, 0.25, 0.5};
  auto tail = graded_breakpoints(0.5, 1.0, 1.0, 34);
  bp.insert(bp.end(), tail.begin() + 1, tail.end());
  double v = integrate_panels(
      [&](double t) {
        double om = 1.0 - t;
        double rho = t / om;
        double r2 = rho * rho;
        double jac = 1.0 / (om * om);
        return std::pow(rho, d - 2) * jac / (std::pow(ap + r2, a1) * std::pow(aq + r2, a2));
      },
      bp, 10);
  return sphere_measure(d - 2) * v;
}

double tolerance_for(double predicted) {
  return std::abs(predicted) > 1e-9 ? 0.15 * std::abs(predicted) : 0.05;
}

SlopeReport fit_slope(const std::vector<int>& n_list, const std::vector<double>& values, double predicted) {
  SlopeReport rep;
  rep.predicted = predicted;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    rep.ns.push_back(n_list[i]);
    rep.values.push_back(values[i]);
    lx.push_back(std::log(double(n_list[i])));
    ly.push_back(std::log(std::max(values[i], 1e-300)));
  }
  LineFit fit = fit_line(lx, ly);
  rep.slope = fit.slope;
  rep.r2 = fit.r2;
  rep.low_confidence = fit.r2 < 0.9 && std::abs(fit.slope) > 0.05;
  rep.pass = std::abs(rep.slope - predicted) <= tolerance_for(predicted);
  return rep;
}

StrichartzParams default_regime_params(int d, double alpha_tilde) {
  StrichartzParams p;
  p.d = d;
  p.alpha_tilde = alpha_tilde;
  double a = 0.5 * (d - 1) + 0.6;
  p.alpha1 = p.alpha2 = a;
  p.alpha0 = a;  // max > (d-1)/2 branch
  return p;
}

}  // namespace

bool StrichartzParams::in_regime(double tol) const {
  double edge = 0.5 * (d - 1);
  if (d >= 2 && !(alpha1 + alpha2 > edge + tol)) return false;
  if (alpha0 < -tol || alpha1 < -tol || alpha2 < -tol) return false;
  double mx = std::max(alpha1, alpha2), mn = std::min(alpha1, alpha2);
  if (mx < edge - tol) return alpha0 <= alpha1 + alpha2 - edge + tol;
  if (mx > edge + tol) return alpha0 <= mn + tol;
  return alpha0 < mn - tol;  // borderline branch is strict
}

ReducedIntegral reduced_integral(const StrichartzParams& p, double tau, double xi_abs) {
  if (!(xi_abs > 0)) throw ParameterError("reduced_integral: xi_abs must be positive");
  double mx = std::max(p.alpha1, p.alpha2), mn = std::min(p.alpha1, p.alpha2);
  ReducedIntegral out;
  out.surrogate = std::pow(bracket(xi_abs), 2.0 * p.alpha0) *
                  transverse_integral(p.d, 0.0, 0.5 * xi_abs, mx, mn);
  if (tau < 0) {
    out.exact = 0.0;  // resonance plane misses the constrained domain
    return out;
  }
  double eta1 = (xi_abs * xi_abs - tau) / (2.0 * xi_abs);
  out.exact = 0.5 * std::pow(xi_abs, 2.0 * p.alpha_tilde - 1.0) * std::pow(bracket(xi_abs), 2.0 * p.alpha0) *
              transverse_integral(p.d, eta1, eta1 - xi_abs, mx, mn);
  return out;
}

MonteCarloEstimate reduced_integral_mc(const StrichartzParams& p, double tau, const std::vector<double>& xi,
                                       long samples, double mollifier_width, RngStream& rng) {
  if (samples < 10000) throw ParameterError("reduced_integral_mc: need samples >= 1e4");
  if (int(xi.size()) != p.d) throw ParameterError("reduced_integral_mc: xi must have d components");
  double xi_abs = 0;
  for (double c : xi) xi_abs += c * c;
  xi_abs = std::sqrt(xi_abs);
  if (!(xi_abs > 0)) throw ParameterError("reduced_integral_mc: xi must be nonzero");

  double w = mollifier_width;
  double eta1_star = (xi_abs * xi_abs - tau) / (2.0 * xi_abs);
  double s1 = w / (2.0 * xi_abs);
  double front = std::pow(xi_abs, 2.0 * p.alpha_tilde) * std::pow(bracket(xi_abs), 2.0 * p.alpha0);

  auto run = [&](long n) {
    double sum = 0, sum2 = 0;
    for (long i = 0; i < n; ++i) {
      double e1 = eta1_star + s1 * rng.normal();
      double pdf = std::exp(-0.5 * sq((e1 - eta1_star) / s1)) / (s1 * std::sqrt(kTwoPi));
      double eta_sq = e1 * e1, cross = e1 * xi_abs;
      for (int j = 1; j < p.d; ++j) {
        double c = rng.cauchy();
        pdf *= 1.0 / (kPi * (1.0 + c * c));
        eta_sq += c * c;
      }
      // |xi - eta|^2 - |eta|^2 = |xi|^2 - 2 xi.eta (xi along the first axis)
      double diff = xi_abs * xi_abs - 2.0 * cross;
      double val = 0;
      if (diff >= 0.0) {  // |eta| <= |xi - eta|
        double moll = std::exp(-0.5 * sq((tau - diff) / w)) / (w * std::sqrt(kTwoPi));
        double xme_sq = eta_sq + diff;
        val = front * moll /
              (std::pow(1.0 + eta_sq, p.alpha1) * std::pow(1.0 + xme_sq, p.alpha2) * pdf);
      }
      sum += val;
      sum2 += val * val;
    }
    double mean = sum / n;
    double var = std::max(0.0, sum2 / n - mean * mean);
    return std::pair<double, double>(mean, std::sqrt(var / n));
  };

  MonteCarloEstimate est;
  auto [mean, se] = run(samples);
  est.value = mean;
  est.stderr_est = se;
  est.samples_used = samples;
  if (se > 0.1 * std::max(std::abs(mean), 1e-12)) {
    auto [mean2, se2] = run(4 * samples);
    est.value = mean2;
    est.stderr_est = se2;
    est.samples_used += 4 * samples;
    est.low_confidence = se2 > 0.1 * std::max(std::abs(mean2), 1e-12);
  }
  return est;
}

UniformBoundReport uniform_bound_scan(const StrichartzParams& p, const std::vector<double>& tau_grid,
                                      const std::vector<double>& xi_grid) {
  UniformBoundReport rep;
  rep.sup = -std::numeric_limits<double>::infinity();
  for (double xi : xi_grid) {
    for (double tau : tau_grid) {
      double v = reduced_integral(p, tau, xi).exact;
      if (v > rep.sup) {
        rep.sup = v;
        rep.tau_at_sup = tau;
        rep.xi_at_sup = xi;
      }
    }
  }
  // boundedness profile: the indicator-boundary cross-sections are the only
  // candidates for growth, so track their max along increasing |xi|
  const int count = 25;
  for (int i = 0; i < count; ++i) {
    double xi = std::pow(10.0, 3.0 * i / (count - 1));
    double x2 = xi * xi;
    double v = 0;
    for (double tau : {0.0, x2, -x2, 10.0 * x2, -10.0 * x2})
      v = std::max(v, reduced_integral(p, tau, xi).exact);
    rep.profile_xi.push_back(xi);
    rep.profile_value.push_back(v);
  }
  std::vector<double> lx, ly;
  for (int i = 0; i < count; ++i) {
    if (rep.profile_xi[i] < 100.0) continue;
    lx.push_back(std::log(rep.profile_xi[i]));
    ly.push_back(std::log(std::max(rep.profile_value[i], 1e-300)));
  }
  rep.tail_slope = fit_line(lx, ly).slope;
  rep.growth = rep.tail_slope > 0.05;
  return rep;
}

DualNorm dual_lhs(const FreqProfile& profile, const StrichartzParams& p) {
  if (!(profile.tau_hi > profile.tau_lo)) throw ParameterError("dual_lhs: empty tau interval");
  const int d = p.d;
  double amp2 = sq(profile.amplitude);
  DualNorm out{0.0, 0.0};

  // weight at one (tau, |xi|): |xi|^{2at-1} <xi>^{2a0} K(p_res, q_res)
  auto weight = [&](double tau, double xi_abs) {
    if (xi_abs <= 0) return 0.0;
    double pr = (xi_abs * xi_abs - tau) / (2.0 * xi_abs);
    double qr = -(xi_abs * xi_abs + tau) / (2.0 * xi_abs);
    return std::pow(xi_abs, 2.0 * p.alpha_tilde - 1.0) * std::pow(bracket(xi_abs), 2.0 * p.alpha0) *
           transverse_integral(d, pr, qr, p.alpha1, p.alpha2);
  };

  auto tau_bp = uniform_breakpoints(profile.tau_lo, profile.tau_hi, (profile.tau_hi - profile.tau_lo) / 4);

  if (profile.support == FreqProfile::Support::Ball) {
    double vol_ball = sphere_measure(d - 1) / d * std::pow(profile.radius, d);
    out.v_l2_sq = amp2 * (profile.tau_hi - profile.tau_lo) * vol_ball;
    auto s_bp = graded_breakpoints(0.0, profile.radius, 0.0, 8);
    out.lhs_sq = 0.5 * amp2 *
                 integrate_panels(
                     [&](double tau) {
                       return integrate_panels(
                           [&](double s) {
                             return sphere_measure(d - 1) * std::pow(s, d - 1) * weight(tau, s);
                           },
                           s_bp, 10);
                     },
                     tau_bp, 10);
    return out;
  }

  double box_vol = 2.0 * profile.h1 * std::pow(2.0 * profile.h2, d - 1);
  out.v_l2_sq = amp2 * (profile.tau_hi - profile.tau_lo) * box_vol;
  auto x1_bp = uniform_breakpoints(profile.c1 - profile.h1, profile.c1 + profile.h1, profile.h1);
  auto xp_bp = uniform_breakpoints(-profile.h2, profile.h2, profile.h2);
  // nested box quadrature over (tau, xi1, xi'); the transverse directions of
  // the box are flattened into |xi| inside weight()
  std::function<double(double, double, int)> over_perp = [&](double tau, double acc_sq, int dim) -> double {
    if (dim == d) return weight(tau, std::sqrt(acc_sq));
    return integrate_panels([&](double c) { return over_perp(tau, acc_sq + c * c, dim + 1); }, xp_bp, 8);
  };
  out.lhs_sq = 0.5 * amp2 *
               integrate_panels(
                   [&](double tau) {
                     return integrate_panels(
                         [&](double x1) { return over_perp(tau, x1 * x1, 1); }, x1_bp, 12);
                   },
                   tau_bp, 8);
  return out;
}

SlopeReport probe_lowfreq(double alpha_tilde, const std::vector<int>& n_list, int d) {
  if (n_list.size() < 3) throw ParameterError("probe_lowfreq: need at least 3 family members");
  StrichartzParams p = default_regime_params(d, alpha_tilde);
  std::vector<double> values;
  for (int n : n_list) {
    FreqProfile prof;
    prof.support = FreqProfile::Support::Ball;
    prof.tau_lo = -1.0 / double(n) / n;
    prof.tau_hi = 1.0 / double(n) / n;
    prof.radius = 1.0 / n;
    prof.amplitude = std::pow(double(n), 0.5 * (d + 2));
    values.push_back(dual_lhs(prof, p).lhs_sq);
  }
  return fit_slope(n_list, values, 1.0 - 2.0 * alpha_tilde);
}

SlopeReport probe_highfreq(const StrichartzParams& p, const std::vector<int>& n_list) {
  if (n_list.size() < 3) throw ParameterError("probe_highfreq: need at least 3 family members");
  bool mirrored = p.alpha1 < p.alpha2;  // the stated family wants alpha1 >= alpha2
  std::vector<double> values;
  for (int n : n_list) {
    FreqProfile prof;
    prof.support = FreqProfile::Support::Box;
    double n2 = double(n) * n;
    prof.tau_lo = mirrored ? -n2 - 0.5 : n2 - 0.5;
    prof.tau_hi = mirrored ? -n2 + 0.5 : n2 + 0.5;
    prof.c1 = n;
    prof.h1 = 0.5;
    prof.h2 = 0.5;
    prof.amplitude = 1.0;
    values.push_back(dual_lhs(prof, p).lhs_sq);
  }
  double edge = 0.5 * (p.d - 1);
  double mx = std::max(p.alpha1, p.alpha2), mn = std::min(p.alpha1, p.alpha2);
  double predicted;
  bool log_corr = false;
  if (mx < edge - 1e-9) {
    predicted = 2.0 * p.alpha0 - 2.0 * (p.alpha1 + p.alpha2) + (p.d - 1);
  } else if (mx > edge + 1e-9) {
    predicted = 2.0 * p.alpha0 - 2.0 * mn;
  } else {
    predicted = 2.0 * p.alpha0 - 2.0 * mn;
    log_corr = true;
  }
  SlopeReport rep = fit_slope(n_list, values, predicted);
  rep.log_correction = log_corr;
  return rep;
}

double density_strichartz_ratio(const DensityMatrix& g0, const StrichartzParams& p, double T, int nt) {
  double denom = sobolev_hs_norm(g0, p.alpha1, p.alpha2);
  if (!(denom > 1e-300)) throw ParameterError("density_strichartz_ratio: zero initial operator");
  const SpatialGrid& g = g0.grid;
  SpaceTimeGrid stg{g, T, nt};
  Eigen::MatrixXcd spec = g0.op;
  kernelfft::to_spectral(spec, g);
  auto wt = trapezoid_weights(stg.nt, stg.dt());
  double lhs_sq = 0;
  Eigen::MatrixXcd rotated(g.size(), g.size());
  for (int j = 0; j < stg.nodes(); ++j) {
    double t = stg.t(j);
    for (int col = 0; col < g.size(); ++col) {
      double kc = g.ksq(col);
      for (int row = 0; row < g.size(); ++row)
        rotated(row, col) = spec(row, col) * std::exp(cplx(0.0, -t * (g.ksq(row) - kc)));
    }
    Eigen::VectorXcd rho_hat = density_spectral(rotated, g);
    double slice = 0;
    for (int b = 0; b < g.size(); ++b) {
      double k2 = g.ksq(b);
      slice += std::pow(k2, p.alpha_tilde) * std::pow(1.0 + k2, p.alpha0) * std::norm(rho_hat(b));
    }
    lhs_sq += wt[j] * slice / std::pow(g.box(), g.d());
  }
  return std::sqrt(lhs_sq) / denom;
}

double smoothing_ratio(const SpaceTimeField& V, double alpha1, double alpha2, bool* zero_flag) {
  const SpatialGrid& g = V.grid.space;
  int nodes = V.grid.nodes();
  double vmax = 0, imax = 0;
  for (int j = 0; j < nodes; ++j)
    for (int i = 0; i < g.size(); ++i) {
      vmax = std::max(vmax, std::abs(V.v(j, i)));
      imax = std::max(imax, std::abs(V.v(j, i).imag()));
    }
  if (imax > 1e-12 * std::max(vmax, 1.0)) throw ParameterError("smoothing_ratio: V must be real-valued");
  if (zero_flag) *zero_flag = false;
  if (vmax == 0.0) {
    if (zero_flag) *zero_flag = true;
    return 0.0;
  }
  auto wt = trapezoid_weights(V.grid.nt, V.grid.dt());
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(g.size(), g.size());
  for (int j = 0; j < nodes; ++j) {
    Field slice = V.slice(j);
    DensityMatrix m = multiplication_operator(slice);
    acc += wt[j] * free_conjugate(m, -V.grid.t(j)).op;
  }
  DensityMatrix integrated(g);
  integrated.op = std::move(acc);
  DensityMatrix weighted = bracket_weighted(integrated, -alpha1, -alpha2);
  double num = schatten_norm(weighted, 2.0);
  double q = 2.0 * g.d() / (g.d() + 1.0);
  double denom_sq = 0;
  for (int j = 0; j < nodes; ++j) denom_sq += wt[j] * sq(lp_norm(V.slice(j), q));
  return num / std::sqrt(denom_sq);
}

}  // namespace fermisea
