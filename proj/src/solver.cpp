#include "fermisea/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "fermisea/quadrature.hpp"

namespace fermisea {

namespace {

const cplx kI(0.0, 1.0);

// First-order density response of the discrete reference state.  A driving
// mode at lattice frequency xi produces
//   rho_hat(xi, t) = int_0^t K(t - s, xi) V_hat(xi, s) ds,
//   K(u, xi) = -(i / box^d) sum_q f(|q|^2) (e^{-iu(|q+xi|^2 - |q|^2)}
//                                         - e^{-iu(|q|^2 - |q-xi|^2)}),
// with q +- xi wrapped onto the frequency lattice exactly as the spectral
// pair algebra wraps them.  Continuum limit: -2 sin(u|xi|^2) gcheck(2u|xi|).
// Keeping the finite sum instead of the continuum correlation table makes the
// (1,0)+(0,1) density pairs cancel against apply_L to roundoff, so the solver
// residual measures series truncation only; the Brillouin-zone truncation of
// the occupation never enters the mismatch.
Eigen::MatrixXcd build_response(const ReferenceState& st, const SpaceTimeGrid& g) {
  const SpatialGrid& gs = g.space;
  const int size = gs.size(), nodes = g.nodes(), d = gs.d(), n = gs.n();
  const double dt = g.dt();
  Eigen::MatrixXcd resp = Eigen::MatrixXcd::Zero(nodes, size);
  Eigen::VectorXd f(size);
  for (int q = 0; q < size; ++q) f[q] = st.occupation(gs.ksq(q));

  Eigen::VectorXcd acc(nodes);
  int bx[3] = {0, 0, 0};
  for (int ix = 1; ix < size; ++ix) {  // xi = 0 responds to nothing
    for (int a = 0; a < d; ++a) bx[a] = gs.axis_bin(ix, a);
    acc.setZero();
    for (int iq = 0; iq < size; ++iq) {
      const double fq = f[iq];
      if (fq == 0.0) continue;
      int ip = 0, im = 0;
      for (int a = 0; a < d; ++a) {
        const int b = gs.axis_bin(iq, a);
        ip = ip * n + (b + bx[a]) % n;
        im = im * n + (b - bx[a] + n) % n;
      }
      const double d1 = gs.ksq(ip) - gs.ksq(iq);
      const double d2 = gs.ksq(iq) - gs.ksq(im);
      const cplx s1 = std::exp(cplx(0.0, -dt * d1)), s2 = std::exp(cplx(0.0, -dt * d2));
      cplx c1(1.0, 0.0), c2(1.0, 0.0);
      for (int l = 0; l < nodes; ++l) {
        acc[l] += fq * (c1 - c2);
        c1 *= s1;
        c2 *= s2;
      }
    }
    resp.col(ix) = (-kI / (gs.volume_element() * gs.size())) * acc;
  }
  return resp;
}

const Eigen::MatrixXcd& cached_response(const ReferenceState& st, const SpaceTimeGrid& g) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<Eigen::MatrixXcd>> cache;
  char key[192];
  std::snprintf(key, sizeof key, "%s|%d|%d|%.17g|%.17g|%d", st.label().c_str(), g.space.d(), g.space.n(),
                g.space.box(), g.horizon, g.nt);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Eigen::MatrixXcd>(build_response(st, g))).first;
  return *it->second;
}

}  // namespace

SpaceTimeField apply_L(const SpaceTimeField& phi, const ReferenceState& st, const Potential& pot) {
  const SpaceTimeGrid& g = phi.grid;
  const SpatialGrid& gs = g.space;
  const Eigen::MatrixXcd& resp = cached_response(st, g);
  const double dt = g.dt();

  Eigen::MatrixXcd hat(g.nodes(), gs.size());
  for (int j = 0; j < g.nodes(); ++j) hat.row(j) = transform(phi.slice(j)).v.transpose();

  // mode kernel of +L is -w_hat(|xi|) K(t_l, xi); K(0, xi) = 0 exactly, so the
  // trapezoid never touches the current node
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(g.nodes(), gs.size());
  for (int i = 0; i < gs.size(); ++i) {
    double what = pot.symbol(std::sqrt(gs.ksq(i)));
    if (what == 0.0) continue;
    for (int j = 1; j < g.nodes(); ++j) {
      cplx acc = 0.5 * dt * resp(j, i) * hat(0, i);
      for (int l = 1; l < j; ++l) acc += dt * resp(j - l, i) * hat(l, i);
      out(j, i) = -what * acc;
    }
  }

  SpaceTimeField res(g);
  for (int j = 0; j < g.nodes(); ++j) {
    Field f(gs);
    f.v = out.row(j).transpose();
    res.set_slice(j, inverse_transform(f).v);
  }
  return res;
}

SpaceTimeField solve_one_plus_L(const SpaceTimeField& psi, const ReferenceState& st, const Potential& pot) {
  const SpaceTimeGrid& g = psi.grid;
  const SpatialGrid& gs = g.space;
  const Eigen::MatrixXcd& resp = cached_response(st, g);
  const double dt = g.dt();

  Eigen::MatrixXcd hat(g.nodes(), gs.size());
  for (int j = 0; j < g.nodes(); ++j) hat.row(j) = transform(psi.slice(j)).v.transpose();

  // causal forward substitution; the diagonal is exactly 1 since K(0, xi) = 0
  Eigen::MatrixXcd sol(g.nodes(), gs.size());
  for (int i = 0; i < gs.size(); ++i) {
    double what = pot.symbol(std::sqrt(gs.ksq(i)));
    if (what == 0.0) {
      sol.col(i) = hat.col(i);
      continue;
    }
    sol(0, i) = hat(0, i);
    for (int j = 1; j < g.nodes(); ++j) {
      cplx acc = 0.5 * dt * resp(j, i) * sol(0, i);
      for (int l = 1; l < j; ++l) acc += dt * resp(j - l, i) * sol(l, i);
      sol(j, i) = hat(j, i) + what * acc;
    }
  }

  SpaceTimeField res(g);
  for (int j = 0; j < g.nodes(); ++j) {
    Field f(gs);
    f.v = sol.row(j).transpose();
    res.set_slice(j, inverse_transform(f).v);
  }
  return res;
}

namespace {

// Dressing context for the density terms: everything fixed along one sweep.
struct DressContext {
  const SpatialGrid* g = nullptr;
  Eigen::VectorXd f_sqrt;   // sqrt f(|k|^2) per frequency index
  Eigen::MatrixXcd dft;     // e^{+i k_c . x_r}: raw inverse DFT of the identity
  double density_scale = 0.0;  // 1 / (vol * size)

  explicit DressContext(const SpatialGrid& grid, const ReferenceState& st) : g(&grid) {
    f_sqrt.resize(grid.size());
    for (int i = 0; i < grid.size(); ++i) f_sqrt[i] = std::sqrt(std::max(0.0, st.occupation(grid.ksq(i))));
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(grid.size(), grid.size());
    kernelfft::left_fft(id, grid, +1);
    dft = std::move(id);
    density_scale = 1.0 / (grid.volume_element() * grid.size());
  }

  // T_m = F_L^+ [ (1/size) F_R^+ (W_ls) with rows e^{-it|k|^2}, cols sqrt f ]:
  // left index position, right index raw frequency. Row dot products of two
  // T's give size * vol * density of e^{itL} W^{(m)} gamma_f W^{(n)*} e^{-itL}.
  Eigen::MatrixXcd dress(const Eigen::MatrixXcd& w_ls, const Eigen::VectorXcd& left_phase) const {
    Eigen::MatrixXcd t = w_ls;
    kernelfft::right_fft(t, *g, +1);
    t *= 1.0 / g->size();
    t.array().colwise() *= left_phase.array();
    t.array().rowwise() *= f_sqrt.transpose().array().cast<cplx>();
    kernelfft::left_fft(t, *g, +1);
    return t;
  }

  // order-zero partner: e^{itL} gamma_f^{1/2} in the same layout
  Eigen::MatrixXcd dress_id(const Eigen::VectorXcd& left_phase) const {
    Eigen::MatrixXcd t = dft;
    Eigen::VectorXcd dcol = left_phase.array() * f_sqrt.array().cast<cplx>();
    t.array().rowwise() *= dcol.transpose().array();
    return t;
  }
};

Eigen::VectorXcd pair_density(const Eigen::MatrixXcd& tm, const Eigen::MatrixXcd& tn, double scale) {
  return ((tm.array() * tn.array().conjugate()).rowwise().sum() * scale).matrix();
}

// low-rank factorization of Q0 for the B density
struct BFactors {
  bool any = false;
  bool hermitian = true;
  std::vector<double> values;
  Eigen::MatrixXcd left, right;  // columns; right == left for hermitian Q0
};

BFactors factor_q0(const DensityMatrix& q0) {
  BFactors f;
  double scale = q0.op.size() ? q0.op.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return f;
  f.any = true;
  double herm_defect = (q0.op - q0.op.adjoint()).cwiseAbs().maxCoeff();
  f.hermitian = herm_defect <= 1e-12 * scale;
  if (f.hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (q0.op + q0.op.adjoint()));
    double top = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<int> kept;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()[i]) > 1e-13 * top) kept.push_back(i);
    f.left.resize(q0.op.rows(), kept.size());
    for (std::size_t c = 0; c < kept.size(); ++c) {
      f.values.push_back(es.eigenvalues()[kept[c]]);
      f.left.col(c) = es.eigenvectors().col(kept[c]);
    }
    f.right = f.left;
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(q0.op, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double top = svd.singularValues().maxCoeff();
    int keep = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 1e-13 * top) ++keep;
    f.values.assign(svd.singularValues().data(), svd.singularValues().data() + keep);
    f.left = svd.matrixU().leftCols(keep);
    f.right = svd.matrixV().leftCols(keep);
  }
  return f;
}

// position-space vector e^{itL} W u from the left-spectral W and the phase table
Eigen::VectorXcd propagate_vector(const Eigen::MatrixXcd& w_ls, const Eigen::VectorXcd& u,
                                  const Eigen::VectorXcd& left_phase, const SpatialGrid& g) {
  Eigen::MatrixXcd z = w_ls * u;
  z.array().colwise() *= left_phase.array();
  kernelfft::left_fft(z, g, +1);
  return z.col(0) / double(g.size());
}

Eigen::VectorXcd b_density(const std::vector<Eigen::MatrixXcd>& orders, int wave_order, const BFactors& bf,
                           const Eigen::VectorXcd& left_phase, const SpatialGrid& g) {
  Eigen::VectorXcd rho = Eigen::VectorXcd::Zero(g.size());
  if (!bf.any) return rho;
  Eigen::MatrixXcd wsum = orders[0];
  for (int n = 1; n <= wave_order; ++n) wsum += orders[n];
  const double invvol = 1.0 / g.volume_element();
  for (std::size_t r = 0; r < bf.values.size(); ++r) {
    Eigen::VectorXcd yl = propagate_vector(wsum, bf.left.col(r), left_phase, g);
    if (bf.hermitian) {
      rho.array() += (bf.values[r] * invvol) * yl.array().abs2();
    } else {
      Eigen::VectorXcd yr = propagate_vector(wsum, bf.right.col(r), left_phase, g);
      rho.array() += (bf.values[r] * invvol) * (yl.array() * yr.array().conjugate());
    }
  }
  return rho;
}

Eigen::VectorXcd filter_w2(const Eigen::VectorXcd& rho, const SpatialGrid& g, const RadialSymbol& w2) {
  Field f(g);
  f.v = rho;
  Field hat = transform(f);
  for (int i = 0; i < g.size(); ++i) hat.v[i] *= w2(std::sqrt(g.ksq(i)));
  return inverse_transform(hat).v;
}

struct GammaOutput {
  SpaceTimeField psi;  // A-sum plus B, w2-filtered, before the (1+L) solve
  double imag_residual = 0.0;
};

// assembles w2 * rho of the complete quadratic-and-higher part:
// pairs (m,n), m,n >= 1, m+n <= M, plus one-sided pairs (m,0)+(0,m) for
// 2 <= m <= M (the (1,0)+(0,1) pair is the -L phi term, kept on the left of
// the fixed-point equation), plus the Q0 sandwich B.
GammaOutput assemble_rhs(const SpaceTimeField& phi, const BFactors& bf, const DensityMatrix& q0,
                         const SolverConfig& cfg) {
  const SpaceTimeGrid& stg = phi.grid;
  const SpatialGrid& g = stg.space;
  GammaOutput out{SpaceTimeField(stg), 0.0};
  if (!bf.any && phi.v.cwiseAbs().maxCoeff() == 0.0) return out;

  PotentialTrajectory V = convolved_potential(phi, cfg.potential.w1);
  DressContext ctx(g, cfg.state);
  const int n_sweep = std::max(std::max(cfg.M, cfg.N_max), 1);

  double max_im = 0.0, max_abs = 0.0;
  Eigen::VectorXcd left_phase(g.size());
  wave_series_sweep(V, n_sweep, [&](int j, const std::vector<Eigen::MatrixXcd>& orders) {
    double t = stg.t(j);
    for (int i = 0; i < g.size(); ++i) left_phase[i] = std::exp(cplx(0.0, -t * g.ksq(i)));

    std::vector<Eigen::MatrixXcd> dressed(cfg.M + 1);
    for (int m = 1; m <= cfg.M; ++m) dressed[m] = ctx.dress(orders[m], left_phase);
    dressed[0] = ctx.dress_id(left_phase);

    Eigen::VectorXcd rho = Eigen::VectorXcd::Zero(g.size());
    for (int m = 1; m <= cfg.M; ++m) {
      for (int n = 1; n + m <= cfg.M; ++n) {
        if (n > m) continue;  // (n,m) is the conjugate of (m,n)
        Eigen::VectorXcd d = pair_density(dressed[m], dressed[n], ctx.density_scale);
        if (n == m)
          rho += d;
        else
          rho += (2.0 * d.real()).cast<cplx>();
      }
    }
    for (int m = 2; m <= cfg.M; ++m) {
      Eigen::VectorXcd d = pair_density(dressed[m], dressed[0], ctx.density_scale);
      rho += (2.0 * d.real()).cast<cplx>();
    }
    if (cfg.b_route == BRoute::Series) rho += b_density(orders, cfg.N_max, bf, left_phase, g);

    Eigen::VectorXcd psi_row = filter_w2(rho, g, cfg.potential.w2);
    max_im = std::max(max_im, psi_row.imag().cwiseAbs().maxCoeff());
    max_abs = std::max(max_abs, psi_row.cwiseAbs().maxCoeff());
    out.psi.set_slice(j, psi_row.real().cast<cplx>());
  });

  if (cfg.b_route == BRoute::Splitting && bf.any) {
    evolve_Q_stream(V, q0, [&](int j, const Eigen::MatrixXcd& m) {
      Eigen::VectorXcd rho = m.diagonal() / g.volume_element();
      Eigen::VectorXcd psi_row = filter_w2(rho, g, cfg.potential.w2);
      max_im = std::max(max_im, psi_row.imag().cwiseAbs().maxCoeff());
      max_abs = std::max(max_abs, psi_row.cwiseAbs().maxCoeff());
      out.psi.v.row(j) += psi_row.real().cast<cplx>().transpose();
    });
  }

  out.imag_residual = max_abs > 0.0 ? max_im / max_abs : 0.0;
  return out;
}

}  // namespace

SpaceTimeField apply_A(const SpaceTimeField& phi, int m, int n, const ReferenceState& st, const Potential& pot) {
  if (m < 1 || m > 8 || n < 0 || n > 8) throw ParameterError("apply_A: order out of range");
  const SpaceTimeGrid& stg = phi.grid;
  const SpatialGrid& g = stg.space;
  PotentialTrajectory V = convolved_potential(phi, pot.w1);
  DressContext ctx(g, st);
  SpaceTimeField out(stg);
  Eigen::VectorXcd left_phase(g.size());
  wave_series_sweep(V, std::max(m, n), [&](int j, const std::vector<Eigen::MatrixXcd>& orders) {
    double t = stg.t(j);
    for (int i = 0; i < g.size(); ++i) left_phase[i] = std::exp(cplx(0.0, -t * g.ksq(i)));
    Eigen::MatrixXcd tm = ctx.dress(orders[m], left_phase);
    Eigen::MatrixXcd tn = n == 0 ? ctx.dress_id(left_phase) : ctx.dress(orders[n], left_phase);
    Eigen::VectorXcd rho = pair_density(tm, tn, ctx.density_scale);
    out.set_slice(j, filter_w2(rho, g, pot.w2));
  });
  return out;
}

SpaceTimeField apply_B(const SpaceTimeField& phi, const DensityMatrix& q0, const Potential& pot,
                       BRoute route, int wave_order) {
  if (wave_order < 1 || wave_order > 8) throw ParameterError("apply_B: wave order out of range");
  const SpaceTimeGrid& stg = phi.grid;
  const SpatialGrid& g = stg.space;
  SpaceTimeField out(stg);
  PotentialTrajectory V = convolved_potential(phi, pot.w1);
  if (route == BRoute::Splitting) {
    evolve_Q_stream(V, q0, [&](int j, const Eigen::MatrixXcd& m) {
      Eigen::VectorXcd rho = m.diagonal() / g.volume_element();
      out.set_slice(j, filter_w2(rho, g, pot.w2));
    });
    return out;
  }
  BFactors bf = factor_q0(q0);
  if (!bf.any) return out;
  Eigen::VectorXcd left_phase(g.size());
  wave_series_sweep(V, wave_order, [&](int j, const std::vector<Eigen::MatrixXcd>& orders) {
    double t = stg.t(j);
    for (int i = 0; i < g.size(); ++i) left_phase[i] = std::exp(cplx(0.0, -t * g.ksq(i)));
    Eigen::VectorXcd rho = b_density(orders, wave_order, bf, left_phase, g);
    out.set_slice(j, filter_w2(rho, g, pot.w2));
  });
  return out;
}

SpaceTimeField gamma_map(const SpaceTimeField& phi, const DensityMatrix& q0, const SolverConfig& cfg,
                         double* imag_residual) {
  BFactors bf = factor_q0(q0);
  GammaOutput rhs = assemble_rhs(phi, bf, q0, cfg);
  if (imag_residual) *imag_residual = rhs.imag_residual;
  return solve_one_plus_L(rhs.psi, cfg.state, cfg.potential);
}

SolutionRecord picard_solve(const DensityMatrix& q0, const SolverConfig& cfg) {
  if (!(q0.grid == cfg.grid.space)) throw ParameterError("picard_solve: Q0 grid differs from the configured grid");
  if (cfg.M < 2 || cfg.N_max < 1) throw ParameterError("picard_solve: need M >= 2 and N_max >= 1");
  cfg.weights.validate(cfg.grid.space.d());

  SolutionRecord rec;
  rec.config = cfg;
  rec.q0 = q0;

  AuditReport audit = hypothesis_audit(cfg.state, cfg.potential, cfg.weights, cfg.grid.space.d());
  rec.audit_pass = audit.all_pass;
  if (!audit.all_pass && !cfg.audit_override)
    throw ParameterError("picard_solve: hypothesis audit failed (set audit_override to force)");

  rec.q0_norm = sobolev_hs_norm(q0, cfg.weights.alpha, cfg.weights.alpha);
  rec.smallness_warning = rec.q0_norm > cfg.smallness_threshold;

  BFactors bf = factor_q0(q0);
  SpaceTimeField phi(cfg.grid);
  double delta_prev = 0.0;
  int expanding = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    GammaOutput rhs = assemble_rhs(phi, bf, q0, cfg);
    rec.imag_residual = std::max(rec.imag_residual, rhs.imag_residual);
    if (rec.imag_residual > 1e-8)
      throw ConvergenceError("picard_solve: density imaginary residual above 1e-8");
    SpaceTimeField next = solve_one_plus_L(rhs.psi, cfg.state, cfg.potential);

    SpaceTimeField diff(cfg.grid);
    diff.v = next.v - phi.v;
    double delta = st_l2_norm(diff);
    IterateStat stat;
    stat.k = k;
    stat.delta = delta;
    stat.ratio = (k >= 2 && delta_prev > 0.0) ? delta / delta_prev : 0.0;
    rec.iterates.push_back(stat);
    if (k == 1) rec.measured_r = 2.0 * st_l2_norm(next);

    expanding = stat.ratio > 1.0 ? expanding + 1 : 0;
    if (expanding >= 3)
      throw ConvergenceError(
          "picard_solve: three consecutive expanding steps; the initial data appears too large "
          "for the contraction regime");

    phi = next;
    delta_prev = delta;
    if (delta < cfg.tol) {
      rec.converged = true;
      break;
    }
  }
  rec.phi = phi;

  DensityMatrix gf = reference_projection(cfg.grid.space, cfg.state);
  rec.q_traj = reconstruct_Q(phi, q0, gf, cfg.potential.w1, cfg.N_max, &rec.truncation_warning);

  // residual against the solved phi and the global density bound
  const SpatialGrid& g = cfg.grid.space;
  SpaceTimeField w2rho(cfg.grid), wrho(cfg.grid);
  for (int j = 0; j < cfg.grid.nodes(); ++j) {
    Eigen::VectorXcd rho = rec.q_traj.slices[j].diagonal() / g.volume_element();
    w2rho.set_slice(j, filter_w2(rho, g, cfg.potential.w2));
    Field f(g);
    f.v = rho;
    Field hat = transform(f);
    for (int i = 0; i < g.size(); ++i) hat.v[i] *= cfg.potential.symbol(std::sqrt(g.ksq(i)));
    wrho.set_slice(j, inverse_transform(hat).v);
  }
  SpaceTimeField rdiff(cfg.grid);
  rdiff.v = w2rho.v - phi.v;
  double phi_norm = st_l2_norm(phi);
  rec.residual = phi_norm > 0.0 ? st_l2_norm(rdiff) / phi_norm : st_l2_norm(rdiff);
  rec.global_bound = lq_lr_norm(wrho, 2.0, double(g.d()));
  rec.scattering = scattering_diagnostic(rec.q_traj, 2.0 * g.d());
  return rec;
}

PostsolveReport postsolve_verify(const SolutionRecord& rec, const SolverConfig& cfg) {
  PostsolveReport rep;
  rep.residual = rec.residual;
  rep.global_bound = rec.global_bound;
  rep.scattering = rec.scattering;
  rep.truncation_budget = std::pow(rec.measured_r, cfg.M + 1);

  const int d = cfg.grid.space.d();
  double phi_norm = st_l2_norm(rec.phi);
  if (d >= 3) {
    double q = 2.0 * d / (d - 2.0);
    auto integrand = [&](double k) { return std::pow(std::abs(cfg.potential.w1(k)), q) * std::pow(k, d - 1); };
    double radial = integrate_panels(integrand, uniform_breakpoints(0.0, 40.0, 0.5), 8);
    double w1_norm = std::pow(sphere_measure(d - 1) * radial, 1.0 / q);
    rep.chain_rhs = std::pow(kTwoPi, 0.5 * d - 1.0) * w1_norm * phi_norm * 1.05;
    rep.chain_ok = rec.global_bound <= rep.chain_rhs || rec.global_bound == 0.0;
  }

  if (phi_norm > 0.0) {
    SpaceTimeField bs = apply_B(rec.phi, rec.q0, cfg.potential, BRoute::Series, cfg.N_max);
    SpaceTimeField bp = apply_B(rec.phi, rec.q0, cfg.potential, BRoute::Splitting, cfg.N_max);
    SpaceTimeField bd(cfg.grid);
    bd.v = bs.v - bp.v;
    rep.b_route_gap = st_l2_norm(bd) / phi_norm;
  }

  SolverConfig ext = cfg;
  ext.grid.horizon *= 2.0;
  ext.grid.nt *= 2;
  SolutionRecord rext = picard_solve(rec.q0, ext);
  rep.extended_bound = rext.global_bound;
  rep.plateau_ratio = rec.global_bound > 0.0 ? (rext.global_bound - rec.global_bound) / rec.global_bound : 0.0;

  rep.verdict = std::isfinite(rep.global_bound) && std::abs(rep.plateau_ratio) < 0.05 && rep.scattering.decreasing;
  return rep;
}

}  // namespace fermisea
