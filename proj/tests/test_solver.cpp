#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "fermisea/linear_response.hpp"
#include "fermisea/rng.hpp"
#include "fermisea/solver.hpp"

using namespace fermisea;

namespace {

SpaceTimeField random_real_field(const SpaceTimeGrid& g, RngStream& rng, double amp) {
  SpaceTimeField f(g);
  for (int j = 0; j < g.nodes(); ++j)
    for (int i = 0; i < g.space.size(); ++i) f.v(j, i) = amp * rng.normal();
  return f;
}

double max_abs(const SpaceTimeField& f) { return f.v.cwiseAbs().maxCoeff(); }

double max_diff(const SpaceTimeField& a, const SpaceTimeField& b) { return (a.v - b.v).cwiseAbs().maxCoeff(); }

Potential test_potential() { return Potential{RadialSymbol::gaussian(0.4, 0.6), RadialSymbol::gaussian(0.5, 0.4)}; }

}  // namespace

TEST_CASE("apply_L is linear and annihilates zero") {
  SpaceTimeGrid g(SpatialGrid(2, 4, 10.0), 2.0, 12);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot = test_potential();
  RngStream rng(31, 0);

  SpaceTimeField zero(g);
  CHECK(max_abs(apply_L(zero, st, pot)) == 0.0);

  SpaceTimeField a = random_real_field(g, rng, 1.0);
  SpaceTimeField b = random_real_field(g, rng, 1.0);
  SpaceTimeField combo(g);
  combo.v = 0.7 * a.v - 1.9 * b.v;
  SpaceTimeField lhs = apply_L(combo, st, pot);
  SpaceTimeField la = apply_L(a, st, pot), lb = apply_L(b, st, pot);
  SpaceTimeField rhs(g);
  rhs.v = 0.7 * la.v - 1.9 * lb.v;
  CHECK(max_diff(lhs, rhs) <= 1e-12 * std::max(1.0, max_abs(lhs)));

  // real input, real output
  CHECK(lhs.v.imag().cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("solve_one_plus_L inverts apply_L") {
  SpaceTimeGrid g(SpatialGrid(2, 4, 10.0), 3.0, 20);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot = test_potential();
  RngStream rng(32, 0);

  SpaceTimeField zero(g);
  CHECK(max_abs(solve_one_plus_L(zero, st, pot)) == 0.0);

  SpaceTimeField psi = random_real_field(g, rng, 1.0);
  SpaceTimeField phi = solve_one_plus_L(psi, st, pot);
  SpaceTimeField back(g);
  back.v = phi.v + apply_L(phi, st, pot).v;
  double nref = st_l2_norm(psi);
  SpaceTimeField diff(g);
  diff.v = back.v - psi.v;
  CHECK(st_l2_norm(diff) <= 1e-10 * nref);

  // and the other composition order
  SpaceTimeField fwd(g);
  fwd.v = psi.v + apply_L(psi, st, pot).v;
  SpaceTimeField rt = solve_one_plus_L(fwd, st, pot);
  SpaceTimeField diff2(g);
  diff2.v = rt.v - psi.v;
  CHECK(st_l2_norm(diff2) <= 1e-10 * nref);
}

TEST_CASE("zero interaction passes fields through unchanged") {
  SpaceTimeGrid g(SpatialGrid(1, 8, 12.0), 2.0, 10);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential none{RadialSymbol::gaussian(0.0, 1.0), RadialSymbol::gaussian(0.0, 1.0)};
  RngStream rng(33, 0);
  SpaceTimeField psi = random_real_field(g, rng, 1.0);
  CHECK(max_abs(apply_L(psi, st, none)) == 0.0);
  CHECK(max_diff(solve_one_plus_L(psi, st, none), psi) <= 1e-13);
}

TEST_CASE("single-mode response reproduces the spectral multiplier") {
  // resolved band: n = 64 on box 16 pi puts the zone edge at |k| = 4 where the
  // occupation is ~3e-7, so the discrete kernel matches the continuum one
  SpatialGrid gs(1, 64);
  SpaceTimeGrid g(gs, 16.0, 256);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot = test_potential();

  const int bin = 4;
  const double xi = gs.dk() * bin;  // 0.5
  const double omega = 0.6;
  SpaceTimeField phi(g);
  for (int j = 0; j < g.nodes(); ++j)
    for (int r = 0; r < gs.size(); ++r)
      phi.v(j, r) = std::exp(cplx(0.0, omega * g.t(j) + xi * gs.dx() * r));

  SpaceTimeField out = apply_L(phi, st, pot);
  cplx hat_out = transform(out.slice(g.nt)).v[bin];
  cplx hat_in = transform(phi.slice(g.nt)).v[bin];
  cplx ratio = hat_out / hat_in;

  cplx mf = multiplier_spectral(st, 1, omega, xi, 64);
  cplx target = pot.symbol(xi) * mf / std::sqrt(kTwoPi);
  CHECK(std::abs(ratio - target) <= 0.05 * std::abs(target));
}

TEST_CASE("first-order density pair cancels the linear response exactly") {
  SpaceTimeGrid g(SpatialGrid(3, 4, 10.0), 2.0, 12);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot = test_potential();
  RngStream rng(34, 0);
  SpaceTimeField phi = random_real_field(g, rng, 0.5);

  SpaceTimeField lphi = apply_L(phi, st, pot);
  SpaceTimeField a10 = apply_A(phi, 1, 0, st, pot);
  SpaceTimeField sum(g);
  sum.v = lphi.v + 2.0 * a10.v.real().cast<cplx>();
  double scale = std::max(max_abs(lphi), 1e-30);
  CHECK(max_abs(sum) <= 1e-9 * scale);
}

TEST_CASE("density pair terms scale as the total order and conjugate in pairs") {
  SpaceTimeGrid g(SpatialGrid(2, 4, 10.0), 1.5, 8);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot = test_potential();
  RngStream rng(35, 0);
  SpaceTimeField phi = random_real_field(g, rng, 0.8);
  SpaceTimeField zero(g);

  const double lam = 1.7;
  SpaceTimeField lphi(g);
  lphi.v = lam * phi.v;
  for (auto [m, n] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    CHECK(max_abs(apply_A(zero, m, n, st, pot)) == 0.0);
    SpaceTimeField lo = apply_A(phi, m, n, st, pot);
    SpaceTimeField hi = apply_A(lphi, m, n, st, pot);
    SpaceTimeField diff(g);
    diff.v = hi.v - std::pow(lam, m + n) * lo.v;
    CHECK(max_abs(diff) <= 1e-10 * std::max(1e-30, std::pow(lam, m + n) * max_abs(lo)));
  }

  SpaceTimeField a12 = apply_A(phi, 1, 2, st, pot);
  SpaceTimeField a21 = apply_A(phi, 2, 1, st, pot);
  SpaceTimeField conj_gap(g);
  conj_gap.v = a12.v - a21.v.conjugate();
  CHECK(max_abs(conj_gap) <= 1e-10 * std::max(1e-30, max_abs(a12)));

  // diagonal pair is a density of a hermitian operator: real
  SpaceTimeField a11 = apply_A(phi, 1, 1, st, pot);
  CHECK(a11.v.imag().cwiseAbs().maxCoeff() <= 1e-10 * std::max(1e-30, max_abs(a11)));

  CHECK_THROWS_AS(apply_A(phi, 0, 1, st, pot), ParameterError);
  CHECK_THROWS_AS(apply_A(phi, 9, 1, st, pot), ParameterError);
}

TEST_CASE("Q0 sandwich term: zero data, free limit, routes, Lipschitz scaling") {
  SpatialGrid gs(1, 8, 16.0);
  SpaceTimeGrid g(gs, 2.0, 32);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot = test_potential();
  RngStream rng(36, 0);

  SpaceTimeField phi = random_real_field(g, rng, 0.05);
  DensityMatrix q0 = wave_packet_perturbation(gs, rng, 2, 1.1, 0.01);

  DensityMatrix zero_q(gs);
  CHECK(max_abs(apply_B(phi, zero_q, pot)) == 0.0);

  // phi = 0: the sandwich reduces to the freely conjugated datum
  SpaceTimeField zero_phi(g);
  SpaceTimeField bfree = apply_B(zero_phi, q0, pot);
  for (int j : {0, 8, 32}) {
    DensityMatrix fc = free_conjugate(q0, g.t(j));
    Field rho(gs);
    rho.v = fc.op.diagonal() / gs.volume_element();
    Field hat = transform(rho);
    for (int i = 0; i < gs.size(); ++i) hat.v[i] *= pot.w2(std::sqrt(gs.ksq(i)));
    Field ref = inverse_transform(hat);
    CHECK((bfree.slice(j).v - ref.v).cwiseAbs().maxCoeff() <= 1e-11);
  }

  // series route vs direct propagation route
  SpaceTimeField bs = apply_B(phi, q0, pot, BRoute::Series, 6);
  SpaceTimeField bp = apply_B(phi, q0, pot, BRoute::Splitting, 6);
  SpaceTimeField gap(g);
  gap.v = bs.v - bp.v;
  CHECK(st_l2_norm(gap) <= 2e-2 * st_l2_norm(bs));

  // the term is linear in Q0, so the Lipschitz constant in phi scales with the
  // datum exactly
  SpaceTimeField phi2(g);
  phi2.v = phi.v * 1.01;
  SpaceTimeField d1(g), d2(g);
  d1.v = apply_B(phi2, q0, pot).v - bs.v;
  DensityMatrix q2(gs);
  q2.op = 2.0 * q0.op;
  d2.v = apply_B(phi2, q2, pot).v - apply_B(phi, q2, pot).v;
  CHECK(st_l2_norm(d1) > 0.0);
  SpaceTimeField lin_gap(g);
  lin_gap.v = d2.v - 2.0 * d1.v;
  CHECK(st_l2_norm(lin_gap) <= 1e-11 * st_l2_norm(d1));

  CHECK_THROWS_AS(apply_B(phi, q0, pot, BRoute::Series, 0), ParameterError);
  CHECK_THROWS_AS(apply_B(phi, q0, pot, BRoute::Series, 9), ParameterError);
}

TEST_CASE("contraction map basics: zero fixed point, ball invariance, truncation") {
  SpatialGrid gs(3, 4);
  SpaceTimeGrid g(gs, 2.0, 8);
  SolverConfig cfg;
  cfg.grid = g;
  RngStream rng(37, 0);

  SpaceTimeField zero(g);
  DensityMatrix zero_q(gs);
  CHECK(max_abs(gamma_map(zero, zero_q, cfg)) == 0.0);

  DensityMatrix q0 = wave_packet_perturbation(gs, rng, 2, cfg.weights.alpha, 0.01);
  SpaceTimeField g0 = gamma_map(zero, q0, cfg);
  double r = 2.0 * st_l2_norm(g0);
  CHECK(r > 0.0);
  for (int trial = 0; trial < 3; ++trial) {
    SpaceTimeField phi = random_real_field(g, rng, 1.0);
    phi.v *= r / st_l2_norm(phi);
    CHECK(st_l2_norm(gamma_map(phi, q0, cfg)) <= r);
  }

  // deepening the pair truncation barely moves the output for small fields
  SpaceTimeField phi = random_real_field(g, rng, 1.0);
  phi.v *= 0.1 / st_l2_norm(phi);
  SpaceTimeField out4 = gamma_map(phi, q0, cfg);
  SolverConfig deeper = cfg;
  deeper.M = cfg.M + 2;
  SpaceTimeField out6 = gamma_map(phi, q0, deeper);
  SpaceTimeField diff(g);
  diff.v = out6.v - out4.v;
  CHECK(st_l2_norm(diff) <= 1e-4 * st_l2_norm(out4));
}

TEST_CASE("picard_solve validates its configuration") {
  SpatialGrid gs(3, 4);
  SpaceTimeGrid g(gs, 2.0, 8);
  SolverConfig cfg;
  cfg.grid = g;
  DensityMatrix q0(gs);

  SolverConfig bad = cfg;
  bad.M = 1;
  CHECK_THROWS_AS(picard_solve(q0, bad), ParameterError);
  bad = cfg;
  bad.N_max = 0;
  CHECK_THROWS_AS(picard_solve(q0, bad), ParameterError);

  DensityMatrix off_grid(SpatialGrid(3, 8));
  CHECK_THROWS_AS(picard_solve(off_grid, cfg), ParameterError);

  // a pair interaction that feeds mass through the origin fails the entry
  // audit unless explicitly overridden
  SolverConfig gate = cfg;
  gate.potential = Potential{RadialSymbol::gaussian(0.3, 1.0), RadialSymbol::gaussian(0.3, 1.0)};
  CHECK_THROWS_AS(picard_solve(q0, gate), ParameterError);
  gate.audit_override = true;
  SolutionRecord rec = picard_solve(q0, gate);
  CHECK(rec.converged);
  CHECK_FALSE(rec.audit_pass);
}

TEST_CASE("trivial datum solves to the zero field") {
  SpatialGrid gs(3, 4);
  SpaceTimeGrid g(gs, 2.0, 8);
  SolverConfig cfg;
  cfg.grid = g;
  DensityMatrix q0(gs);

  SolutionRecord rec = picard_solve(q0, cfg);
  CHECK(rec.converged);
  CHECK(rec.iterates.size() == 1);
  CHECK(rec.residual == 0.0);
  CHECK(rec.global_bound == 0.0);
  CHECK(rec.measured_r == 0.0);
  CHECK(st_l2_norm(rec.phi) == 0.0);
  for (double sv : rec.scattering.s) CHECK(sv <= 1e-12);
}

TEST_CASE("small-data solve converges with contraction ratios and tiny residual") {
  SpatialGrid gs(3, 4);
  SpaceTimeGrid g(gs, 4.0, 16);
  SolverConfig cfg;
  cfg.grid = g;
  RngStream rng(38, 0);
  DensityMatrix q0 = wave_packet_perturbation(gs, rng, 3, cfg.weights.alpha, 0.01);

  SolutionRecord rec = picard_solve(q0, cfg);
  CHECK(rec.converged);
  CHECK(rec.iterates.size() <= 15);
  for (const auto& it : rec.iterates)
    if (it.k >= 2) CHECK(it.ratio <= 0.5);
  CHECK(rec.residual < 1e-4);
  CHECK(rec.imag_residual <= 1e-8);
  CHECK_FALSE(rec.smallness_warning);
  CHECK(rec.q0_norm == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(std::isfinite(rec.global_bound));
  CHECK(rec.global_bound > 0.0);

  // linear regime: doubling the datum roughly doubles the solved field
  DensityMatrix q2(gs);
  q2.op = 2.0 * q0.op;
  SolutionRecord rec2 = picard_solve(q2, cfg);
  CHECK(rec2.converged);
  double ratio = st_l2_norm(rec2.phi) / st_l2_norm(rec.phi);
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}
