#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "fermisea/density_matrix.hpp"
#include "fermisea/quadrature.hpp"
#include "fermisea/reference_state.hpp"
#include "fermisea/rng.hpp"

using namespace fermisea;

namespace {

DensityMatrix hermitian_with_spectrum(const SpatialGrid& g, const Eigen::VectorXd& lam, RngStream& rng) {
  // A = V diag(lam) V^* with V unitary from a QR factorization
  int n = g.size();
  Eigen::MatrixXcd m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = rng.normal_cplx();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  Eigen::MatrixXcd v = qr.householderQ();
  DensityMatrix a(g);
  a.op = v * lam.asDiagonal() * v.adjoint();
  return a;
}

}  // namespace

TEST_CASE("Schatten norms against a known spectrum") {
  SpatialGrid g(1, 8, 4.0);
  RngStream rng(21, 0);
  Eigen::VectorXd lam(8);
  lam << 3.0, -2.0, 1.5, -0.5, 0.25, 0.1, -0.05, 0.0;
  DensityMatrix a = hermitian_with_spectrum(g, lam, rng);
  auto pnorm = [&](double p) {
    double acc = 0.0;
    for (int i = 0; i < lam.size(); ++i) acc += std::pow(std::abs(lam[i]), p);
    return std::pow(acc, 1.0 / p);
  };
  CHECK(schatten_norm(a, 1.0) == doctest::Approx(pnorm(1.0)).epsilon(1e-10));
  CHECK(schatten_norm(a, 2.0) == doctest::Approx(pnorm(2.0)).epsilon(1e-10));
  CHECK(schatten_norm(a, 3.5) == doctest::Approx(pnorm(3.5)).epsilon(1e-10));
  CHECK(schatten_norm(a, 6.0) == doctest::Approx(pnorm(6.0)).epsilon(1e-10));
  CHECK(schatten_norm(a, std::numeric_limits<double>::infinity()) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(schatten_norm(a, 2.0) == doctest::Approx(a.op.norm()).epsilon(1e-13));
  CHECK(trace(a).real() == doctest::Approx(lam.sum()).epsilon(1e-10));
  CHECK_THROWS_AS(schatten_norm(a, 0.5), ParameterError);
}

TEST_CASE("Schatten norms of a non-Hermitian matrix use singular values") {
  SpatialGrid g(1, 4, 4.0);
  DensityMatrix a(g);
  a.op.setZero();
  a.op(0, 1) = cplx(2.0, 0.0);  // nilpotent: eigenvalues 0, singular values {2,0,0,0}
  CHECK(schatten_norm(a, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(schatten_norm(a, std::numeric_limits<double>::infinity()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("reference projection is the occupation multiplier") {
  SpatialGrid g(1, 8, 6.0);
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  DensityMatrix gf = reference_projection(g, st);
  CHECK((gf.op - gf.op.adjoint()).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXcd spec = gf.op;
  kernelfft::to_spectral(spec, g);
  double sum_f = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    CHECK(std::abs(spec(i, i) - cplx(st.occupation(g.ksq(i)), 0.0)) < 1e-13);
    sum_f += st.occupation(g.ksq(i));
  }
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j)
      if (i != j) CHECK(std::abs(spec(i, j)) < 1e-13);

  CHECK(trace(gf).real() == doctest::Approx(sum_f).epsilon(1e-12));
  // translation invariance: uniform density trace/box^d
  Field rho = density(gf);
  for (int i = 0; i < g.size(); ++i)
    CHECK(std::abs(rho.v[i] - cplx(sum_f / g.box(), 0.0)) < 1e-12);
}

TEST_CASE("density transform equals spectral anti-diagonal sums") {
  SpatialGrid g(2, 4, 5.0);
  RngStream rng(9, 0);
  DensityMatrix a = random_operator(g, rng);
  Eigen::MatrixXcd spec = a.op;
  kernelfft::to_spectral(spec, g);
  Eigen::VectorXcd via_spec = density_spectral(spec, g);
  Field rho_hat = transform(density(a));
  CHECK((rho_hat.v - via_spec).cwiseAbs().maxCoeff() < 1e-11 * via_spec.cwiseAbs().maxCoeff());
}

TEST_CASE("free conjugation is unitary and composes") {
  SpatialGrid g(1, 8, 7.0);
  RngStream rng(13, 0);
  DensityMatrix a = random_operator(g, rng);
  DensityMatrix b = free_conjugate(a, 0.37);
  CHECK(schatten_norm(b, 2.0) == doctest::Approx(schatten_norm(a, 2.0)).epsilon(1e-12));
  DensityMatrix c = free_conjugate(free_conjugate(a, 0.2), 0.17);
  CHECK((c.op - b.op).cwiseAbs().maxCoeff() < 1e-11);
  DensityMatrix id0 = free_conjugate(a, 0.0);
  CHECK((id0.op - a.op).cwiseAbs().maxCoeff() < 1e-12);

  // plane-wave projector is a free-flow fixed point
  Field u(g);
  for (int x = 0; x < g.size(); ++x) u.v[x] = std::exp(cplx(0.0, g.freq_bin(2) * g.dx() * x));
  DensityMatrix proj(g);
  proj.op = u.v * u.v.adjoint();
  DensityMatrix moved = free_conjugate(proj, 0.8);
  CHECK((moved.op - proj.op).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Sobolev kernel norms via bracket weights") {
  SpatialGrid g(1, 8, 5.0);
  RngStream rng(17, 0);
  DensityMatrix a = random_operator(g, rng);
  CHECK(sobolev_hs_norm(a, 0.0, 0.0) == doctest::Approx(a.op.norm()).epsilon(1e-12));
  double direct = sobolev_hs_norm(a, 1.1, 0.7);
  double via_weight = schatten_norm(bracket_weighted(a, 1.1, 0.7), 2.0);
  CHECK(direct == doctest::Approx(via_weight).epsilon(1e-11));
}

TEST_CASE("wave packet perturbation is normalized and deterministic") {
  SpatialGrid g(2, 8, 10.0);
  RngStream r1(42, 0), r2(42, 0), r3(42, 1);
  DensityMatrix a = wave_packet_perturbation(g, r1, 3, 1.1, 0.01);
  DensityMatrix b = wave_packet_perturbation(g, r2, 3, 1.1, 0.01);
  DensityMatrix c = wave_packet_perturbation(g, r3, 3, 1.1, 0.01);
  CHECK((a.op - a.op.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * a.op.cwiseAbs().maxCoeff());
  CHECK(sobolev_hs_norm(a, 1.1, 1.1) == doctest::Approx(0.01).epsilon(1e-10));
  CHECK((a.op - b.op).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.op - c.op).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("admissible exponent pairs") {
  for (int d = 1; d <= 3; ++d)
    for (const auto& p : default_pairs(d)) CHECK_NOTHROW(check_admissible(p, d));
  CHECK_THROWS_AS(check_admissible({1.5, 6.0}, 3), ParameterError);
  CHECK_THROWS_AS(check_admissible({4.0, 4.0}, 3), ParameterError);  // scaling violated
  CHECK_THROWS_AS(check_admissible({2.0, std::numeric_limits<double>::infinity()}, 2), ParameterError);
  CHECK_THROWS_AS(default_pairs(4), ParameterError);
}

TEST_CASE("free trajectory and Strichartz ratio") {
  SpatialGrid g(2, 4, 8.0);
  RngStream rng(8, 0);
  DensityMatrix a = wave_packet_perturbation(g, rng, 2, 1.1, 0.05);
  SpaceTimeGrid stg(g, 2.0, 8);
  OperatorTrajectory traj = free_trajectory(a, stg);
  CHECK(int(traj.slices.size()) == stg.nodes());
  // free flow preserves the S2 norm at every node
  for (int j = 0; j < stg.nodes(); ++j)
    CHECK(schatten_norm(traj.at(j), 2.0) == doctest::Approx(schatten_norm(a, 2.0)).epsilon(1e-11));
  CHECK_THROWS_AS(traj.at(stg.nodes()), RangeError);

  double r = kernel_strichartz_ratio(a, 2.0, 8, 1.1, default_pairs(2));
  CHECK(std::isfinite(r));
  CHECK(r > 0.0);
  CHECK(r == doctest::Approx(kernel_strichartz_ratio(a, 2.0, 8, 1.1, default_pairs(2))).epsilon(1e-14));
  CHECK_THROWS_AS(strichartz_norm(traj, 1.1, {}), ParameterError);
}

TEST_CASE("occupation families") {
  ReferenceState fd = ReferenceState::fermi_dirac(2.0, 1.0);
  CHECK(fd.occupation(1.0) == doctest::Approx(0.5));
  CHECK(fd.occupation(0.0) == doctest::Approx(1.0 / (std::exp(-2.0) + 1.0)));
  CHECK(fd.occupation_deriv(1.0) == doctest::Approx(-0.5));  // -beta/4 at the chemical potential
  CHECK(fd.occupation(3.0) < fd.occupation(2.0));

  ReferenceState zt = ReferenceState::zero_temperature(1.0);
  CHECK(zt.occupation(0.5) == 1.0);
  CHECK(zt.occupation(1.5) == 0.0);
  CHECK_THROWS_AS(zt.occupation_deriv(0.5), ParameterError);
  CHECK_THROWS_AS(ReferenceState::fermi_dirac(-1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(ReferenceState::zero_temperature(-1.0), ParameterError);

  ReferenceState tab = ReferenceState::tabulated({0.0, 1.0, 2.0, 3.0}, {1.0, 0.75, 0.25, 0.0});
  CHECK(tab.occupation(1.5) == doctest::Approx(0.5));
  CHECK(tab.occupation(10.0) == 0.0);
  CHECK_THROWS_AS(ReferenceState::tabulated({0.0, 1.0, 2.0, 3.0}, {1.0, 2.0, 0.25, 0.0}), ParameterError);
}

TEST_CASE("correlation kernel against the sharp closed form") {
  // the cold limit of the smooth quadrature route must approach the
  // zero-temperature closed form (independent evaluation path)
  ReferenceState cold = ReferenceState::fermi_dirac(500.0, 1.0);
  CorrelationTable tab = correlation_table(cold, 3, 8.0);
  auto sharp = [](double r) {
    if (r < 1e-6) return 1.0 / (6.0 * kPi * kPi);
    return (std::sin(r) - r * std::cos(r)) / (2.0 * kPi * kPi * r * r * r);
  };
  for (double r : {0.0, 0.7, 1.9, 3.3, 6.5}) CHECK(tab(r) == doctest::Approx(sharp(r)).epsilon(5e-3));

  // value at the origin equals (2pi)^{-3} int f(|k|^2) dk
  ReferenceState warm = ReferenceState::fermi_dirac(1.0, 1.0);
  CorrelationTable wtab = correlation_table(warm, 3, 8.0);
  double integral = integrate_panels(
      [&](double k) { return warm.occupation(k * k) * k * k; },
      uniform_breakpoints(0.0, std::sqrt(warm.support_cut()), 0.1), 8);
  CHECK(wtab.value0 == doctest::Approx(integral / (2.0 * kPi * kPi)).epsilon(1e-8));

  CHECK_THROWS_AS(wtab(9.0), RangeError);
  CHECK(wtab(-0.5) == doctest::Approx(wtab(0.5)));
  CHECK(wtab.moment_abs >= std::abs(wtab.moment_signed));

  // cache returns the same object for identical keys
  const CorrelationTable& c1 = cached_correlation(warm, 3, 8.0);
  const CorrelationTable& c2 = cached_correlation(warm, 3, 8.0);
  CHECK(&c1 == &c2);
}
