#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>

#include "doctest.h"
#include "fermisea/linear_response.hpp"
#include "fermisea/potential.hpp"
#include "fermisea/reference_state.hpp"

using namespace fermisea;

TEST_CASE("sharp 1d multiplier closed values") {
  // (mu, tau, xi) = (1, 4, 2): log ratio 48/16, only the tau - xi^2 shell open
  cplx v = sharp_multiplier_1d(1.0, 4.0, 2.0);
  CHECK(v.real() == doctest::Approx(std::log(3.0) / (4.0 * std::sqrt(kTwoPi))).epsilon(1e-14));
  CHECK(v.imag() == doctest::Approx(-std::sqrt(kPi) / (4.0 * std::sqrt(2.0))).epsilon(1e-14));

  // tau = 0: indicators cancel, value real and nonnegative
  cplx s = sharp_multiplier_1d(1.0, 0.0, 3.0);
  CHECK(s.imag() == 0.0);
  CHECK(s.real() == doctest::Approx(std::log(25.0) / (6.0 * std::sqrt(kTwoPi))).epsilon(1e-13));

  CHECK(std::abs(sharp_multiplier_1d(0.0, 1.0, 1.0)) == 0.0);
  CHECK_THROWS_AS(sharp_multiplier_1d(1.0, 1.0, 0.0), ParameterError);
  // (tau, xi) on a singular parabola: B + tau = 0 at mu=1, xi=1, tau=1
  CHECK_THROWS_AS(sharp_multiplier_1d(1.0, 1.0, 1.0), SingularityError);
}

TEST_CASE("imaginary part: antisymmetry, sign, closed-form cross-check") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  for (double tau : {0.5, 1.5, 4.0}) {
    for (double xi : {0.5, 1.0, 2.5}) {
      cplx plus = multiplier_spectral(st, 3, tau, xi, 48);
      cplx minus = multiplier_spectral(st, 3, -tau, xi, 48);
      CHECK(std::abs(plus.imag() + minus.imag()) < 1e-8 * (1.0 + std::abs(plus.imag())));
      CHECK(plus.imag() < 0.0);
      // independent energy-shell formula for the imaginary part
      double shell = multiplier_imag(st, 3, tau, xi, 48);
      CHECK(plus.imag() == doctest::Approx(shell).epsilon(2e-5));
    }
  }
}

TEST_CASE("multiplier vanishes with the spatial frequency") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  CHECK(std::abs(multiplier_spectral(st, 3, 1.0, 1e-6, 32)) < 1e-3);
  CHECK(std::abs(multiplier_timedomain(st, 3, 1.0, 0.0, 10.0)) == 0.0);
}

TEST_CASE("the two routes agree (smooth state, d = 3)") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  for (double tau : {-3.0, 0.7, 2.0}) {
    for (double xi : {0.7, 1.8}) {
      cplx sp = multiplier_spectral(st, 3, tau, xi, 64);
      double t_cut = std::clamp(9.5 / xi, 2.0, 50.0);
      cplx td = multiplier_timedomain(st, 3, tau, xi, t_cut);
      CHECK(std::abs(sp - td) < 1e-3 * std::max(std::abs(sp), 1e-2));
    }
  }
}

TEST_CASE("the two routes agree (sharp state)") {
  ReferenceState zt = ReferenceState::zero_temperature(1.0);
  // d = 1: spectral route is the closed form; time-domain tail decays like 1/t
  cplx closed = multiplier_spectral(zt, 1, 0.0, 3.0, 32);
  CHECK(closed == sharp_multiplier_1d(1.0, 0.0, 3.0));
  cplx td1 = multiplier_timedomain(zt, 1, 0.0, 3.0, 50.0);
  CHECK(std::abs(td1 - closed) < 5e-3 * std::abs(closed));

  // d = 3: radial reduction vs the correlation-kernel oscillatory integral
  cplx sp3 = sharp_multiplier(3, 1.0, 0.5, 1.0, 64);
  cplx td3 = multiplier_timedomain(zt, 3, 0.5, 1.0, 40.0);
  CHECK(std::abs(sp3 - td3) < 2e-3 * std::abs(sp3));
}

TEST_CASE("dimension and argument validation") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  CHECK_THROWS_AS(sharp_multiplier(5, 1.0, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(multiplier_spectral(st, 0, 1.0, 1.0), ParameterError);
  CHECK_THROWS_AS(multiplier_spectral(st, 3, 1.0, -1.0), ParameterError);
  CHECK_THROWS_AS(multiplier_timedomain(st, 3, 1.0, 1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(multiplier_imag(st, 3, -1.0, 1.0), ParameterError);
}

TEST_CASE("multiplier table checks its own antisymmetry") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  MultiplierTable tab = multiplier_table(st, 3, {-2.0, -1.0, 0.0, 1.0, 2.0}, {0.5, 1.0}, 32);
  CHECK(tab.values.size() == 5);
  CHECK(tab.values[0].size() == 2);
  CHECK(tab.state_label == st.label());
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(std::abs(tab.values[1][j].imag() + tab.values[3][j].imag()) < 1e-8);
  CHECK_THROWS_AS(multiplier_table(st, 3, {}, {1.0}), ParameterError);
  CHECK_THROWS_AS(multiplier_table(st, 3, {1.0}, {0.0}), ParameterError);
}

TEST_CASE("origin deficit is monotone under shrinking balls") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  OriginDeficit od = origin_deficit(st, 3, {0.5, 0.25, 0.125, 0.0625}, 128);
  REQUIRE(od.minima.size() == 4);
  for (std::size_t k = 0; k + 1 < od.minima.size(); ++k) CHECK(od.minima[k] <= od.minima[k + 1] + 1e-15);
  CHECK(std::isfinite(od.epsilon));
  CHECK(od.epsilon == doctest::Approx(-od.minima.back() / (2.0 * sphere_measure(2))));
  CHECK_THROWS_AS(origin_deficit(st, 3, {0.1, 0.2}, 64), ParameterError);
}

TEST_CASE("invertibility margin scan") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  Potential pot{RadialSymbol::gaussian(0.3, 1.0), RadialSymbol::vanishing_origin(0.3, 1.0)};
  std::vector<double> taus = {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0};
  std::vector<double> xis = {0.3, 0.7, 1.2, 2.0, 3.5};
  InvertibilityReport rep = invertibility_scan(st, pot, 3, taus, xis, 0.1);
  CHECK(std::isfinite(rep.min_abs));
  CHECK(rep.min_abs > 0.0);
  CHECK(rep.pass == (rep.min_abs > rep.delta));
  CHECK(rep.offaxis_max_im < 0.0);
  CHECK(rep.small_xi_deviation < 1e-3);
  CHECK_THROWS_AS(invertibility_scan(st, pot, 3, taus, xis, 0.0), ParameterError);
}

TEST_CASE("hypothesis audit passes the shipped potential and names failures") {
  ReferenceState st = ReferenceState::fermi_dirac(1.0, 1.0);
  SobolevWeights w;
  Potential good{RadialSymbol::gaussian(0.3, 1.0), RadialSymbol::vanishing_origin(0.3, 1.0)};
  AuditReport ok = hypothesis_audit(st, good, w, 3);
  CHECK(ok.all_pass);
  CHECK(ok.alpha0 == doctest::Approx(1.1));

  Potential bad{RadialSymbol::gaussian(0.3, 1.0), RadialSymbol::gaussian(0.3, 1.0)};
  AuditReport fail = hypothesis_audit(st, bad, w, 3);
  CHECK(!fail.all_pass);
  bool named = false;
  for (const auto& it : fail.items)
    if (it.item == "w2_low_frequency_sup" && !it.pass) named = true;
  CHECK(named);

  CHECK_THROWS_AS(hypothesis_audit(st, good, w, 2), ParameterError);
}

TEST_CASE("regularity exponent branch rule") {
  // below the edge: 2a - (d-1)/2; above: a; at the edge: strictly below a
  CHECK(alpha0_from_alpha(0.6, 3) == doctest::Approx(0.2));
  CHECK(alpha0_from_alpha(1.1, 3) == doctest::Approx(1.1));
  CHECK(alpha0_from_alpha(1.0, 3) == doctest::Approx(0.9));
}
