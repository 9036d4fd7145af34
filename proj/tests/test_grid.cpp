#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "fermisea/grid.hpp"
#include "fermisea/rng.hpp"

using namespace fermisea;

namespace {

Field random_field(const SpatialGrid& g, RngStream& rng) {
  Field f(g);
  for (int i = 0; i < g.size(); ++i) f.v[i] = rng.normal_cplx();
  return f;
}

// direct O(N^2) evaluation of the forward convention
Field direct_transform(const Field& f) {
  const SpatialGrid& g = f.grid;
  Field out(g);
  for (int k = 0; k < g.size(); ++k) {
    cplx acc = 0.0;
    for (int x = 0; x < g.size(); ++x) {
      double ph = 0.0;
      auto kv = g.kvec(k);
      for (int ax = 0; ax < g.d(); ++ax) ph += kv[ax] * g.dx() * g.axis_bin(x, ax);
      acc += f.v[x] * std::exp(cplx(0.0, -ph));
    }
    out.v[k] = g.volume_element() * acc;
  }
  return out;
}

}  // namespace

TEST_CASE("frequency lattice layout") {
  SpatialGrid g(2, 4, 8.0);
  CHECK(g.size() == 16);
  CHECK(g.dx() == doctest::Approx(2.0));
  CHECK(g.dk() == doctest::Approx(kTwoPi / 8.0));
  // FFT bin order per axis: 0, 1, -2, -1 (in units of dk)
  CHECK(g.freq_bin(0) == doctest::Approx(0.0));
  CHECK(g.freq_bin(1) == doctest::Approx(g.dk()));
  CHECK(g.freq_bin(2) == doctest::Approx(-2.0 * g.dk()));
  CHECK(g.freq_bin(3) == doctest::Approx(-g.dk()));
  // row-major with axis 0 slowest
  int idx = 1 * 4 + 3;
  CHECK(g.axis_bin(idx, 0) == 1);
  CHECK(g.axis_bin(idx, 1) == 3);
  auto kv = g.kvec(idx);
  CHECK(kv[0] == doctest::Approx(g.dk()));
  CHECK(kv[1] == doctest::Approx(-g.dk()));
  CHECK(kv[2] == 0.0);
  CHECK(g.ksq(idx) == doctest::Approx(2.0 * g.dk() * g.dk()));
  CHECK(g.extreme_mode(2 * 4 + 0));
  CHECK(!g.extreme_mode(idx));
  CHECK(g.volume_element() == doctest::Approx(4.0));
}

TEST_CASE("transform matches the direct DFT sum") {
  RngStream rng(7, 0);
  for (int d = 1; d <= 2; ++d) {
    SpatialGrid g(d, 4, 5.0);
    Field f = random_field(g, rng);
    Field fast = transform(f);
    Field slow = direct_transform(f);
    CHECK((fast.v - slow.v).cwiseAbs().maxCoeff() < 1e-12 * slow.v.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("inverse transform round trip and Parseval") {
  RngStream rng(11, 0);
  SpatialGrid g(3, 4, 9.0);
  Field f = random_field(g, rng);
  Field back = inverse_transform(transform(f));
  CHECK((back.v - f.v).cwiseAbs().maxCoeff() < 1e-13);

  // box^{-d} sum |fhat|^2 == vol sum |f|^2
  Field fh = transform(f);
  double lhs = fh.v.squaredNorm() / std::pow(g.box(), g.d());
  double rhs = sq(lp_norm(f, 2.0));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(hs_norm(f, 0.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
}

TEST_CASE("plane wave transforms to a single bin") {
  SpatialGrid g(1, 8, 4.0);
  int bin = 3;
  Field f(g);
  for (int x = 0; x < g.size(); ++x) f.v[x] = std::exp(cplx(0.0, g.freq_bin(bin) * g.dx() * x));
  Field fh = transform(f);
  for (int k = 0; k < g.size(); ++k) {
    if (k == bin)
      CHECK(std::abs(fh.v[k] - cplx(std::pow(g.box(), g.d()), 0.0)) < 1e-12 * g.box());
    else
      CHECK(std::abs(fh.v[k]) < 1e-12 * g.box());
  }
}

TEST_CASE("filter applies the spectral symbol") {
  RngStream rng(3, 0);
  SpatialGrid g(2, 4, 7.0);
  Field f = random_field(g, rng);
  Field same = filter(f, [](const std::array<double, 3>&, double) { return cplx(1.0, 0.0); });
  CHECK((same.v - f.v).cwiseAbs().maxCoeff() < 1e-13);
  // Laplacian symbol: -|k|^2 in frequency
  Field lap = filter(f, [](const std::array<double, 3>&, double ksq) { return cplx(-ksq, 0.0); });
  Field lap_hat = transform(lap);
  Field fh = transform(f);
  for (int k = 0; k < g.size(); ++k) CHECK(std::abs(lap_hat.v[k] + g.ksq(k) * fh.v[k]) < 1e-11);
}

TEST_CASE("odd symbols zero the unpaired extreme modes") {
  SpatialGrid g(1, 4, 4.0);
  Field f(g);
  // concentrate on the unpaired bin k = -n/2
  for (int x = 0; x < g.size(); ++x) f.v[x] = std::exp(cplx(0.0, g.freq_bin(2) * g.dx() * x));
  Field odd = filter(f, [](const std::array<double, 3>& kv, double) { return cplx(kv[0], 0.0); }, true);
  CHECK(odd.v.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("lp norms") {
  SpatialGrid g(2, 4, 6.0);
  Field f(g);
  f.v.setConstant(cplx(2.0, 0.0));
  // constant c: ||c||_p = c box^{d/p}
  CHECK(lp_norm(f, 2.0) == doctest::Approx(2.0 * std::pow(6.0, 2.0 / 2.0)));
  CHECK(lp_norm(f, 4.0) == doctest::Approx(2.0 * std::pow(6.0, 2.0 / 4.0)));
  CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) == doctest::Approx(2.0));
}

TEST_CASE("space-time grid bookkeeping") {
  SpatialGrid s(1, 4, 4.0);
  SpaceTimeGrid g(s, 2.0, 8);
  CHECK(g.nodes() == 9);
  CHECK(g.dt() == doctest::Approx(0.25));
  CHECK(g.t(4) == doctest::Approx(1.0));
  SpaceTimeField f(g);
  CHECK(f.v.rows() == 9);
  CHECK(f.v.cols() == 4);
  Eigen::VectorXcd s0 = Eigen::VectorXcd::Constant(4, cplx(1.5, 0.0));
  f.set_slice(3, s0);
  CHECK(f.slice(3).v[2] == cplx(1.5, 0.0));
  CHECK(f.slice(2).v[2] == cplx(0.0, 0.0));
}

TEST_CASE("space-time transform round trip") {
  RngStream rng(5, 0);
  SpatialGrid s(1, 8, 5.0);
  SpaceTimeGrid g(s, 3.0, 16);
  SpaceTimeField f(g);
  for (int j = 0; j < g.nodes(); ++j) {
    Field slice = random_field(s, rng);
    f.set_slice(j, slice.v);
  }
  SpectralField fh = st_transform(f, 2);
  CHECK(fh.pad_len >= 2 * g.nodes());
  SpaceTimeField back = st_inverse(fh);
  CHECK((back.v - f.v).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("space-time norms on a constant field") {
  SpatialGrid s(2, 4, 3.0);
  SpaceTimeGrid g(s, 2.0, 10);
  SpaceTimeField f(g);
  f.v.setConstant(cplx(0.5, 0.0));
  // ||c||_{L2_{t,x}} = c sqrt(T) box^{d/2}; trapezoid is exact on constants
  CHECK(st_l2_norm(f) == doctest::Approx(0.5 * std::sqrt(2.0) * 3.0).epsilon(1e-12));
  // ||c||_{Lq_t Lr_x} = c T^{1/q} box^{d/r}
  CHECK(lq_lr_norm(f, 2.0, 3.0) ==
        doctest::Approx(0.5 * std::sqrt(2.0) * std::pow(9.0, 1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("grid equality and validation") {
  CHECK(SpatialGrid(2, 4, 8.0) == SpatialGrid(2, 4, 8.0));
  CHECK(!(SpatialGrid(2, 4, 8.0) == SpatialGrid(2, 8, 8.0)));
  CHECK_THROWS_AS(SpatialGrid(0, 4), ParameterError);
  CHECK_THROWS_AS(SpatialGrid(1, 3), ParameterError);  // odd n has no paired modes
  CHECK_THROWS_AS(SpaceTimeGrid(SpatialGrid(1, 4), -1.0, 4), ParameterError);
  CHECK_THROWS_AS(SpaceTimeGrid(SpatialGrid(1, 4), 1.0, 0), ParameterError);
}
