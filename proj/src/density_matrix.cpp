#include "fermisea/density_matrix.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "fermisea/fft.hpp"
#include "fermisea/quadrature.hpp"

namespace fermisea {

namespace kernelfft {
namespace {
std::vector<FftDim> axis_dims(const SpatialGrid& g, std::int64_t base) {
  std::vector<FftDim> dims(g.d());
  std::int64_t stride = base;
  for (int a = g.d() - 1; a >= 0; --a) {
    dims[a] = {g.n(), stride};
    stride *= g.n();
  }
  return dims;
}
}  // namespace

void left_fft(Eigen::MatrixXcd& m, const SpatialGrid& g, int sign) {
  // column-major: row index contiguous within each column
  fft_exec(axis_dims(g, 1), {{m.cols(), m.rows()}}, sign, m.data());
}

void right_fft(Eigen::MatrixXcd& m, const SpatialGrid& g, int sign) {
  fft_exec(axis_dims(g, m.rows()), {{m.rows(), 1}}, sign, m.data());
}

void to_spectral(Eigen::MatrixXcd& m, const SpatialGrid& g) {
  left_fft(m, g, -1);
  right_fft(m, g, +1);
  m *= 1.0 / g.size();
}

void from_spectral(Eigen::MatrixXcd& m, const SpatialGrid& g) {
  left_fft(m, g, +1);
  right_fft(m, g, -1);
  m *= 1.0 / g.size();
}
}  // namespace kernelfft

DensityMatrix reference_projection(const SpatialGrid& g, const ReferenceState& st) {
  DensityMatrix a(g);
  for (int i = 0; i < g.size(); ++i) a.op(i, i) = st.occupation(g.ksq(i));
  kernelfft::from_spectral(a.op, g);
  return a;
}

DensityMatrix multiplication_operator(const Field& V) {
  DensityMatrix a(V.grid);
  for (int i = 0; i < V.grid.size(); ++i) a.op(i, i) = V.v[i];
  return a;
}

DensityMatrix random_operator(const SpatialGrid& g, RngStream& rng) {
  DensityMatrix a(g);
  for (int j = 0; j < g.size(); ++j)
    for (int i = 0; i < g.size(); ++i) a.op(i, j) = rng.normal_cplx();
  return a;
}

DensityMatrix wave_packet_perturbation(const SpatialGrid& g, RngStream& rng, int rank, double alpha, double target_norm) {
  // sum_j c_j |u_j><u_j| with u_j = Gaussian envelope x plane carrier; Hermitian,
  // spatially localized so the free flow disperses it
  DensityMatrix a(g);
  double width = g.box() / 8.0;
  // carrier magnitude confined to the middle of the resolved band, in dk units:
  // slower carriers barely move within the horizon, faster ones sit where the
  // occupation is flat and couple only weakly to the medium
  double band_lo = g.n() / 4.0, band_hi = g.n() / 2.0;
  for (int j = 0; j < rank; ++j) {
    Eigen::VectorXcd u(g.size());
    std::array<double, 3> x0{}, k0{};
    for (int ax = 0; ax < g.d(); ++ax) x0[ax] = rng.uniform(0.0, g.box());
    double mag = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      mag = 0.0;
      for (int ax = 0; ax < g.d(); ++ax) {
        double m = double(int(rng.uniform(1.0, g.n() / 2.0)));  // nonzero carrier
        k0[ax] = g.dk() * m;
        mag += m * m;
      }
      mag = std::sqrt(mag);
      if (mag >= band_lo && mag <= band_hi) break;
    }
    for (int ax = 0; ax < g.d(); ++ax)
      if (rng.uniform() < 0.5) k0[ax] = -k0[ax];
    for (int i = 0; i < g.size(); ++i) {
      double phase = 0.0, dist2 = 0.0;
      for (int ax = 0; ax < g.d(); ++ax) {
        double x = g.dx() * g.axis_bin(i, ax);
        double dxp = std::remainder(x - x0[ax], g.box());
        dist2 += dxp * dxp;
        phase += k0[ax] * x;
      }
      u[i] = std::exp(-0.5 * dist2 / (width * width)) * std::exp(cplx(0.0, phase));
    }
    double c = rng.uniform(0.5, 1.0);
    a.op.noalias() += c * u * u.adjoint();
  }
  // project out the Fourier-diagonal part: it is stationary under the free
  // flow and carries only a spatially constant density offset, which on the
  // torus would dominate every long-time density norm as a pure finite-volume
  // artifact (the perturbation should be a genuine density fluctuation)
  kernelfft::to_spectral(a.op, g);
  a.op.diagonal().setZero();
  kernelfft::from_spectral(a.op, g);
  double s = sobolev_hs_norm(a, alpha, alpha);
  if (s == 0.0) throw ParameterError("wave_packet_perturbation: degenerate draw");
  a.op *= target_norm / s;
  return a;
}

cplx trace(const DensityMatrix& a) { return a.op.trace(); }

double schatten_norm(const DensityMatrix& a, double p) {
  if (!(p >= 1.0) && !std::isinf(p)) throw ParameterError("schatten_norm: p must be >= 1 or inf");
  if (a.grid.size() > 4096) throw ParameterError("schatten_norm: full decomposition capped at N = 4096");
  if (p == 2.0) return a.op.norm();  // Frobenius fast path
  Eigen::VectorXd sv;
  double scale = a.op.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double herm_defect = (a.op - a.op.adjoint()).cwiseAbs().maxCoeff();
  if (herm_defect <= 1e-12 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a.op + a.op.adjoint()), Eigen::EigenvaluesOnly);
    sv = es.eigenvalues().cwiseAbs();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a.op);
    sv = svd.singularValues();
  }
  if (std::isinf(p)) return sv.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < sv.size(); ++i) acc += std::pow(sv[i], p);
  return std::pow(acc, 1.0 / p);
}

DensityMatrix bracket_weighted(const DensityMatrix& a, double aL, double aR) {
  DensityMatrix out = a;
  kernelfft::to_spectral(out.op, a.grid);
  const SpatialGrid& g = a.grid;
  Eigen::VectorXd wl(g.size()), wr(g.size());
  for (int i = 0; i < g.size(); ++i) {
    wl[i] = std::pow(1.0 + g.ksq(i), 0.5 * aL);
    wr[i] = std::pow(1.0 + g.ksq(i), 0.5 * aR);
  }
  out.op = wl.asDiagonal() * out.op * wr.asDiagonal();
  kernelfft::from_spectral(out.op, g);
  return out;
}

double sobolev_hs_norm(const DensityMatrix& a, double aL, double aR) {
  Eigen::MatrixXcd spec = a.op;
  kernelfft::to_spectral(spec, a.grid);
  const SpatialGrid& g = a.grid;
  double acc = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    double wr = std::pow(1.0 + g.ksq(j), aR);
    for (int i = 0; i < g.size(); ++i) acc += std::pow(1.0 + g.ksq(i), aL) * wr * std::norm(spec(i, j));
  }
  return std::sqrt(acc);
}

DensityMatrix free_conjugate(const DensityMatrix& a, double t) {
  DensityMatrix out = a;
  kernelfft::to_spectral(out.op, a.grid);
  const SpatialGrid& g = a.grid;
  Eigen::VectorXcd ph(g.size());
  for (int i = 0; i < g.size(); ++i) ph[i] = std::exp(cplx(0.0, -t * g.ksq(i)));
  out.op = ph.asDiagonal() * out.op * ph.conjugate().asDiagonal();
  kernelfft::from_spectral(out.op, g);
  return out;
}

Field density(const DensityMatrix& a) {
  Field f(a.grid);
  f.v = a.op.diagonal() / a.grid.volume_element();
  return f;
}

Eigen::VectorXcd density_spectral(const Eigen::MatrixXcd& spec, const SpatialGrid& g) {
  // rho_hat(delta) = sum over spectral anti-diagonals k - k' = delta (wrapped per axis)
  Eigen::VectorXcd rho = Eigen::VectorXcd::Zero(g.size());
  int n = g.n(), d = g.d();
  for (int j = 0; j < g.size(); ++j) {
    for (int i = 0; i < g.size(); ++i) {
      int idx = 0;
      for (int a = 0; a < d; ++a) {
        int db = (g.axis_bin(i, a) - g.axis_bin(j, a) + n) % n;
        idx = idx * n + db;
      }
      rho[idx] += spec(i, j);
    }
  }
  return rho;
}

DensityMatrix OperatorTrajectory::at(int j) const {
  if (j < 0 || j >= int(slices.size())) throw RangeError("OperatorTrajectory::at: node out of range");
  DensityMatrix a(grid.space);
  a.op = slices[j];
  return a;
}

OperatorTrajectory free_trajectory(const DensityMatrix& a, const SpaceTimeGrid& g) {
  if (!(a.grid == g.space)) throw ParameterError("free_trajectory: grid mismatch");
  Eigen::MatrixXcd spec = a.op;
  kernelfft::to_spectral(spec, g.space);
  OperatorTrajectory traj(g);
  traj.slices.reserve(g.nodes());
  for (int j = 0; j < g.nodes(); ++j) {
    double t = g.t(j);
    Eigen::VectorXcd ph(g.space.size());
    for (int i = 0; i < g.space.size(); ++i) ph[i] = std::exp(cplx(0.0, -t * g.space.ksq(i)));
    Eigen::MatrixXcd m = ph.asDiagonal() * spec * ph.conjugate().asDiagonal();
    kernelfft::from_spectral(m, g.space);
    traj.slices.push_back(std::move(m));
  }
  return traj;
}

std::vector<ExponentPair> default_pairs(int d) {
  switch (d) {
    case 1: return {{std::numeric_limits<double>::infinity(), 2.0}, {8.0, 4.0}, {4.0, std::numeric_limits<double>::infinity()}};
    case 2: return {{std::numeric_limits<double>::infinity(), 2.0}, {4.0, 4.0}, {3.0, 6.0}};
    case 3: return {{std::numeric_limits<double>::infinity(), 2.0}, {2.0, 6.0}, {4.0, 3.0}};
    default: throw ParameterError("default_pairs: d must be 1, 2 or 3");
  }
}

void check_admissible(const ExponentPair& p, int d) {
  char buf[160];
  if (!(p.q >= 2.0) || !(p.r >= 2.0)) {
    std::snprintf(buf, sizeof buf, "pair (q=%g, r=%g): exponents must be >= 2", p.q, p.r);
    throw ParameterError(buf);
  }
  if (d == 2 && p.q == 2.0 && std::isinf(p.r)) throw ParameterError("pair (2,inf) is excluded at d = 2");
  double lhs = (std::isinf(p.q) ? 0.0 : 2.0 / p.q) + (std::isinf(p.r) ? 0.0 : double(d) / p.r);
  if (std::abs(lhs - 0.5 * d) > 1e-9) {
    std::snprintf(buf, sizeof buf, "pair (q=%g, r=%g) violates 2/q + d/r = d/2 (got %.12g, want %.12g)", p.q, p.r, lhs,
                  0.5 * d);
    throw ParameterError(buf);
  }
}

namespace {
// || slice ||_{L^r_x L^2_x'} for the stored op matrices: kernel = op/vol
double mixed_slice_norm(const Eigen::MatrixXcd& op, const SpatialGrid& g, double r, bool transpose) {
  double vol = g.volume_element();
  Eigen::VectorXd colsq = transpose ? Eigen::VectorXd(op.cwiseAbs2().colwise().sum())
                                    : Eigen::VectorXd(op.cwiseAbs2().rowwise().sum());
  // L2 over the inner variable: sqrt(vol * sum |kernel|^2) = sqrt(sum|op|^2 / vol)
  Eigen::VectorXd inner = (colsq / vol).cwiseSqrt();
  if (std::isinf(r)) return inner.maxCoeff();
  double acc = 0.0;
  for (int i = 0; i < inner.size(); ++i) acc += std::pow(inner[i], r);
  return std::pow(vol * acc, 1.0 / r);
}
}  // namespace

double strichartz_norm(const OperatorTrajectory& traj, double alpha, const std::vector<ExponentPair>& pairs) {
  if (pairs.empty()) throw ParameterError("strichartz_norm: empty pair list");
  int d = traj.grid.space.d();
  for (const auto& p : pairs) check_admissible(p, d);
  std::vector<Eigen::MatrixXcd> weighted(traj.slices.size());
  for (std::size_t j = 0; j < traj.slices.size(); ++j) weighted[j] = bracket_weighted(traj.at(int(j)), alpha, alpha).op;
  auto w = trapezoid_weights(traj.grid.nt, traj.grid.dt());
  double best = 0.0;
  for (const auto& p : pairs) {
    double a_total = 0.0;
    for (int ord = 0; ord < 2; ++ord) {
      double acc = 0.0, sup = 0.0;
      for (std::size_t j = 0; j < weighted.size(); ++j) {
        double s = mixed_slice_norm(weighted[j], traj.grid.space, p.r, ord == 1);
        if (std::isinf(p.q)) {
          sup = std::max(sup, s);
        } else {
          acc += w[j] * std::pow(s, p.q);
        }
      }
      a_total += std::isinf(p.q) ? sup : std::pow(acc, 1.0 / p.q);
    }
    best = std::max(best, a_total);
  }
  return best;
}

double kernel_strichartz_ratio(const DensityMatrix& a, double T, int nt, double alpha,
                               const std::vector<ExponentPair>& pairs) {
  double denom = sobolev_hs_norm(a, alpha, alpha);
  if (denom == 0.0) throw ParameterError("kernel_strichartz_ratio: zero datum");
  OperatorTrajectory traj = free_trajectory(a, SpaceTimeGrid(a.grid, T, nt));
  return strichartz_norm(traj, alpha, pairs) / denom;
}

}  // namespace fermisea
