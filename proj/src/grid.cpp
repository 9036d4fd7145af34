#include "fermisea/grid.hpp"

#include <cmath>

#include "fermisea/fft.hpp"
#include "fermisea/quadrature.hpp"

namespace fermisea {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<FftDim> space_dims(const SpatialGrid& g, std::int64_t base_stride) {
  // row-major: axis 0 slowest
  std::vector<FftDim> dims(g.d());
  std::int64_t stride = base_stride;
  for (int a = g.d() - 1; a >= 0; --a) {
    dims[a] = {g.n(), stride};
    stride *= g.n();
  }
  return dims;
}
}  // namespace

SpatialGrid::SpatialGrid(int d, int n, double box) : d_(d), n_(n), box_(box) {
  if (d < 1 || d > 3) throw ParameterError("SpatialGrid: d must be 1, 2 or 3");
  if (!power_of_two(n) || n < 4) throw ParameterError("SpatialGrid: n must be a power of two >= 4");
  if (!(box > 0)) throw ParameterError("SpatialGrid: box must be positive");
  size_ = 1;
  for (int a = 0; a < d; ++a) size_ *= n;
  vol_ = std::pow(box_ / n_, d_);
  ksq_.resize(size_);
  for (int i = 0; i < size_; ++i) {
    auto k = kvec(i);
    ksq_[i] = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
  }
}

int SpatialGrid::axis_bin(int idx, int axis) const {
  int div = 1;
  for (int a = d_ - 1; a > axis; --a) div *= n_;
  return (idx / div) % n_;
}

std::array<double, 3> SpatialGrid::kvec(int idx) const {
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for (int a = 0; a < d_; ++a) k[a] = freq_bin(axis_bin(idx, a));
  return k;
}

bool SpatialGrid::extreme_mode(int idx) const {
  for (int a = 0; a < d_; ++a)
    if (axis_bin(idx, a) == n_ / 2) return true;
  return false;
}

std::vector<std::array<double, 3>> freq_lattice(const SpatialGrid& g) {
  std::vector<std::array<double, 3>> out(g.size());
  for (int i = 0; i < g.size(); ++i) out[i] = g.kvec(i);
  return out;
}

Field transform(const Field& f) {
  Field out = f;
  fft_exec(space_dims(f.grid, 1), {}, -1, out.v.data());
  out.v *= f.grid.volume_element();
  return out;
}

Field inverse_transform(const Field& f) {
  Field out = f;
  fft_exec(space_dims(f.grid, 1), {}, +1, out.v.data());
  out.v *= 1.0 / std::pow(f.grid.box(), f.grid.d());
  return out;
}

void apply_spectral(Eigen::VectorXcd& sv, const SpatialGrid& g, const Symbol& s, bool odd) {
  if (sv.size() != g.size()) throw ParameterError("apply_spectral: size mismatch");
  for (int i = 0; i < g.size(); ++i) {
    if (odd && g.extreme_mode(i)) {
      sv[i] = 0.0;
    } else {
      sv[i] *= s(g.kvec(i), g.ksq(i));
    }
  }
}

Field filter(const Field& f, const Symbol& s, bool odd) {
  Field spec = transform(f);
  apply_spectral(spec.v, f.grid, s, odd);
  return inverse_transform(spec);
}

double lp_norm(const Field& f, double p) {
  if (std::isinf(p)) return f.v.cwiseAbs().maxCoeff();
  if (p < 1) throw ParameterError("lp_norm: p must be >= 1");
  double s = 0.0;
  for (int i = 0; i < f.v.size(); ++i) s += std::pow(std::abs(f.v[i]), p);
  return std::pow(f.grid.volume_element() * s, 1.0 / p);
}

double hs_norm(const Field& f, double sexp) {
  Field spec = transform(f);
  double acc = 0.0;
  for (int i = 0; i < spec.v.size(); ++i) acc += std::pow(1.0 + f.grid.ksq(i), sexp) * std::norm(spec.v[i]);
  return std::sqrt(acc / std::pow(f.grid.box(), f.grid.d()));
}

SpaceTimeGrid::SpaceTimeGrid(const SpatialGrid& s, double T, int m) : space(s), horizon(T), nt(m) {
  if (!(T > 0) || m < 1) throw ParameterError("SpaceTimeGrid: need horizon > 0 and nt >= 1");
}

Field SpaceTimeField::slice(int j) const {
  if (j < 0 || j >= grid.nodes()) throw RangeError("SpaceTimeField::slice: node out of range");
  Field f(grid.space);
  f.v = v.row(j).transpose();
  return f;
}

SpectralField st_transform(const SpaceTimeField& f, int pad_factor) {
  if (pad_factor < 2) throw ParameterError("st_transform: pad_factor must be >= 2");
  const SpaceTimeGrid& g = f.grid;
  int M = pad_factor * g.nodes();
  SpectralField out;
  out.grid = g;
  out.pad_len = M;
  out.v = Eigen::MatrixXcd::Zero(M, g.space.size());
  out.v.topRows(g.nodes()) = f.v;
  // time axis: columns are contiguous (column-major), length M
  fft_1d_batch(M, 1, g.space.size(), M, -1, out.v.data());
  out.v *= g.dt();
  // spatial axes per padded time bin: stride M between spatial neighbours
  fft_exec(space_dims(g.space, M), {{M, 1}}, -1, out.v.data());
  out.v *= g.space.volume_element();
  return out;
}

SpaceTimeField st_inverse(const SpectralField& f) {
  const SpaceTimeGrid& g = f.grid;
  int M = f.pad_len;
  Eigen::MatrixXcd work = f.v;
  fft_exec(space_dims(g.space, M), {{M, 1}}, +1, work.data());
  work *= 1.0 / std::pow(g.space.box(), g.space.d());
  fft_1d_batch(M, 1, g.space.size(), M, +1, work.data());
  work *= 1.0 / (M * g.dt());
  SpaceTimeField out(g);
  out.v = work.topRows(g.nodes());
  return out;
}

double st_l2_norm(const SpaceTimeField& f) {
  auto w = trapezoid_weights(f.grid.nt, f.grid.dt());
  double acc = 0.0;
  for (int j = 0; j < f.grid.nodes(); ++j) acc += w[j] * f.v.row(j).squaredNorm();
  return std::sqrt(acc * f.grid.space.volume_element());
}

double lq_lr_norm(const SpaceTimeField& f, double q, double r) {
  std::vector<double> slice_norm(f.grid.nodes());
  for (int j = 0; j < f.grid.nodes(); ++j) slice_norm[j] = lp_norm(f.slice(j), r);
  if (std::isinf(q)) {
    double m = 0.0;
    for (double s : slice_norm) m = std::max(m, s);
    return m;
  }
  if (q < 1) throw ParameterError("lq_lr_norm: q must be >= 1");
  auto w = trapezoid_weights(f.grid.nt, f.grid.dt());
  double acc = 0.0;
  for (int j = 0; j < f.grid.nodes(); ++j) acc += w[j] * std::pow(slice_norm[j], q);
  return std::pow(acc, 1.0 / q);
}

}  // namespace fermisea
