#pragma once
// Periodic grids and discrete Fourier calculus.
//
// Conventions (fixed project-wide):
//   forward:  fhat(k) = vol_element * sum_x f(x) e^{-i k.x}
//   inverse:  f(x)    = box^{-d}    * sum_k fhat(k) e^{+i k.x}
// so inverse(forward) == identity and fhat approximates the continuum transform
// with forward kernel e^{-i x.k}. Frequency lattice {2*pi*m/box : m in
// {-n/2..n/2-1}}^d stored in FFT bin order (0,1,..,n/2-1,-n/2,..,-1 per axis).
// Linear index is row-major with axis 0 slowest. Operations applying an odd
// spectral symbol zero the unpaired m = -n/2 modes.
#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

#include "fermisea/util.hpp"

namespace fermisea {

class SpatialGrid {
 public:
  SpatialGrid(int d, int n, double box = 16.0 * kPi);
  SpatialGrid() : SpatialGrid(3, 8) {}

  int d() const { return d_; }
  int n() const { return n_; }
  double box() const { return box_; }
  int size() const { return size_; }
  double dx() const { return box_ / n_; }
  double dk() const { return kTwoPi / box_; }
  double volume_element() const { return vol_; }

  double freq_bin(int b) const { return dk() * (b < n_ / 2 ? b : b - n_); }
  int axis_bin(int idx, int axis) const;
  // frequency vector of linear index idx (components beyond d are 0)
  std::array<double, 3> kvec(int idx) const;
  double ksq(int idx) const { return ksq_[idx]; }
  const Eigen::VectorXd& ksq_all() const { return ksq_; }
  // true when any axis bin of idx is the unpaired -n/2 mode
  bool extreme_mode(int idx) const;

  bool operator==(const SpatialGrid& o) const { return d_ == o.d_ && n_ == o.n_ && box_ == o.box_; }

 private:
  int d_, n_, size_;
  double box_, vol_;
  Eigen::VectorXd ksq_;
};

std::vector<std::array<double, 3>> freq_lattice(const SpatialGrid& g);

struct Field {
  SpatialGrid grid;
  Eigen::VectorXcd v;

  Field() = default;
  explicit Field(const SpatialGrid& g) : grid(g), v(Eigen::VectorXcd::Zero(g.size())) {}
};

Field transform(const Field& f);          // position -> frequency
Field inverse_transform(const Field& f);  // frequency -> position

// multiply spectral data in place by symbol(kvec, |k|^2); odd symbols zero the
// unpaired extreme modes
using Symbol = std::function<cplx(const std::array<double, 3>&, double)>;
void apply_spectral(Eigen::VectorXcd& spectral_values, const SpatialGrid& g, const Symbol& s, bool odd = false);
// position-space field -> position-space field through a spectral symbol
Field filter(const Field& f, const Symbol& s, bool odd = false);

double lp_norm(const Field& f, double p);  // (vol*sum|f|^p)^(1/p); p = inf -> max
double hs_norm(const Field& f, double s);  // bracket-weighted L2 of the transform

struct SpaceTimeGrid {
  SpatialGrid space;
  double horizon = 8.0;  // time interval [0, horizon]
  int nt = 64;           // intervals; nt+1 nodes

  SpaceTimeGrid() = default;
  SpaceTimeGrid(const SpatialGrid& s, double T, int m);
  double dt() const { return horizon / nt; }
  int nodes() const { return nt + 1; }
  double t(int j) const { return dt() * j; }
};

// rows: time nodes (nt+1), cols: space points
struct SpaceTimeField {
  SpaceTimeGrid grid;
  Eigen::MatrixXcd v;

  SpaceTimeField() = default;
  explicit SpaceTimeField(const SpaceTimeGrid& g) : grid(g), v(Eigen::MatrixXcd::Zero(g.nodes(), g.space.size())) {}
  Field slice(int j) const;
  void set_slice(int j, const Eigen::VectorXcd& s) { v.row(j) = s.transpose(); }
};

// space-time transform: time axis zero-padded by pad_factor before the DFT so
// the discrete time frequencies oversample the window
struct SpectralField {
  SpaceTimeGrid grid;
  int pad_len = 0;
  Eigen::MatrixXcd v;  // rows: padded time bins, cols: spatial frequency bins

  double dtau() const { return kTwoPi / (pad_len * grid.dt()); }
  double tau_bin(int b) const { return dtau() * (b < pad_len / 2 ? b : b - pad_len); }
};

SpectralField st_transform(const SpaceTimeField& f, int pad_factor = 2);
SpaceTimeField st_inverse(const SpectralField& f);

// space-time L2 and mixed L^q_t L^r_x norms (trapezoid in time, volume-weighted in space)
double st_l2_norm(const SpaceTimeField& f);
double lq_lr_norm(const SpaceTimeField& f, double q, double r);

}  // namespace fermisea
