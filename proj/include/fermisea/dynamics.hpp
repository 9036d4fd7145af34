#pragma once
// Duhamel wave-operator series for a time-dependent potential, the split-step
// propagation of Q, reconstruction of Q(t) from the series, and the scattering
// (Cauchy) diagnostic.
#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "fermisea/density_matrix.hpp"
#include "fermisea/grid.hpp"
#include "fermisea/potential.hpp"
#include "fermisea/reference_state.hpp"

namespace fermisea {

// Real potential sampled on the space-time grid, rows = time nodes.
struct PotentialTrajectory {
  SpaceTimeGrid grid;
  Eigen::MatrixXd values;

  explicit PotentialTrajectory(const SpaceTimeGrid& g)
      : grid(g), values(Eigen::MatrixXd::Zero(g.nodes(), g.space.size())) {}
  // validates realness to 1e-12 relative
  static PotentialTrajectory from_field(const SpaceTimeField& f);

  Field slice(int j) const;
  // L^2 in time of the L^d spatial norm (trapezoid in t)
  double mixed_norm() const;
};

// V = w1 * phi slice by slice (spatial Fourier multiplication by w1_hat)
PotentialTrajectory convolved_potential(const SpaceTimeField& phi, const RadialSymbol& w1);

// smooth random test potential: localized bumps with oscillating time
// envelopes vanishing at both horizon ends, scaled to the requested mixed norm
PotentialTrajectory random_potential(const SpaceTimeGrid& g, RngStream& rng, int modes, double target_norm);

// e^{-it Laplacian} M_V e^{it Laplacian}
DensityMatrix conjugated_potential(const Field& v_slice, double t);

// Streaming Duhamel recursion. All series orders advance together in one
// forward pass over the time nodes:
//
//   W^{(n)}(t_j) = -i * trapezoid_{0..t_j} C(s) W^{(n-1)}(s) ds,
//   C(s) X = e^{-is Laplacian} V(s) e^{is Laplacian} X,   W^{(0)} = Id.
//
// The visitor receives, at every node j, orders[0..n_max] in the left-spectral
// representation: rows indexed by spatial frequency (forward transform of the
// op-convention matrix over its left index), columns by position sample. This
// is the natural layout for attaching free-propagator phases on the left.
using SweepVisitor = std::function<void(int node, const std::vector<Eigen::MatrixXcd>& orders)>;
void wave_series_sweep(const PotentialTrajectory& V, int n_max, const SweepVisitor& visit);

namespace leftspec {
Eigen::MatrixXcd from_op(Eigen::MatrixXcd m, const SpatialGrid& g);
Eigen::MatrixXcd to_op(Eigen::MatrixXcd m, const SpatialGrid& g);
}  // namespace leftspec

// single series term W^{(n)}(t); t must be a grid node
DensityMatrix wave_series_term(const PotentialTrajectory& V, int n, double t);

struct WaveOperatorResult {
  DensityMatrix w;        // partial sum through order n_max
  double tail_estimate;   // (C ||V||)^{n_max+1} / ((n_max+1)!)^{0.4}
  double c_fit;           // C fitted from the first-order term
  bool truncation_warning;  // tail above 1e-3 of the partial-sum S2 norm
};
WaveOperatorResult wave_operator(const PotentialTrajectory& V, double t, int n_max);

struct WaveSeriesReport {
  std::vector<int> n;
  std::vector<double> norms;   // ||W^{(n)}(T)||_{S^{2d}}
  std::vector<double> bounds;  // (C ||V||)^n / (n!)^{1/2 - eps}
  std::vector<double> ratios;
  double c_fit = 0.0;
  double eps = 0.0;
  double v_norm = 0.0;
  bool pass = false;  // all ratios <= 1.5
};
WaveSeriesReport factorial_decay_report(const PotentialTrajectory& V, int n_max, double eps = 0.1);

// Strang splitting for i dQ/dt = [-Laplacian + V, Q]: half-step free
// conjugation, midpoint potential conjugation, half-step free. Exactly unitary
// per step, so every Schatten norm is conserved along the trajectory.
OperatorTrajectory evolve_Q(const PotentialTrajectory& V, const DensityMatrix& Q0);
OperatorTrajectory evolve_Q(const SpaceTimeField& phi, const DensityMatrix& Q0, const RadialSymbol& w1);
void evolve_Q_stream(const PotentialTrajectory& V, const DensityMatrix& Q0,
                     const std::function<void(int node, const Eigen::MatrixXcd& op)>& visit);

// Q(t) = e^{it L} W(t) (gamma_f + Q0) W(t)^* e^{-it L} - gamma_f with the
// partial series sum W(t) = sum_{n<=n_max} W^{(n)}(t)
OperatorTrajectory reconstruct_Q(const SpaceTimeField& phi, const DensityMatrix& Q0,
                                 const DensityMatrix& gamma_f, const RadialSymbol& w1,
                                 int n_max, bool* truncation_warning = nullptr);

struct ScatteringTable {
  std::vector<double> t1, t2, s;
  bool decreasing = false;  // strictly decreasing Cauchy differences
};
// s(t1,t2) = || e^{-it1 L} Q(t1) e^{it1 L} - e^{-it2 L} Q(t2) e^{it2 L} ||_{S^p}
// over consecutive checkpoints T/8, T/4, T/2, T
ScatteringTable scattering_diagnostic(const OperatorTrajectory& traj, double p);

}  // namespace fermisea
