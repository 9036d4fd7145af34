#pragma once
// Dense one-body operators on a periodic grid.
//
// Storage convention: `op` holds volume_element * kernel, i.e. the matrix of
// the operator on sample vectors with the L2(grid) inner product. With this
// choice operator products are plain matrix products, trace(op) equals
// volume_element * sum of kernel diagonal, and singular values of `op`
// approximate the continuum singular values directly.
#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "fermisea/grid.hpp"
#include "fermisea/reference_state.hpp"
#include "fermisea/rng.hpp"

namespace fermisea {

struct DensityMatrix {
  SpatialGrid grid;
  Eigen::MatrixXcd op;

  DensityMatrix() = default;
  explicit DensityMatrix(const SpatialGrid& g) : grid(g), op(Eigen::MatrixXcd::Zero(g.size(), g.size())) {}

  cplx kernel(int x, int y) const { return op(x, y) / grid.volume_element(); }
};

// spectral (Fourier-basis) representation: unitary conjugation of `op`
namespace kernelfft {
// raw unnormalized DFT over the row index (sign -1 forward) / column index
void left_fft(Eigen::MatrixXcd& m, const SpatialGrid& g, int sign);
void right_fft(Eigen::MatrixXcd& m, const SpatialGrid& g, int sign);
// op -> U op U^* (U = unitary DFT) and back
void to_spectral(Eigen::MatrixXcd& m, const SpatialGrid& g);
void from_spectral(Eigen::MatrixXcd& m, const SpatialGrid& g);
}  // namespace kernelfft

// gamma_f on the torus: Fourier multiplier with symbol f(|k|^2)
DensityMatrix reference_projection(const SpatialGrid& g, const ReferenceState& st);
// multiplication operator by the field values
DensityMatrix multiplication_operator(const Field& V);
// iid complex-Gaussian entries (for ensembles); not Hermitian
DensityMatrix random_operator(const SpatialGrid& g, RngStream& rng);
// Hermitian smooth random perturbation built from `rank` localized wave packets
// with carriers in the middle of the resolved band, Fourier-diagonal (constant
// density) part projected out, scaled so the (alpha,alpha) Sobolev norm equals
// `target_norm`
DensityMatrix wave_packet_perturbation(const SpatialGrid& g, RngStream& rng, int rank, double alpha, double target_norm);

cplx trace(const DensityMatrix& a);
double schatten_norm(const DensityMatrix& a, double p);  // p >= 1 or inf
// S2 norm of <grad>^aL gamma <grad>^aR
double sobolev_hs_norm(const DensityMatrix& a, double aL, double aR);
DensityMatrix bracket_weighted(const DensityMatrix& a, double aL, double aR);
// e^{itL} gamma e^{-itL} (L = Laplacian): spectral mode (k,k') times e^{-it(|k|^2-|k'|^2)}
DensityMatrix free_conjugate(const DensityMatrix& a, double t);
Field density(const DensityMatrix& a);  // kernel diagonal
// anti-diagonal sums of the spectral representation: the transform of the density
Eigen::VectorXcd density_spectral(const Eigen::MatrixXcd& spec, const SpatialGrid& g);

struct OperatorTrajectory {
  SpaceTimeGrid grid;
  std::vector<Eigen::MatrixXcd> slices;  // op convention, one per time node

  OperatorTrajectory() = default;
  explicit OperatorTrajectory(const SpaceTimeGrid& g) : grid(g) {}
  DensityMatrix at(int j) const;
};

OperatorTrajectory free_trajectory(const DensityMatrix& a, const SpaceTimeGrid& g);

// admissible exponent pairs (q,r): 2/q + d/r = d/2, q,r >= 2, (2,inf) excluded at d=2
struct ExponentPair {
  double q, r;
};
std::vector<ExponentPair> default_pairs(int d);
void check_admissible(const ExponentPair& p, int d);

// max over pairs of ||<grad_x>^a <grad_x'>^a gamma||_{L^q_t L^r_x L^2_x'} summed
// over both orderings of the spatial variables
double strichartz_norm(const OperatorTrajectory& traj, double alpha, const std::vector<ExponentPair>& pairs);
// free-evolution Strichartz norm over [0,T] divided by the (alpha,alpha) Sobolev norm of the datum
double kernel_strichartz_ratio(const DensityMatrix& a, double T, int nt, double alpha, const std::vector<ExponentPair>& pairs);

}  // namespace fermisea
