#pragma once
// The linearized Hartree response multiplier and its diagnostics.
//
// Two independent routes compute the same multiplier m_f(tau, xi):
//  * spectral: the sharp-surface building block in 1d, its radial lift to d
//    dimensions, and an energy integral against -f'(s);
//  * time-domain: the oscillatory integral of the causal memory kernel
//    2 sqrt(2pi) sin(t|xi|^2) gcheck(2t|xi|) against e^{-i tau t} (unnormalized
//    transform in t; this normalization is pinned by the cross-route test).
#include <optional>
#include <string>
#include <vector>

#include "fermisea/potential.hpp"
#include "fermisea/reference_state.hpp"
#include "fermisea/util.hpp"

namespace fermisea {

// sharp-surface multiplier in one dimension at energy level mu
cplx sharp_multiplier_1d(double mu, double tau, double xi_abs);
// its radial lift to dimension d (quadrature over the transverse sphere)
cplx sharp_multiplier(int d, double mu, double tau, double xi_abs, int nodes = 64);

// the two routes for a general reference state
cplx multiplier_spectral(const ReferenceState& st, int d, double tau, double xi_abs, int nodes = 64);
cplx multiplier_timedomain(const ReferenceState& st, int d, double tau, double xi_abs, double t_cut, int t_nodes = 0);
// closed-form imaginary part for tau > 0, xi_abs > 0 (energy-shell integral of f')
double multiplier_imag(const ReferenceState& st, int d, double tau, double xi_abs, int nodes = 64);

// shrinking-ball estimate of -liminf Re m_f / (2|S^{d-1}|) near the origin.
// Minima are taken over nested annulus samples, so they are monotone in the
// radius by construction; `converged` is false when the tail still moves.
struct OriginDeficit {
  double epsilon = 0.0;
  std::vector<double> radii;
  std::vector<double> minima;  // per-radius minimum of Re m_f over the punctured ball
  bool converged = true;
};
OriginDeficit origin_deficit(const ReferenceState& st, int d, std::vector<double> radii = {}, int samples_per_annulus = 512);

struct MultiplierTable {
  std::vector<double> tau_grid;
  std::vector<double> xi_grid;
  std::vector<std::vector<cplx>> values;  // [tau][xi]
  std::string state_label;
  std::string quadrature_note;
};
MultiplierTable multiplier_table(const ReferenceState& st, int d, const std::vector<double>& tau_grid,
                                 const std::vector<double>& xi_grid, int nodes = 64);

// pointwise invertibility margin of 1 + w_hat(xi) m_f(tau, xi)
struct InvertibilityReport {
  double min_abs = 0.0;
  double tau_at_min = 0.0, xi_at_min = 0.0;
  bool pass = false;
  double delta = 0.0;
  // named diagnostics: static row, small-xi column, off-axis sign, near-origin window
  double static_row_min = 0.0;
  double small_xi_deviation = 0.0;
  double offaxis_max_im = 0.0;   // max over sampled tau > 0 of Im m_f (should be < 0)
  double origin_epsilon = 0.0;
  bool origin_condition_pass = true;
};
InvertibilityReport invertibility_scan(const ReferenceState& st, const Potential& pot, int d,
                                       const std::vector<double>& tau_grid, const std::vector<double>& xi_grid,
                                       double delta);

struct AuditItem {
  std::string item;
  double value = 0.0;
  double bound = 0.0;  // inf encoded by callers as needed
  bool pass = false;
  double margin = 0.0;  // bound - value (or headroom ratio for sup bounds)
};
struct AuditReport {
  std::vector<AuditItem> items;
  double alpha0 = 0.0;
  bool all_pass = false;
};
// checks every standing hypothesis: symbol integrability/sup norms, occupation
// integrability, correlation moment, the two smallness inequalities, weight windows
AuditReport hypothesis_audit(const ReferenceState& st, const Potential& pot, const SobolevWeights& w, int d);

// alpha0 from the kernel regularity alpha (three-branch rule; at the borderline
// alpha == (d-1)/2 any alpha0 < alpha works and alpha - 0.1 is returned)
double alpha0_from_alpha(double alpha, int d);

}  // namespace fermisea
