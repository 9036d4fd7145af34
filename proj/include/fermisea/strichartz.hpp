#pragma once

// Reduced resonance-shell integrals for the density Strichartz machinery, the
// dual-side norm evaluator, both optimality probe families, and the direct
// operator-trajectory ratio tests.

#include <vector>

#include "fermisea/density_matrix.hpp"
#include "fermisea/rng.hpp"
#include "fermisea/util.hpp"

namespace fermisea {

struct StrichartzParams {
  int d = 3;
  double alpha_tilde = 0.5;  // homogeneous derivative order
  double alpha0 = 1.1;       // output Sobolev order
  double alpha1 = 1.1;       // input orders
  double alpha2 = 1.1;

  // alpha1+alpha2 > (d-1)/2 plus the three-branch rule for alpha0
  bool in_regime(double tol = 1e-9) const;
};

struct ReducedIntegral {
  double exact;      // reduction onto the resonance plane, max/min exponents
  double surrogate;  // the eta1-free domination used in the uniform bound
};

// value at one (tau, |xi|); tau < 0 gives exact = 0 (empty constrained domain)
ReducedIntegral reduced_integral(const StrichartzParams& p, double tau, double xi_abs);

struct MonteCarloEstimate {
  double value = 0;
  double stderr_est = 0;
  long samples_used = 0;
  bool low_confidence = false;
};

// independent oracle: mollified-delta importance sampling of the original
// d-dimensional constrained integral (exponents in their stated positions)
MonteCarloEstimate reduced_integral_mc(const StrichartzParams& p, double tau, const std::vector<double>& xi,
                                       long samples, double mollifier_width, RngStream& rng);

struct UniformBoundReport {
  double sup = 0;
  double tau_at_sup = 0, xi_at_sup = 0;
  std::vector<double> profile_xi;     // large-xi boundedness profile
  std::vector<double> profile_value;  // max over the tau cross-sections
  double tail_slope = 0;              // log-log fit over the last decade
  bool growth = false;                // tail_slope > 0.05
};

UniformBoundReport uniform_bound_scan(const StrichartzParams& p, const std::vector<double>& tau_grid,
                                      const std::vector<double>& xi_grid);

// indicator profile in (tau, xi): a frequency box or ball with flat amplitude
struct FreqProfile {
  enum class Support { Ball, Box };
  double tau_lo = 0, tau_hi = 0;
  double amplitude = 1;
  Support support = Support::Ball;
  double radius = 1;             // Ball: |xi| <= radius
  double c1 = 0, h1 = 0.5, h2 = 0.5;  // Box: [c1-h1, c1+h1] x [-h2, h2]^{d-1}
};

struct DualNorm {
  double lhs_sq;   // squared weighted norm via the resonance change of variables
  double v_l2_sq;  // squared plain space-time L2 norm of the profile
};

DualNorm dual_lhs(const FreqProfile& profile, const StrichartzParams& p);

struct SlopeReport {
  std::vector<double> ns;
  std::vector<double> values;  // lhs_sq per family member
  double slope = 0, r2 = 0, predicted = 0;
  bool pass = false;
  bool low_confidence = false;  // r2 < 0.9
  bool log_correction = false;  // borderline branch carries an extra ln n
};

// concentrating low-frequency family; rate 1 - 2*alpha_tilde
SlopeReport probe_lowfreq(double alpha_tilde, const std::vector<int>& n_list, int d);

// travelling high-frequency family; three-branch rate in the input orders
SlopeReport probe_highfreq(const StrichartzParams& p, const std::vector<int>& n_list);

// weighted density norm of the free trajectory over the grid divided by the
// Sobolev Hilbert-Schmidt norm of the initial operator
double density_strichartz_ratio(const DensityMatrix& g0, const StrichartzParams& p, double T, int nt);

// Schatten bound on the time-integrated conjugated potential; zero V reports 0
double smoothing_ratio(const SpaceTimeField& V, double alpha1, double alpha2, bool* zero_flag = nullptr);

}  // namespace fermisea
