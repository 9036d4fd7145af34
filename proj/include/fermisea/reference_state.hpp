#pragma once
// Translation-invariant reference states gamma_f = f(-Laplacian) and the radial
// position-space correlation kernel gcheck(r) (inverse transform of f(|k|^2)
// with the (2pi)^{-d} normalization on the inverse).
#include <string>
#include <vector>

#include "fermisea/util.hpp"

namespace fermisea {

enum class StateKind { FermiDirac, ZeroTemperature, Tabulated };

class ReferenceState {
 public:
  static ReferenceState fermi_dirac(double beta, double mu);
  static ReferenceState zero_temperature(double mu);
  static ReferenceState tabulated(std::vector<double> r_nodes, std::vector<double> f_values);

  StateKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double mu() const { return mu_; }

  // occupation f(r) at energy r = |k|^2 >= 0; in [0,1], nonincreasing
  double occupation(double r) const;
  // f'(r); analytic for FermiDirac, finite differences for tabulated states.
  // Distributional at zero temperature: callers must branch, calling throws.
  double occupation_deriv(double r) const;
  // energy beyond which the occupation is numerically negligible
  double support_cut() const;

  std::string label() const;

 private:
  ReferenceState() = default;
  StateKind kind_ = StateKind::FermiDirac;
  double beta_ = 1.0, mu_ = 1.0;
  std::vector<double> tab_r_, tab_f_, tab_df_;
};

// Radial table of gcheck on [0, r_max] plus its weighted radial moments
// int |gcheck(x)| / |x|^{d-2} dx = |S^{d-1}| int_0^inf |gcheck(r)| r^{} dr (d-dependent power).
struct CorrelationTable {
  int d = 3;
  double r_max = 48.0;
  double dr = 0.0;
  std::vector<double> val;    // gcheck at r_i = i*dr
  double moment_abs = 0.0;    // with |gcheck|
  double moment_signed = 0.0; // without absolute value
  double value0 = 0.0;        // gcheck(0)

  // Catmull-Rom interpolation; querying beyond r_max throws RangeError
  double operator()(double r) const;
};

CorrelationTable correlation_table(const ReferenceState& st, int d, double r_max, int nodes = 4096);
// shared cache keyed by (state label, d, r_max)
const CorrelationTable& cached_correlation(const ReferenceState& st, int d, double r_max);

}  // namespace fermisea
