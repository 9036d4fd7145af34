#pragma once
// Interaction potentials given by radial Fourier symbols w = w1 * w2 (pointwise
// product of symbols <=> convolution split of the kernel), plus the weight
// exponents used by the solver norms.
#include <string>
#include <vector>

#include "fermisea/util.hpp"

namespace fermisea {

enum class SymbolShape { Gaussian, VanishingOrigin, TabulatedRadial };

class RadialSymbol {
 public:
  static RadialSymbol gaussian(double amplitude, double sigma);
  // amplitude * min(sqrt|k|, 1) * exp(-sigma k^2): kills the zero mode, keeps decay
  static RadialSymbol vanishing_origin(double amplitude, double sigma);
  static RadialSymbol tabulated(std::vector<double> k_nodes, std::vector<double> values);

  double operator()(double kabs) const;
  SymbolShape shape() const { return shape_; }
  double amplitude() const { return a_; }
  std::string label() const;

 private:
  SymbolShape shape_ = SymbolShape::Gaussian;
  double a_ = 1.0, sigma_ = 1.0;
  std::vector<double> tab_k_, tab_v_;
};

struct Potential {
  RadialSymbol w1;
  RadialSymbol w2;

  double symbol(double kabs) const { return w1(kabs) * w2(kabs); }
  std::string label() const { return "w1=" + w1.label() + ";w2=" + w2.label(); }
};

struct SobolevWeights {
  double alpha = 1.1;       // kernel regularity exponent
  double beta_decay = 3.0;  // momentum decay exponent
  double beta0 = 0.3;       // low-frequency exponent, must exceed 1/4

  double beta_tilde() const { return beta_decay - 2.0; }
  // throws ParameterError when outside the admissible window for dimension d
  void validate(int d) const;
};

}  // namespace fermisea
