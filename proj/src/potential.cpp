#include "fermisea/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fermisea {

RadialSymbol RadialSymbol::gaussian(double a, double sigma) {
  if (!(sigma > 0)) throw ParameterError("RadialSymbol: sigma must be positive");
  RadialSymbol s;
  s.shape_ = SymbolShape::Gaussian;
  s.a_ = a;
  s.sigma_ = sigma;
  return s;
}

RadialSymbol RadialSymbol::vanishing_origin(double a, double sigma) {
  RadialSymbol s = gaussian(a, sigma);
  s.shape_ = SymbolShape::VanishingOrigin;
  return s;
}

RadialSymbol RadialSymbol::tabulated(std::vector<double> k, std::vector<double> v) {
  if (k.size() != v.size() || k.size() < 2) throw ParameterError("RadialSymbol: tabulated needs >= 2 nodes");
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    if (!(k[i + 1] > k[i])) throw ParameterError("RadialSymbol: tabulated nodes must increase");
  RadialSymbol s;
  s.shape_ = SymbolShape::TabulatedRadial;
  s.tab_k_ = std::move(k);
  s.tab_v_ = std::move(v);
  return s;
}

double RadialSymbol::operator()(double kabs) const {
  kabs = std::abs(kabs);
  switch (shape_) {
    case SymbolShape::Gaussian:
      return a_ * std::exp(-sigma_ * kabs * kabs);
    case SymbolShape::VanishingOrigin:
      return a_ * std::min(std::sqrt(kabs), 1.0) * std::exp(-sigma_ * kabs * kabs);
    case SymbolShape::TabulatedRadial: {
      if (kabs <= tab_k_.front()) return tab_v_.front();
      if (kabs >= tab_k_.back()) return 0.0;  // compactly supported beyond the table
      auto it = std::upper_bound(tab_k_.begin(), tab_k_.end(), kabs);
      std::size_t i = it - tab_k_.begin() - 1;
      double t = (kabs - tab_k_[i]) / (tab_k_[i + 1] - tab_k_[i]);
      return (1.0 - t) * tab_v_[i] + t * tab_v_[i + 1];
    }
  }
  return 0.0;
}

std::string RadialSymbol::label() const {
  char buf[96];
  switch (shape_) {
    case SymbolShape::Gaussian:
      std::snprintf(buf, sizeof buf, "gaussian(a=%.17g,sigma=%.17g)", a_, sigma_);
      break;
    case SymbolShape::VanishingOrigin:
      std::snprintf(buf, sizeof buf, "vanishing_origin(a=%.17g,sigma=%.17g)", a_, sigma_);
      break;
    case SymbolShape::TabulatedRadial:
      std::snprintf(buf, sizeof buf, "tabulated(%zu nodes)", tab_k_.size());
      break;
  }
  return buf;
}

void SobolevWeights::validate(int d) const {
  char buf[160];
  if (!(alpha > 0.5 * (d - 2))) {
    std::snprintf(buf, sizeof buf, "SobolevWeights: alpha=%g must exceed (d-2)/2=%g", alpha, 0.5 * (d - 2));
    throw ParameterError(buf);
  }
  if (!(beta_decay > 0.5 * (d + 2))) {
    std::snprintf(buf, sizeof buf, "SobolevWeights: beta_decay=%g must exceed (d+2)/2=%g", beta_decay, 0.5 * (d + 2));
    throw ParameterError(buf);
  }
  if (!(beta0 > 0.25)) {
    std::snprintf(buf, sizeof buf, "SobolevWeights: beta0=%g must exceed 1/4", beta0);
    throw ParameterError(buf);
  }
}

}  // namespace fermisea
