#pragma once
// Gauss-Legendre rules (arbitrary order, cached) and composite helpers.
#include <functional>
#include <vector>

#include "fermisea/util.hpp"

namespace fermisea {

struct GaussRule {
  std::vector<double> x;  // nodes on (-1,1)
  std::vector<double> w;
};

// nodes/weights for n-point Gauss-Legendre on (-1,1); cached per order
const GaussRule& gauss_legendre(int n);

// integral of f over [a,b] with an n-point rule
double integrate_gl(const std::function<double(double)>& f, double a, double b, int n);
cplx integrate_gl_c(const std::function<cplx(double)>& f, double a, double b, int n);

// composite rule over consecutive panels given by breakpoints (ascending)
double integrate_panels(const std::function<double(double)>& f, const std::vector<double>& bp, int n_per_panel);
cplx integrate_panels_c(const std::function<cplx(double)>& f, const std::vector<double>& bp, int n_per_panel);

// splits [a,b] into panels no wider than hmax, at least min_panels of them
std::vector<double> uniform_breakpoints(double a, double b, double hmax, int min_panels = 1);

// geometric grading of [a,b] toward the endpoint `toward` (levels sub-panels);
// used next to integrable endpoint singularities
std::vector<double> graded_breakpoints(double a, double b, double toward, int levels);

// trapezoid weights dt*(1/2,1,...,1,1/2) for m+1 equispaced nodes
std::vector<double> trapezoid_weights(int m, double dt);

}  // namespace fermisea
