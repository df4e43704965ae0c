#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace odeq {

using Fn1 = std::function<double(double)>;

// n points with both endpoints included; n >= 2
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

// uniform grid on [lo, hi] shrunk by `trim` of its length at each end,
// keeping endpoint singularities at arm's length
std::vector<double> trimmed_grid(double lo, double hi, std::size_t n,
                                 double trim = 0.01);

// fourth-order central stencils
double fd_derivative(const Fn1& f, double x, double h);
double fd_second_derivative(const Fn1& f, double x, double h);

// adaptive Simpson with absolute tolerance; lo > hi integrates backwards
double integrate(const Fn1& f, double lo, double hi, double tol = 1e-12);

// root of f on [lo, hi]; requires f(lo), f(hi) of opposite sign (either may
// be zero).  Bisects until the bracket cannot shrink further, so the result
// is converged to machine precision.
double solve_bracketed(const Fn1& f, double lo, double hi);

using Rhs2 = std::function<std::array<double, 2>(double, const std::array<double, 2>&)>;

// classic RK4 for a two-dimensional first-order system, reported at each
// knot.  Knots must be strictly monotone but may run backwards.  A positive
// max_step caps the internal sub-step size between knots.
std::vector<std::array<double, 2>> rk4_path(const Rhs2& rhs,
                                            const std::vector<double>& knots,
                                            std::array<double, 2> y0,
                                            double max_step = 0.0);

} // namespace odeq
