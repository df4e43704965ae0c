#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <odeq/expr.hpp>
#include <odeq/ode.hpp>

namespace odeq {

// A sampled monotone change of independent variable t -> x.  value() uses
// the closed form when one was fitted, then the exact solver thunk, then
// monotone linear interpolation of the table.
struct PointMap {
    std::vector<double> t_grid;
    std::vector<double> x_values;
    std::optional<Expr> closed_form; // x as an expression in `var`
    std::string var = "t";
    std::function<double(double)> solver; // machine-precision evaluator, optional
    std::vector<std::string> warnings;

    double value(double t) const;
    bool increasing() const;
};

PointMap identity_map(const std::vector<double>& grid, const std::string& var);

// Gauge data for y~ = y e^{exponent}.  The exponent may lack a closed form,
// in which case at() integrates `integrand` from `base` (anchoring the
// additive constant there; solution bases only care about it up to scale).
struct GaugeFactor {
    std::optional<Expr> exponent;
    Expr integrand;
    std::string var = "x";
    double base = 0.0;

    double at(double x) const;
};

struct SolutionBasis {
    Expr y1, y2;
    double wronskian_min = 0.0; // min |y1 y2' - y1' y2| over the grid
};

struct IntegrableClass {
    enum class Tag { constant, euler, unknown };
    Tag tag = Tag::unknown;
    double k = 0.0;     // constant potential value
    double mu = 0.0;    // Euler potential mu/(x - shift)^2
    double shift = 0.0;
};

// Antiderivative over a pattern catalog (rational powers of var, linear
// exponentials, sums); the candidate is verified by differentiation, so a
// result is always correct.  sign_of_var picks the ln branch.
std::optional<Expr> symbolic_antiderivative(const Expr& e, const std::string& var,
                                            int sign_of_var = 1);

// Closed-form inverse of alpha on the interval, expressed in new_var, for
// alpha in the catalog {affine, c e^{kx}+d, c ln(x)+d, c x^k+d}; verified by
// composition on a sample grid before being returned.
std::optional<Expr> symbolic_inverse(const Expr& alpha, const std::string& var,
                                     const Interval& iv, const std::string& new_var);

// fits c*t + d, c*e^{k t}, or c*t^k through a monotone table; constants are
// snapped to small rationals when that loses nothing
std::optional<Expr> fit_closed_form(const std::vector<double>& t,
                                    const std::vector<double>& x,
                                    const std::string& var, double tol = 1e-9);

// Change of independent variable u = alpha(x):
//   a~ = (a alpha' + alpha'') / alpha'^2,  b~ = b / alpha'^2,
// re-expressed in u through the symbolic inverse.  Throws DomainError when
// alpha is not monotone or not invertible in the catalog (see
// pushforward_sampled for the general fallback).
Ode2 pushforward(const Ode2& ode, const Expr& alpha, const std::string& new_var = "");

struct SampledOde {
    std::vector<double> grid; // ascending, in the image variable
    std::vector<double> a, b;
};

// the same transport with numeric inversion only
SampledOde pushforward_sampled(const Ode2& ode, const Expr& alpha, std::size_t n = 64);

// Time-eps flow of xi(x) d/dx: alpha = F^{-1}(eps + F(x)) with F' = 1/xi.
// When the flow exits the interval for part of the grid, the map shrinks to
// the valid sub-interval and says so in warnings.
PointMap x1_flow_map(const Expr& xi, double eps, const Interval& iv,
                     const std::string& var = "x");

// finite gauge action: a~ = a - 2 eps A', b~ = b - eps(A'' + a A') + eps^2 A'^2
std::pair<Ode2, GaugeFactor> gauge(const Ode2& ode, const Expr& A, const Expr& eps);
std::pair<Ode2, GaugeFactor> gauge(const Ode2& ode, const Expr& A, double eps);

// V = b - a^2/4 - a'/2 together with the gauge y~ = y e^{(1/2) int a}
// that removes the first-derivative term
std::pair<Expr, GaugeFactor> reduce_to_normal_form(const Ode2& ode);

IntegrableClass classify_integrable(const Ode2& ode);

// closed-form basis for the constant and Euler classes, pulled back through
// the normal-form gauge; nullopt when the class is unknown or the gauge
// exponent has no closed form
std::optional<SolutionBasis> solve_closed_form(const Ode2& ode);

struct IvpTable {
    std::vector<double> x, y, yp;
};

// classic fixed-step RK4 on (y, y')' = (y', -a y' - b y) along the grid
IvpTable integrate_numeric(const Ode2& ode, double x0, double y0, double yp0,
                           const std::vector<double>& grid);

// Numeric sufficiency oracle: integrate ode1 along the mapped knots, build
// z(t) = y(x(t)) (times e^{gauge} when given), and return
//   max |z'' + a2 z' + b2 z| / max |z|
// over a uniform t-grid of the given step, via 5-point differences.
double transport_check(const Ode2& ode1, const Ode2& ode2, const PointMap& map,
                       const std::optional<GaugeFactor>& g = std::nullopt,
                       double step = 1e-3);

} // namespace odeq
