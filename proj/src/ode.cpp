#include <odeq/ode.hpp>

#include <cmath>

#include <odeq/error.hpp>
#include <odeq/numeric.hpp>

namespace odeq {

std::vector<double> coefficient_grid(const Ode2& ode, std::size_t n) {
    return trimmed_grid(ode.interval.lo, ode.interval.hi, n);
}

namespace {

void check_finite_on(const Expr& f, const char* label, const std::string& var,
                     const std::vector<double>& grid) {
    Expr d = f;
    for (int order = 0; order <= 3; ++order) {
        for (double x : grid) {
            double v;
            try {
                v = eval1(d, var, x);
            } catch (const EvalError& e) {
                throw SingularityError(std::string(label) + " is singular near " + var +
                                           " = " + std::to_string(x) + ": " + e.what(),
                                       x);
            }
            if (!std::isfinite(v))
                throw SingularityError(std::string(label) + " (derivative order " +
                                           std::to_string(order) + ") is not finite at " +
                                           var + " = " + std::to_string(x),
                                       x);
        }
        if (order < 3) d = differentiate(d, var);
    }
}

} // namespace

void validate(const Ode2& ode) {
    if (!(ode.interval.lo < ode.interval.hi))
        throw DomainError("interval is empty or reversed: [" +
                          std::to_string(ode.interval.lo) + ", " +
                          std::to_string(ode.interval.hi) + "]");
    const auto grid = coefficient_grid(ode);
    check_finite_on(ode.a, "coefficient a", ode.var, grid);
    check_finite_on(ode.b, "coefficient b", ode.var, grid);
}

int sign_on_interval(const Expr& f, const std::string& var, const Interval& iv) {
    const auto grid = trimmed_grid(iv.lo, iv.hi, 64);
    int sign = 0;
    for (double x : grid) {
        const double v = eval1(f, var, x);
        if (v == 0.0 || !std::isfinite(v))
            throw SingularityError(to_string(f) + " vanishes at " + var + " = " +
                                       std::to_string(x),
                                   x);
        const int s = v > 0 ? 1 : -1;
        if (sign == 0) sign = s;
        if (s != sign)
            throw SingularityError(to_string(f) + " changes sign near " + var + " = " +
                                       std::to_string(x),
                                   x);
    }
    return sign;
}

} // namespace odeq
