#pragma once

#include <string>
#include <vector>

#include <odeq/expr.hpp>

namespace odeq {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// y'' + a(x) y' + b(x) y = 0 on an interval
struct Ode2 {
    Expr a;
    Expr b;
    std::string var = "x";
    Interval interval{};
};

// Checks that a and b (and their derivatives to order 3) evaluate finitely
// on the trimmed interval; throws SingularityError naming the first bad
// sample otherwise.  Also rejects ill-ordered intervals.
void validate(const Ode2& ode);

// the default sampling grid: 64 uniform points, 1% trimmed at each end
std::vector<double> coefficient_grid(const Ode2& ode, std::size_t n = 64);

// +1 or -1 when f keeps that sign on the trimmed interval; throws
// SingularityError at the first sample where it vanishes or flips.
int sign_on_interval(const Expr& f, const std::string& var, const Interval& iv);

} // namespace odeq
