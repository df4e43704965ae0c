#include <odeq/numeric.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <odeq/error.hpp>

namespace odeq {

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
    if (n < 2) throw std::invalid_argument("uniform_grid: need at least 2 points");
    std::vector<double> g(n);
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + h * static_cast<double>(i);
    g.back() = hi;
    return g;
}

std::vector<double> trimmed_grid(double lo, double hi, std::size_t n, double trim) {
    const double pad = trim * (hi - lo);
    return uniform_grid(lo + pad, hi - pad, n);
}

double fd_derivative(const Fn1& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double fd_second_derivative(const Fn1& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
           (12 * h * h);
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const Fn1& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(fa, flm, fm, a, m);
    const double right = simpson(fm, frm, fb, m, b);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const Fn1& f, double lo, double hi, double tol) {
    if (lo == hi) return 0.0;
    const double m = 0.5 * (lo + hi);
    const double fa = f(lo), fm = f(m), fb = f(hi);
    const double whole = simpson(fa, fm, fb, lo, hi);
    return simpson_rec(f, lo, hi, fa, fm, fb, whole, tol, 48);
}

double solve_bracketed(const Fn1& f, double lo, double hi) {
    double fl = f(lo);
    double fh = f(hi);
    if (fl == 0.0) return lo;
    if (fh == 0.0) return hi;
    if ((fl > 0) == (fh > 0))
        throw DomainError("solve_bracketed: no sign change on the bracket");
    // bisection is exact here: it stops when lo and hi are adjacent doubles
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= std::fmin(lo, hi) || mid >= std::fmax(lo, hi)) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (fl > 0)) {
            lo = mid;
            fl = fm;
        } else {
            hi = mid;
        }
    }
    return std::abs(fl) <= std::abs(fh) ? lo : hi;
}

namespace {

std::array<double, 2> rk4_step(const Rhs2& rhs, double t, const std::array<double, 2>& y,
                               double h) {
    const auto k1 = rhs(t, y);
    const auto k2 = rhs(t + 0.5 * h, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const auto k3 = rhs(t + 0.5 * h, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const auto k4 = rhs(t + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    return {y[0] + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

} // namespace

std::vector<std::array<double, 2>> rk4_path(const Rhs2& rhs, const std::vector<double>& knots,
                                            std::array<double, 2> y0, double max_step) {
    if (knots.empty()) return {};
    std::vector<std::array<double, 2>> out;
    out.reserve(knots.size());
    out.push_back(y0);
    std::array<double, 2> y = y0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double t0 = knots[i];
        const double t1 = knots[i + 1];
        std::size_t sub = 1;
        if (max_step > 0.0) {
            sub = static_cast<std::size_t>(std::ceil(std::abs(t1 - t0) / max_step));
            if (sub == 0) sub = 1;
        }
        const double h = (t1 - t0) / static_cast<double>(sub);
        double t = t0;
        for (std::size_t s = 0; s < sub; ++s) {
            y = rk4_step(rhs, t, y, h);
            t = t0 + h * static_cast<double>(s + 1);
        }
        out.push_back(y);
    }
    return out;
}

} // namespace odeq
