#include <odeq/transform.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <odeq/error.hpp>
#include <odeq/invariants.hpp>
#include <odeq/numeric.hpp>

namespace odeq {

double PointMap::value(double t) const {
    if (closed_form) return eval1(*closed_form, var, t);
    if (solver) return solver(t);
    if (t_grid.size() < 2) throw DomainError("point map has no usable table");
    // monotone piecewise-linear fallback
    auto it = std::upper_bound(t_grid.begin(), t_grid.end(), t);
    std::size_t i = it == t_grid.begin() ? 0 : static_cast<std::size_t>(it - t_grid.begin()) - 1;
    if (i + 1 >= t_grid.size()) i = t_grid.size() - 2;
    const double w = (t - t_grid[i]) / (t_grid[i + 1] - t_grid[i]);
    return x_values[i] + w * (x_values[i + 1] - x_values[i]);
}

bool PointMap::increasing() const {
    return x_values.size() >= 2 && x_values.front() < x_values.back();
}

PointMap identity_map(const std::vector<double>& grid, const std::string& var) {
    PointMap m;
    m.t_grid = grid;
    m.x_values = grid;
    m.closed_form = Expr::var(var);
    m.var = var;
    return m;
}

double GaugeFactor::at(double x) const {
    if (exponent) return eval1(*exponent, var, x);
    const Expr f = integrand;
    const std::string v = var;
    return integrate([&](double s) { return eval1(f, v, s); }, base, x);
}

// ---------------------------------------------------------------------------
// antiderivative catalog

namespace {

std::optional<Rational> as_rational(const Expr& e) {
    switch (e.kind()) {
        case Kind::number:
            if (e.value().is_exact()) return e.value().rat();
            return std::nullopt;
        case Kind::negate:
            if (auto r = as_rational(e.kid(0))) return -*r;
            return std::nullopt;
        case Kind::quotient: {
            auto n = as_rational(e.kid(0));
            auto d = as_rational(e.kid(1));
            if (n && d && *d != 0) return *n / *d;
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

// multiplicative decomposition of a single term: numeric coefficient,
// a rational power of `var`, at most one exp factor, and var-free leftovers
struct TermParts {
    Number coef = Number::exact(1);
    Rational var_power = 0;
    std::vector<std::pair<Expr, int>> exp_args; // (argument, +/-1)
    std::vector<std::pair<Expr, int>> constants;
    bool ok = true;
};

void walk_term(const Expr& e, int s, const std::string& var, TermParts& out) {
    if (!out.ok) return;
    if (!depends_on(e, var)) {
        if (e.kind() == Kind::number) {
            if (s > 0) {
                out.coef = out.coef * e.value();
            } else if (e.value().is_exact() && e.value().rat() != 0) {
                out.coef = out.coef * Number::exact(1 / e.value().rat());
            } else if (!e.value().is_exact() && e.value().as_double() != 0.0) {
                out.coef = out.coef * Number::inexact(1.0 / e.value().as_double());
            } else {
                out.ok = false;
            }
        } else {
            out.constants.emplace_back(e, s);
        }
        return;
    }
    switch (e.kind()) {
        case Kind::variable:
            out.var_power += s;
            return;
        case Kind::negate:
            out.coef = out.coef.negated();
            walk_term(e.kid(0), s, var, out);
            return;
        case Kind::product:
            for (const Expr& f : e.operands()) walk_term(f, s, var, out);
            return;
        case Kind::quotient:
            walk_term(e.kid(0), s, var, out);
            walk_term(e.kid(1), -s, var, out);
            return;
        case Kind::power: {
            const auto p = as_rational(e.kid(1));
            if (!p || e.kid(0).kind() != Kind::variable || e.kid(0).name() != var) {
                out.ok = false;
                return;
            }
            out.var_power += Rational(s) * *p;
            return;
        }
        case Kind::call:
            if (e.fn() == Fn::exp) {
                out.exp_args.emplace_back(e.kid(0), s);
                return;
            }
            if (e.fn() == Fn::sqrt && e.kid(0).kind() == Kind::variable &&
                e.kid(0).name() == var) {
                out.var_power += Rational(s) / 2;
                return;
            }
            out.ok = false;
            return;
        default:
            out.ok = false;
            return;
    }
}

Expr rational_expr(const Rational& r) { return Expr::num(Number::exact(r)); }

// antiderivative of one multiplicative term, or nullopt
std::optional<Expr> term_antiderivative(const Expr& term, const std::string& var,
                                        int sign_of_var) {
    TermParts parts;
    walk_term(term, 1, var, parts);
    if (!parts.ok) return std::nullopt;

    Expr core = Expr::num(1);
    if (!parts.exp_args.empty()) {
        if (parts.var_power != 0) return std::nullopt;
        std::vector<Expr> pieces;
        for (const auto& [arg, s] : parts.exp_args)
            pieces.push_back(s > 0 ? arg : simplify(-arg));
        const Expr w = simplify(Expr::sum(std::move(pieces)));
        const Expr k = simplify(differentiate(w, var));
        if (depends_on(k, var) || proves_zero(k)) return std::nullopt;
        core = Expr::exp(w) / k;
    } else if (parts.var_power == -1) {
        const Expr x = Expr::var(var);
        core = Expr::ln(sign_of_var >= 0 ? x : -x);
    } else {
        const Rational p = parts.var_power + 1;
        core = Expr::pow(Expr::var(var), rational_expr(parts.var_power)) * Expr::var(var) /
               rational_expr(p);
    }

    Expr out = Expr::num(parts.coef) * core;
    for (const auto& [c, s] : parts.constants)
        out = s > 0 ? out * c : out / c;
    return simplify(out);
}

} // namespace

std::optional<Expr> symbolic_antiderivative(const Expr& e, const std::string& var,
                                            int sign_of_var) {
    const Expr s = simplify(e);
    // split additive terms, folding a shared canonical denominator into each
    std::vector<Expr> terms;
    auto push_terms = [&terms](const Expr& u, const Expr* den) {
        const auto split = [&terms, den](const Expr& t) {
            terms.push_back(den ? Expr::quotient(t, *den) : t);
        };
        if (u.kind() == Kind::sum)
            for (const Expr& t : u.operands()) split(t);
        else
            split(u);
    };
    if (s.kind() == Kind::quotient)
        push_terms(s.kid(0), &s.kid(1));
    else
        push_terms(s, nullptr);

    std::vector<Expr> parts;
    for (const Expr& t : terms) {
        auto p = term_antiderivative(t, var, sign_of_var);
        if (!p) return std::nullopt;
        parts.push_back(*p);
    }
    const Expr F = simplify(Expr::sum(std::move(parts)));
    if (!proves_zero(simplify(differentiate(F, var) - s))) return std::nullopt;
    return F;
}

// ---------------------------------------------------------------------------
// symbolic inversion

namespace {

bool verifies_inverse(const Expr& alpha, const Expr& inv, const std::string& var,
                      const Interval& iv, const std::string& new_var) {
    // symbolic proof first, then a numeric composition check
    const Expr compose = simplify(substitute(alpha, var, inv) - Expr::var(new_var));
    if (proves_zero(compose)) return true;
    for (double x : trimmed_grid(iv.lo, iv.hi, 16)) {
        double u, back;
        try {
            u = eval1(alpha, var, x);
            back = eval1(alpha, var, eval1(inv, new_var, u));
        } catch (const EvalError&) {
            return false;
        }
        if (!(std::abs(back - u) <= 1e-10 * std::max(1.0, std::abs(u)))) return false;
    }
    return true;
}

bool is_const(const Expr& e, const std::string& var) { return !depends_on(e, var); }

} // namespace

std::optional<Expr> symbolic_inverse(const Expr& alpha, const std::string& var,
                                     const Interval& iv, const std::string& new_var) {
    const Expr x = Expr::var(var);
    const Expr u = Expr::var(new_var);
    const Expr a1 = simplify(differentiate(alpha, var));
    const Expr a2 = simplify(differentiate(a1, var));
    if (proves_zero(a1)) return std::nullopt;

    std::vector<Expr> candidates;

    // c x + d
    if (proves_zero(a2)) {
        const Expr d = simplify(alpha - a1 * x);
        if (is_const(a1, var) && is_const(d, var))
            candidates.push_back(simplify((u - d) / a1));
    }
    // c e^{k x} + d
    if (!proves_zero(a2)) {
        const Expr k = simplify(a2 / a1);
        if (is_const(k, var) && !proves_zero(k)) {
            const Expr c = simplify(a1 / (k * Expr::exp(k * x)));
            const Expr d = simplify(alpha - c * Expr::exp(k * x));
            if (is_const(c, var) && is_const(d, var))
                candidates.push_back(simplify(Expr::ln((u - d) / c) / k));
        }
    }
    // c ln(x) + d
    {
        const Expr c = simplify(x * a1);
        if (is_const(c, var) && !proves_zero(c)) {
            const Expr d = simplify(alpha - c * Expr::ln(x));
            if (is_const(d, var)) candidates.push_back(simplify(Expr::exp((u - d) / c)));
        }
    }
    // c x^k + d
    if (!proves_zero(a2)) {
        const Expr km1 = simplify(x * a2 / a1);
        if (is_const(km1, var)) {
            const Expr k = simplify(km1 + Expr::num(1));
            if (!proves_zero(k)) {
                const Expr c = simplify(a1 * x / (k * Expr::pow(x, k)));
                const Expr d = simplify(alpha - c * Expr::pow(x, k));
                if (is_const(c, var) && is_const(d, var))
                    candidates.push_back(
                        simplify(Expr::pow((u - d) / c, Expr::quotient(Expr::num(1), k))));
            }
        }
    }

    for (const Expr& inv : candidates)
        if (verifies_inverse(alpha, inv, var, iv, new_var)) return inv;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// closed-form fitting

namespace {

Expr snapped_num(double v) {
    if (auto r = snap_rational(v, 64, 1e-9)) return Expr::num(Number::exact(*r));
    return Expr::num(v);
}

bool fit_ok(const Expr& f, const std::string& var, const std::vector<double>& t,
            const std::vector<double>& x, double tol) {
    double scale = 1.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < t.size(); ++i) {
        double v;
        try {
            v = eval1(f, var, t[i]);
        } catch (const EvalError&) {
            return false;
        }
        if (!(std::abs(v - x[i]) <= tol * scale)) return false;
    }
    return true;
}

Expr scaled(const Expr& c, const Expr& body) {
    if (c.is_one()) return body;
    return Expr::product({c, body});
}

Expr shifted(const Expr& body, const Expr& d) {
    if (d.is_zero()) return body;
    return Expr::sum({body, d});
}

} // namespace

std::optional<Expr> fit_closed_form(const std::vector<double>& t,
                                    const std::vector<double>& x, const std::string& var,
                                    double tol) {
    const std::size_t n = t.size();
    if (n < 3 || x.size() != n) return std::nullopt;
    const Expr tv = Expr::var(var);

    // c t + d
    {
        const double c = (x[n - 1] - x[0]) / (t[n - 1] - t[0]);
        const double d = x[0] - c * t[0];
        const Expr f = shifted(scaled(snapped_num(c), tv), snapped_num(d));
        if (fit_ok(f, var, t, x, tol)) return f;
    }
    const bool pos = std::all_of(x.begin(), x.end(), [](double v) { return v > 0; });
    const bool neg = std::all_of(x.begin(), x.end(), [](double v) { return v < 0; });
    if (!pos && !neg) return std::nullopt;
    const double sgn = pos ? 1.0 : -1.0;

    // c e^{k t}
    {
        const double k =
            (std::log(std::abs(x[n - 1])) - std::log(std::abs(x[0]))) / (t[n - 1] - t[0]);
        const double c = sgn * std::exp(std::log(std::abs(x[0])) - k * t[0]);
        const Expr arg = Expr::product({snapped_num(k), tv});
        const Expr f = scaled(snapped_num(c), Expr::exp(arg));
        if (fit_ok(f, var, t, x, tol)) return f;
    }
    // c t^k (positive t only)
    if (std::all_of(t.begin(), t.end(), [](double v) { return v > 0; })) {
        const double k = (std::log(std::abs(x[n - 1])) - std::log(std::abs(x[0]))) /
                         (std::log(t[n - 1]) - std::log(t[0]));
        const double c = x[0] / std::pow(t[0], k);
        const Expr f = scaled(snapped_num(c), Expr::pow(tv, snapped_num(k)));
        if (fit_ok(f, var, t, x, tol)) return f;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// finite transformations

namespace {

int monotone_sign(const Expr& alpha, const std::string& var, const Interval& iv) {
    try {
        return sign_on_interval(differentiate(alpha, var), var, iv);
    } catch (const SingularityError& e) {
        throw DomainError(std::string("map is not strictly monotone: ") + e.what());
    }
}

} // namespace

Ode2 pushforward(const Ode2& ode, const Expr& alpha, const std::string& new_var) {
    monotone_sign(alpha, ode.var, ode.interval);
    const std::string nv = new_var.empty() ? ode.var : new_var;
    const Expr ap = differentiate(alpha, ode.var);
    const Expr app = differentiate(ap, ode.var);
    const Expr a_img = simplify((ode.a * ap + app) / (ap * ap));
    const Expr b_img = simplify(ode.b / (ap * ap));

    const auto inv = symbolic_inverse(alpha, ode.var, ode.interval, nv);
    if (!inv)
        throw DomainError("no closed-form inverse for the map " + to_string(alpha) +
                          "; use pushforward_sampled");
    Ode2 out;
    out.a = simplify(substitute(a_img, ode.var, *inv));
    out.b = simplify(substitute(b_img, ode.var, *inv));
    out.var = nv;
    const double u0 = eval1(alpha, ode.var, ode.interval.lo);
    const double u1 = eval1(alpha, ode.var, ode.interval.hi);
    out.interval = {std::min(u0, u1), std::max(u0, u1)};
    return out;
}

SampledOde pushforward_sampled(const Ode2& ode, const Expr& alpha, std::size_t n) {
    const int s = monotone_sign(alpha, ode.var, ode.interval);
    const Expr ap = differentiate(alpha, ode.var);
    const Expr app = differentiate(ap, ode.var);
    const Expr a_img = simplify((ode.a * ap + app) / (ap * ap));
    const Expr b_img = simplify(ode.b / (ap * ap));

    SampledOde out;
    for (double x : coefficient_grid(ode, n)) {
        out.grid.push_back(eval1(alpha, ode.var, x));
        out.a.push_back(eval1(a_img, ode.var, x));
        out.b.push_back(eval1(b_img, ode.var, x));
    }
    if (s < 0) {
        std::reverse(out.grid.begin(), out.grid.end());
        std::reverse(out.a.begin(), out.a.end());
        std::reverse(out.b.begin(), out.b.end());
    }
    return out;
}

PointMap x1_flow_map(const Expr& xi, double eps, const Interval& iv,
                     const std::string& var) {
    sign_on_interval(xi, var, iv); // the flow field must not vanish

    const int var_sign = iv.lo + iv.hi >= 0 ? 1 : -1;
    const auto anti = symbolic_antiderivative(simplify(Expr::num(1) / xi), var, var_sign);
    const double mid = iv.mid();
    const auto tilde = [anti, xi, var, mid](double s) {
        if (anti) return eval1(*anti, var, s);
        return integrate([&](double r) { return 1.0 / eval1(xi, var, r); }, mid, s);
    };

    const auto grid = trimmed_grid(iv.lo, iv.hi, 64);
    const double lo = grid.front(), hi = grid.back();
    const double f_lo = tilde(lo), f_hi = tilde(hi);

    PointMap map;
    map.var = var;
    std::size_t skipped = 0;
    for (double x : grid) {
        const double target = eps + tilde(x);
        // the image stays bracketed iff target lies in the tilde-range
        const bool inside = (target >= std::min(f_lo, f_hi) && target <= std::max(f_lo, f_hi));
        if (!inside) {
            ++skipped;
            continue;
        }
        const double ax = solve_bracketed([&](double s) { return tilde(s) - target; }, lo, hi);
        map.t_grid.push_back(x);
        map.x_values.push_back(ax);
    }
    if (map.t_grid.size() < 3)
        throw DomainError("flow leaves the interval almost everywhere at eps = " +
                          std::to_string(eps));
    if (skipped > 0) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "flow leaves the interval; valid for %s in [%g, %g]", var.c_str(),
                      map.t_grid.front(), map.t_grid.back());
        map.warnings.emplace_back(buf);
    }
    map.closed_form = fit_closed_form(map.t_grid, map.x_values, var);
    map.solver = [tilde, eps, lo, hi](double x) {
        const double target = eps + tilde(x);
        return solve_bracketed([&](double s) { return tilde(s) - target; }, lo, hi);
    };
    return map;
}

std::pair<Ode2, GaugeFactor> gauge(const Ode2& ode, const Expr& A, const Expr& eps) {
    const Expr Ap = differentiate(A, ode.var);
    const Expr App = differentiate(Ap, ode.var);
    Ode2 out = ode;
    out.a = simplify(ode.a - Expr::num(2) * eps * Ap);
    out.b = simplify(ode.b - eps * (App + ode.a * Ap) + eps * eps * Ap * Ap);

    GaugeFactor g;
    g.exponent = simplify(eps * A);
    g.integrand = simplify(eps * Ap);
    g.var = ode.var;
    g.base = ode.interval.mid();
    return {out, g};
}

std::pair<Ode2, GaugeFactor> gauge(const Ode2& ode, const Expr& A, double eps) {
    return gauge(ode, A, Expr::num(eps));
}

std::pair<Expr, GaugeFactor> reduce_to_normal_form(const Ode2& ode) {
    const Expr V = simplify(ode.b - ode.a * ode.a / Expr::num(4) -
                            differentiate(ode.a, ode.var) / Expr::num(2));
    GaugeFactor g;
    g.integrand = simplify(ode.a / Expr::num(2));
    g.var = ode.var;
    g.base = ode.interval.mid();
    const int var_sign = ode.interval.lo + ode.interval.hi >= 0 ? 1 : -1;
    g.exponent = symbolic_antiderivative(g.integrand, ode.var, var_sign);
    return {V, g};
}

// ---------------------------------------------------------------------------
// integrable classes

namespace {

double row_spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

double row_mean(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

bool row_constant(const std::vector<double>& v, double tol) {
    return row_spread(v) <= tol * std::max(1.0, std::abs(row_mean(v)));
}

} // namespace

IntegrableClass classify_integrable(const Ode2& ode) {
    const Expr V = reduce_to_normal_form(ode).first;
    const auto grid = coefficient_grid(ode);
    std::vector<double> Vv;
    Vv.reserve(grid.size());
    for (double x : grid) Vv.push_back(eval1(V, ode.var, x));

    IntegrableClass out;
    if (row_constant(Vv, 1e-9)) {
        out.tag = IntegrableClass::Tag::constant;
        out.k = row_mean(Vv);
        return out;
    }

    Ode2 nf;
    nf.a = Expr::num(0);
    nf.b = V;
    nf.var = ode.var;
    nf.interval = ode.interval;
    InvariantChain chain;
    try {
        chain = chain_x1(nf, 1, grid);
    } catch (const SingularityError&) {
        return out; // V vanishes inside: outside the catalog
    }
    const auto& w13 = chain.values[0];
    const auto& w14 = chain.values[1];
    const double c = row_mean(w13);
    double w14_max = 0;
    for (double v : w14) w14_max = std::max(w14_max, std::abs(v));
    if (!row_constant(w13, 1e-9) || std::abs(c) <= 1e-12 ||
        w14_max > 1e-9 * std::max(1.0, std::abs(c)))
        return out;

    const double mu = 1.0 / c;
    // V = mu/(x - s)^2: resolve the shift from two samples and verify
    const double x1 = grid[grid.size() / 4], x2 = grid[3 * grid.size() / 4];
    const double q1 = mu / eval1(V, ode.var, x1), q2 = mu / eval1(V, ode.var, x2);
    if (!(q1 > 0) || !(q2 > 0)) return out;
    const double r1 = std::sqrt(q1), r2 = std::sqrt(q2);
    double shift;
    if (std::abs((x1 - r1) - (x2 - r2)) <= 1e-6 * std::max(1.0, std::abs(x1)))
        shift = 0.5 * ((x1 - r1) + (x2 - r2));
    else if (std::abs((x1 + r1) - (x2 + r2)) <= 1e-6 * std::max(1.0, std::abs(x1)))
        shift = 0.5 * ((x1 + r1) + (x2 + r2));
    else
        return out;
    if (std::abs(shift) <= 1e-9) shift = 0.0;

    const Expr xv = Expr::var(ode.var);
    const Expr model = Expr::num(mu) / Expr::pow(shift == 0.0 ? xv : xv - Expr::num(shift), 2);
    if (!equal_numeric(V, model, ode.var, grid, 1e-7)) return out;

    out.tag = IntegrableClass::Tag::euler;
    out.mu = mu;
    out.shift = shift;
    return out;
}

namespace {

// normal-form basis for V = k (constant)
std::pair<Expr, Expr> constant_basis(double k, const Expr& xv) {
    if (std::abs(k) <= 1e-12) return {Expr::num(1), xv};
    const Expr kk = Expr::num(k);
    if (k > 0) {
        const Expr root = simplify(Expr::sqrt(kk));
        return {Expr::cos(root * xv), Expr::sin(root * xv)};
    }
    const Expr root = simplify(Expr::sqrt(simplify(-kk)));
    return {Expr::exp(root * xv), Expr::exp(simplify(-root) * xv)};
}

// normal-form basis for V = mu/(x - s)^2 on an interval where X = +/-(x-s) > 0
std::pair<Expr, Expr> euler_basis(double mu, const Expr& X) {
    Expr mu_e = Expr::num(mu);
    if (auto r = snap_rational(mu, 1 << 20, 1e-9)) mu_e = Expr::num(Number::exact(*r));
    const Expr disc = simplify(Expr::num(1) - Expr::num(4) * mu_e);
    const double disc_v = 1.0 - 4.0 * mu;
    const Expr half = Expr::rat(1, 2);
    if (disc_v > 1e-12) {
        const Expr root = simplify(Expr::sqrt(disc));
        const Expr r1 = simplify((Expr::num(1) + root) * half);
        const Expr r2 = simplify((Expr::num(1) - root) * half);
        return {simplify(Expr::pow(X, r1)), simplify(Expr::pow(X, r2))};
    }
    const Expr sq = simplify(Expr::pow(X, half));
    if (disc_v >= -1e-12) return {sq, simplify(sq * Expr::ln(X))};
    const Expr beta = simplify(Expr::sqrt(simplify(-disc)) * half);
    return {simplify(sq * Expr::cos(beta * Expr::ln(X))),
            simplify(sq * Expr::sin(beta * Expr::ln(X)))};
}

} // namespace

std::optional<SolutionBasis> solve_closed_form(const Ode2& ode) {
    const IntegrableClass cls = classify_integrable(ode);
    if (cls.tag == IntegrableClass::Tag::unknown) return std::nullopt;
    const GaugeFactor g = reduce_to_normal_form(ode).second;
    if (!g.exponent) return std::nullopt; // no closed pullback through the gauge

    const Expr xv = Expr::var(ode.var);
    std::pair<Expr, Expr> w;
    if (cls.tag == IntegrableClass::Tag::constant) {
        w = constant_basis(cls.k, xv);
    } else {
        Expr shift_e = Expr::num(cls.shift);
        if (auto r = snap_rational(cls.shift, 1 << 20, 1e-9))
            shift_e = Expr::num(Number::exact(*r));
        Expr X = cls.shift == 0.0 ? xv : simplify(xv - shift_e);
        if (ode.interval.hi <= cls.shift) X = simplify(shift_e - xv);
        w = euler_basis(cls.mu, X);
    }

    const Expr pull = Expr::exp(simplify(-*g.exponent));
    SolutionBasis basis;
    basis.y1 = simplify(w.first * pull);
    basis.y2 = simplify(w.second * pull);

    const Expr W = simplify(basis.y1 * differentiate(basis.y2, ode.var) -
                            differentiate(basis.y1, ode.var) * basis.y2);
    double wmin = std::numeric_limits<double>::infinity();
    for (double x : coefficient_grid(ode)) wmin = std::min(wmin, std::abs(eval1(W, ode.var, x)));
    basis.wronskian_min = wmin;
    return basis;
}

IvpTable integrate_numeric(const Ode2& ode, double x0, double y0, double yp0,
                           const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("integration grid is empty");
    if (std::abs(grid.front() - x0) > 1e-12 * std::max(1.0, std::abs(x0)))
        throw DomainError("initial point must be the first grid knot");
    const Expr a = ode.a, b = ode.b;
    const std::string var = ode.var;
    const Rhs2 rhs = [&a, &b, &var](double x, const std::array<double, 2>& s) {
        return std::array<double, 2>{
            s[1], -eval1(a, var, x) * s[1] - eval1(b, var, x) * s[0]};
    };
    const auto path = rk4_path(rhs, grid, {y0, yp0});
    IvpTable out;
    out.x = grid;
    out.y.reserve(path.size());
    out.yp.reserve(path.size());
    for (const auto& s : path) {
        out.y.push_back(s[0]);
        out.yp.push_back(s[1]);
    }
    return out;
}

double transport_check(const Ode2& ode1, const Ode2& ode2, const PointMap& map,
                       const std::optional<GaugeFactor>& g, double step) {
    if (map.t_grid.size() < 2) throw DomainError("transport map has no grid");
    const double t0 = map.t_grid.front(), t1 = map.t_grid.back();
    std::size_t n = static_cast<std::size_t>(std::ceil(std::abs(t1 - t0) / step)) + 1;
    if (n < 8) n = 8;
    const auto ts = uniform_grid(t0, t1, n);
    const double h = ts[1] - ts[0];

    std::vector<double> xs;
    xs.reserve(ts.size());
    for (double t : ts) xs.push_back(map.value(t));
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!((xs[i + 1] > xs[i]) == (xs[1] > xs[0])) || xs[i + 1] == xs[i])
            throw DomainError("transport map is not strictly monotone on the fine grid");

    const auto path = integrate_numeric(ode1, xs.front(), 1.0, 0.0, xs);
    std::vector<double> z(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = path.y[i];
        if (g) v *= std::exp(g->at(xs[i]));
        z[i] = v;
    }

    double zmax = 0;
    for (std::size_t i = 2; i + 2 < z.size(); ++i) zmax = std::max(zmax, std::abs(z[i]));
    if (zmax == 0) return std::numeric_limits<double>::infinity();

    double worst = 0;
    for (std::size_t i = 2; i + 2 < z.size(); ++i) {
        const double zp =
            (z[i - 2] - 8 * z[i - 1] + 8 * z[i + 1] - z[i + 2]) / (12 * h);
        const double zpp = (-z[i - 2] + 16 * z[i - 1] - 30 * z[i] + 16 * z[i + 1] -
                            z[i + 2]) /
                           (12 * h * h);
        const double t = ts[i];
        const double r = zpp + eval1(ode2.a, ode2.var, t) * zp + eval1(ode2.b, ode2.var, t) * z[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst / zmax;
}

} // namespace odeq
