#include <odeq/equivalence.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <utility>

#include <odeq/error.hpp>
#include <odeq/numeric.hpp>

namespace odeq {

namespace {

double row_scale(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s = std::max(s, std::abs(v));
    return s;
}

double row_mean(const std::vector<double>& r) {
    return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

// constant up to a relative spread
bool row_constant(const std::vector<double>& r, double rel) {
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    return *hi - *lo <= rel * std::max(1.0, row_scale(r));
}

double pow_i(double base, long e) {
    if (e < 0) return 1.0 / pow_i(base, -e);
    double out = 1.0, acc = base;
    for (long k = e; k > 0; k >>= 1) {
        if (k & 1) out *= acc;
        acc *= acc;
    }
    return out;
}

std::string format(const char* fmt, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

} // namespace

HSearch find_monomial_H(const InvariantChain& chain, double constancy_tol) {
    if (chain.exprs.size() < 2 || chain.values.size() < 2)
        throw DomainError("monomial search needs a chain of depth at least 1");
    const std::size_t n = chain.grid.size();
    if (n < 8) throw DomainError("monomial search needs at least 8 grid points");

    const std::vector<double>& r1 = chain.values[0];
    const std::vector<double>& r2 = chain.values[1];

    HSearch out;
    // a vanishing entry (identically, or at a grid point) means the chain has
    // collapsed onto an integrable orbit; monomials are meaningless there
    const double floor1 = 1e-12 * std::max(1.0, row_scale(r1));
    const double floor2 = 1e-12 * std::max(1.0, row_scale(r2));
    for (std::size_t j = 0; j < n; ++j)
        if (std::abs(r1[j]) <= floor1 || std::abs(r2[j]) <= floor2) {
            out.degenerate = true;
            return out;
        }

    // screen exponent pairs with logarithmic derivatives at two probes
    const Expr d1 = simplify(differentiate(chain.exprs[0], chain.var));
    const Expr d2 = simplify(differentiate(chain.exprs[1], chain.var));
    const double t1 = chain.grid[n / 3], t2 = chain.grid[(2 * n) / 3];
    const double L1[2] = {eval1(d1, chain.var, t1) / eval1(chain.exprs[0], chain.var, t1),
                          eval1(d1, chain.var, t2) / eval1(chain.exprs[0], chain.var, t2)};
    const double L2[2] = {eval1(d2, chain.var, t1) / eval1(chain.exprs[1], chain.var, t1),
                          eval1(d2, chain.var, t2) / eval1(chain.exprs[1], chain.var, t2)};

    // smallest |p|+|q| first; only the representative with p > 0 (or p = 0,
    // q > 0) of each +/- pair, since inverting a constant monomial is free
    for (long s = 1; s <= 12; ++s) {
        for (long p = 0; p <= std::min(6L, s); ++p) {
            const long qa = s - p;
            if (qa > 6) continue;
            for (const long q : {-qa, qa}) {
                if (p == 0 && q <= 0) continue;
                if (qa == 0 && p != 1) continue;
                if (p != 0 && qa != 0 && std::gcd(p, qa) != 1) continue;
                bool screened = true;
                for (int i = 0; i < 2 && screened; ++i) {
                    const double lhs = static_cast<double>(p) * L1[i] +
                                       static_cast<double>(q) * L2[i];
                    const double mag = std::abs(p * L1[i]) + std::abs(q * L2[i]);
                    screened = std::abs(lhs) <= 1e-6 * (mag + 1e-300);
                }
                if (!screened) continue;
                std::vector<double> m(n);
                bool finite = true;
                for (std::size_t j = 0; j < n && finite; ++j) {
                    m[j] = pow_i(r1[j], p) * pow_i(r2[j], q);
                    finite = std::isfinite(m[j]);
                }
                if (!finite || !row_constant(m, constancy_tol)) continue;
                MonomialH h;
                h.p = p;
                h.q = q;
                h.normalization = (p == 3 && q == -2) ? 4.0 : 1.0;
                h.lambda = h.normalization * row_mean(m);
                out.H = h;
                return out;
            }
        }
    }
    return out;
}

namespace {

// pointwise inversion of a strictly monotone sampled function; `fine` and `W`
// are parallel, exprs give machine refinement between samples
std::optional<double> invert_monotone(const std::vector<double>& fine,
                                      const std::vector<double>& W,
                                      const Expr& w1, const std::string& var1,
                                      double target) {
    const bool inc = W.back() > W.front();
    const double lo = inc ? W.front() : W.back();
    const double hi = inc ? W.back() : W.front();
    const double slack = 1e-9 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    double t = target;
    if (t < lo || t > hi) {
        if (t >= lo - slack && t <= hi + slack)
            t = std::clamp(t, lo, hi);
        else
            return std::nullopt;
    }
    // bracket by bisection over the samples
    std::size_t a = 0, b = W.size() - 1;
    while (b - a > 1) {
        const std::size_t m = (a + b) / 2;
        if ((W[m] <= t) == inc)
            a = m;
        else
            b = m;
    }
    if (W[a] == t) return fine[a];
    if (W[b] == t) return fine[b];
    return solve_bracketed(
        [&](double x) { return eval1(w1, var1, x) - t; }, fine[a], fine[b]);
}

std::string class_name(IntegrableClass::Tag t) {
    switch (t) {
    case IntegrableClass::Tag::constant: return "constant";
    case IntegrableClass::Tag::euler: return "euler";
    default: return "unclassified";
    }
}

double sgn(double v) { return v < 0 ? -1.0 : 1.0; }

// equivalence within a shared integrable class, witnessed by a representative
// affine map between the normal forms
void verify_by_class(EquivVerdict& v, const Ode2& o1, const Ode2& o2,
                     const IntegrableClass& k1, const IntegrableClass& k2,
                     double lambda_tol, double transport_tol) {
    const Interval i1 = o1.interval, i2 = o2.interval;
    double c = 1.0, d = 0.0;
    if (k1.tag == IntegrableClass::Tag::constant) {
        v.lambda1 = v.lambda2 = 0.0; // the derived chain vanishes identically
        v.necessary_pass = true;
        const bool z1 = std::abs(k1.k) <= 1e-12, z2 = std::abs(k2.k) <= 1e-12;
        if (z1 != z2 || k1.k * k2.k < 0.0) {
            v.notes.push_back(format(
                "constant potentials %g and %g differ in sign; no real rescaling "
                "carries one into the other", k2.k, k1.k));
            return;
        }
        if (z1 && z2) {
            c = 1.0;
            d = i1.lo - i2.lo;
        } else {
            c = std::sqrt(k2.k / k1.k);
            d = i1.mid() - c * i2.mid();
        }
        v.notes.push_back("map chosen from the affine family preserving a "
                          "constant potential");
    } else {
        v.lambda1 = 1.0 / k1.mu;
        v.lambda2 = 1.0 / k2.mu;
        if (std::abs(k1.mu - k2.mu) > lambda_tol * std::max(1.0, std::abs(k1.mu))) {
            v.notes.push_back(format(
                "Euler parameters differ: mu = %.12g vs %.12g", k1.mu, k2.mu));
            return;
        }
        v.necessary_pass = true;
        // x - s1 = c (t - s2): any scale c works, provided the side of the
        // singular point is preserved
        const double side1 = sgn(i1.mid() - k1.shift);
        const double side2 = sgn(i2.mid() - k2.shift);
        c = side1 * side2 * (i1.length() / i2.length());
        d = k1.shift - c * k2.shift;
        v.notes.push_back("map chosen from the scaling family about the "
                          "singular point; the scale is a free parameter");
    }

    PointMap pm;
    pm.var = o2.var;
    pm.t_grid = coefficient_grid(o2);
    pm.x_values.reserve(pm.t_grid.size());
    for (double t : pm.t_grid) pm.x_values.push_back(c * t + d);
    pm.closed_form = fit_closed_form(pm.t_grid, pm.x_values, o2.var);
    pm.solver = [c, d](double t) { return c * t + d; };
    v.map = pm;

    // transport between the normal forms; the originals differ from them by
    // explicit gauge factors
    const Expr V1 = reduce_to_normal_form(o1).first;
    const Expr V2 = reduce_to_normal_form(o2).first;
    const Ode2 n1{Expr::num(0), V1, o1.var, o1.interval};
    const Ode2 n2{Expr::num(0), V2, o2.var, o2.interval};
    try {
        const double r = transport_check(n1, n2, pm);
        v.transport_residual = r;
        v.verified = r < transport_tol;
        if (!proves_zero(simplify(o1.a)) || !proves_zero(simplify(o2.a)))
            v.notes.push_back("verified through the normal forms; the original "
                              "solutions carry the gauge exponents on top");
        if (!v.verified)
            v.notes.push_back(format("transport residual %.3g exceeds %.1g",
                                     r, transport_tol));
    } catch (const Error& e) {
        v.notes.push_back(std::string("transport failed: ") + e.what());
    }
}

} // namespace

PointMap recover_map(const Ode2& o1, const Ode2& o2) {
    validate(o1);
    validate(o2);
    const Expr w1 = omega13(o1);
    const Expr w2 = omega13(o2);

    // invert over the closed interval so maps reaching the endpoints resolve;
    // fall back to the trimmed grid when an endpoint is singular
    std::vector<double> fine = uniform_grid(o1.interval.lo, o1.interval.hi, 513);
    std::vector<double> W(fine.size());
    try {
        for (std::size_t j = 0; j < fine.size(); ++j) {
            W[j] = eval1(w1, o1.var, fine[j]);
            if (!std::isfinite(W[j])) throw EvalError("nonfinite invariant");
        }
    } catch (const EvalError&) {
        fine = trimmed_grid(o1.interval.lo, o1.interval.hi, 513);
        for (std::size_t j = 0; j < fine.size(); ++j)
            W[j] = eval1(w1, o1.var, fine[j]);
    }

    const auto [mn, mx] = std::minmax_element(W.begin(), W.end());
    if (*mx - *mn <= 1e-10 * std::max(1.0, std::abs(*mx)))
        throw AmbiguityError(
            "the first invariant is essentially constant; the point map is a "
            "whole family, not a single function");
    const bool inc = W.back() > W.front();
    for (std::size_t j = 0; j + 1 < W.size(); ++j)
        if ((W[j + 1] > W[j]) != inc || W[j + 1] == W[j])
            throw AmbiguityError(
                "the first invariant is not strictly monotone on the interval; "
                "pointwise inversion is not well defined");

    PointMap pm;
    pm.var = o2.var;
    pm.t_grid = coefficient_grid(o2);
    pm.x_values.assign(pm.t_grid.size(),
                       std::numeric_limits<double>::quiet_NaN());
    std::vector<char> ok(pm.t_grid.size(), 0);
    for (std::size_t j = 0; j < pm.t_grid.size(); ++j) {
        const double target = eval1(w2, o2.var, pm.t_grid[j]);
        if (auto x = invert_monotone(fine, W, w1, o1.var, target)) {
            pm.x_values[j] = *x;
            ok[j] = 1;
        }
    }
    const auto first = std::find(ok.begin(), ok.end(), 1);
    if (first == ok.end())
        throw DomainError("the invariant ranges of the two equations do not "
                          "overlap; no point map exists");
    if (std::find(ok.begin(), ok.end(), 0) != ok.end()) {
        const auto last = std::find(ok.rbegin(), ok.rend(), 1);
        const double lo = pm.t_grid[static_cast<std::size_t>(first - ok.begin())];
        const double hi =
            pm.t_grid[pm.t_grid.size() - 1 -
                      static_cast<std::size_t>(last - ok.rbegin())];
        throw OverlapError(format("the invariant ranges only partially overlap; "
                                  "the map is defined for %g <= t <= %g",
                                  lo, hi),
                           lo, hi);
    }

    pm.closed_form = fit_closed_form(pm.t_grid, pm.x_values, o2.var);
    const std::string var1 = o1.var, var2 = o2.var;
    pm.solver = [fine, W, w1, var1, w2, var2](double t) {
        const double target = eval1(w2, var2, t);
        const auto x = invert_monotone(fine, W, w1, var1, target);
        if (!x)
            throw DomainError("map queried outside the invariant overlap");
        return *x;
    };
    return pm;
}

EquivVerdict equivalence_test(const Ode2& o1, const Ode2& o2,
                              double constancy_tol, double lambda_tol,
                              double transport_tol) {
    validate(o1);
    validate(o2);
    EquivVerdict v;

    // identical input: nothing to decide
    if (o1.var == o2.var && o1.interval.lo == o2.interval.lo &&
        o1.interval.hi == o2.interval.hi &&
        structurally_equal(simplify(o1.a), simplify(o2.a)) &&
        structurally_equal(simplify(o1.b), simplify(o2.b))) {
        v.necessary_pass = true;
        v.map = identity_map(coefficient_grid(o2), o2.var);
        v.notes.push_back("the equations are structurally identical");
        try {
            const double r = transport_check(o1, o2, *v.map);
            v.transport_residual = r;
            v.verified = r < transport_tol;
        } catch (const Error& e) {
            v.notes.push_back(std::string("transport failed: ") + e.what());
        }
        return v;
    }

    std::optional<InvariantChain> c1, c2;
    try {
        c1 = chain_x1(o1, 1);
        c2 = chain_x1(o2, 1);
    } catch (const SingularityError& e) {
        v.notes.push_back(std::string("invariant chain unavailable: ") + e.what());
    }

    HSearch h1, h2;
    if (c1 && c2) {
        h1 = find_monomial_H(*c1, constancy_tol);
        h2 = find_monomial_H(*c2, constancy_tol);
    }

    if (!c1 || !c2 || h1.degenerate || h2.degenerate) {
        // degenerate chains: compare integrable classes instead
        if (h1.degenerate || h2.degenerate)
            v.notes.push_back("invariant chain degenerate; comparing "
                              "integrable classes");
        const IntegrableClass k1 = classify_integrable(o1);
        const IntegrableClass k2 = classify_integrable(o2);
        if (k1.tag == IntegrableClass::Tag::unknown ||
            k2.tag == IntegrableClass::Tag::unknown) {
            v.notes.push_back("classes: " + class_name(k1.tag) + " vs " +
                              class_name(k2.tag) +
                              "; the test cannot decide this pair");
            return v;
        }
        if (k1.tag != k2.tag) {
            v.notes.push_back("integrable classes differ: " +
                              class_name(k1.tag) + " vs " + class_name(k2.tag));
            return v;
        }
        verify_by_class(v, o1, o2, k1, k2, lambda_tol, transport_tol);
        return v;
    }

    v.H = h1.H;
    if (!h1.H) {
        v.notes.push_back("no small-exponent constant monomial was found for "
                          "the first equation; the necessary test does not "
                          "apply");
        return v;
    }

    v.lambda1 = h1.H->lambda;
    const long p = h1.H->p, q = h1.H->q;
    std::vector<double> m(c2->grid.size());
    bool finite = true;
    for (std::size_t j = 0; j < m.size() && finite; ++j) {
        m[j] = pow_i(c2->values[0][j], p) * pow_i(c2->values[1][j], q);
        finite = std::isfinite(m[j]);
    }
    if (!finite || !row_constant(m, constancy_tol)) {
        v.notes.push_back("the matching monomial is not constant for the "
                          "second equation");
        return v;
    }
    v.lambda2 = h1.H->normalization * row_mean(m);
    if (std::abs(*v.lambda2 - *v.lambda1) >
        lambda_tol * std::max(1.0, std::abs(*v.lambda1))) {
        v.notes.push_back(format("constant values differ: %.12g vs %.12g",
                                 *v.lambda1, *v.lambda2));
        return v;
    }
    v.necessary_pass = true;

    try {
        v.map = recover_map(o1, o2);
    } catch (const AmbiguityError& e) {
        v.notes.push_back(std::string("map recovery: ") + e.what());
        return v;
    } catch (const OverlapError& e) {
        v.notes.push_back(std::string("map recovery: ") + e.what());
        return v;
    } catch (const DomainError& e) {
        v.notes.push_back(std::string("map recovery: ") + e.what());
        return v;
    }

    try {
        const double r = transport_check(o1, o2, *v.map);
        v.transport_residual = r;
        v.verified = r < transport_tol;
        if (!v.verified)
            v.notes.push_back(format(
                "transport residual %.3g exceeds %.1g; the x-map alone does "
                "not carry solutions over (a gauge factor may be missing)",
                r, transport_tol));
    } catch (const Error& e) {
        v.notes.push_back(std::string("transport failed: ") + e.what());
    }
    return v;
}

bool fixed_xi_check(const Expr& V1, const Expr& V2, const Expr& xi,
                    const std::vector<double>& grid, const std::string& var) {
    if (grid.size() < 8)
        throw DomainError("fixed-scale comparison needs at least 8 grid points");
    const Expr w1a = nf_omega1(V1, xi, var), w2a = nf_omega2(V1, xi, var);
    const Expr w1b = nf_omega1(V2, xi, var), w2b = nf_omega2(V2, xi, var);
    auto sample = [&](const Expr& e) {
        std::vector<double> r(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j)
            r[j] = eval1(e, var, grid[j]);
        return r;
    };
    const std::vector<double> r1a = sample(w1a), r1b = sample(w1b);

    if (row_constant(r1a, 1e-8)) {
        if (!row_constant(r1b, 1e-8)) return false;
        return std::abs(row_mean(r1a) - row_mean(r1b)) <=
               1e-6 * std::max(1.0, std::abs(row_mean(r1a)));
    }

    InvariantChain ca;
    ca.group = ChainGroup::x1;
    ca.var = var;
    ca.exprs = {w1a, w2a};
    ca.grid = grid;
    ca.values = {r1a, sample(w2a)};
    const HSearch h = find_monomial_H(ca);
    if (h.degenerate || !h.H) return true; // nothing constant to compare

    const std::vector<double> r2b = sample(w2b);
    std::vector<double> mb(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        mb[j] = pow_i(r1b[j], h.H->p) * pow_i(r2b[j], h.H->q);
    for (double x : mb)
        if (!std::isfinite(x)) return false;
    if (!row_constant(mb, 1e-8)) return false;
    const double lb = h.H->normalization * row_mean(mb);
    return std::abs(lb - h.H->lambda) <=
           1e-6 * std::max(1.0, std::abs(h.H->lambda));
}

} // namespace odeq
