#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "odeq/expr.hpp"

// Canonical form machinery.  An expression is flattened into a ratio of
// polynomials whose "variables" are atoms: plain variables, function
// calls, or opaque subtrees, each raised to a rational exponent
// (negative and fractional exponents live directly in the monomials).
// exp() factors in a monomial are merged into a single exp() of the
// combined argument.  Power folds that would change the value for some
// real binding (e.g. (x^2)^(1/2) -> x) are refused; folds that only
// widen the domain are taken.  The rebuilt tree has integer-primitive
// coefficients, a deterministic factor order, and is a fixed point of
// the whole procedure.

namespace odeq {

namespace {

using R = Rational;

bool rat_is_int(const R& r) { return denominator(r) == 1; }
bool rat_is_even_int(const R& r) { return rat_is_int(r) && numerator(r) % 2 == 0; }
bool rat_is_odd_int(const R& r) { return rat_is_int(r) && numerator(r) % 2 != 0; }

// ------------------------------------------------------------- coefficients

struct Coef {
    bool exact = true;
    R r = 0;
    double d = 0;

    static Coef one() { return from_rat(1); }
    static Coef from_rat(R v) {
        Coef c;
        c.r = std::move(v);
        return c;
    }
    static Coef from_dbl(double v) {
        Coef c;
        c.exact = false;
        c.d = v;
        return c;
    }
    static Coef from_number(const Number& n) {
        return n.is_exact() ? from_rat(n.rat()) : from_dbl(n.as_double());
    }

    bool is_zero() const { return exact ? r == 0 : d == 0.0; }
    double to_double() const { return exact ? r.convert_to<double>() : d; }
    Number to_number() const { return exact ? Number::exact(r) : Number::inexact(d); }
};

Coef c_add(const Coef& a, const Coef& b) {
    if (a.exact && b.exact) return Coef::from_rat(a.r + b.r);
    return Coef::from_dbl(a.to_double() + b.to_double());
}

Coef c_mul(const Coef& a, const Coef& b) {
    if (a.exact && b.exact) return Coef::from_rat(a.r * b.r);
    return Coef::from_dbl(a.to_double() * b.to_double());
}

Coef c_neg(const Coef& a) {
    return a.exact ? Coef::from_rat(-a.r) : Coef::from_dbl(-a.d);
}

Coef c_inv(const Coef& a) {
    if (a.exact) {
        assert(a.r != 0);
        return Coef::from_rat(R(1) / a.r);
    }
    return Coef::from_dbl(1.0 / a.d);
}

bool c_eq(const Coef& a, const Coef& b) {
    if (a.exact != b.exact) return false;
    return a.exact ? a.r == b.r : a.d == b.d;
}

// ------------------------------------------------------------------- monos

struct Factor {
    std::string key; // printed atom, the sort key
    Expr atom;
    R exp;
};

struct Mono {
    std::vector<Factor> f; // sorted by key, exponents nonzero
};

bool mono_less(const Mono& a, const Mono& b) {
    std::size_t n = std::min(a.f.size(), b.f.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.f[i].key != b.f[i].key) return a.f[i].key < b.f[i].key;
        if (a.f[i].exp != b.f[i].exp) return a.f[i].exp < b.f[i].exp;
    }
    return a.f.size() < b.f.size();
}

bool mono_eq(const Mono& a, const Mono& b) {
    if (a.f.size() != b.f.size()) return false;
    for (std::size_t i = 0; i < a.f.size(); ++i)
        if (a.f[i].key != b.f[i].key || a.f[i].exp != b.f[i].exp) return false;
    return true;
}

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const { return mono_less(a, b); }
};

bool is_exp_atom(const Expr& e) { return e.kind() == Kind::call && e.fn() == Fn::exp; }
bool is_nonneg_atom(const Expr& e) {
    return e.kind() == Kind::call &&
           (e.fn() == Fn::exp || e.fn() == Fn::sqrt || e.fn() == Fn::abs);
}

Mono mono_normalize(Mono m); // merges exp() factors; defined after canon()

Mono mono_mul_raw(const Mono& a, const Mono& b) {
    Mono out;
    std::size_t i = 0, j = 0;
    while (i < a.f.size() || j < b.f.size()) {
        if (j == b.f.size() || (i < a.f.size() && a.f[i].key < b.f[j].key)) {
            out.f.push_back(a.f[i++]);
        } else if (i == a.f.size() || b.f[j].key < a.f[i].key) {
            out.f.push_back(b.f[j++]);
        } else {
            R e = a.f[i].exp + b.f[j].exp;
            if (e != 0) out.f.push_back({a.f[i].key, a.f[i].atom, e});
            ++i;
            ++j;
        }
    }
    return out;
}

Mono mono_mul(const Mono& a, const Mono& b) { return mono_normalize(mono_mul_raw(a, b)); }

Mono mono_inv(const Mono& a) {
    Mono out = a;
    for (Factor& f : out.f) f.exp = -f.exp;
    return mono_normalize(std::move(out));
}

// --------------------------------------------------------------------- poly

struct Poly {
    std::map<Mono, Coef, MonoLess> t;
};

Poly p_zero() { return {}; }

Poly p_const(const Coef& c) {
    Poly p;
    if (!c.is_zero()) p.t.emplace(Mono{}, c);
    return p;
}

Poly p_one() { return p_const(Coef::one()); }

bool p_is_zero(const Poly& p) { return p.t.empty(); }

bool p_is_one(const Poly& p) {
    return p.t.size() == 1 && p.t.begin()->first.f.empty() && p.t.begin()->second.exact &&
           p.t.begin()->second.r == 1;
}

const Coef* p_as_const(const Poly& p) {
    static const Coef zero = Coef::from_rat(0);
    if (p.t.empty()) return &zero;
    if (p.t.size() == 1 && p.t.begin()->first.f.empty()) return &p.t.begin()->second;
    return nullptr;
}

void p_accum(Poly& p, const Mono& m, const Coef& c) {
    auto it = p.t.find(m);
    if (it == p.t.end()) {
        if (!c.is_zero()) p.t.emplace(m, c);
        return;
    }
    it->second = c_add(it->second, c);
    if (it->second.is_zero()) p.t.erase(it);
}

Poly p_add(const Poly& a, const Poly& b) {
    Poly out = a;
    for (const auto& [m, c] : b.t) p_accum(out, m, c);
    return out;
}

Poly p_neg(const Poly& a) {
    Poly out = a;
    for (auto& [m, c] : out.t) c = c_neg(c);
    return out;
}

Poly p_scale(const Poly& a, const Coef& s) {
    Poly out;
    for (const auto& [m, c] : a.t) {
        Coef sc = c_mul(c, s);
        if (!sc.is_zero()) out.t.emplace(m, sc);
    }
    return out;
}

Poly p_mul_mono(const Poly& a, const Mono& m, const Coef& s) {
    Poly out;
    for (const auto& [mm, c] : a.t) p_accum(out, mono_mul(mm, m), c_mul(c, s));
    return out;
}

Poly p_mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a.t)
        for (const auto& [mb, cb] : b.t) p_accum(out, mono_mul(ma, mb), c_mul(ca, cb));
    return out;
}

// Per-atom minimum exponent over all monomials (0 for monomials where
// the atom is absent), so negative powers are pulled out too.
Mono p_content(const Poly& p) {
    struct Entry {
        Factor proto;
        R min_exp;
        std::size_t count = 0;
    };
    std::map<std::string, Entry> acc;
    for (const auto& [m, c] : p.t) {
        (void)c;
        for (const Factor& f : m.f) {
            auto it = acc.find(f.key);
            if (it == acc.end())
                acc.emplace(f.key, Entry{f, f.exp, 1});
            else {
                if (f.exp < it->second.min_exp) it->second.min_exp = f.exp;
                ++it->second.count;
            }
        }
    }
    Mono out;
    for (auto& [key, e] : acc) {
        (void)key;
        if (e.count < p.t.size() && e.min_exp > 0) e.min_exp = 0;
        if (e.min_exp != 0) out.f.push_back({e.proto.key, e.proto.atom, e.min_exp});
    }
    return out;
}

bool p_all_exact(const Poly& p) {
    for (const auto& [m, c] : p.t) {
        (void)m;
        if (!c.exact) return false;
    }
    return true;
}

// Signed scalar s with p/s integer-primitive and positive leading
// (largest-monomial) coefficient; for inexact polys, the leading
// coefficient itself.
Coef p_norm_scalar(const Poly& p) {
    assert(!p.t.empty());
    if (!p_all_exact(p)) return p.t.rbegin()->second;
    BigInt g = 0, l = 1;
    for (const auto& [m, c] : p.t) {
        (void)m;
        g = gcd(g, BigInt(abs(numerator(c.r))));
        l = lcm(l, BigInt(denominator(c.r)));
    }
    R mag(g, l);
    if (p.t.rbegin()->second.r < 0) mag = -mag;
    return Coef::from_rat(mag);
}

// num == lambda * den termwise?
const Coef* p_proportional(const Poly& num, const Poly& den, Coef& lambda_out) {
    if (num.t.size() != den.t.size() || num.t.empty()) return nullptr;
    auto in = num.t.begin();
    auto id = den.t.begin();
    if (!in->second.exact || !id->second.exact) return nullptr;
    Coef lambda = Coef::from_rat(in->second.r / id->second.r);
    for (; in != num.t.end(); ++in, ++id) {
        if (!mono_eq(in->first, id->first)) return nullptr;
        if (!in->second.exact || !id->second.exact) return nullptr;
        if (in->second.r != id->second.r * lambda.r) return nullptr;
    }
    lambda_out = lambda;
    return &lambda_out;
}

// ------------------------------------------------- univariate cancellation

// When numerator and denominator are both plain polynomials in one
// shared atom, cancel their gcd (Euclid over rationals).  Multivariate
// ratios are left uncancelled; zero-proofs do not depend on this.
struct UniPoly {
    std::vector<R> c; // c[i] multiplies atom^i; c.back() != 0 unless empty
};

void uni_trim(UniPoly& u) {
    while (!u.c.empty() && u.c.back() == 0) u.c.pop_back();
}

bool to_uni(const Poly& p, const std::string& key, UniPoly& out) {
    out.c.clear();
    for (const auto& [m, c] : p.t) {
        if (!c.exact) return false;
        long deg = 0;
        if (m.f.size() == 1) {
            const Factor& f = m.f[0];
            if (f.key != key || !rat_is_int(f.exp) || f.exp < 0 || f.exp > 128) return false;
            deg = numerator(f.exp).convert_to<long>();
        } else if (!m.f.empty()) {
            return false;
        }
        if (static_cast<long>(out.c.size()) <= deg) out.c.resize(deg + 1, R(0));
        out.c[deg] = c.r;
    }
    uni_trim(out);
    return true;
}

Poly from_uni(const UniPoly& u, const Factor& proto) {
    Poly p;
    for (std::size_t i = 0; i < u.c.size(); ++i) {
        if (u.c[i] == 0) continue;
        Mono m;
        if (i > 0) m.f.push_back({proto.key, proto.atom, R(i)});
        p.t.emplace(std::move(m), Coef::from_rat(u.c[i]));
    }
    return p;
}

UniPoly uni_rem(UniPoly a, const UniPoly& b) {
    while (a.c.size() >= b.c.size() && !a.c.empty()) {
        R q = a.c.back() / b.c.back();
        std::size_t shift = a.c.size() - b.c.size();
        for (std::size_t i = 0; i < b.c.size(); ++i) a.c[i + shift] -= q * b.c[i];
        a.c.pop_back();
        uni_trim(a);
    }
    return a;
}

UniPoly uni_div_exact(const UniPoly& a, const UniPoly& b) {
    UniPoly rem = a, q;
    q.c.assign(a.c.size() >= b.c.size() ? a.c.size() - b.c.size() + 1 : 0, R(0));
    while (rem.c.size() >= b.c.size() && !rem.c.empty()) {
        R f = rem.c.back() / b.c.back();
        std::size_t shift = rem.c.size() - b.c.size();
        q.c[shift] = f;
        for (std::size_t i = 0; i < b.c.size(); ++i) rem.c[i + shift] -= f * b.c[i];
        rem.c.pop_back();
        uni_trim(rem);
    }
    uni_trim(q);
    return q;
}

UniPoly uni_gcd(UniPoly a, UniPoly b) {
    while (!b.c.empty()) {
        UniPoly r = uni_rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.c.empty()) {
        R lead = a.c.back();
        for (R& x : a.c) x /= lead;
    }
    return a;
}

// Returns true if num/den were replaced by their cancelled forms.
bool try_uni_cancel(Poly& num, Poly& den) {
    const Factor* proto = nullptr;
    for (const Poly* p : {&num, &den})
        for (const auto& [m, c] : p->t) {
            (void)c;
            for (const Factor& f : m.f) {
                if (proto && proto->key != f.key) return false;
                if (!proto) proto = &f;
            }
        }
    if (!proto) return false;
    Factor pf = *proto;
    UniPoly un, ud;
    if (!to_uni(num, pf.key, un) || !to_uni(den, pf.key, ud)) return false;
    if (un.c.empty() || ud.c.size() < 2) return false;
    UniPoly g = uni_gcd(un, ud);
    if (g.c.size() < 2) return false;
    num = from_uni(uni_div_exact(un, g), pf);
    den = from_uni(uni_div_exact(ud, g), pf);
    return true;
}

// -------------------------------------------------------------------- ratf

struct RatF {
    Poly num, den; // den kept content-free, integer-primitive, leading > 0
};

RatF rf_zero() { return {p_zero(), p_one()}; }
RatF rf_const(const Coef& c) { return {p_const(c), p_one()}; }
RatF rf_one() { return rf_const(Coef::one()); }

const Coef* rf_as_const(const RatF& a) {
    if (!p_is_one(a.den)) return nullptr;
    return p_as_const(a.num);
}

bool rf_is_zero(const RatF& a) { return p_is_zero(a.num); }

RatF rf_norm(Poly num, Poly den) {
    assert(!p_is_zero(den));
    if (p_is_zero(num)) return rf_zero();
    if (const Coef* c = p_as_const(den)) return {p_scale(num, c_inv(*c)), p_one()};
    if (den.t.size() == 1) {
        const auto& [m, c] = *den.t.begin();
        return {p_mul_mono(num, mono_inv(m), c_inv(c)), p_one()};
    }
    Mono cn = p_content(num);
    Mono cd = p_content(den);
    Poly n2 = cn.f.empty() ? std::move(num) : p_mul_mono(num, mono_inv(cn), Coef::one());
    Poly d2 = cd.f.empty() ? std::move(den) : p_mul_mono(den, mono_inv(cd), Coef::one());
    try_uni_cancel(n2, d2);
    Mono shift = mono_mul(cn, mono_inv(cd));
    if (const Coef* c = p_as_const(d2)) {
        Poly out = p_mul_mono(p_scale(n2, c_inv(*c)), shift, Coef::one());
        return {std::move(out), p_one()};
    }
    if (d2.t.size() == 1) {
        const auto& [m, c] = *d2.t.begin();
        Poly out = p_mul_mono(n2, mono_mul(shift, mono_inv(m)), c_inv(c));
        return {std::move(out), p_one()};
    }
    Coef sc = p_norm_scalar(d2);
    Coef isc = c_inv(sc);
    n2 = p_scale(n2, isc);
    d2 = p_scale(d2, isc);
    Coef lambda = Coef::one();
    if (p_proportional(n2, d2, lambda)) {
        Poly out;
        p_accum(out, shift, lambda);
        return {std::move(out), p_one()};
    }
    if (!shift.f.empty()) n2 = p_mul_mono(n2, shift, Coef::one());
    return {std::move(n2), std::move(d2)};
}

RatF rf_add(const RatF& a, const RatF& b) {
    if (rf_is_zero(a)) return b;
    if (rf_is_zero(b)) return a;
    if (p_is_one(a.den) && p_is_one(b.den)) return {p_add(a.num, b.num), p_one()};
    Poly num = p_add(p_mul(a.num, b.den), p_mul(b.num, a.den));
    return rf_norm(std::move(num), p_mul(a.den, b.den));
}

RatF rf_neg(const RatF& a) { return {p_neg(a.num), a.den}; }

RatF rf_scale(const RatF& a, const R& s) { return {p_scale(a.num, Coef::from_rat(s)), a.den}; }

RatF rf_mul(const RatF& a, const RatF& b) {
    if (rf_is_zero(a) || rf_is_zero(b)) return rf_zero();
    return rf_norm(p_mul(a.num, b.num), p_mul(a.den, b.den));
}

Expr rebuild(const RatF& rf); // forward

RatF canon(const Expr& e); // forward

RatF atom_rf_exp(Expr atom, const R& exp) {
    Factor f{to_string(atom), std::move(atom), exp};
    Mono m;
    m.f.push_back(std::move(f));
    Poly p;
    p.t.emplace(mono_normalize(std::move(m)), Coef::one());
    return {std::move(p), p_one()};
}

RatF atom_rf(Expr atom) { return atom_rf_exp(std::move(atom), 1); }

// ------------------------------------------------------------------ powers

std::optional<BigInt> int_kth_root(const BigInt& n, unsigned k) {
    if (n < 0) return std::nullopt;
    if (n <= 1 || k == 1) return n;
    BigInt lo = 0, hi = n;
    while (lo < hi) {
        BigInt mid = (lo + hi + 1) / 2;
        if (boost::multiprecision::pow(mid, k) <= n)
            lo = mid;
        else
            hi = mid - 1;
    }
    return boost::multiprecision::pow(lo, k) == n ? std::optional<BigInt>(lo) : std::nullopt;
}

// (atom^e)^r keeps its value for every real binding?
bool fold_ok(const Factor& f, const R& r) {
    (void)r;
    if (is_nonneg_atom(f.atom)) return true;
    if (!rat_is_int(f.exp)) return true;    // fractional power already pins atom >= 0
    if (rat_is_odd_int(f.exp)) return true; // odd powers preserve sign/domain
    R er = f.exp * r;
    return rat_is_even_int(er);
}

Expr rat_exponent_tree(const R& r) {
    if (rat_is_int(r)) return Expr::num(r);
    return Expr::quotient(Expr::num(R(numerator(r))), Expr::num(R(denominator(r))));
}

// c^r for exact c > 0: exact value when the root is perfect, otherwise
// a leftover atom factor.
void coef_root(const R& c, const R& r, Coef& out_coef, std::vector<Factor>& out_factors) {
    unsigned q = denominator(r).convert_to<unsigned>();
    auto rn = int_kth_root(numerator(c), q);
    auto rd = int_kth_root(denominator(c), q);
    if (rn && rd) {
        R base(*rn, *rd);
        BigInt p = numerator(r);
        bool inv = p < 0;
        unsigned ap = abs(p).convert_to<unsigned>();
        R v(boost::multiprecision::pow(numerator(base), ap),
            boost::multiprecision::pow(denominator(base), ap));
        if (inv) v = R(1) / v;
        out_coef = c_mul(out_coef, Coef::from_rat(v));
        return;
    }
    Expr ct = Expr::num(c);
    Expr atom = (r == R(1, 2)) ? Expr::sqrt(ct) : Expr::pow(ct, rat_exponent_tree(abs(r)));
    R fexp = (r == R(1, 2) || r > 0) ? R(1) : R(-1);
    out_factors.push_back({to_string(atom), std::move(atom), fexp});
}

RatF rf_ipow(RatF base, BigInt n, const Expr& whole) {
    bool neg = n < 0;
    if (neg) {
        if (rf_is_zero(base)) return atom_rf(whole); // 0^-n undefined, keep opaque
        base = rf_norm(base.den, base.num);
        n = -n;
    }
    RatF acc = rf_one();
    while (n > 0) {
        if (n % 2 == 1) acc = rf_mul(acc, base);
        n /= 2;
        if (n > 0) base = rf_mul(base, base);
    }
    return acc;
}

RatF pow_ratf(const RatF& b, const R& r, const Expr& whole) {
    if (r == 0) return rf_one(); // matches eval: 0^0 = 1
    if (rat_is_int(r)) {
        if (abs(numerator(r)) > 512) {
            Expr bt = rebuild(b);
            return atom_rf(Expr::pow(std::move(bt), Expr::num(r)));
        }
        return rf_ipow(b, numerator(r), whole);
    }
    if (rf_is_zero(b)) return r > 0 ? rf_zero() : atom_rf(whole);
    if (p_is_one(b.den) && b.num.t.size() == 1) {
        const auto& [m, c] = *b.num.t.begin();
        if (c.exact && c.r > 0) {
            bool ok = true;
            for (const Factor& f : m.f)
                if (!fold_ok(f, r)) {
                    ok = false;
                    break;
                }
            if (ok) {
                Coef cc = Coef::one();
                std::vector<Factor> extra;
                coef_root(c.r, r, cc, extra);
                Mono m2;
                for (const Factor& f : m.f) m2.f.push_back({f.key, f.atom, f.exp * r});
                for (Factor& f : extra) m2.f.push_back(std::move(f));
                std::sort(m2.f.begin(), m2.f.end(),
                          [](const Factor& x, const Factor& y) { return x.key < y.key; });
                Poly p;
                p.t.emplace(mono_normalize(std::move(m2)), cc);
                return {std::move(p), p_one()};
            }
        }
    }
    // Single opaque power atom; sign of r picks numerator/denominator side.
    Expr bt = rebuild(b);
    if (r == R(1, 2)) return atom_rf(Expr::sqrt(std::move(bt)));
    if (r == R(-1, 2)) return atom_rf_exp(Expr::sqrt(std::move(bt)), -1);
    R mag = abs(r);
    Expr atom = Expr::pow(std::move(bt), rat_exponent_tree(mag));
    return atom_rf_exp(std::move(atom), r > 0 ? R(1) : R(-1));
}

// ------------------------------------------------------------------- calls

RatF canon_call(Fn fn, const Expr& whole) {
    RatF a = canon(whole.kid(0));
    switch (fn) {
        case Fn::exp: {
            if (rf_is_zero(a)) return rf_one();
            // exp(c * ln v) -> v^c (widening: right side defined wherever left is)
            if (p_is_one(a.den) && a.num.t.size() == 1) {
                const auto& [m, c] = *a.num.t.begin();
                if (c.exact && m.f.size() == 1 && m.f[0].exp == 1 &&
                    m.f[0].atom.kind() == Kind::call && m.f[0].atom.fn() == Fn::ln)
                    return pow_ratf(canon(m.f[0].atom.kid(0)), c.r, whole);
            }
            return atom_rf(Expr::exp(rebuild(a)));
        }
        case Fn::ln: {
            if (const Coef* c = rf_as_const(a)) {
                if (c->exact && c->r == 1) return rf_zero();
                return atom_rf(Expr::ln(Expr::num(c->to_number())));
            }
            if (p_is_one(a.den) && a.num.t.size() == 1) {
                const auto& [m, c] = *a.num.t.begin();
                bool has_exp = false;
                for (const Factor& f : m.f)
                    if (is_exp_atom(f.atom)) has_exp = true;
                bool coef_split = c.exact && c.r > 0 && c.r != 1;
                if (has_exp || coef_split) {
                    if (!c.exact || c.r <= 0) return atom_rf(Expr::ln(rebuild(a)));
                    RatF acc = rf_zero();
                    Mono rest;
                    for (const Factor& f : m.f) {
                        if (is_exp_atom(f.atom))
                            acc = rf_add(acc, rf_scale(canon(f.atom.kid(0)), f.exp));
                        else
                            rest.f.push_back(f);
                    }
                    if (c.r != 1)
                        acc = rf_add(acc, atom_rf(Expr::ln(Expr::num(c.r))));
                    if (!rest.f.empty()) {
                        Poly rp;
                        rp.t.emplace(std::move(rest), Coef::one());
                        acc = rf_add(acc, atom_rf(Expr::ln(rebuild({std::move(rp), p_one()}))));
                    }
                    return acc;
                }
            }
            return atom_rf(Expr::ln(rebuild(a)));
        }
        case Fn::sqrt:
            return pow_ratf(a, R(1, 2), whole);
        case Fn::abs: {
            if (const Coef* c = rf_as_const(a)) {
                if (c->exact) return rf_const(Coef::from_rat(abs(c->r)));
                return rf_const(Coef::from_dbl(std::fabs(c->d)));
            }
            if (p_is_one(a.den) && a.num.t.size() == 1) {
                const auto& [m, c] = *a.num.t.begin();
                bool nonneg = true;
                for (const Factor& f : m.f)
                    if (!is_nonneg_atom(f.atom) && !rat_is_even_int(f.exp) && rat_is_int(f.exp))
                        nonneg = false;
                if (nonneg) {
                    Poly p;
                    Coef ac = c.exact ? Coef::from_rat(abs(c.r)) : Coef::from_dbl(std::fabs(c.d));
                    p.t.emplace(m, ac);
                    return {std::move(p), p_one()};
                }
            }
            return atom_rf(Expr::abs(rebuild(a)));
        }
        case Fn::sin:
            if (rf_is_zero(a)) return rf_zero();
            return atom_rf(Expr::sin(rebuild(a)));
        case Fn::cos:
            if (rf_is_zero(a)) return rf_one();
            return atom_rf(Expr::cos(rebuild(a)));
    }
    return atom_rf(whole);
}

// ------------------------------------------------------------------- canon

RatF canon(const Expr& e) {
    switch (e.kind()) {
        case Kind::number:
            return rf_const(Coef::from_number(e.value()));
        case Kind::variable:
            return atom_rf(e);
        case Kind::sum: {
            RatF acc = rf_zero();
            for (const Expr& t : e.operands()) acc = rf_add(acc, canon(t));
            return acc;
        }
        case Kind::product: {
            RatF acc = rf_one();
            for (const Expr& f : e.operands()) {
                acc = rf_mul(acc, canon(f));
                if (rf_is_zero(acc)) return acc;
            }
            return acc;
        }
        case Kind::quotient: {
            RatF den = canon(e.kid(1));
            if (rf_is_zero(den)) return atom_rf(e); // undefined everywhere, keep opaque
            return rf_mul(canon(e.kid(0)), rf_norm(den.den, den.num));
        }
        case Kind::power: {
            RatF er = canon(e.kid(1));
            if (const Coef* c = rf_as_const(er)) {
                if (c->exact) return pow_ratf(canon(e.kid(0)), c->r, e);
                double d = c->d;
                if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) <= 64)
                    return pow_ratf(canon(e.kid(0)), R(static_cast<long>(d)), e);
                return atom_rf(Expr::pow(rebuild(canon(e.kid(0))), Expr::num(Number::inexact(d))));
            }
            return atom_rf(Expr::pow(rebuild(canon(e.kid(0))), rebuild(er)));
        }
        case Kind::negate:
            return rf_neg(canon(e.kid(0)));
        case Kind::call:
            return canon_call(e.fn(), e);
    }
    return atom_rf(e);
}

Mono mono_normalize(Mono m) {
    std::size_t n_exp = 0;
    bool plain = true;
    for (const Factor& f : m.f)
        if (is_exp_atom(f.atom)) {
            ++n_exp;
            if (f.exp != 1) plain = false;
        }
    if (n_exp == 0 || (n_exp == 1 && plain)) return m;
    RatF arg = rf_zero();
    Mono rest;
    for (Factor& f : m.f) {
        if (is_exp_atom(f.atom))
            arg = rf_add(arg, rf_scale(canon(f.atom.kid(0)), f.exp));
        else
            rest.f.push_back(std::move(f));
    }
    if (rf_is_zero(arg)) return rest;
    Expr atom = Expr::exp(rebuild(arg));
    Factor nf{to_string(atom), std::move(atom), 1};
    auto pos = std::lower_bound(rest.f.begin(), rest.f.end(), nf,
                                [](const Factor& a, const Factor& b) { return a.key < b.key; });
    rest.f.insert(pos, std::move(nf));
    return rest;
}

// ----------------------------------------------------------------- rebuild

Expr factor_tree(const Factor& f, const R& exp) {
    assert(exp > 0);
    if (exp == 1) return f.atom;
    if (exp == R(1, 2)) return Expr::sqrt(f.atom);
    return Expr::pow(f.atom, rat_exponent_tree(exp));
}

Expr mono_tree(const Mono& m, const Expr* coef) {
    std::vector<Expr> fs;
    if (coef) fs.push_back(*coef);
    for (const Factor& f : m.f) fs.push_back(factor_tree(f, f.exp));
    return Expr::product(std::move(fs));
}

Expr poly_tree(const Poly& p) {
    if (p.t.empty()) return Expr::num(0L);
    std::vector<Expr> terms;
    for (auto it = p.t.rbegin(); it != p.t.rend(); ++it) {
        const Mono& m = it->first;
        Coef c = it->second;
        bool neg = c.exact ? c.r < 0 : c.d < 0;
        if (neg) c = c_neg(c);
        Expr term = Expr::num(0L);
        bool unit = c.exact ? c.r == 1 : c.d == 1.0;
        if (m.f.empty()) {
            term = Expr::num(c.to_number());
        } else if (unit) {
            term = mono_tree(m, nullptr);
        } else {
            Expr ce = Expr::num(c.to_number());
            term = mono_tree(m, &ce);
        }
        terms.push_back(neg ? Expr::negate(term) : term);
    }
    return Expr::sum(std::move(terms));
}

struct SplitPoly {
    int sign = 1;
    R scalar = 1;       // exact magnitude; 1 when inexact coefs present
    Coef dscalar;       // inexact single-term scalar (exact 1 otherwise)
    Mono content;
    Poly prim;
};

SplitPoly split_poly(const Poly& p) {
    SplitPoly out;
    out.dscalar = Coef::one();
    out.content = p_content(p);
    Poly p2 =
        out.content.f.empty() ? p : p_mul_mono(p, mono_inv(out.content), Coef::one());
    if (p_all_exact(p2)) {
        Coef sc = p_norm_scalar(p2);
        out.prim = p_scale(p2, Coef::from_rat(R(1) / sc.r));
        if (sc.r < 0) {
            out.sign = -1;
            sc.r = -sc.r;
        }
        out.scalar = sc.r;
    } else if (p2.t.size() == 1) {
        Coef c = p2.t.begin()->second;
        double d = c.to_double();
        if (d < 0) {
            out.sign = -1;
            d = -d;
        }
        out.dscalar = Coef::from_dbl(d);
        out.prim = p_one();
    } else {
        out.prim = p2;
    }
    return out;
}

Expr combine_factors(std::vector<Expr> fs) {
    if (fs.empty()) return Expr::num(1L);
    return Expr::product(std::move(fs));
}

Expr rebuild(const RatF& rf) {
    if (p_is_zero(rf.num)) return Expr::num(0L);
    SplitPoly n = split_poly(rf.num);
    SplitPoly d = split_poly(rf.den);
    int sign = n.sign * d.sign;
    R scalar = n.scalar / d.scalar;
    Mono net = mono_mul(n.content, mono_inv(d.content));

    std::vector<Expr> top, bot;
    if (!n.dscalar.exact || !d.dscalar.exact) {
        double ds = n.dscalar.to_double() / d.dscalar.to_double();
        if (ds != 1.0) top.push_back(Expr::num(Number::inexact(ds)));
    }
    if (numerator(scalar) != 1) top.push_back(Expr::num(R(numerator(scalar))));
    if (denominator(scalar) != 1) bot.push_back(Expr::num(R(denominator(scalar))));
    for (const Factor& f : net.f) {
        if (f.exp > 0)
            top.push_back(factor_tree(f, f.exp));
        else
            bot.push_back(factor_tree(f, -f.exp));
    }
    if (!p_is_one(n.prim)) top.push_back(poly_tree(n.prim));
    if (!p_is_one(d.prim)) bot.push_back(poly_tree(d.prim));

    if (sign < 0) {
        if (!top.empty() && top[0].kind() == Kind::number)
            top[0] = Expr::num(top[0].value().negated());
        else if (!top.empty() &&
                 (top[0].kind() == Kind::variable || top[0].kind() == Kind::call))
            top[0] = Expr::negate(top[0]);
        else
            top.insert(top.begin(), Expr::num(-1L));
    }
    Expr num_tree = combine_factors(std::move(top));
    if (bot.empty()) return num_tree;
    return Expr::quotient(std::move(num_tree), combine_factors(std::move(bot)));
}

} // namespace

Expr simplify(const Expr& e) { return rebuild(canon(e)); }

bool proves_zero(const Expr& e) { return rf_is_zero(canon(e)); }

} // namespace odeq
