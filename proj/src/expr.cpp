#include "odeq/expr.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "num_io.hpp"

namespace odeq {

double Number::as_double() const {
    if (!exact_) return dbl_;
    return rat_.convert_to<double>();
}

bool Number::is_integer() const {
    if (exact_) return denominator(rat_) == 1;
    return std::isfinite(dbl_) && std::floor(dbl_) == dbl_;
}

Number Number::operator+(const Number& o) const {
    if (exact_ && o.exact_) return exact(rat_ + o.rat_);
    return inexact(as_double() + o.as_double());
}

Number Number::operator-(const Number& o) const {
    if (exact_ && o.exact_) return exact(rat_ - o.rat_);
    return inexact(as_double() - o.as_double());
}

Number Number::operator*(const Number& o) const {
    if (exact_ && o.exact_) return exact(rat_ * o.rat_);
    return inexact(as_double() * o.as_double());
}

Number Number::negated() const {
    return exact_ ? exact(-rat_) : inexact(-dbl_);
}

bool Number::operator==(const Number& o) const {
    if (exact_ != o.exact_) return false;
    return exact_ ? rat_ == o.rat_ : dbl_ == o.dbl_;
}

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::exp: return "exp";
        case Fn::ln: return "ln";
        case Fn::sin: return "sin";
        case Fn::cos: return "cos";
        case Fn::sqrt: return "sqrt";
        case Fn::abs: return "abs";
    }
    return "?";
}

struct Expr::Node {
    Kind kind;
    Number num;
    std::string name;
    Fn fn = Fn::exp;
    std::vector<Expr> kids;
};

Expr::Expr() : node_(std::make_shared<Node>(Node{Kind::number, Number(), {}, Fn::exp, {}})) {}

Kind Expr::kind() const { return node_->kind; }

Expr Expr::num(long v) { return num(Rational(v)); }

Expr Expr::num(const Rational& v) {
    Node n;
    n.kind = Kind::number;
    n.num = Number::exact(v);
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::num(const Number& v) {
    Node n;
    n.kind = Kind::number;
    n.num = v;
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::num(double v) {
    if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) <= 9.007199254740992e15)
        return num(Rational(static_cast<long long>(v)));
    return num(Number::inexact(v));
}

Expr Expr::rat(long p, long q) { return num(Rational(p, q)); }

Expr Expr::var(std::string name) {
    Node n;
    n.kind = Kind::variable;
    n.name = std::move(name);
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::sum(std::vector<Expr> terms) {
    if (terms.empty()) return num(0L);
    if (terms.size() == 1) return terms[0];
    Node n;
    n.kind = Kind::sum;
    n.kids = std::move(terms);
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::product(std::vector<Expr> factors) {
    if (factors.empty()) return num(1L);
    if (factors.size() == 1) return factors[0];
    Node n;
    n.kind = Kind::product;
    n.kids = std::move(factors);
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::quotient(Expr num_, Expr den) {
    Node n;
    n.kind = Kind::quotient;
    n.kids = {std::move(num_), std::move(den)};
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::pow(Expr base, Expr exponent) {
    Node n;
    n.kind = Kind::power;
    n.kids = {std::move(base), std::move(exponent)};
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::pow(Expr base, long exponent) { return pow(std::move(base), num(exponent)); }

Expr Expr::negate(Expr e) {
    Node n;
    n.kind = Kind::negate;
    n.kids = {std::move(e)};
    return Expr(std::make_shared<Node>(std::move(n)));
}

Expr Expr::call(Fn f, Expr arg) {
    Node n;
    n.kind = Kind::call;
    n.fn = f;
    n.kids = {std::move(arg)};
    return Expr(std::make_shared<Node>(std::move(n)));
}

const Number& Expr::value() const {
    assert(kind() == Kind::number);
    return node_->num;
}

const std::string& Expr::name() const {
    assert(kind() == Kind::variable);
    return node_->name;
}

Fn Expr::fn() const {
    assert(kind() == Kind::call);
    return node_->fn;
}

const std::vector<Expr>& Expr::operands() const { return node_->kids; }

Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sum({a, Expr::negate(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::quotient(a, b); }
Expr operator-(const Expr& a) { return Expr::negate(a); }

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.id() == b.id()) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Kind::number: return a.value() == b.value();
        case Kind::variable: return a.name() == b.name();
        case Kind::call:
            if (a.fn() != b.fn()) return false;
            break;
        default: break;
    }
    if (a.arity() != b.arity()) return false;
    for (std::size_t i = 0; i < a.arity(); ++i)
        if (!structurally_equal(a.kid(i), b.kid(i))) return false;
    return true;
}

namespace {

void collect_vars(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == Kind::variable) {
        out.insert(e.name());
        return;
    }
    for (const Expr& k : e.operands()) collect_vars(k, out);
}

} // namespace

std::set<std::string> free_variables(const Expr& e) {
    std::set<std::string> out;
    collect_vars(e, out);
    return out;
}

bool depends_on(const Expr& e, const std::string& var) {
    if (e.kind() == Kind::variable) return e.name() == var;
    for (const Expr& k : e.operands())
        if (depends_on(k, var)) return true;
    return false;
}

Expr substitute(const Expr& e, const std::string& var, const Expr& replacement) {
    switch (e.kind()) {
        case Kind::number: return e;
        case Kind::variable: return e.name() == var ? replacement : e;
        default: break;
    }
    if (!depends_on(e, var)) return e;
    std::vector<Expr> kids;
    kids.reserve(e.arity());
    for (const Expr& k : e.operands()) kids.push_back(substitute(k, var, replacement));
    switch (e.kind()) {
        case Kind::sum: return Expr::sum(std::move(kids));
        case Kind::product: return Expr::product(std::move(kids));
        case Kind::quotient: return Expr::quotient(kids[0], kids[1]);
        case Kind::power: return Expr::pow(kids[0], kids[1]);
        case Kind::negate: return Expr::negate(kids[0]);
        case Kind::call: return Expr::call(e.fn(), kids[0]);
        default: break;
    }
    return e; // unreachable
}

// ---------------------------------------------------------------- printing

namespace detail {

std::string format_double(double v) {
    char buf[40];
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::optional<Rational> rational_from_number_literal(const std::string& text) {
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto digits = [&](BigInt& acc, std::size_t& count) {
        count = 0;
        while (i < n && text[i] >= '0' && text[i] <= '9') {
            acc = acc * 10 + (text[i] - '0');
            ++i;
            ++count;
        }
    };
    BigInt mant = 0;
    std::size_t k = 0;
    digits(mant, k);
    if (k == 0) return std::nullopt;
    long frac_digits = 0;
    if (i < n && text[i] == '.') {
        ++i;
        std::size_t fk = 0;
        digits(mant, fk);
        if (fk == 0) return std::nullopt;
        frac_digits = static_cast<long>(fk);
    }
    long exp10 = 0;
    if (i < n && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool neg = false;
        if (i < n && (text[i] == '+' || text[i] == '-')) {
            neg = text[i] == '-';
            ++i;
        }
        BigInt e = 0;
        std::size_t ek = 0;
        digits(e, ek);
        if (ek == 0 || e > 4000) return std::nullopt;
        exp10 = e.convert_to<long>();
        if (neg) exp10 = -exp10;
    }
    if (i != n) return std::nullopt;
    long net = exp10 - frac_digits;
    Rational r(mant);
    if (net > 0)
        r *= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(net)));
    else if (net < 0)
        r /= Rational(boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(-net)));
    return r;
}

std::string number_token(const Number& n) {
    if (!n.is_exact()) return format_double(n.as_double());
    const Rational& r = n.rat();
    if (denominator(r) == 1) return numerator(r).str();
    // Prefer a decimal token when it reads back exactly; "p/q" otherwise.
    std::string dec = format_double(n.as_double());
    if (auto back = rational_from_number_literal(dec[0] == '-' ? dec.substr(1) : dec)) {
        Rational signed_back = dec[0] == '-' ? Rational(-*back) : *back;
        if (signed_back == r) return dec;
    }
    return numerator(r).str() + "/" + denominator(r).str();
}

} // namespace detail

namespace {

// Precedence levels: sum 0, product/quotient/negate 1, power 2, atom 3.
// An operand is parenthesized when its level is below the context level.
int print_level(const Expr& e) {
    switch (e.kind()) {
        case Kind::sum: return 0;
        case Kind::product:
        case Kind::quotient:
        case Kind::negate: return 1;
        case Kind::power: return 2;
        case Kind::number: {
            const Number& v = e.value();
            if (v.is_negative()) return 1;
            if (v.is_exact() && denominator(v.rat()) != 1) {
                // May print as "p/q" (a quotient); decimal tokens are atoms.
                std::string tok = detail::number_token(v);
                return tok.find('/') == std::string::npos ? 3 : 1;
            }
            return 3;
        }
        default: return 3;
    }
}

void print_rec(const Expr& e, int context, std::string& out);

void print_wrapped(const Expr& e, int context, std::string& out) {
    if (print_level(e) < context) {
        out += '(';
        print_rec(e, 0, out);
        out += ')';
    } else {
        print_rec(e, context, out);
    }
}

bool is_negative_number(const Expr& e) {
    return e.kind() == Kind::number && e.value().is_negative();
}

void print_rec(const Expr& e, int context, std::string& out) {
    switch (e.kind()) {
        case Kind::number:
            out += detail::number_token(e.value());
            return;
        case Kind::variable:
            out += e.name();
            return;
        case Kind::sum: {
            bool first = true;
            for (const Expr& t : e.operands()) {
                if (first) {
                    print_wrapped(t, context > 1 ? context : 0, out);
                    first = false;
                    continue;
                }
                if (t.kind() == Kind::negate) {
                    out += " - ";
                    print_wrapped(t.kid(0), 1, out);
                } else if (is_negative_number(t)) {
                    out += " - ";
                    print_rec(Expr::num(t.value().negated()), 1, out);
                } else {
                    out += " + ";
                    print_wrapped(t, 1, out);
                }
            }
            return;
        }
        case Kind::product: {
            bool first = true;
            for (const Expr& f : e.operands()) {
                if (first && is_negative_number(f)) {
                    // "-c*x" parses back to the same tree (the sign folds
                    // into the leading literal).
                    out += '-';
                    print_wrapped(Expr::num(f.value().negated()), 2, out);
                    first = false;
                    continue;
                }
                if (!first) out += '*';
                print_wrapped(f, 2, out);
                first = false;
            }
            return;
        }
        case Kind::quotient:
            print_wrapped(e.kid(0), 1, out);
            out += '/';
            print_wrapped(e.kid(1), 2, out);
            return;
        case Kind::power:
            print_wrapped(e.kid(0), 3, out);
            out += '^';
            print_wrapped(e.kid(1), 2, out);
            return;
        case Kind::negate:
            out += '-';
            print_wrapped(e.kid(0), 3, out);
            return;
        case Kind::call:
            out += fn_name(e.fn());
            out += '(';
            print_rec(e.kid(0), 0, out);
            out += ')';
            return;
    }
}

} // namespace

std::string to_string(const Expr& e) {
    std::string out;
    out.reserve(64);
    print_rec(e, 0, out);
    return out;
}

std::optional<Rational> snap_rational(double x, long max_den, double tol) {
    if (!std::isfinite(x)) return std::nullopt;
    double ax = std::fabs(x);
    // Continued fraction convergents p/q with q <= max_den.
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double v = ax;
    long best_p = 0, best_q = 1;
    for (int it = 0; it < 64; ++it) {
        if (v > 1e15) break;
        double fl = std::floor(v);
        long a = static_cast<long>(fl);
        long p2 = a * p1 + p0;
        long q2 = a * q1 + q0;
        if (q2 > max_den || q2 <= 0) break;
        best_p = p2;
        best_q = q2;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double rem = v - fl;
        if (rem < 1e-18) break;
        v = 1.0 / rem;
    }
    if (best_q <= 0) return std::nullopt;
    double approx = static_cast<double>(best_p) / static_cast<double>(best_q);
    if (std::fabs(ax - approx) > tol * std::max(1.0, ax)) return std::nullopt;
    Rational r(best_p, best_q);
    if (x < 0) r = -r;
    return r;
}

} // namespace odeq
