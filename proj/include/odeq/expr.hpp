#ifndef ODEQ_EXPR_HPP
#define ODEQ_EXPR_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "odeq/error.hpp"

namespace odeq {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// A scalar constant: exact rational by default, IEEE double once any
// inexact quantity enters.  Arithmetic stays exact until the first
// exact/inexact mix, then degrades to double for good.
class Number {
public:
    Number() : exact_(true), rat_(0), dbl_(0) {}

    static Number exact(Rational r) {
        Number n;
        n.exact_ = true;
        n.rat_ = std::move(r);
        return n;
    }
    static Number inexact(double d) {
        Number n;
        n.exact_ = false;
        n.dbl_ = d;
        return n;
    }

    bool is_exact() const { return exact_; }
    const Rational& rat() const { return rat_; }
    double as_double() const;

    bool is_zero() const { return exact_ ? rat_ == 0 : dbl_ == 0.0; }
    bool is_one() const { return exact_ ? rat_ == 1 : dbl_ == 1.0; }
    bool is_integer() const;
    bool is_negative() const { return exact_ ? rat_ < 0 : dbl_ < 0.0; }

    Number operator+(const Number& o) const;
    Number operator-(const Number& o) const;
    Number operator*(const Number& o) const;
    Number negated() const;
    bool operator==(const Number& o) const;

private:
    bool exact_;
    Rational rat_;
    double dbl_;
};

enum class Kind {
    number,
    variable,
    sum,       // n-ary
    product,   // n-ary
    quotient,  // binary
    power,     // binary, right operand is the exponent
    negate,    // unary
    call,      // unary named function
};

enum class Fn { exp, ln, sin, cos, sqrt, abs };

const char* fn_name(Fn f);

// Immutable expression tree with shared structure.  Cheap to copy;
// all rewriting builds new nodes.
class Expr {
public:
    Expr(); // exact 0

    static Expr num(long v);
    static Expr num(int v) { return num(static_cast<long>(v)); }
    static Expr num(const Rational& v);
    static Expr num(const Number& v);
    static Expr num(double v); // integral doubles become exact
    static Expr rat(long num, long den);
    static Expr var(std::string name);
    static Expr sum(std::vector<Expr> terms);      // 0 / single term collapse
    static Expr product(std::vector<Expr> factors);
    static Expr quotient(Expr num, Expr den);
    static Expr pow(Expr base, Expr exponent);
    static Expr pow(Expr base, long exponent);
    static Expr negate(Expr e);
    static Expr call(Fn f, Expr arg);

    static Expr exp(Expr e) { return call(Fn::exp, std::move(e)); }
    static Expr ln(Expr e) { return call(Fn::ln, std::move(e)); }
    static Expr sin(Expr e) { return call(Fn::sin, std::move(e)); }
    static Expr cos(Expr e) { return call(Fn::cos, std::move(e)); }
    static Expr sqrt(Expr e) { return call(Fn::sqrt, std::move(e)); }
    static Expr abs(Expr e) { return call(Fn::abs, std::move(e)); }

    Kind kind() const;
    const Number& value() const;      // kind() == number
    const std::string& name() const;  // kind() == variable
    Fn fn() const;                    // kind() == call
    const std::vector<Expr>& operands() const;
    const Expr& kid(std::size_t i) const { return operands()[i]; }
    std::size_t arity() const { return operands().size(); }

    bool is_number() const { return kind() == Kind::number; }
    bool is_zero() const { return is_number() && value().is_zero(); }
    bool is_one() const { return is_number() && value().is_one(); }

    // Identity of the underlying node, for caching.
    const void* id() const { return node_.get(); }

private:
    struct Node;
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Exact structural comparison (same shape, same constants).
bool structurally_equal(const Expr& a, const Expr& b);

std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, const std::string& var);

Expr substitute(const Expr& e, const std::string& var, const Expr& replacement);

// Text form; parse(to_string(e)) reproduces the same tree for any
// printer output.
std::string to_string(const Expr& e);

// Recursive-descent parser for the expression grammar used across the
// tool: + - * / ^ with usual precedence, ^ right-associative, unary
// minus, calls exp/ln/sin/cos/sqrt/abs, integer and decimal literals
// (decimals are read exactly as rationals).  Throws SyntaxError.
Expr parse(const std::string& text);

Expr differentiate(const Expr& e, const std::string& var);

class Bindings {
public:
    Bindings() = default;
    Bindings(std::initializer_list<std::pair<const std::string, double>> init) : m_(init) {}
    Bindings& set(const std::string& name, double v) {
        m_[name] = v;
        return *this;
    }
    const double* find(const std::string& name) const {
        auto it = m_.find(name);
        return it == m_.end() ? nullptr : &it->second;
    }

private:
    std::map<std::string, double> m_;
};

// Throws EvalError on unbound variables and domain violations
// (division by zero, ln of a non-positive value, sqrt of a negative).
double eval(const Expr& e, const Bindings& env);
double eval1(const Expr& e, const std::string& var, double x);

// Canonical form: collects the expression into a ratio of multivariate
// Laurent polynomials over atoms (variables, function calls, opaque
// subtrees), merges exp factors, folds rational powers where valid for
// all real bindings, cancels common content, and rebuilds a tree with
// integer-primitive coefficients.  Idempotent; total (never throws on
// well-formed trees).
Expr simplify(const Expr& e);

// simplify(a - b) is exactly zero.
bool proves_zero(const Expr& e);

// max_j |a(x_j) - b(x_j)| <= tol * max(1, max_j |a|, max_j |b|) over the grid.
bool equal_numeric(const Expr& a, const Expr& b, const std::string& var,
                   const std::vector<double>& grid, double tol);

// Nearest rational with denominator <= max_den (continued fractions);
// engaged only if |x - p/q| <= tol * max(1, |x|).
std::optional<Rational> snap_rational(double x, long max_den, double tol);

} // namespace odeq

#endif
