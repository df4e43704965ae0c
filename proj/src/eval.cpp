#include <cmath>

#include "odeq/expr.hpp"

namespace odeq {

namespace {

[[noreturn]] void eval_fail(const std::string& what, const Expr& at) {
    throw EvalError(what + " in '" + to_string(at) + "'");
}

double ev(const Expr& e, const Bindings& env) {
    switch (e.kind()) {
        case Kind::number:
            return e.value().as_double();
        case Kind::variable: {
            const double* v = env.find(e.name());
            if (!v) throw EvalError("unbound variable '" + e.name() + "'");
            return *v;
        }
        case Kind::sum: {
            double s = 0;
            for (const Expr& t : e.operands()) s += ev(t, env);
            return s;
        }
        case Kind::product: {
            double p = 1;
            for (const Expr& f : e.operands()) p *= ev(f, env);
            return p;
        }
        case Kind::quotient: {
            double den = ev(e.kid(1), env);
            if (den == 0.0) eval_fail("division by zero", e);
            return ev(e.kid(0), env) / den;
        }
        case Kind::power: {
            double b = ev(e.kid(0), env);
            double p = ev(e.kid(1), env);
            if (b == 0.0) {
                if (p > 0) return 0.0;
                if (p == 0) return 1.0;
                eval_fail("zero raised to a negative power", e);
            }
            if (b < 0 && std::floor(p) != p)
                eval_fail("negative base with fractional exponent", e);
            return std::pow(b, p);
        }
        case Kind::negate:
            return -ev(e.kid(0), env);
        case Kind::call: {
            double u = ev(e.kid(0), env);
            switch (e.fn()) {
                case Fn::exp: return std::exp(u);
                case Fn::ln:
                    if (u <= 0.0) eval_fail("ln of a non-positive value", e);
                    return std::log(u);
                case Fn::sin: return std::sin(u);
                case Fn::cos: return std::cos(u);
                case Fn::sqrt:
                    if (u < 0.0) eval_fail("sqrt of a negative value", e);
                    return std::sqrt(u);
                case Fn::abs: return std::fabs(u);
            }
            return 0;
        }
    }
    return 0;
}

} // namespace

double eval(const Expr& e, const Bindings& env) { return ev(e, env); }

double eval1(const Expr& e, const std::string& var, double x) {
    Bindings env;
    env.set(var, x);
    return ev(e, env);
}

bool equal_numeric(const Expr& a, const Expr& b, const std::string& var,
                   const std::vector<double>& grid, double tol) {
    double max_dev = 0, max_mag = 1;
    for (double x : grid) {
        double va = eval1(a, var, x);
        double vb = eval1(b, var, x);
        if (!std::isfinite(va) || !std::isfinite(vb)) return false;
        max_dev = std::max(max_dev, std::fabs(va - vb));
        max_mag = std::max({max_mag, std::fabs(va), std::fabs(vb)});
    }
    return max_dev <= tol * max_mag;
}

} // namespace odeq
