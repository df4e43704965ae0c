#include "odeq/expr.hpp"

namespace odeq {

namespace {

// Zero/one-aware constructors keep iterated derivatives from ballooning
// before simplify sees them.
Expr dsum(std::vector<Expr> terms) {
    std::vector<Expr> keep;
    for (Expr& t : terms)
        if (!t.is_zero()) keep.push_back(std::move(t));
    return Expr::sum(std::move(keep));
}

Expr dmul(std::vector<Expr> factors) {
    std::vector<Expr> keep;
    for (Expr& f : factors) {
        if (f.is_zero()) return Expr::num(0L);
        if (!f.is_one()) keep.push_back(std::move(f));
    }
    return Expr::product(std::move(keep));
}

Expr ddiv(Expr num, Expr den) {
    if (num.is_zero()) return num;
    if (den.is_one()) return num;
    return Expr::quotient(std::move(num), std::move(den));
}

Expr d(const Expr& e, const std::string& var) {
    switch (e.kind()) {
        case Kind::number:
            return Expr::num(0L);
        case Kind::variable:
            return Expr::num(e.name() == var ? 1L : 0L);
        case Kind::sum: {
            std::vector<Expr> parts;
            for (const Expr& t : e.operands()) parts.push_back(d(t, var));
            return dsum(std::move(parts));
        }
        case Kind::product: {
            std::vector<Expr> parts;
            const auto& fs = e.operands();
            for (std::size_t i = 0; i < fs.size(); ++i) {
                Expr di = d(fs[i], var);
                if (di.is_zero()) continue;
                std::vector<Expr> term{di};
                for (std::size_t j = 0; j < fs.size(); ++j)
                    if (j != i) term.push_back(fs[j]);
                parts.push_back(dmul(std::move(term)));
            }
            return dsum(std::move(parts));
        }
        case Kind::quotient: {
            const Expr& u = e.kid(0);
            const Expr& v = e.kid(1);
            Expr du = d(u, var);
            Expr dv = d(v, var);
            if (dv.is_zero()) return ddiv(du, v);
            Expr num = dsum({dmul({du, v}), Expr::negate(dmul({u, dv}))});
            return ddiv(std::move(num), Expr::pow(v, 2));
        }
        case Kind::power: {
            const Expr& u = e.kid(0);
            const Expr& p = e.kid(1);
            Expr du = d(u, var);
            Expr dp = d(p, var);
            if (dp.is_zero()) {
                // p constant in var: p * u^(p-1) * u'
                if (du.is_zero()) return Expr::num(0L);
                Expr pm1 = Expr::sum({p, Expr::num(-1L)});
                return dmul({p, Expr::pow(u, pm1), du});
            }
            // General: u^p * (p' ln u + p u'/u)
            Expr inner = dsum({dmul({dp, Expr::ln(u)}), ddiv(dmul({p, du}), u)});
            return dmul({e, inner});
        }
        case Kind::negate: {
            Expr du = d(e.kid(0), var);
            if (du.is_zero()) return du;
            return Expr::negate(du);
        }
        case Kind::call: {
            const Expr& u = e.kid(0);
            Expr du = d(u, var);
            if (du.is_zero()) return du;
            switch (e.fn()) {
                case Fn::exp: return dmul({e, du});
                case Fn::ln: return ddiv(du, u);
                case Fn::sin: return dmul({Expr::cos(u), du});
                case Fn::cos: return Expr::negate(dmul({Expr::sin(u), du}));
                case Fn::sqrt: return ddiv(du, dmul({Expr::num(2L), e}));
                case Fn::abs:
                    // d|u| = u' * |u|/u away from u = 0
                    return dmul({du, Expr::quotient(e, u)});
            }
            return Expr::num(0L);
        }
    }
    return Expr::num(0L);
}

} // namespace

Expr differentiate(const Expr& e, const std::string& var) { return d(e, var); }

} // namespace odeq
