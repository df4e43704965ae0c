#include <odeq/jet.hpp>

#include <cmath>
#include <random>

#include <odeq/error.hpp>

namespace odeq {

Generator Generator::x1(Expr xi) { return {GenKind::x1, std::move(xi), Expr::num(0)}; }
Generator Generator::x2(Expr A) { return {GenKind::x2, Expr::num(0), std::move(A)}; }
Generator Generator::general(Expr xi, Expr A) {
    return {GenKind::general, std::move(xi), std::move(A)};
}
Generator Generator::normal_form(Expr xi) {
    return {GenKind::normal_form, std::move(xi), Expr::num(0)};
}

namespace {

constexpr int kCoeffOrderCap = 8;

// classifies a reserved jet name; order counts trailing x's on a coefficient
struct JetName {
    enum class Tag { parameter, indep, y, yp, ypp, coeff } tag = Tag::parameter;
    char root = 0;
    int order = 0;
};

JetName classify(const std::string& name, JetFamily fam) {
    JetName jn;
    if (name == "x") {
        jn.tag = JetName::Tag::indep;
        return jn;
    }
    if (name == "y") jn.tag = JetName::Tag::y;
    if (name == "yp") jn.tag = JetName::Tag::yp;
    if (name == "ypp") jn.tag = JetName::Tag::ypp;
    if (jn.tag != JetName::Tag::parameter) return jn;
    const char* roots = fam == JetFamily::ab ? "ab" : "V";
    if (!name.empty() && std::string(roots).find(name[0]) != std::string::npos &&
        name.find_first_not_of('x', 1) == std::string::npos) {
        jn.tag = JetName::Tag::coeff;
        jn.root = name[0];
        jn.order = static_cast<int>(name.size()) - 1;
    }
    return jn;
}

std::string coeff_name(char root, int order) {
    return std::string(1, root) + std::string(static_cast<std::size_t>(order), 'x');
}

// the image of a jet coordinate under d/dx, or a DomainError past the cap
Expr promote(const JetName& jn, const std::string& name) {
    switch (jn.tag) {
        case JetName::Tag::y: return Expr::var("yp");
        case JetName::Tag::yp: return Expr::var("ypp");
        case JetName::Tag::ypp:
            throw DomainError("total derivative needs a jet order beyond ypp");
        case JetName::Tag::coeff:
            if (jn.order >= kCoeffOrderCap)
                throw DomainError("total derivative of " + name +
                                  " exceeds the coefficient jet order cap");
            return Expr::var(coeff_name(jn.root, jn.order + 1));
        default: throw DomainError("not a promotable jet coordinate: " + name);
    }
}

} // namespace

Expr total_derivative_x(const Expr& e, JetFamily fam) {
    std::vector<Expr> terms;
    Expr dx = differentiate(e, "x");
    if (!dx.is_zero()) terms.push_back(dx);
    for (const std::string& name : free_variables(e)) {
        const JetName jn = classify(name, fam);
        if (jn.tag == JetName::Tag::parameter || jn.tag == JetName::Tag::indep) continue;
        Expr d = differentiate(e, name);
        if (d.is_zero() || proves_zero(d)) continue;
        terms.push_back(promote(jn, name) * d);
    }
    return simplify(Expr::sum(std::move(terms)));
}

namespace {

Expr d(const Expr& f) { return differentiate(f, "x"); }

} // namespace

Prolonged prolong2(const Generator& g, int coeff_order) {
    if (coeff_order < 0 || coeff_order > kCoeffOrderCap)
        throw DomainError("prolongation coefficient order must lie in [0, 8]");
    const JetFamily fam = g.family();
    Prolonged p;
    p.family = fam;

    const Expr y = Expr::var("y");
    const Expr a = Expr::var("a");
    const Expr b = Expr::var("b");
    const Expr V = Expr::var("V");

    std::vector<Expr> mus; // base coefficients, one per coefficient root
    switch (g.kind) {
        case GenKind::x1:
            p.xi = g.xi;
            p.eta = Expr::num(0);
            mus = {d(d(g.xi)) - a * d(g.xi), Expr::num(-2) * b * d(g.xi)};
            break;
        case GenKind::x2:
            p.xi = Expr::num(0);
            p.eta = g.A * y;
            mus = {Expr::num(-2) * d(g.A), -(d(d(g.A)) + a * d(g.A))};
            break;
        case GenKind::general:
            p.xi = g.xi;
            p.eta = g.A * y;
            mus = {d(d(g.xi)) - a * d(g.xi) - Expr::num(2) * d(g.A),
                   -(d(d(g.A)) + a * d(g.A) + Expr::num(2) * b * d(g.xi))};
            break;
        case GenKind::normal_form:
            p.xi = Expr::num(2) * g.xi;
            p.eta = d(g.xi) * y;
            mus = {-(d(d(d(g.xi))) + Expr::num(4) * d(g.xi) * V)};
            break;
    }
    p.xi = simplify(p.xi);
    p.eta = simplify(p.eta);

    const Expr dxi = total_derivative_x(p.xi, fam);
    p.zeta1 = simplify(total_derivative_x(p.eta, fam) - Expr::var("yp") * dxi);
    p.zeta11 = simplify(total_derivative_x(p.zeta1, fam) - Expr::var("ypp") * dxi);

    const std::string roots = fam == JetFamily::ab ? "ab" : "V";
    for (std::size_t i = 0; i < roots.size(); ++i) {
        std::vector<Expr> chain;
        chain.push_back(simplify(mus[i]));
        for (int k = 1; k <= coeff_order; ++k) {
            const Expr next = Expr::var(coeff_name(roots[i], k));
            chain.push_back(simplify(total_derivative_x(chain.back(), fam) - next * dxi));
        }
        (i == 0 ? p.nu_a : p.nu_b) = std::move(chain);
    }
    return p;
}

namespace {

void accumulate(std::vector<Expr>& terms, const Expr& coeff, const Expr& omega,
                const std::string& name) {
    if (coeff.is_zero()) return;
    Expr dw = differentiate(omega, name);
    if (dw.is_zero() || proves_zero(dw)) return;
    terms.push_back(coeff * dw);
}

// highest coefficient-jet order appearing in omega
int coeff_order_of(const Expr& omega, JetFamily fam) {
    int order = 0;
    for (const std::string& name : free_variables(omega)) {
        const JetName jn = classify(name, fam);
        if (jn.tag == JetName::Tag::coeff && jn.order > order) order = jn.order;
    }
    return order;
}

} // namespace

Expr apply_prolonged(const Prolonged& p, const Expr& omega) {
    std::vector<Expr> terms;
    accumulate(terms, p.xi, omega, "x");
    accumulate(terms, p.eta, omega, "y");
    accumulate(terms, p.zeta1, omega, "yp");
    accumulate(terms, p.zeta11, omega, "ypp");
    const std::string roots = p.family == JetFamily::ab ? "ab" : "V";
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const auto& chain = i == 0 ? p.nu_a : p.nu_b;
        for (std::size_t k = 0; k < chain.size(); ++k)
            accumulate(terms, chain[k], omega, coeff_name(roots[i], static_cast<int>(k)));
    }
    Expr applied = Expr::sum(std::move(terms));
    // restrict to the equation manifold
    const Expr rhs = p.family == JetFamily::ab
                         ? -(Expr::var("a") * Expr::var("yp") + Expr::var("b") * Expr::var("y"))
                         : -(Expr::var("V") * Expr::var("y"));
    return simplify(substitute(applied, "ypp", rhs));
}

Expr apply_prolonged(const Generator& g, const Expr& omega) {
    return apply_prolonged(prolong2(g, coeff_order_of(omega, g.family())), omega);
}

Expr determining_residual(const Expr& xi, const Expr& A) {
    const Expr family_eq = Expr::var("ypp") + Expr::var("a") * Expr::var("yp") +
                           Expr::var("b") * Expr::var("y");
    return apply_prolonged(Generator::general(xi, A), family_eq);
}

Expr annihilation_check(const Generator& g, const Expr& omega) {
    return apply_prolonged(g, omega);
}

bool certify_zero(const Expr& e, double tol) {
    const Expr s = simplify(e);
    if (proves_zero(s)) return true;
    const auto vars = free_variables(s);
    std::mt19937 rng(0x5eed5u);
    std::uniform_real_distribution<double> pick(0.4, 1.9);
    int accepted = 0;
    for (int attempt = 0; attempt < 64 && accepted < 12; ++attempt) {
        Bindings env;
        for (const auto& v : vars) env.set(v, pick(rng));
        try {
            const double val = eval(s, env);
            if (!std::isfinite(val) || std::abs(val) > tol) return false;
            ++accepted;
        } catch (const EvalError&) {
            continue; // singular sample; try another point
        }
    }
    return accepted > 0;
}

} // namespace odeq
