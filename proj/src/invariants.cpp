#include <odeq/invariants.hpp>

#include <odeq/error.hpp>
#include <odeq/jet.hpp>
#include <odeq/numeric.hpp>

namespace odeq {

namespace {

Expr omega13_of(const Expr& a, const Expr& b, const std::string& var) {
    const Expr bp = differentiate(b, var);
    return simplify(a * a / b + a * bp / (b * b) +
                    bp * bp / (Expr::num(4) * b * b * b));
}

Expr omega23_of(const Expr& a, const Expr& b, const std::string& var) {
    return simplify(a * a - Expr::num(4) * b + Expr::num(2) * differentiate(a, var));
}

} // namespace

Expr omega13(const Ode2& ode) {
    sign_on_interval(ode.b, ode.var, ode.interval); // b must keep one sign
    return omega13_of(ode.a, ode.b, ode.var);
}

Expr q1_derive(const Ode2& ode, const Expr& e) {
    const int s = sign_on_interval(ode.b, ode.var, ode.interval);
    const Expr root = Expr::sqrt(s > 0 ? ode.b : simplify(-ode.b));
    return simplify(differentiate(e, ode.var) / root);
}

Expr omega23(const Ode2& ode) { return omega23_of(ode.a, ode.b, ode.var); }

Expr omega12(const Ode2& ode, const Expr& xi) { return simplify(ode.b * xi * xi); }

namespace {

Expr omega22_of(const Expr& a, const Expr& A, const std::string& var, const Expr& jet) {
    const Expr ratio = differentiate(A, var) / A;
    return simplify(a + Expr::num(2) * ratio * Expr::ln(jet));
}

} // namespace

Expr omega22(const Ode2& ode, const Expr& A, Omega22Variant variant) {
    sign_on_interval(A, ode.var, ode.interval); // A must not vanish
    const Expr jet = Expr::var(variant == Omega22Variant::ln_yp ? "yp" : "y");
    return omega22_of(ode.a, A, ode.var, jet);
}

Expr nf_omega1(const Expr& V, const Expr& xi, const std::string& var) {
    const Expr xip = differentiate(xi, var);
    const Expr xipp = differentiate(xip, var);
    return simplify(V * xi * xi + Expr::rat(1, 2) * xi * xipp -
                    Expr::rat(1, 4) * xip * xip);
}

Expr nf_omega2(const Expr& V, const Expr& xi, const std::string& var) {
    return simplify(xi * differentiate(nf_omega1(V, xi, var), var));
}

namespace {

InvariantChain build_chain(ChainGroup group, const Ode2& ode, int depth,
                           const std::vector<double>& grid) {
    if (depth < 0) throw DomainError("chain depth must be nonnegative");
    InvariantChain chain;
    chain.group = group;
    chain.var = ode.var;
    chain.grid = grid;
    chain.exprs.reserve(static_cast<std::size_t>(depth) + 1);
    chain.exprs.push_back(group == ChainGroup::x1 ? omega13(ode) : omega23(ode));
    for (int i = 0; i < depth; ++i) {
        const Expr& prev = chain.exprs.back();
        chain.exprs.push_back(group == ChainGroup::x1
                                  ? q1_derive(ode, prev)
                                  : simplify(differentiate(prev, ode.var)));
    }
    chain.values.reserve(chain.exprs.size());
    for (const Expr& e : chain.exprs) {
        std::vector<double> row;
        row.reserve(grid.size());
        for (double x : grid) row.push_back(eval1(e, ode.var, x));
        chain.values.push_back(std::move(row));
    }
    return chain;
}

} // namespace

InvariantChain chain_x1(const Ode2& ode, int depth, const std::vector<double>& grid) {
    return build_chain(ChainGroup::x1, ode, depth, grid);
}

InvariantChain chain_x1(const Ode2& ode, int depth) {
    return chain_x1(ode, depth, coefficient_grid(ode));
}

InvariantChain chain_x2(const Ode2& ode, int depth, const std::vector<double>& grid) {
    return build_chain(ChainGroup::x2, ode, depth, grid);
}

InvariantChain chain_x2(const Ode2& ode, int depth) {
    return chain_x2(ode, depth, coefficient_grid(ode));
}

Expr omega13_jet() {
    const Expr a = Expr::var("a"), b = Expr::var("b"), bx = Expr::var("bx");
    return simplify(a * a / b + a * bx / (b * b) +
                    bx * bx / (Expr::num(4) * b * b * b));
}

Expr omega23_jet() {
    // d/dx on jet space sends a to ax, so the 2a' term is the jet ax
    return simplify(Expr::var("a") * Expr::var("a") - Expr::num(4) * Expr::var("b") +
                    Expr::num(2) * Expr::var("ax"));
}

Expr omega12_jet(const Expr& xi) { return simplify(Expr::var("b") * xi * xi); }

Expr omega22_jet(const Expr& A, Omega22Variant variant) {
    const Expr jet = Expr::var(variant == Omega22Variant::ln_yp ? "yp" : "y");
    return omega22_of(Expr::var("a"), A, "x", jet);
}

Expr nf_omega1_jet(const Expr& xi) {
    const Expr xip = differentiate(xi, "x");
    const Expr xipp = differentiate(xip, "x");
    return simplify(Expr::var("V") * xi * xi + Expr::rat(1, 2) * xi * xipp -
                    Expr::rat(1, 4) * xip * xip);
}

Expr nf_omega2_jet(const Expr& xi) {
    return simplify(xi * total_derivative_x(nf_omega1_jet(xi), JetFamily::v));
}

std::vector<Expr> chain_x1_jet(int depth) {
    std::vector<Expr> chain{omega13_jet()};
    for (int i = 0; i < depth; ++i)
        chain.push_back(
            simplify(total_derivative_x(chain.back()) / Expr::sqrt(Expr::var("b"))));
    return chain;
}

} // namespace odeq
