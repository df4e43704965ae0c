#pragma once

#include <string>
#include <vector>

#include <odeq/expr.hpp>
#include <odeq/ode.hpp>

namespace odeq {

// a^2/b + a b'/b^2 + b'^2/(4 b^3); needs b nonvanishing on the interval
Expr omega13(const Ode2& ode);

// invariant differentiation for the x-subgroup: (1/sqrt(|b|)) d/dx, with
// |b| resolved by the constant sign of b on the interval
Expr q1_derive(const Ode2& ode, const Expr& e);

// a^2 - 4b + 2a'
Expr omega23(const Ode2& ode);

// the parameterized invariants: b xi^2, and a + 2(A'/A) ln(y') (printed
// form) or a + 2(A'/A) ln(y) — see omega22_jet for which one the
// infinitesimal check accepts
Expr omega12(const Ode2& ode, const Expr& xi);

enum class Omega22Variant { ln_yp, ln_y };
Expr omega22(const Ode2& ode, const Expr& A, Omega22Variant variant);

// normal-form invariants for a fixed xi: V xi^2 + xi xi''/2 - xi'^2/4 and
// its Q = xi d/dx derivative
Expr nf_omega1(const Expr& V, const Expr& xi, const std::string& var = "x");
Expr nf_omega2(const Expr& V, const Expr& xi, const std::string& var = "x");

enum class ChainGroup { x1, x2 };

struct InvariantChain {
    ChainGroup group = ChainGroup::x1;
    std::string var = "x";
    std::vector<Expr> exprs;                  // depth + 1 entries
    std::vector<double> grid;
    std::vector<std::vector<double>> values;  // values[i][j] = exprs[i] at grid[j]
};

// [omega13, Q1 omega13, ...]; default grid = coefficient_grid(ode)
InvariantChain chain_x1(const Ode2& ode, int depth, const std::vector<double>& grid);
InvariantChain chain_x1(const Ode2& ode, int depth = 2);

// [omega23, omega23', ...]
InvariantChain chain_x2(const Ode2& ode, int depth, const std::vector<double>& grid);
InvariantChain chain_x2(const Ode2& ode, int depth = 2);

// jet-space forms over {a, b, ax, bx, ...} for prolongation cross-checks
Expr omega13_jet();
Expr omega23_jet();
Expr omega12_jet(const Expr& xi);
Expr omega22_jet(const Expr& A, Omega22Variant variant);
Expr nf_omega1_jet(const Expr& xi);
Expr nf_omega2_jet(const Expr& xi);

// the x-subgroup chain in jet space, on the b > 0 branch
std::vector<Expr> chain_x1_jet(int depth);

} // namespace odeq
