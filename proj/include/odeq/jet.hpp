#pragma once

#include <string>
#include <vector>

#include <odeq/expr.hpp>

namespace odeq {

// Jet-space vocabulary.  Reserved names: x; y, yp, ypp; the coefficient
// jets a, ax, axx, ... and b, bx, ... (family ab), or V, Vx, ... (family v).
// Coefficient jets are capped at 8 x's.  Any other variable is an inert
// parameter.
enum class JetFamily { ab, v };

enum class GenKind { x1, x2, general, normal_form };

// An equivalence-algebra generator.  The x-part is driven by xi(x), the
// gauge part by A(x); the normal-form variant acts on (x, y, V).
struct Generator {
    GenKind kind;
    Expr xi;
    Expr A;

    static Generator x1(Expr xi);
    static Generator x2(Expr A);
    static Generator general(Expr xi, Expr A);
    static Generator normal_form(Expr xi);

    JetFamily family() const {
        return kind == GenKind::normal_form ? JetFamily::v : JetFamily::ab;
    }
};

// Combined total derivative: d/dx acting on jet space, promoting y -> yp,
// yp -> ypp, a -> ax, and so on.  Throws DomainError when a promotion would
// exceed the supported jet order.
Expr total_derivative_x(const Expr& e, JetFamily fam = JetFamily::ab);

// Second prolongation of a generator, every coefficient computed
// mechanically from the recursion (never hand-entered).  nu_a[k] multiplies
// the k-th x-derivative jet of the first coefficient (a, or V for the
// normal-form family); nu_b likewise for b (empty for family v).
struct Prolonged {
    JetFamily family = JetFamily::ab;
    Expr xi;      // coefficient of d/dx
    Expr eta;     // d/dy
    Expr zeta1;   // d/dyp
    Expr zeta11;  // d/dypp
    std::vector<Expr> nu_a;
    std::vector<Expr> nu_b;
};

Prolonged prolong2(const Generator& g, int coeff_order = 2);

// X(omega) restricted to the equation manifold (ypp replaced by the
// equation's right-hand side), simplified.  Zero certifies omega as an
// invariant of the generator's subgroup.
Expr apply_prolonged(const Prolonged& p, const Expr& omega);
Expr apply_prolonged(const Generator& g, const Expr& omega);

// Prolonged action of the general generator on ypp + a yp + b y; the
// equivalence algebra is exactly the set of (xi, A) making this vanish.
Expr determining_residual(const Expr& xi, const Expr& A);

// alias for apply_prolonged(g, omega) under its intended reading
Expr annihilation_check(const Generator& g, const Expr& omega);

// proves_zero, falling back to guarded numeric sampling at random jet
// points (deterministic seed) when simplification is inconclusive
bool certify_zero(const Expr& e, double tol = 1e-9);

} // namespace odeq
