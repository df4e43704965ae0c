#pragma once

#include <optional>
#include <string>
#include <vector>

#include <odeq/expr.hpp>
#include <odeq/invariants.hpp>
#include <odeq/ode.hpp>
#include <odeq/transform.hpp>

namespace odeq {

// A constant monomial combination omega1^p omega2^q found on a chain.
// `lambda` already includes `normalization` (4 for the (3,-2) pair, so that
// the canonical combination 4 w1^3 / w2^2 equals 1 on self-similar data).
struct MonomialH {
    long p = 0;
    long q = 0;
    double lambda = 0.0;
    double normalization = 1.0;
};

struct HSearch {
    std::optional<MonomialH> H;
    bool degenerate = false; // some chain entry vanishes on the grid
};

// Search coprime exponent pairs |p|,|q| <= 6 for a combination of the first
// two chain entries that is constant across the grid.  Exponents are screened
// with logarithmic derivatives at two probe points, then the winning pair is
// confirmed by direct evaluation everywhere.
HSearch find_monomial_H(const InvariantChain& chain, double constancy_tol = 1e-8);

struct EquivVerdict {
    bool necessary_pass = false;
    std::optional<MonomialH> H;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::optional<PointMap> map;
    bool verified = false; // numeric transport succeeded below tolerance
    std::optional<double> transport_residual;
    std::vector<std::string> notes;
};

// Full decision procedure: invariant chains -> constant-combination matching
// (necessary), then map recovery and numeric transport (sufficient).
// Degenerate chains fall through to the integrable-class comparison, where
// equivalence within a class is witnessed by a representative map.
EquivVerdict equivalence_test(const Ode2& ode1, const Ode2& ode2,
                              double constancy_tol = 1e-8,
                              double lambda_tol = 1e-6,
                              double transport_tol = 1e-6);

// Invert omega13 of ode1 against omega13 of ode2 pointwise: x(t) solves
// w1(x) = w2(t).  Requires w1 strictly monotone (AmbiguityError otherwise);
// throws OverlapError naming the valid sub-interval when the invariant
// ranges only partially overlap.
PointMap recover_map(const Ode2& ode1, const Ode2& ode2);

// Compare two normal-form potentials under a *fixed* generator scale xi:
// false when the pair (nf_omega1, nf_omega2) separates V1 from V2 on the
// grid, true when the test cannot tell them apart.
bool fixed_xi_check(const Expr& V1, const Expr& V2, const Expr& xi,
                    const std::vector<double>& grid,
                    const std::string& var = "x");

} // namespace odeq
