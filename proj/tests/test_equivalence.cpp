#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <odeq/equivalence.hpp>
#include <odeq/invariants.hpp>
#include <odeq/numeric.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace odeq;

namespace {

Ode2 catalog_pair_source() { return {parse("1/x"), parse("4*x"), "x", {0.4, 2.8}}; }

Ode2 catalog_pair_image() { return {Expr::num(0), parse("4*exp(-3*t)"), "t", {-1.0, 0.9}}; }

bool has_note(const EquivVerdict& v, const std::string& needle) {
    for (const auto& n : v.notes)
        if (n.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("the monomial search finds the shared ratio on both chains") {
    for (const Ode2& ode : {catalog_pair_source(), catalog_pair_image()}) {
        CAPTURE(ode.var);
        const HSearch h = find_monomial_H(chain_x1(ode, 1));
        CHECK_FALSE(h.degenerate);
        REQUIRE(h.H.has_value());
        CHECK(h.H->p == 3);
        CHECK(h.H->q == -2);
        CHECK(h.H->normalization == 4.0);
        CHECK(std::abs(h.H->lambda - 1.0) <= 1e-8);
    }
}

TEST_CASE("the search needs at least two rows and a real grid") {
    const Ode2 src = catalog_pair_source();
    CHECK_THROWS_AS(find_monomial_H(chain_x1(src, 0)), DomainError);

    InvariantChain tiny = chain_x1(src, 1, uniform_grid(0.5, 2.0, 4));
    CHECK_THROWS_AS(find_monomial_H(tiny), DomainError);
}

TEST_CASE("full verdict on the catalog pair") {
    const EquivVerdict v = equivalence_test(catalog_pair_source(), catalog_pair_image());
    CHECK(v.necessary_pass);
    CHECK(v.verified);
    REQUIRE(v.H.has_value());
    CHECK(v.H->p == 3);
    CHECK(v.H->q == -2);
    REQUIRE(v.lambda1.has_value());
    REQUIRE(v.lambda2.has_value());
    CHECK(std::abs(*v.lambda1 - 1.0) <= 1e-8);
    CHECK(std::abs(*v.lambda2 - 1.0) <= 1e-8);
    REQUIRE(v.map.has_value());
    REQUIRE(v.map->closed_form.has_value());
    CHECK(to_string(*v.map->closed_form) == "exp(-1*t)");
    REQUIRE(v.transport_residual.has_value());
    CHECK(*v.transport_residual < 1e-6);

    // the recovered map itself, against the exact one
    for (double t : uniform_grid(-1.0, 0.9, 64))
        CHECK(std::abs(v.map->value(t) - std::exp(-t)) <= 1e-8);
}

TEST_CASE("the reverse direction works through the tabulated map") {
    // the x-window must sit inside the image of [-1, 0.9] under e^{-t}
    const Ode2 narrowed = {parse("1/x"), parse("4*x"), "x", {0.41, 2.71}};
    // t = -ln(x) is outside the fitting catalog, so the map stays numeric
    const EquivVerdict v = equivalence_test(catalog_pair_image(), narrowed);
    CHECK(v.necessary_pass);
    CHECK(v.verified);
    REQUIRE(v.map.has_value());
    CHECK_FALSE(v.map->closed_form.has_value());
    for (double x : uniform_grid(0.45, 2.65, 32))
        CHECK(std::abs(v.map->value(x) + std::log(x)) <= 1e-8);

    // with the full window the knots spill past the invariant range, and the
    // verdict says so instead of guessing
    const EquivVerdict spill = equivalence_test(catalog_pair_image(), catalog_pair_source());
    CHECK(spill.necessary_pass);
    CHECK_FALSE(spill.verified);
    CHECK(has_note(spill, "map recovery"));
}

TEST_CASE("a pure scale change of the coefficient keeps the pair equivalent") {
    // scaling b2 moves the map, not the verdict: the ratio is scale-free and
    // the transported map absorbs the factor
    const Ode2 scaled = {Expr::num(0), parse("4.2*exp(-3*t)"), "t", {-1.0, 0.9}};
    const EquivVerdict v = equivalence_test(catalog_pair_source(), scaled);
    CHECK(v.necessary_pass);
    CHECK(v.verified);
    CHECK(std::abs(*v.lambda2 - 1.0) <= 1e-8);
    REQUIRE(v.transport_residual.has_value());
    CHECK(*v.transport_residual < 1e-6);
}

TEST_CASE("a structural perturbation breaks the necessary test") {
    const Ode2 bent = {Expr::num(0), parse("4*exp(-3*t) + t/2"), "t", {-1.0, 0.9}};
    const EquivVerdict v = equivalence_test(catalog_pair_source(), bent);
    CHECK_FALSE(v.necessary_pass);
    CHECK_FALSE(v.verified);
    CHECK_FALSE(v.notes.empty());
}

TEST_CASE("different constants of the same monomial are told apart") {
    const Ode2 lin = {Expr::num(0), parse("x"), "x", {0.5, 2.0}};
    const Ode2 cub = {Expr::num(0), parse("t^3"), "t", {0.5, 2.0}};
    const EquivVerdict v = equivalence_test(lin, cub);
    CHECK_FALSE(v.necessary_pass);
    REQUIRE(v.lambda1.has_value());
    REQUIRE(v.lambda2.has_value());
    CHECK(*v.lambda1 == doctest::Approx(1.0 / 9.0).epsilon(1e-8));
    CHECK(*v.lambda2 == doctest::Approx(0.36).epsilon(1e-8));
    CHECK(has_note(v, "constant values differ"));
}

TEST_CASE("degenerate chains route through the integrable classes") {
    SUBCASE("matching scaled-potential equations, shifted window") {
        const Ode2 e1 = {Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}};
        const Ode2 e2 = {Expr::num(0), parse("5/(t-1)^2"), "t", {1.5, 4.0}};
        const EquivVerdict v = equivalence_test(e1, e2);
        CHECK(v.necessary_pass);
        CHECK(v.verified);
        CHECK(*v.lambda1 == doctest::Approx(0.2).epsilon(1e-9));
        CHECK(*v.lambda2 == doctest::Approx(0.2).epsilon(1e-9));
        REQUIRE(v.map.has_value());
        CHECK(v.map->value(2.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(has_note(v, "scale is a free parameter"));
    }

    SUBCASE("the same singular potential across the origin") {
        const Ode2 e1 = {Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}};
        const Ode2 e2 = {Expr::num(0), parse("5/t^2"), "t", {-3.0, -0.5}};
        const EquivVerdict v = equivalence_test(e1, e2);
        CHECK(v.verified);
        REQUIRE(v.map.has_value());
        CHECK(v.map->value(-1.0) == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("mismatched scaled-potential parameters") {
        const Ode2 e1 = {Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}};
        const Ode2 e2 = {Expr::num(0), parse("7/t^2"), "t", {0.5, 3.0}};
        const EquivVerdict v = equivalence_test(e1, e2);
        CHECK_FALSE(v.necessary_pass);
        CHECK_FALSE(v.verified);
        CHECK(has_note(v, "parameters differ"));
    }

    SUBCASE("constant potentials of one sign") {
        const Ode2 e1 = {Expr::num(0), Expr::num(4), "x", {0.0, 2.0}};
        const Ode2 e2 = {Expr::num(0), Expr::num(9), "t", {0.0, 2.0}};
        const EquivVerdict v = equivalence_test(e1, e2);
        CHECK(v.necessary_pass);
        CHECK(v.verified);
        CHECK(*v.lambda1 == 0.0);
        CHECK(*v.lambda2 == 0.0);
        REQUIRE(v.transport_residual.has_value());
        CHECK(*v.transport_residual < 1e-6);
    }

    SUBCASE("constant potentials of opposite sign stay unsettled") {
        const Ode2 e1 = {Expr::num(0), Expr::num(4), "x", {0.0, 2.0}};
        const Ode2 e2 = {Expr::num(0), Expr::num(-9), "t", {0.0, 2.0}};
        const EquivVerdict v = equivalence_test(e1, e2);
        CHECK(v.necessary_pass); // the vanishing chain cannot separate them
        CHECK_FALSE(v.verified);
        CHECK(has_note(v, "differ in sign"));
    }

    SUBCASE("distinct classes") {
        const Ode2 e1 = {Expr::num(0), Expr::num(4), "x", {0.5, 3.0}};
        const Ode2 e2 = {Expr::num(0), parse("5/t^2"), "t", {0.5, 3.0}};
        const EquivVerdict v = equivalence_test(e1, e2);
        CHECK_FALSE(v.necessary_pass);
        CHECK(has_note(v, "classes differ"));
    }

    SUBCASE("a degenerate chain against an undecided class") {
        const Ode2 e1 = {Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}};
        const EquivVerdict v = equivalence_test(e1, catalog_pair_source());
        CHECK_FALSE(v.necessary_pass);
        CHECK_FALSE(v.verified);
        CHECK(has_note(v, "cannot decide"));
    }
}

TEST_CASE("a constant invariant cannot anchor a map") {
    const Ode2 e1 = {Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}};
    const Ode2 e2 = {Expr::num(0), parse("5/t^2"), "t", {0.5, 3.0}};
    CHECK_THROWS_AS(recover_map(e1, e2), AmbiguityError);
}

TEST_CASE("partial invariant overlap is reported with its valid window") {
    const Ode2 narrow = {parse("1/x"), parse("4*x"), "x", {0.6, 1.4}};
    try {
        recover_map(narrow, catalog_pair_image());
        FAIL("expected an overlap error");
    } catch (const OverlapError& e) {
        CHECK(e.lo() > -0.5);
        CHECK(e.lo() < -0.2);
        CHECK(e.hi() > 0.4);
        CHECK(e.hi() < 0.6);
        CHECK(std::string(e.what()).find("partially overlap") != std::string::npos);
    }
}

TEST_CASE("fixed-scale screening of normal-form potentials") {
    const auto grid = uniform_grid(0.5, 3.0, 33);
    const Expr xi = parse("x");
    CHECK(fixed_xi_check(parse("5/x^2"), parse("5/x^2"), xi, grid));
    CHECK_FALSE(fixed_xi_check(parse("5/x^2"), parse("7/x^2"), xi, grid));

    // constant potentials, constant first invariant
    CHECK(fixed_xi_check(Expr::num(7), Expr::num(7), Expr::num(1), grid));
    CHECK_FALSE(fixed_xi_check(Expr::num(5), Expr::num(7), Expr::num(1), grid));

    CHECK_THROWS_AS(fixed_xi_check(Expr::num(5), Expr::num(7), Expr::num(1),
                                   uniform_grid(0.5, 3.0, 4)),
                    DomainError);
}

TEST_CASE("an equation is equivalent to itself by inspection") {
    const Ode2 src = catalog_pair_source();
    const EquivVerdict v = equivalence_test(src, src);
    CHECK(v.necessary_pass);
    CHECK(v.verified);
    CHECK(has_note(v, "structurally identical"));
    REQUIRE(v.map.has_value());
    CHECK(v.map->value(1.3) == doctest::Approx(1.3));
}

TEST_CASE("a verified verdict always carries the necessary pass") {
    const std::vector<std::pair<Ode2, Ode2>> pairs = {
        {catalog_pair_source(), catalog_pair_image()},
        {{Expr::num(0), Expr::num(4), "x", {0.0, 2.0}}, {Expr::num(0), Expr::num(-9), "t", {0.0, 2.0}}},
        {{Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}}, {Expr::num(0), parse("7/t^2"), "t", {0.5, 3.0}}},
        {{Expr::num(0), parse("x"), "x", {0.5, 2.0}}, {Expr::num(0), parse("t^3"), "t", {0.5, 2.0}}},
    };
    for (const auto& [o1, o2] : pairs) {
        const EquivVerdict v = equivalence_test(o1, o2);
        if (v.verified) CHECK(v.necessary_pass);
        if (!v.necessary_pass) CHECK_FALSE(v.verified);
    }
}
