#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <odeq/invariants.hpp>
#include <odeq/jet.hpp>
#include <odeq/numeric.hpp>
#include <odeq/transform.hpp>

#include <cmath>
#include <vector>

using namespace odeq;

namespace {

Ode2 catalog_pair_source() { return {parse("1/x"), parse("4*x"), "x", {0.5, 2.0}}; }

Ode2 catalog_pair_image() { return {Expr::num(0), parse("4*exp(-3*t)"), "t", {-1.0, 0.9}}; }

double residual_on(const Ode2& ode, const Expr& y, double x) {
    const Expr yp = differentiate(y, ode.var);
    const Expr ypp = differentiate(yp, ode.var);
    const Expr r = simplify(ypp + ode.a * yp + ode.b * y);
    return eval1(r, ode.var, x);
}

} // namespace

TEST_CASE("antiderivatives come back verified or not at all") {
    struct Case {
        const char* e;
        int sign;
    };
    for (const Case& k : {Case{"x^3", 1}, Case{"1/x", 1}, Case{"1/x", -1},
                          Case{"exp(2*x)", 1}, Case{"x^2 + 1/x^2 + 3", 1}}) {
        CAPTURE(k.e);
        auto F = symbolic_antiderivative(parse(k.e), "x", k.sign);
        REQUIRE(F.has_value());
        CHECK(proves_zero(simplify(differentiate(*F, "x") - parse(k.e))));
    }
    CHECK(symbolic_antiderivative(parse("1/x"), "x", -1).has_value());
    CHECK(to_string(*symbolic_antiderivative(parse("1/x"), "x", -1)) == "ln(-x)");
    CHECK_FALSE(symbolic_antiderivative(parse("exp(x^2)"), "x").has_value());
}

TEST_CASE("symbolic inverses cover the map catalog and verify by composition") {
    struct Case {
        const char* alpha;
        Interval iv;
    };
    for (const Case& k : {Case{"2*x + 1", {0.0, 1.0}}, Case{"3*exp(2*x) + 1", {0.0, 1.0}},
                          Case{"2*ln(x) + 5", {0.5, 2.0}}, Case{"3*x^2", {0.5, 2.0}},
                          Case{"-ln(x)", {0.5, 2.0}}}) {
        CAPTURE(k.alpha);
        const Expr alpha = parse(k.alpha);
        auto inv = symbolic_inverse(alpha, "x", k.iv, "u");
        REQUIRE(inv.has_value());
        for (double x : uniform_grid(k.iv.lo, k.iv.hi, 9)) {
            const double u = eval1(alpha, "x", x);
            CHECK(eval1(*inv, "u", u) == doctest::Approx(x).epsilon(1e-10));
        }
    }
    CHECK_FALSE(symbolic_inverse(parse("x + sin(x)"), "x", {0.0, 1.0}, "u").has_value());
}

TEST_CASE("closed-form fitting snaps clean constants and rejects the rest") {
    const auto t = uniform_grid(-1.0, 0.9, 33);

    std::vector<double> affine, expo, noncat;
    for (double tt : t) {
        affine.push_back(2.0 * tt + 0.5);
        expo.push_back(3.0 * std::exp(-2.0 * tt));
        noncat.push_back(tt + std::sin(tt));
    }
    auto f1 = fit_closed_form(t, affine, "t");
    REQUIRE(f1.has_value());
    CHECK(to_string(*f1) == "2*t + 0.5");

    auto f2 = fit_closed_form(t, expo, "t");
    REQUIRE(f2.has_value());
    CHECK(to_string(*f2) == "3*exp(-2*t)");

    const auto s = uniform_grid(0.5, 2.0, 33);
    std::vector<double> powr;
    for (double ss : s) powr.push_back(1.5 * std::pow(ss, 3));
    auto f3 = fit_closed_form(s, powr, "t");
    REQUIRE(f3.has_value());
    CHECK(to_string(*f3) == "1.5*t^3");

    CHECK_FALSE(fit_closed_form(t, noncat, "t").has_value());
}

TEST_CASE("pushforward carries the catalog pair onto its image") {
    const Ode2 src = catalog_pair_source();
    const Ode2 img = pushforward(src, parse("-ln(x)"), "t");
    CHECK(img.var == "t");
    CHECK(proves_zero(simplify(img.a)));
    CHECK(proves_zero(simplify(img.b - parse("4*exp(-3*t)"))));

    // image window is the alpha-image of the source window
    CHECK(img.interval.lo == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    CHECK(img.interval.hi == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(pushforward({Expr::num(0), Expr::num(1), "x", {-1.0, 1.0}},
                                parse("x^2"), "u"),
                    DomainError);
}

TEST_CASE("sampled pushforward agrees with the symbolic one") {
    const Ode2 src = catalog_pair_source();
    const Expr alpha = parse("-ln(x)");
    const SampledOde tab = pushforward_sampled(src, alpha, 48);
    const Ode2 img = pushforward(src, alpha, "t");
    REQUIRE(tab.grid.size() == 48);
    for (std::size_t j = 0; j < tab.grid.size(); ++j) {
        const double u = tab.grid[j];
        CHECK(tab.a[j] == doctest::Approx(eval1(img.a, "t", u)).epsilon(1e-9));
        CHECK(tab.b[j] == doctest::Approx(eval1(img.b, "t", u)).epsilon(1e-9));
    }
}

TEST_CASE("coordinate flow matches its closed-form solution") {
    // xi = x^2 integrates to alpha(x) = x / (1 - eps x)
    const PointMap m = x1_flow_map(parse("x^2"), 0.1, {0.5, 1.3});
    CHECK(m.increasing());
    // query only where the image stays inside the sampled window
    for (double x : uniform_grid(0.55, 1.1, 12)) {
        CAPTURE(x);
        CHECK(m.value(x) == doctest::Approx(x / (1.0 - 0.1 * x)).epsilon(1e-10));
    }
    CHECK(m.value(1.0) == doctest::Approx(1.0 / 0.9).epsilon(1e-12));

    // constant field is a translation with an exact closed form
    const PointMap tr = x1_flow_map(Expr::num(1), 0.25, {0.0, 1.0});
    REQUIRE(tr.closed_form.has_value());
    CHECK(proves_zero(simplify(*tr.closed_form - parse("x + 0.25"))));
}

TEST_CASE("a flow that exits the window shrinks it and says so") {
    const PointMap m = x1_flow_map(parse("x^2"), 0.3, {0.5, 1.3});
    REQUIRE_FALSE(m.warnings.empty());
    CHECK(m.warnings.front().find("flow leaves the interval") != std::string::npos);
    // surviving knots still follow the closed form
    for (double x : m.t_grid)
        CHECK(m.value(x) == doctest::Approx(x / (1.0 - 0.3 * x)).epsilon(1e-9));
}

TEST_CASE("flows compose additively in the parameter") {
    const Interval iv{0.5, 1.3};
    const Expr xi = parse("x^2");
    const PointMap m1 = x1_flow_map(xi, 0.05, iv);
    const PointMap m2 = x1_flow_map(xi, 0.07, iv);
    const PointMap m12 = x1_flow_map(xi, 0.12, iv);
    for (double x : uniform_grid(0.55, 1.05, 11)) {
        CAPTURE(x);
        CHECK(m12.value(x) == doctest::Approx(m2.value(m1.value(x))).epsilon(1e-8));
    }
}

TEST_CASE("the flow derivative of the coefficients is the generator coefficient") {
    // along xi = x the flow is alpha_eps(x) = e^eps x, and at the image point
    //   d/deps a~(alpha_eps(x)) = mu1 = xi'' - a xi',
    //   d/deps b~(alpha_eps(x)) = mu2 = -2 b xi'
    const Ode2 src = catalog_pair_source();
    const double h = 1e-3;
    for (double x0 : {0.7, 1.0, 1.6}) {
        CAPTURE(x0);
        auto coeffs_at = [&](double eps) {
            const Expr alpha = Expr::num(Number::inexact(std::exp(eps))) * Expr::var("x");
            const Ode2 img = pushforward(src, alpha, "u");
            const double u = std::exp(eps) * x0;
            return std::array<double, 2>{eval1(img.a, "u", u), eval1(img.b, "u", u)};
        };
        const auto plus = coeffs_at(h), minus = coeffs_at(-h);
        const double da = (plus[0] - minus[0]) / (2.0 * h);
        const double db = (plus[1] - minus[1]) / (2.0 * h);
        const double mu1 = -1.0 / x0;  // xi''-a xi' for xi=x, a=1/x
        const double mu2 = -8.0 * x0;  // -2 b xi' for b=4x
        CHECK(std::abs(da - mu1) <= 1e-5 * std::max(1.0, std::abs(mu1)));
        CHECK(std::abs(db - mu2) <= 1e-5 * std::max(1.0, std::abs(mu2)));
    }

    // a constant field only translates: the comoving coefficients are frozen
    for (double x0 : {0.7, 1.3}) {
        auto b_at = [&](double eps) {
            const Ode2 img = pushforward(src, parse("x") + Expr::num(Number::inexact(eps)), "u");
            return eval1(img.b, "u", x0 + eps);
        };
        CHECK(std::abs((b_at(h) - b_at(-h)) / (2.0 * h)) <= 1e-5);
    }
}

TEST_CASE("the scaled-square invariant is constant along the flow") {
    const Ode2 src = catalog_pair_source();
    const Expr xi = parse("x^2");
    const PointMap m = x1_flow_map(xi, 0.1, {0.5, 1.3});
    const double h = 1e-4;
    for (double x : uniform_grid(0.55, 1.1, 12)) {
        CAPTURE(x);
        const double ax = m.value(x);
        const double dalpha = fd_derivative([&](double s) { return m.value(s); }, x, h);
        const double b_img = eval1(src.b, "x", x) / (dalpha * dalpha);
        const double lhs = b_img * std::pow(eval1(xi, "x", ax), 2);
        const double rhs = eval1(src.b, "x", x) * std::pow(eval1(xi, "x", x), 2);
        CHECK(std::abs(lhs - rhs) <= 1e-7 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("gauge action formulas, exactly and in composition") {
    const Ode2 src = catalog_pair_source();
    const Expr A = parse("x^2 + 2");
    const Expr eps = Expr::var("eps");
    const Expr Ap = differentiate(A, "x"), App = differentiate(Ap, "x");

    const auto [moved, factor] = gauge(src, A, eps);
    CHECK(proves_zero(simplify(moved.a - (src.a - Expr::num(2) * eps * Ap))));
    CHECK(proves_zero(simplify(moved.b - (src.b - eps * (App + src.a * Ap) +
                                          eps * eps * Ap * Ap))));
    REQUIRE(factor.exponent.has_value());
    CHECK(proves_zero(simplify(*factor.exponent - eps * A)));

    // two steps along the same direction compose additively
    const Ode2 one = gauge(src, A, 0.3).first;
    const Ode2 two = gauge(one, A, 0.45).first;
    const Ode2 direct = gauge(src, A, 0.75).first;
    CHECK(proves_zero(simplify(two.a - direct.a)));
    CHECK(proves_zero(simplify(two.b - direct.b)));
}

TEST_CASE("gauge factors integrate when no closed form is available") {
    const GaugeFactor closed{parse("x^2/4"), parse("x/2"), "x", 0.0};
    GaugeFactor numeric;
    numeric.integrand = parse("x/2");
    CHECK(numeric.at(1.3) == doctest::Approx(closed.at(1.3) - closed.at(0.0)).epsilon(1e-10));
    CHECK(numeric.at(0.0) == doctest::Approx(0.0));
}

TEST_CASE("reduction to the normal form") {
    const Ode2 src = catalog_pair_source();
    const auto [V, g] = reduce_to_normal_form(src);
    CHECK(proves_zero(simplify(V - parse("4*x + 1/(4*x^2)"))));
    REQUIRE(g.exponent.has_value());
    CHECK(proves_zero(simplify(*g.exponent - parse("ln(x)/2"))));

    // the normal-form potential is minus a quarter of the scaling invariant
    const std::vector<Ode2> fixtures = {
        src,
        {Expr::num(0), Expr::num(7), "x", {0.0, 1.0}},
        {Expr::num(2), Expr::num(1), "x", {0.0, 2.0}},
        {Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}},
        catalog_pair_image(),
    };
    for (const Ode2& ode : fixtures) {
        CAPTURE(to_string(ode.b));
        const Expr v = reduce_to_normal_form(ode).first;
        CHECK(proves_zero(simplify(v + omega23(ode) / Expr::num(4))));
    }
}

TEST_CASE("integrable classification") {
    auto tag_of = [](const Ode2& o) { return classify_integrable(o).tag; };

    const IntegrableClass c7 = classify_integrable({Expr::num(0), Expr::num(7), "x", {0.0, 1.0}});
    CHECK(c7.tag == IntegrableClass::Tag::constant);
    CHECK(c7.k == doctest::Approx(7.0).epsilon(1e-12));

    const IntegrableClass e5 =
        classify_integrable({Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}});
    CHECK(e5.tag == IntegrableClass::Tag::euler);
    CHECK(e5.mu == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(e5.shift == doctest::Approx(0.0));

    const IntegrableClass sh =
        classify_integrable({Expr::num(0), parse("3/(x+2)^2"), "x", {-1.0, 1.0}});
    CHECK(sh.tag == IntegrableClass::Tag::euler);
    CHECK(sh.mu == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(sh.shift == doctest::Approx(-2.0).epsilon(1e-9));

    CHECK(tag_of({Expr::num(0), Expr::num(0), "x", {0.0, 1.0}}) ==
          IntegrableClass::Tag::constant);
    CHECK(tag_of(catalog_pair_source()) == IntegrableClass::Tag::unknown);

    // a nonzero a-coefficient classifies through the normal form
    const IntegrableClass damped =
        classify_integrable({Expr::num(2), Expr::num(1), "x", {0.0, 2.0}});
    CHECK(damped.tag == IntegrableClass::Tag::constant);
    CHECK(damped.k == doctest::Approx(0.0));
}

TEST_CASE("closed-form bases substitute back to zero") {
    struct Case {
        Ode2 ode;
        const char* y1;
        const char* y2;
    };
    const std::vector<Case> cases = {
        {{Expr::num(0), Expr::num(-4), "x", {0.0, 1.0}}, "exp(2*x)", "exp(-2*x)"},
        {{Expr::num(0), Expr::num(7), "x", {0.0, 1.0}}, "cos(sqrt(7)*x)", "sin(sqrt(7)*x)"},
        {{Expr::num(2), Expr::num(1), "x", {0.0, 2.0}}, "exp(-x)", "exp(-x)*x"},
        {{Expr::num(0), parse("-6/x^2"), "x", {0.5, 3.0}}, "x^3", "1/x^2"},
    };
    for (const Case& k : cases) {
        CAPTURE(to_string(k.ode.b));
        auto s = solve_closed_form(k.ode);
        REQUIRE(s.has_value());
        CHECK(to_string(s->y1) == k.y1);
        CHECK(to_string(s->y2) == k.y2);
        CHECK(s->wronskian_min > 1e-6);
        for (const Expr& y : {s->y1, s->y2}) {
            const Expr yp = differentiate(y, "x");
            const Expr r = simplify(differentiate(yp, "x") + k.ode.a * yp + k.ode.b * y);
            CHECK(certify_zero(r));
        }
    }

    // oscillatory Euler branch closes numerically
    auto s5 = solve_closed_form({Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}});
    REQUIRE(s5.has_value());
    for (double x : uniform_grid(0.6, 2.8, 15))
        CHECK(std::abs(residual_on({Expr::num(0), parse("5/x^2"), "x", {0.5, 3.0}},
                                   s5->y1, x)) <= 1e-9);

    CHECK_FALSE(solve_closed_form(catalog_pair_source()).has_value());
}

TEST_CASE("numeric integration cross-checks the closed forms") {
    const Ode2 damped = {Expr::num(2), Expr::num(1), "x", {0.0, 2.0}};
    const auto grid = uniform_grid(0.0, 2.0, 129);
    const IvpTable t = integrate_numeric(damped, 0.0, 1.0, -1.0, grid);
    REQUIRE(t.x.size() == grid.size());
    for (std::size_t j = 0; j < t.x.size(); ++j) {
        CHECK(std::abs(t.y[j] - std::exp(-t.x[j])) <= 1e-6);
        CHECK(std::abs(t.yp[j] + std::exp(-t.x[j])) <= 1e-6);
    }
}

TEST_CASE("the integrator converges at fourth order") {
    const Rhs2 rhs = [](double, const std::array<double, 2>& y) {
        return std::array<double, 2>{y[1], -y[0]};
    };
    auto error_at = [&](double h) {
        const auto path = rk4_path(rhs, {0.0, 2.0}, {1.0, 0.0}, h);
        return std::abs(path.back()[0] - std::cos(2.0));
    };
    const double r = error_at(0.02) / error_at(0.01);
    CHECK(r > 12.0);
    CHECK(r < 20.0);
}

TEST_CASE("transport residual separates the right map from a wrong one") {
    const Ode2 src = catalog_pair_source();
    const Ode2 img = catalog_pair_image();

    PointMap right;
    right.t_grid = uniform_grid(-1.0, 0.9, 64);
    for (double t : right.t_grid) right.x_values.push_back(std::exp(-t));
    right.closed_form = parse("exp(-1*t)");
    CHECK(transport_check(src, img, right) < 1e-6);

    PointMap wrong;
    wrong.t_grid = right.t_grid;
    for (double t : wrong.t_grid) wrong.x_values.push_back(std::exp(-1.2 * t));
    wrong.closed_form = parse("exp(-1.2*t)");
    CHECK(transport_check(src, img, wrong) > 1e-3);

    // identity transport of an equation onto itself
    const Ode2 osc = {Expr::num(0), Expr::num(7), "x", {0.0, 1.0}};
    const PointMap id = identity_map(uniform_grid(0.0, 1.0, 33), "x");
    CHECK(transport_check(osc, osc, id) < 1e-8);

    PointMap folded;
    folded.t_grid = uniform_grid(0.0, 1.0, 33);
    for (double t : folded.t_grid) folded.x_values.push_back((t - 0.5) * (t - 0.5));
    CHECK_THROWS_AS(transport_check(osc, osc, folded), DomainError);
}

TEST_CASE("point map evaluation order: closed form, solver, interpolation") {
    PointMap pm;
    pm.t_grid = {0.0, 1.0, 2.0};
    pm.x_values = {0.0, 2.0, 4.0};
    CHECK(pm.value(0.5) == doctest::Approx(1.0));
    CHECK(pm.value(3.0) == doctest::Approx(6.0)); // linear continuation past the table

    pm.solver = [](double t) { return 2.0 * t + 1.0; };
    CHECK(pm.value(0.5) == doctest::Approx(2.0));

    pm.closed_form = parse("2*t + 0.25");
    CHECK(pm.value(0.5) == doctest::Approx(1.25));

    CHECK(pm.increasing());
}
