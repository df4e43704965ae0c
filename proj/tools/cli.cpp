#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <odeq/equivalence.hpp>
#include <odeq/error.hpp>
#include <odeq/invariants.hpp>
#include <odeq/jet.hpp>
#include <odeq/numeric.hpp>
#include <odeq/ode.hpp>
#include <odeq/transform.hpp>

namespace odeq {
namespace {

struct Usage {
    std::string msg;
};

// ---------- deterministic JSON ----------
// numbers at 17 significant digits (round-trip exact); insertion order only

std::string jnum(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string jnum(long v) { return std::to_string(v); }

std::string jstr(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    out += '"';
    return out;
}

std::string jarr(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += jnum(v[i]);
    }
    out += "]";
    return out;
}

std::string jarr_str(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += jstr(v[i]);
    }
    out += "]";
    return out;
}

class Json {
public:
    Json& raw(const std::string& key, const std::string& val) {
        if (!first_) body_ += ",";
        first_ = false;
        body_ += jstr(key) + ":" + val;
        return *this;
    }
    Json& str(const std::string& key, const std::string& val) {
        return raw(key, jstr(val));
    }
    Json& num(const std::string& key, double val) { return raw(key, jnum(val)); }
    Json& num(const std::string& key, long val) { return raw(key, jnum(val)); }
    Json& boolean(const std::string& key, bool val) {
        return raw(key, val ? "true" : "false");
    }
    std::string done() const { return "{" + body_ + "}"; }

private:
    std::string body_;
    bool first_ = true;
};

std::string tnum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------- argument handling ----------

Interval parse_interval(const std::string& s) {
    const auto pos = s.find(':', 1); // a leading '-' is part of lo
    if (pos == std::string::npos)
        throw std::runtime_error("expected lo:hi, got '" + s + "'");
    std::size_t used = 0;
    Interval iv{};
    try {
        iv.lo = std::stod(s.substr(0, pos), &used);
        if (used != pos) throw std::runtime_error("");
        const std::string hi = s.substr(pos + 1);
        iv.hi = std::stod(hi, &used);
        if (used != hi.size()) throw std::runtime_error("");
    } catch (const std::exception&) {
        throw std::runtime_error("expected lo:hi, got '" + s + "'");
    }
    if (!(iv.lo < iv.hi))
        throw std::runtime_error("interval must satisfy lo < hi, got '" + s + "'");
    return iv;
}

CLI::Validator interval_validator() {
    return CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                parse_interval(s);
            } catch (const std::exception& e) {
                return e.what();
            }
            return {};
        },
        "INTERVAL");
}

Expr parse_flag_expr(const std::string& text, const std::string& flag) {
    try {
        return parse(text);
    } catch (const SyntaxError& e) {
        throw Usage{"bad expression in " + flag + ": " + e.what()};
    }
}

struct Cfg {
    std::string a, b, a1, b1, a2, b2, xi, A, map_expr, gauge_expr;
    std::string var = "x", var1 = "x", var2 = "x", group = "x1";
    std::string i, i1, i2;
    int grid = 64, depth = 1;
    double eps = 0.0, step = 1e-3;
    double tol_constancy = 1e-8, tol_lambda = 1e-6, tol_transport = 1e-6;
    bool json = false;
};

Ode2 make_ode(const std::string& a, const std::string& b, const std::string& var,
              const std::string& iv, const char* which) {
    Ode2 ode;
    ode.a = parse_flag_expr(a, std::string("--a") + which);
    ode.b = parse_flag_expr(b, std::string("--b") + which);
    ode.var = var;
    ode.interval = parse_interval(iv);
    validate(ode);
    return ode;
}

std::string map_json(const PointMap& m) {
    Json j;
    j.raw("t_grid", jarr(m.t_grid));
    j.raw("x_values", jarr(m.x_values));
    if (m.closed_form) j.str("closed_form", to_string(*m.closed_form));
    return j.done();
}

void emit(std::ostream& out, const std::string& command,
          const std::string& inputs, const std::string& result,
          const std::vector<std::string>& warnings) {
    Json top;
    top.str("command", command);
    top.raw("inputs", inputs);
    top.raw("result", result);
    top.raw("warnings", jarr_str(warnings));
    out << top.done() << "\n";
}

// ---------- subcommands ----------

int cmd_invariants(const Cfg& c, std::ostream& out) {
    const Ode2 ode = make_ode(c.a, c.b, c.var, c.i, "");
    const auto grid = trimmed_grid(ode.interval.lo, ode.interval.hi,
                                   static_cast<std::size_t>(c.grid));
    const InvariantChain chain = c.group == "x2" ? chain_x2(ode, c.depth, grid)
                                                 : chain_x1(ode, c.depth, grid);
    if (c.json) {
        std::string entries = "[";
        for (std::size_t k = 0; k < chain.exprs.size(); ++k) {
            if (k) entries += ",";
            Json e;
            e.str("expr", to_string(chain.exprs[k]));
            e.raw("values", jarr(chain.values[k]));
            entries += e.done();
        }
        entries += "]";
        Json in;
        in.str("a", c.a).str("b", c.b).str("var", c.var);
        in.raw("interval", jarr({ode.interval.lo, ode.interval.hi}));
        in.num("depth", static_cast<long>(c.depth));
        in.num("grid", static_cast<long>(c.grid));
        Json res;
        res.raw("chain", entries);
        res.str("group", c.group);
        emit(out, "invariants", in.done(), res.done(), {});
    } else {
        out << "chain (" << c.group << ", depth " << c.depth << ")\n";
        for (std::size_t k = 0; k < chain.exprs.size(); ++k) {
            out << "  [" << k << "] " << to_string(chain.exprs[k]) << "\n";
            out << "      values:";
            for (double v : chain.values[k]) out << " " << tnum(v);
            out << "\n";
        }
    }
    return 0;
}

int cmd_equiv(const Cfg& c, std::ostream& out) {
    const Ode2 o1 = make_ode(c.a1, c.b1, c.var1, c.i1, "1");
    const Ode2 o2 = make_ode(c.a2, c.b2, c.var2, c.i2, "2");
    const EquivVerdict v = equivalence_test(o1, o2, c.tol_constancy,
                                            c.tol_lambda, c.tol_transport);
    if (c.json) {
        Json in;
        in.str("a1", c.a1).str("b1", c.b1).str("var1", c.var1);
        in.raw("interval1", jarr({o1.interval.lo, o1.interval.hi}));
        in.str("a2", c.a2).str("b2", c.b2).str("var2", c.var2);
        in.raw("interval2", jarr({o2.interval.lo, o2.interval.hi}));
        Json tol;
        tol.num("constancy", c.tol_constancy)
            .num("lambda", c.tol_lambda)
            .num("transport", c.tol_transport);
        in.raw("tolerances", tol.done());

        Json res;
        res.boolean("necessary_pass", v.necessary_pass);
        if (v.H) {
            Json h;
            h.num("p", v.H->p).num("q", v.H->q).num("normalization",
                                                    v.H->normalization);
            res.raw("H", h.done());
        } else {
            res.raw("H", "null");
        }
        res.raw("lambda1", v.lambda1 ? jnum(*v.lambda1) : "null");
        res.raw("lambda2", v.lambda2 ? jnum(*v.lambda2) : "null");
        res.raw("map", v.map ? map_json(*v.map) : "null");
        res.boolean("verified", v.verified);
        res.raw("transport_residual",
                v.transport_residual ? jnum(*v.transport_residual) : "null");
        emit(out, "equiv", in.done(), res.done(), v.notes);
    } else {
        out << "necessary: " << (v.necessary_pass ? "pass" : "fail") << "\n";
        if (v.H)
            out << "H: omega1^" << v.H->p << " * omega2^" << v.H->q
                << " (normalization " << tnum(v.H->normalization) << ")\n";
        if (v.lambda1) out << "lambda1: " << tnum(*v.lambda1) << "\n";
        if (v.lambda2) out << "lambda2: " << tnum(*v.lambda2) << "\n";
        if (v.map)
            out << "map: "
                << (v.map->closed_form ? to_string(*v.map->closed_form)
                                       : "tabulated")
                << "\n";
        out << "verified: " << (v.verified ? "yes" : "no") << "\n";
        if (v.transport_residual)
            out << "transport residual: " << tnum(*v.transport_residual) << "\n";
        for (const auto& n : v.notes) out << "note: " << n << "\n";
    }
    return 0;
}

int cmd_reduce(const Cfg& c, std::ostream& out) {
    const Ode2 ode = make_ode(c.a, c.b, c.var, c.i, "");
    const auto [V, g] = reduce_to_normal_form(ode);
    if (c.json) {
        Json in;
        in.str("a", c.a).str("b", c.b).str("var", c.var);
        in.raw("interval", jarr({ode.interval.lo, ode.interval.hi}));
        Json res;
        res.str("V", to_string(V));
        res.raw("gauge_exponent",
                g.exponent ? jstr(to_string(*g.exponent)) : "null");
        emit(out, "reduce", in.done(), res.done(), {});
    } else {
        out << "V: " << to_string(V) << "\n";
        out << "gauge exponent: "
            << (g.exponent ? to_string(*g.exponent) : "(quadrature only)")
            << "\n";
    }
    return 0;
}

int cmd_classify(const Cfg& c, std::ostream& out) {
    const Ode2 ode = make_ode(c.a, c.b, c.var, c.i, "");
    const IntegrableClass k = classify_integrable(ode);
    std::string name = "unknown";
    Json params;
    if (k.tag == IntegrableClass::Tag::constant) {
        name = "constant";
        params.num("k", k.k);
    } else if (k.tag == IntegrableClass::Tag::euler) {
        name = "euler";
        params.num("mu", k.mu).num("shift", k.shift);
    }
    if (c.json) {
        Json in;
        in.str("a", c.a).str("b", c.b).str("var", c.var);
        in.raw("interval", jarr({ode.interval.lo, ode.interval.hi}));
        Json res;
        res.str("class", name);
        res.raw("parameters", params.done());
        emit(out, "classify", in.done(), res.done(), {});
    } else {
        out << "class: " << name << "\n";
        if (k.tag == IntegrableClass::Tag::constant)
            out << "k: " << tnum(k.k) << "\n";
        if (k.tag == IntegrableClass::Tag::euler)
            out << "mu: " << tnum(k.mu) << "\nshift: " << tnum(k.shift) << "\n";
    }
    return 0;
}

int cmd_solve(const Cfg& c, std::ostream& out) {
    const Ode2 ode = make_ode(c.a, c.b, c.var, c.i, "");
    const auto basis = solve_closed_form(ode);
    std::vector<std::string> warnings;

    std::string basis_json;
    double wmin = 0.0;
    std::string gauge_exp = "null";
    std::vector<std::string> text_lines;

    if (basis) {
        basis_json = "[" + jstr(to_string(basis->y1)) + "," +
                     jstr(to_string(basis->y2)) + "]";
        wmin = basis->wronskian_min;
        const GaugeFactor g = reduce_to_normal_form(ode).second;
        if (g.exponent && !proves_zero(simplify(ode.a)))
            gauge_exp = jstr(to_string(simplify(Expr::num(-1) * *g.exponent)));
        text_lines.push_back("y1: " + to_string(basis->y1));
        text_lines.push_back("y2: " + to_string(basis->y2));
    } else {
        // outside the catalog: numeric fundamental system as value tables
        warnings.push_back("no closed form in the catalog; returning a numeric "
                           "fundamental system");
        const auto grid = trimmed_grid(ode.interval.lo, ode.interval.hi,
                                       static_cast<std::size_t>(c.grid));
        const IvpTable t1 = integrate_numeric(ode, grid.front(), 1.0, 0.0, grid);
        const IvpTable t2 = integrate_numeric(ode, grid.front(), 0.0, 1.0, grid);
        auto table = [&grid](const IvpTable& t) {
            Json j;
            j.raw("x", jarr(grid));
            j.raw("y", jarr(t.y));
            j.raw("yp", jarr(t.yp));
            return j.done();
        };
        basis_json = "[" + table(t1) + "," + table(t2) + "]";
        wmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < grid.size(); ++j)
            wmin = std::min(wmin, std::abs(t1.y[j] * t2.yp[j] - t1.yp[j] * t2.y[j]));
        text_lines.push_back("numeric fundamental system over " +
                             std::to_string(grid.size()) + " points");
    }

    if (c.json) {
        Json in;
        in.str("a", c.a).str("b", c.b).str("var", c.var);
        in.raw("interval", jarr({ode.interval.lo, ode.interval.hi}));
        in.num("grid", static_cast<long>(c.grid));
        Json pull;
        pull.raw("map", "null");
        pull.raw("gauge_exponent", gauge_exp);
        Json res;
        res.raw("basis", basis_json);
        res.num("wronskian_min", wmin);
        res.raw("pullback", pull.done());
        emit(out, "solve", in.done(), res.done(), warnings);
    } else {
        for (const auto& l : text_lines) out << l << "\n";
        out << "wronskian min: " << tnum(wmin) << "\n";
        for (const auto& w : warnings) out << "note: " << w << "\n";
    }
    return 0;
}

int cmd_flow(const Cfg& c, std::ostream& out) {
    const Expr xi = parse_flag_expr(c.xi, "--xi");
    const Interval iv = parse_interval(c.i);
    const PointMap m = x1_flow_map(xi, c.eps, iv, c.var);
    if (c.json) {
        Json in;
        in.str("xi", c.xi).num("eps", c.eps).str("var", c.var);
        in.raw("interval", jarr({iv.lo, iv.hi}));
        Json res;
        res.raw("map", map_json(m));
        emit(out, "flow", in.done(), res.done(), m.warnings);
    } else {
        out << "map: "
            << (m.closed_form ? to_string(*m.closed_form) : "tabulated") << "\n";
        out << "points: " << m.t_grid.size() << "\n";
        for (const auto& w : m.warnings) out << "note: " << w << "\n";
    }
    return 0;
}

int cmd_gauge(const Cfg& c, std::ostream& out) {
    const Ode2 ode = make_ode(c.a, c.b, c.var, c.i, "");
    const Expr A = parse_flag_expr(c.A, "--A");
    const auto [img, g] = gauge(ode, A, c.eps);
    if (c.json) {
        Json in;
        in.str("a", c.a).str("b", c.b).str("A", c.A);
        in.num("eps", c.eps).str("var", c.var);
        in.raw("interval", jarr({ode.interval.lo, ode.interval.hi}));
        Json res;
        res.str("a", to_string(img.a));
        res.str("b", to_string(img.b));
        res.raw("gauge_exponent",
                g.exponent ? jstr(to_string(*g.exponent)) : "null");
        emit(out, "gauge", in.done(), res.done(), {});
    } else {
        out << "a: " << to_string(img.a) << "\n";
        out << "b: " << to_string(img.b) << "\n";
        if (g.exponent) out << "gauge exponent: " << to_string(*g.exponent) << "\n";
    }
    return 0;
}

int cmd_verify(const Cfg& c, std::ostream& out) {
    const Ode2 o1 = make_ode(c.a1, c.b1, c.var1, c.i1, "1");
    const Ode2 o2 = make_ode(c.a2, c.b2, c.var2, c.i2, "2");
    const Expr mexpr = parse_flag_expr(c.map_expr, "--map");

    PointMap m;
    m.var = c.var2;
    m.t_grid = coefficient_grid(o2);
    m.x_values.reserve(m.t_grid.size());
    for (double t : m.t_grid) m.x_values.push_back(eval1(mexpr, c.var2, t));
    m.closed_form = mexpr;

    std::optional<GaugeFactor> g;
    if (!c.gauge_expr.empty()) {
        GaugeFactor gf;
        gf.exponent = parse_flag_expr(c.gauge_expr, "--gauge-exponent");
        gf.integrand = simplify(differentiate(*gf.exponent, c.var1));
        gf.var = c.var1;
        g = gf;
    }

    const double r = transport_check(o1, o2, m, g, c.step);
    const bool ok = r < c.tol_transport;
    if (c.json) {
        Json in;
        in.str("a1", c.a1).str("b1", c.b1).str("var1", c.var1);
        in.raw("interval1", jarr({o1.interval.lo, o1.interval.hi}));
        in.str("a2", c.a2).str("b2", c.b2).str("var2", c.var2);
        in.raw("interval2", jarr({o2.interval.lo, o2.interval.hi}));
        in.str("map", c.map_expr);
        if (!c.gauge_expr.empty()) in.str("gauge_exponent", c.gauge_expr);
        in.num("step", c.step);
        in.num("tolerance", c.tol_transport);
        Json res;
        res.num("transport_residual", r);
        res.boolean("verified", ok);
        emit(out, "verify", in.done(), res.done(), {});
    } else {
        out << "transport residual: " << tnum(r) << "\n";
        out << "verified: " << (ok ? "yes" : "no") << "\n";
    }
    return 0;
}

int cmd_check_generator(const Cfg& c, std::ostream& out) {
    const Expr xi = parse_flag_expr(c.xi, "--xi");
    const Expr A = parse_flag_expr(c.A, "--A");
    const Expr r = determining_residual(xi, A);
    const bool zero = certify_zero(r);
    if (c.json) {
        Json in;
        in.str("xi", c.xi).str("A", c.A);
        Json res;
        res.str("residual", to_string(r));
        res.boolean("is_zero", zero);
        emit(out, "check-generator", in.done(), res.done(), {});
    } else {
        out << "residual: " << to_string(r) << "\n";
        out << "is zero: " << (zero ? "yes" : "no") << "\n";
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"equivalence and integrability of y'' + a(x) y' + b(x) y = 0"};
    app.name("odeq");
    app.require_subcommand(1);

    Cfg c;

    const auto add_single_ode = [&](CLI::App* sc) {
        sc->add_option("--a", c.a, "coefficient a(x)")->required();
        sc->add_option("--b", c.b, "coefficient b(x)")->required();
        sc->add_option("--var", c.var, "independent variable (default x)");
        sc->add_option("--i", c.i, "interval lo:hi")
            ->required()
            ->check(interval_validator());
    };
    const auto add_pair = [&](CLI::App* sc) {
        sc->add_option("--a1", c.a1, "first coefficient a")->required();
        sc->add_option("--b1", c.b1, "first coefficient b")->required();
        sc->add_option("--var1", c.var1, "first variable (default x)");
        sc->add_option("--i1", c.i1, "first interval lo:hi")
            ->required()
            ->check(interval_validator());
        sc->add_option("--a2", c.a2, "second coefficient a")->required();
        sc->add_option("--b2", c.b2, "second coefficient b")->required();
        sc->add_option("--var2", c.var2, "second variable (default x)");
        sc->add_option("--i2", c.i2, "second interval lo:hi")
            ->required()
            ->check(interval_validator());
    };
    const auto add_json = [&](CLI::App* sc) {
        sc->add_flag("--json", c.json, "machine-readable output");
    };

    CLI::App* inv = app.add_subcommand("invariants", "invariant chain values");
    add_single_ode(inv);
    inv->add_option("--depth", c.depth, "chain depth (default 1)")
        ->check(CLI::NonNegativeNumber);
    inv->add_option("--grid", c.grid, "grid size (default 64)")
        ->check(CLI::Range(8, 1000000));
    inv->add_option("--group", c.group, "x1 or x2")
        ->check(CLI::IsMember({"x1", "x2"}));
    add_json(inv);

    CLI::App* eq = app.add_subcommand("equiv", "decide equivalence of a pair");
    add_pair(eq);
    eq->add_option("--tol-constancy", c.tol_constancy,
                   "spread tolerance for constant combinations")
        ->check(CLI::PositiveNumber);
    eq->add_option("--tol-lambda", c.tol_lambda, "lambda match tolerance")
        ->check(CLI::PositiveNumber);
    eq->add_option("--tol-transport", c.tol_transport,
                   "transport residual tolerance")
        ->check(CLI::PositiveNumber);
    add_json(eq);

    CLI::App* red = app.add_subcommand("reduce", "normal form y'' + V y = 0");
    add_single_ode(red);
    add_json(red);

    CLI::App* cls = app.add_subcommand("classify", "integrable-class detection");
    add_single_ode(cls);
    add_json(cls);

    CLI::App* slv = app.add_subcommand("solve", "closed-form or numeric basis");
    add_single_ode(slv);
    slv->add_option("--grid", c.grid, "grid size (default 64)")
        ->check(CLI::Range(8, 1000000));
    add_json(slv);

    CLI::App* flw = app.add_subcommand("flow", "time-eps flow of xi d/dx");
    flw->add_option("--xi", c.xi, "flow field xi(x)")->required();
    flw->add_option("--eps", c.eps, "flow time")->required();
    flw->add_option("--var", c.var, "variable (default x)");
    flw->add_option("--i", c.i, "interval lo:hi")
        ->required()
        ->check(interval_validator());
    add_json(flw);

    CLI::App* gau = app.add_subcommand("gauge", "rescale y by exp(eps A)");
    add_single_ode(gau);
    gau->add_option("--A", c.A, "gauge function A(x)")->required();
    gau->add_option("--eps", c.eps, "gauge parameter")->required();
    add_json(gau);

    CLI::App* ver = app.add_subcommand("verify", "numeric transport of a map");
    add_pair(ver);
    ver->add_option("--map", c.map_expr, "x as an expression in var2")->required();
    ver->add_option("--gauge-exponent", c.gauge_expr,
                    "optional exponent E(var1); z = y exp(E)");
    ver->add_option("--step", c.step, "RK4 step bound (default 1e-3)")
        ->check(CLI::PositiveNumber);
    ver->add_option("--tol-transport", c.tol_transport,
                    "transport residual tolerance")
        ->check(CLI::PositiveNumber);
    add_json(ver);

    CLI::App* chk = app.add_subcommand("check-generator",
                                       "determining-equation residual");
    chk->add_option("--xi", c.xi, "x-component xi(x)")->required();
    chk->add_option("--A", c.A, "y-scaling component A(x)")->required();
    add_json(chk);

    std::vector<const char*> argv;
    argv.push_back("odeq");
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(inv)) return cmd_invariants(c, out);
        if (app.got_subcommand(eq)) return cmd_equiv(c, out);
        if (app.got_subcommand(red)) return cmd_reduce(c, out);
        if (app.got_subcommand(cls)) return cmd_classify(c, out);
        if (app.got_subcommand(slv)) return cmd_solve(c, out);
        if (app.got_subcommand(flw)) return cmd_flow(c, out);
        if (app.got_subcommand(gau)) return cmd_gauge(c, out);
        if (app.got_subcommand(ver)) return cmd_verify(c, out);
        if (app.got_subcommand(chk)) return cmd_check_generator(c, out);
    } catch (const Usage& u) {
        err << "usage error: " << u.msg << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "usage error: unknown subcommand\n";
    return 2;
}

} // namespace odeq
