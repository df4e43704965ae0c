#include <cctype>

#include "num_io.hpp"
#include "odeq/expr.hpp"

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] base ['^' factor]
//   base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
// '^' is right-associative and binds a leading '-' into its base, so
// "-x^2" reads as (-x)^2.  No implicit multiplication.  Decimal
// literals (including exponent form) are read exactly as rationals.

namespace odeq {

namespace {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(msg, pos); }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }

    bool eat(char c) {
        if (!peek(c)) return false;
        ++pos;
        return true;
    }

    char next_op(const char* set) {
        skip_ws();
        if (pos < text.size())
            for (const char* s = set; *s; ++s)
                if (text[pos] == *s) return text[pos];
        return 0;
    }

    Expr parse_expr() {
        std::vector<Expr> terms;
        terms.push_back(parse_term());
        while (char op = next_op("+-")) {
            ++pos;
            Expr t = parse_term();
            terms.push_back(op == '+' ? t : negated(t));
        }
        return Expr::sum(std::move(terms));
    }

    Expr parse_term() {
        Expr cur = parse_factor();
        std::vector<Expr> prod{cur};
        while (char op = next_op("*/")) {
            ++pos;
            Expr f = parse_factor();
            if (op == '*') {
                prod.push_back(f);
            } else {
                cur = Expr::quotient(Expr::product(std::move(prod)), f);
                prod = {cur};
            }
        }
        return Expr::product(std::move(prod));
    }

    Expr parse_factor() {
        bool neg = eat('-');
        Expr b = parse_base();
        if (neg) b = negated(b);
        if (eat('^')) b = Expr::pow(b, parse_factor());
        return b;
    }

    static Expr negated(const Expr& e) {
        if (e.kind() == Kind::number) return Expr::num(e.value().negated());
        return Expr::negate(e);
    }

    Expr parse_base() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr parse_number() {
        std::size_t start = pos;
        auto run_digits = [&] {
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        };
        run_digits();
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            std::size_t before = pos;
            run_digits();
            if (pos == before) fail("expected digits after '.'");
        }
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
            std::size_t before = pos;
            run_digits();
            if (pos == before) pos = mark; // "2e" was "2" followed by identifier text; reject below
        }
        std::string tok = text.substr(start, pos - start);
        auto r = detail::rational_from_number_literal(tok);
        if (!r) {
            pos = start;
            fail("malformed number literal '" + tok + "'");
        }
        return Expr::num(*r);
    }

    Expr parse_ident() {
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        std::string name = text.substr(start, pos - start);
        if (peek('(')) {
            Fn f;
            if (name == "exp") f = Fn::exp;
            else if (name == "ln") f = Fn::ln;
            else if (name == "sin") f = Fn::sin;
            else if (name == "cos") f = Fn::cos;
            else if (name == "sqrt") f = Fn::sqrt;
            else if (name == "abs") f = Fn::abs;
            else {
                pos = start;
                fail("unknown function '" + name + "'");
            }
            ++pos; // '('
            Expr arg = parse_expr();
            if (!eat(')')) fail("expected ')' after call argument");
            return Expr::call(f, arg);
        }
        return Expr::var(std::move(name));
    }
};

} // namespace

Expr parse(const std::string& text) {
    Parser p(text);
    Expr e = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return e;
}

} // namespace odeq
