#ifndef ODEQ_NUM_IO_HPP
#define ODEQ_NUM_IO_HPP

#include <optional>
#include <string>

#include "odeq/expr.hpp"

// Shared number <-> text helpers for the parser and the printer.  The
// printer must emit tokens the parser maps back to the same value, so
// both sides live next to each other.
namespace odeq::detail {

// Shortest decimal string that strtod reads back to exactly v.
std::string format_double(double v);

// digits ['.' digits] [('e'|'E') ['+'|'-'] digits], read exactly.
std::optional<Rational> rational_from_number_literal(const std::string& text);

// Token for a constant, possibly "p/q" (the caller handles precedence).
std::string number_token(const Number& n);

} // namespace odeq::detail

#endif
