#ifndef ODEQ_ERROR_HPP
#define ODEQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace odeq {

// All library failures derive from Error so callers can map them to a
// single exit path.  The kind distinguishes user-facing categories.
class Error : public std::runtime_error {
public:
    enum class Kind {
        syntax,        // malformed expression text
        eval,          // unbound variable, division by zero, log of non-positive, ...
        singularity,   // coefficient blows up or a required quantity vanishes on the interval
        domain,        // invalid interval, non-monotone map, order cap exceeded
        ambiguity,     // map recovery has no unique solution
        overlap,       // invariant ranges only partially overlap
    };

    Error(Kind k, std::string msg) : std::runtime_error(std::move(msg)), kind_(k) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::string msg, std::size_t offset)
        : Error(Kind::syntax, msg + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public Error {
public:
    explicit EvalError(std::string msg) : Error(Kind::eval, std::move(msg)) {}
};

class SingularityError : public Error {
public:
    SingularityError(std::string msg, double where)
        : Error(Kind::singularity, std::move(msg)), where_(where) {}
    double where() const { return where_; }

private:
    double where_;
};

class DomainError : public Error {
public:
    explicit DomainError(std::string msg) : Error(Kind::domain, std::move(msg)) {}
};

class AmbiguityError : public Error {
public:
    explicit AmbiguityError(std::string msg) : Error(Kind::ambiguity, std::move(msg)) {}
};

// Thrown when a target value range only partially covers the source range;
// [lo, hi] is the largest usable sub-interval of the requested one.
class OverlapError : public Error {
public:
    OverlapError(std::string msg, double lo, double hi)
        : Error(Kind::overlap, std::move(msg)), lo_(lo), hi_(hi) {}
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double lo_, hi_;
};

} // namespace odeq

#endif
