#include "canon/extended.hpp"

#include <cstdio>

#include "canon/error.hpp"

namespace canon {

double Extended::value() const {
    if (infinite_) fail(ErrorKind::domain, "value requested from an infinite index");
    return value_;
}

std::string Extended::to_string() const {
    if (infinite_) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value_);
    return buf;
}

Extended max(const Extended& a, const Extended& b) { return a < b ? b : a; }

Extended operator+(const Extended& a, const Extended& b) {
    if (a.is_infinite() || b.is_infinite()) return Extended::infinity();
    return Extended(a.value() + b.value());
}

Extended reciprocal(const Extended& x) {
    if (x.is_infinite()) return Extended(0.0);
    if (x.value() == 0.0) return Extended::infinity();
    return Extended(1.0 / x.value());
}

}  // namespace canon
