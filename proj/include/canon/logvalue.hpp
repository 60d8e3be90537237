#pragma once

#include <cmath>
#include <limits>

namespace canon {

// Signed number stored as sign * exp(log_abs); zero has sign 0.
struct LogValue {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();

    static LogValue from_double(double x) {
        if (x == 0.0) return {};
        return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
    }
    double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
    bool is_zero() const { return sign == 0; }
};

inline LogValue operator*(LogValue a, LogValue b) {
    if (a.sign == 0 || b.sign == 0) return {};
    return {a.sign * b.sign, a.log_abs + b.log_abs};
}

inline LogValue operator*(LogValue a, double b) { return a * LogValue::from_double(b); }

inline LogValue operator-(LogValue a) { return {-a.sign, a.log_abs}; }

inline LogValue operator+(LogValue a, LogValue b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    if (a.log_abs < b.log_abs) std::swap(a, b);
    const double r = std::exp(b.log_abs - a.log_abs);
    if (a.sign == b.sign) return {a.sign, a.log_abs + std::log1p(r)};
    if (r == 1.0) return {};
    return {a.sign, a.log_abs + std::log1p(-r)};
}

inline LogValue operator-(LogValue a, LogValue b) { return a + (-b); }

// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

}  // namespace canon
