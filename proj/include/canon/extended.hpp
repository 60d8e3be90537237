#pragma once

#include <string>

namespace canon {

// A real number or +infinity. Infinity is a flag, never a stored float.
class Extended {
public:
    Extended() = default;
    Extended(double v) : value_(v) {}  // NOLINT: implicit on purpose

    static Extended infinity() {
        Extended e;
        e.infinite_ = true;
        return e;
    }

    bool is_infinite() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }

    // Throws a domain error when infinite.
    double value() const;
    double value_or(double cap) const noexcept { return infinite_ ? cap : value_; }
    // Infinite values are replaced by the cap, finite values are clamped to it.
    double capped(double cap) const noexcept { return infinite_ || value_ > cap ? cap : value_; }

    std::string to_string() const;

    friend bool operator==(const Extended& a, const Extended& b) noexcept {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
    }
    friend bool operator<(const Extended& a, const Extended& b) noexcept {
        if (a.infinite_) return false;
        if (b.infinite_) return true;
        return a.value_ < b.value_;
    }

private:
    double value_ = 0.0;
    bool infinite_ = false;
};

Extended max(const Extended& a, const Extended& b);
Extended operator+(const Extended& a, const Extended& b);
// 1/x with 1/0 = infinity and 1/infinity = 0.
Extended reciprocal(const Extended& x);

}  // namespace canon
