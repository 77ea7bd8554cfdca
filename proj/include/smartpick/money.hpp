#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

namespace smartpick {

// Currency amount in integer micro-units (1e-6 of a dollar). Keeping totals
// in integers makes cost sums associative and exactly reproducible; rates are
// converted once per component, not accumulated in floating point.
class Money {
public:
    constexpr Money() = default;
    static constexpr Money from_micros(std::int64_t m) { return Money(m); }
    static Money from_dollars(double d) { return Money(std::llround(d * 1e6)); }

    constexpr std::int64_t micros() const { return micros_; }
    constexpr double dollars() const { return static_cast<double>(micros_) / 1e6; }

    friend constexpr Money operator+(Money a, Money b) { return Money(a.micros_ + b.micros_); }
    friend constexpr Money operator-(Money a, Money b) { return Money(a.micros_ - b.micros_); }
    Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
    friend constexpr auto operator<=>(Money, Money) = default;

    std::string str() const {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "$%.6f", dollars());
        return buf;
    }

private:
    explicit constexpr Money(std::int64_t m) : micros_(m) {}
    std::int64_t micros_ = 0;
};

} // namespace smartpick
