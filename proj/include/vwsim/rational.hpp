#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vwsim {

struct RationalOverflow : std::runtime_error {
    RationalOverflow() : std::runtime_error("rational overflow") {}
};

// Exact rational over 64-bit integers, normalized (den > 0, gcd(num,den) == 1).
// Intermediate products use 128-bit arithmetic; results that do not reduce back
// into 64 bits throw RationalOverflow. Simulation times and step sizes stay tiny,
// so overflow is only reachable through pathological netlist constants.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_i128(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                         i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return from_i128(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                         i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    // Correctly rounded for |num|, den <= 2^53 (the common case); larger values go
    // through 80-bit extended precision, which is exact for any int64 operand.
    double to_double() const {
        constexpr std::int64_t exact = std::int64_t(1) << 53;
        if (den_ == 1) return static_cast<double>(num_);
        if (num_ < exact && num_ > -exact && den_ < exact)
            return static_cast<double>(num_) / static_cast<double>(den_);
        return static_cast<double>(static_cast<long double>(num_) /
                                   static_cast<long double>(den_));
    }

    std::string to_string() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    // Accepts "7", "-3/4", "0.25", "2e-13", "1.5e3", ".5". The decimal forms convert
    // exactly (digits over a power of ten), never through a double.
    static std::optional<Rational> parse(std::string_view s);

private:
    using i128 = __int128;

    static Rational from_i128(i128 n, i128 d) {
        if (d == 0) throw std::domain_error("rational division by zero");
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        constexpr i128 lo = -i128(std::uint64_t(1) << 63);
        constexpr i128 hi = i128((std::uint64_t(1) << 63) - 1);
        if (n < lo || n > hi || d > hi) throw RationalOverflow();
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline std::optional<Rational> Rational::parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') { neg = s[i] == '-'; ++i; }
    if (i >= s.size()) return std::nullopt;

    auto digits = [&](std::int64_t& out, int& count) -> bool {
        count = 0;
        out = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            if (out > (INT64_MAX - 9) / 10) return false;  // too many digits to stay exact
            out = out * 10 + (s[i] - '0');
            ++i;
            ++count;
        }
        return true;
    };

    std::int64_t ipart = 0;
    int icount = 0;
    if (!digits(ipart, icount)) return std::nullopt;

    // a/b form
    if (i < s.size() && s[i] == '/') {
        if (icount == 0) return std::nullopt;
        ++i;
        std::int64_t d = 0;
        int dcount = 0;
        if (!digits(d, dcount) || dcount == 0 || i != s.size() || d == 0) return std::nullopt;
        Rational r(neg ? -ipart : ipart, d);
        return r;
    }

    std::int64_t frac = 0;
    int fcount = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        if (!digits(frac, fcount)) return std::nullopt;
    }
    if (icount == 0 && fcount == 0) return std::nullopt;

    std::int64_t exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) { eneg = s[i] == '-'; ++i; }
        std::int64_t e = 0;
        int ecount = 0;
        if (!digits(e, ecount) || ecount == 0 || e > 18) return std::nullopt;
        exp10 = eneg ? -e : e;
    }
    if (i != s.size()) return std::nullopt;

    static const std::int64_t pow10[19] = {
        1LL, 10LL, 100LL, 1000LL, 10000LL, 100000LL, 1000000LL, 10000000LL,
        100000000LL, 1000000000LL, 10000000000LL, 100000000000LL, 1000000000000LL,
        10000000000000LL, 100000000000000LL, 1000000000000000LL, 10000000000000000LL,
        100000000000000000LL, 1000000000000000000LL};

    try {
        if (fcount > 18) return std::nullopt;
        Rational r(ipart);
        if (fcount > 0) r = r + Rational(frac, pow10[fcount]);
        std::int64_t e = exp10;
        while (e > 0) { std::int64_t chunk = e > 18 ? 18 : e; r = r * Rational(pow10[chunk]); e -= chunk; }
        while (e < 0) { std::int64_t chunk = -e > 18 ? 18 : -e; r = r * Rational(1, pow10[chunk]); e += chunk; }
        if (neg) r = -r;
        return r;
    } catch (const RationalOverflow&) {
        return std::nullopt;
    }
}

}  // namespace vwsim
