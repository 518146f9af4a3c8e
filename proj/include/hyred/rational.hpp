#ifndef HYRED_RATIONAL_HPP
#define HYRED_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <iosfwd>
#include <functional>

namespace hyred {

// Exact small rational. Valuations, break points and thicknesses all live in
// (1/N)Z with tiny numerators, so 64-bit components with 128-bit intermediates
// are plenty.
struct Rat {
    long long n = 0;
    long long d = 1;

    Rat() = default;
    Rat(long long num) : n(num), d(1) {}
    Rat(long long num, long long den) : n(num), d(den) { normalize(); }

    void normalize() {
        if (d == 0) throw std::domain_error("Rat: zero denominator");
        if (d < 0) { n = -n; d = -d; }
        long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n == 0) d = 1;
    }

    static Rat make128(__int128 num, __int128 den) {
        if (den == 0) throw std::domain_error("Rat: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        __int128 a = num < 0 ? -num : num, b = den;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { num /= a; den /= a; }
        if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX)
            throw std::overflow_error("Rat: overflow");
        Rat r; r.n = (long long)num; r.d = (long long)den;
        return r;
    }

    Rat operator+(const Rat& o) const { return make128((__int128)n * o.d + (__int128)o.n * d, (__int128)d * o.d); }
    Rat operator-(const Rat& o) const { return make128((__int128)n * o.d - (__int128)o.n * d, (__int128)d * o.d); }
    Rat operator*(const Rat& o) const { return make128((__int128)n * o.n, (__int128)d * o.d); }
    Rat operator/(const Rat& o) const {
        if (o.n == 0) throw std::domain_error("Rat: division by zero");
        return make128((__int128)n * o.d, (__int128)d * o.n);
    }
    Rat operator-() const { Rat r; r.n = -n; r.d = d; return r; }
    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    bool operator==(const Rat& o) const { return n == o.n && d == o.d; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const { return (__int128)n * o.d < (__int128)o.n * d; }
    bool operator>(const Rat& o) const { return o < *this; }
    bool operator<=(const Rat& o) const { return !(o < *this); }
    bool operator>=(const Rat& o) const { return !(*this < o); }

    bool is_integer() const { return d == 1; }
    long long floor() const { return n >= 0 ? n / d : -((-n + d - 1) / d); }
    long long ceil() const { return -((-*this).floor()); }

    std::string str() const {
        if (d == 1) return std::to_string(n);
        return std::to_string(n) + "/" + std::to_string(d);
    }
};

inline Rat min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }

std::ostream& operator<<(std::ostream& os, const Rat& r);

} // namespace hyred

template <> struct std::hash<hyred::Rat> {
    size_t operator()(const hyred::Rat& r) const {
        return std::hash<long long>()(r.n) * 1000003u ^ std::hash<long long>()(r.d);
    }
};

#endif
