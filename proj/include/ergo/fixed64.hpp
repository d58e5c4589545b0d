// fixed64.hpp — circle arithmetic in 2^-64 fixed point, plus the symbolic
// rotation tokens (rationals, quadratic irrationals) that feed it.
//
// Points and rotation amounts on the circle are uint64 fractions of a turn.
// Wrapping integer arithmetic is then *exact* mod-1 group arithmetic: n-fold
// rotation is a single multiply, composition is associative to the bit, and
// inverses are exact. A token's quantization error (<= 2^-64 per turn) drifts
// by at most n * 2^-64 over an orbit, far below every tolerance in this suite.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergo {

// ------------------------------- Fixed64 ------------------------------------

struct Fixed64 {
    std::uint64_t raw{0};

    static constexpr double kScale = 18446744073709551616.0;  // 2^64

    static Fixed64 from_double(double x) {
        if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("Fixed64: value outside [0,1)");
        long double s = static_cast<long double>(x) * static_cast<long double>(kScale);
        if (s >= static_cast<long double>(kScale)) return Fixed64{~std::uint64_t{0}};
        return Fixed64{static_cast<std::uint64_t>(s)};
    }

    double to_double() const { return static_cast<double>(raw) / kScale; }

    // fraction of a turn as an angle in radians
    double angle() const { return to_double() * 6.283185307179586476925286766559; }

    friend Fixed64 operator+(Fixed64 a, Fixed64 b) { return Fixed64{a.raw + b.raw}; }
    friend Fixed64 operator-(Fixed64 a, Fixed64 b) { return Fixed64{a.raw - b.raw}; }
    Fixed64 operator-() const { return Fixed64{~raw + 1}; }
    // n-fold rotation amount; exact mod 2^64 for any signed n
    Fixed64 times(long long n) const { return Fixed64{raw * static_cast<std::uint64_t>(n)}; }
    friend bool operator==(Fixed64 a, Fixed64 b) { return a.raw == b.raw; }
    friend bool operator!=(Fixed64 a, Fixed64 b) { return a.raw != b.raw; }

    // signed distance to the nearest integer, in turns
    double dist_to_integer() const {
        std::uint64_t r = raw;
        std::uint64_t d = std::min(r, ~r + 1);
        return static_cast<double>(d) / kScale;
    }
};

inline std::complex<double> unit_phase(Fixed64 t) {
    double a = t.angle();
    return {std::cos(a), std::sin(a)};
}

// ------------------------------- Rational -----------------------------------

// Exact small rational with overflow-checked arithmetic. Audit-side only.
struct Rational {
    long long num{0};
    long long den{1};

    Rational() = default;
    Rational(long long n, long long d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    bool is_zero() const { return num == 0; }
    bool is_integer() const { return den == 1; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    static long long checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Rational: overflow");
        return static_cast<long long>(v);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num * b.den + (__int128)b.num * a.den;
        __int128 d = (__int128)a.den * b.den;
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        return Rational(checked(n), checked(d));
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        __int128 n = (__int128)a.num * b.num;
        __int128 d = (__int128)a.den * b.den;
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        return Rational(checked(n), checked(d));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num, b.den); }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b) { __int128 t = a % b; a = b; b = t; }
        return a < 0 ? -a : a;
    }
};

// ------------------------------- QuadExpr -----------------------------------

// A number of the form  r0 + sum_m c_m * sqrt(m)  with rational coefficients
// and distinct non-square radicands m. {1, sqrt(m1), sqrt(m2), ...} are
// linearly independent over Q, so irrationality is a coefficient check.
struct QuadExpr {
    Rational r0;
    std::map<long long, Rational> radicals;  // radicand -> coefficient
    bool exact{true};                        // false: decimal-literal fallback

    bool is_rational() const {
        for (auto& [m, c] : radicals)
            if (!c.is_zero()) return false;
        return true;
    }
    bool is_irrational() const { return exact && !is_rational(); }

    QuadExpr& operator+=(const QuadExpr& o) {
        exact = exact && o.exact;
        r0 = r0 + o.r0;
        for (auto& [m, c] : o.radicals) {
            auto it = radicals.find(m);
            if (it == radicals.end()) radicals.emplace(m, c);
            else it->second = it->second + c;
        }
        return *this;
    }
    QuadExpr scaled(long long k) const {
        QuadExpr out;
        out.exact = exact;
        out.r0 = r0 * Rational(k);
        for (auto& [m, c] : radicals) out.radicals.emplace(m, c * Rational(k));
        return out;
    }
    double value() const {
        double v = r0.value();
        for (auto& [m, c] : radicals) v += c.value() * std::sqrt(static_cast<double>(m));
        return v;
    }
};

// ------------------------------- Irrational ---------------------------------

// A rotation amount declared by token. Accepted spellings:
//   "golden"            (sqrt(5)-1)/2
//   "sqrt2", "sqrt17"   fractional part of sqrt(m), m not a perfect square
//   "frac-sqrt(7)"      same as sqrt7
//   "3/8"               rational p/q, reduced mod 1
//   "0.3729"            decimal literal (numeric-only audits)
// and any of the above scaled by an integer: "2*golden", "-3*sqrt2".
// Scaled tokens are defined as exact uint64 multiples of the base token's
// fixed-point value, so declared integer relations (e.g. beta = 2*alpha)
// hold exactly in the dynamics.
class Irrational {
public:
    static Irrational parse(const std::string& token);
    static Irrational golden() { return parse("golden"); }
    static Irrational frac_sqrt(long long m) { return parse("sqrt" + std::to_string(m)); }
    static Irrational rational(long long p, long long q);
    static Irrational zero() { return rational(0, 1); }

    Fixed64 fixed() const { return fixed_; }
    double value() const { return fixed_.to_double(); }  // the quantized value is canonical
    const QuadExpr& sym() const { return sym_; }
    bool symbolic() const { return sym_.exact; }
    const std::string& token() const { return token_; }

private:
    Fixed64 fixed_{};
    QuadExpr sym_{};
    std::string token_;
};

namespace detail {

inline bool is_perfect_square(long long m, long long* root = nullptr) {
    if (m < 0) return false;
    long long r = static_cast<long long>(std::sqrt(static_cast<double>(m)));
    while (r * r > m) --r;
    while ((r + 1) * (r + 1) <= m) ++r;
    if (root) *root = r;
    return r * r == m;
}

inline Fixed64 fixed_from_long_double(long double x) {
    // x in [0,1); truncation may be one ulp of 2^-64 off a perfect rounding,
    // which nothing downstream can observe.
    long double s = x * 18446744073709551616.0L;
    if (s < 0.0L) s = 0.0L;
    if (s >= 18446744073709551616.0L) return Fixed64{~std::uint64_t{0}};
    return Fixed64{static_cast<std::uint64_t>(s)};
}

}  // namespace detail

inline Irrational Irrational::rational(long long p, long long q) {
    return parse(std::to_string(p) + "/" + std::to_string(q));
}

inline Irrational Irrational::parse(const std::string& token) {
    std::string t;
    for (char c : token)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t.empty()) throw std::invalid_argument("empty rotation token");

    long long mult = 1;
    auto star = t.find('*');
    if (star != std::string::npos) {
        try {
            std::size_t used = 0;
            mult = std::stoll(t.substr(0, star), &used);
            if (used != star) throw std::invalid_argument("");
        } catch (...) {
            throw std::invalid_argument("bad multiplier in rotation token '" + token + "'");
        }
        t = t.substr(star + 1);
    }

    Irrational out;
    out.token_ = token;

    auto base_sqrt = [&](long long m) {
        long long root = 0;
        if (m <= 0 || detail::is_perfect_square(m, &root))
            throw std::invalid_argument("sqrt token requires a positive non-square integer: " + token);
        out.sym_.r0 = Rational(-static_cast<long long>(std::floor(std::sqrt(static_cast<double>(m)))));
        out.sym_.radicals[m] = Rational(1);
        long double v = sqrtl(static_cast<long double>(m));
        out.fixed_ = detail::fixed_from_long_double(v - floorl(v));
    };

    if (t == "golden") {
        // (sqrt5 - 1) / 2
        out.sym_.r0 = Rational(-1, 2);
        out.sym_.radicals[5] = Rational(1, 2);
        out.fixed_ = detail::fixed_from_long_double((sqrtl(5.0L) - 1.0L) / 2.0L);
    } else if (t.rfind("sqrt", 0) == 0) {
        base_sqrt(std::stoll(t.substr(4)));
    } else if (t.rfind("frac-sqrt(", 0) == 0 && t.back() == ')') {
        base_sqrt(std::stoll(t.substr(10, t.size() - 11)));
    } else if (t.find('/') != std::string::npos) {
        auto slash = t.find('/');
        long long p = std::stoll(t.substr(0, slash));
        long long q = std::stoll(t.substr(slash + 1));
        if (q <= 0) throw std::invalid_argument("rational token needs positive denominator: " + token);
        long long pm = ((p % q) + q) % q;
        out.sym_.r0 = Rational(pm, q);
        // correctly rounded p/q in fixed point
        unsigned __int128 num = (static_cast<unsigned __int128>(pm) << 64) + static_cast<unsigned __int128>(q / 2);
        out.fixed_ = Fixed64{static_cast<std::uint64_t>(num / static_cast<unsigned __int128>(q))};
    } else {
        // decimal literal
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument("unrecognized rotation token '" + token + "'");
        v -= std::floor(v);
        out.sym_.exact = false;
        out.sym_.r0 = Rational(0);
        out.fixed_ = Fixed64::from_double(v);
    }

    if (mult != 1) {
        out.fixed_ = out.fixed_.times(mult);  // exact multiple; keeps declared relations exact
        out.sym_ = out.sym_.scaled(mult);
    }
    return out;
}

}  // namespace ergo
