#pragma once

#include <gmpxx.h>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace relux {

using Rational = mpq_class;
using BigInt = mpz_class;
using BigFloat = boost::multiprecision::mpfr_float;

enum class ScalarMode { rational, binary64, multiprecision };

std::string mode_name(ScalarMode m);
ScalarMode parse_mode(const std::string& s);

/// Parses "p/q", "p", or a finite decimal such as "-0.25" or "1e-3" into lowest terms.
Rational parse_rational(const std::string& s);
std::string format_rational(const Rational& q);

/// p/q in lowest terms (mpq_class(p, q) alone does not canonicalize).
inline Rational make_rational(long p, long q) {
    Rational r(p, q);
    r.canonicalize();
    return r;
}

/// Exact rational value of a finite double.
Rational rational_from_double(double x);

/// Sets the working precision of BigFloat for the lifetime of the guard.
class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned digits10);
    ~PrecisionGuard();
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned saved_;
};

struct FastRationalOverflow : std::overflow_error {
    FastRationalOverflow() : std::overflow_error("int64 rational overflow") {}
};

// Small rationals on int64 with checked arithmetic. Used by the region-count
// sweeps, where mpq allocation dominates; any overflow throws and callers
// redo the work with Rational.
class FastRational {
public:
    FastRational() = default;
    FastRational(long long n) : num_(n), den_(1) {}  // NOLINT
    FastRational(long long n, long long d) { set(n, d); }

    long long num() const { return num_; }
    long long den() const { return den_; }

    friend FastRational operator+(const FastRational& a, const FastRational& b) {
        if (a.den_ == b.den_) return make(add(a.num_, b.num_), a.den_);
        __int128 n = (__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_;
        __int128 d = (__int128)a.den_ * b.den_;
        return reduce(n, d);
    }
    friend FastRational operator-(const FastRational& a, const FastRational& b) { return a + (-b); }
    friend FastRational operator*(const FastRational& a, const FastRational& b) {
        if (a.num_ == 0 || b.num_ == 0) return FastRational();
        return reduce((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }
    friend FastRational operator/(const FastRational& a, const FastRational& b) {
        if (b.num_ == 0) throw std::domain_error("division by zero");
        return reduce((__int128)a.num_ * b.den_, (__int128)a.den_ * b.num_);
    }
    FastRational operator-() const {
        if (num_ == INT64_MIN) throw FastRationalOverflow();
        FastRational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    FastRational& operator+=(const FastRational& o) { return *this = *this + o; }
    FastRational& operator-=(const FastRational& o) { return *this = *this - o; }
    FastRational& operator*=(const FastRational& o) { return *this = *this * o; }
    FastRational& operator/=(const FastRational& o) { return *this = *this / o; }

    friend bool operator==(const FastRational& a, const FastRational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const FastRational& a, const FastRational& b) { return !(a == b); }
    friend bool operator<(const FastRational& a, const FastRational& b) {
        return (__int128)a.num_ * b.den_ < (__int128)b.num_ * a.den_;
    }
    friend bool operator>(const FastRational& a, const FastRational& b) { return b < a; }
    friend bool operator<=(const FastRational& a, const FastRational& b) { return !(b < a); }
    friend bool operator>=(const FastRational& a, const FastRational& b) { return !(a < b); }

    int sign() const { return (num_ > 0) - (num_ < 0); }
    Rational to_rational() const { return Rational(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_))); }
    static FastRational from_rational(const Rational& q);

private:
    long long num_ = 0;
    long long den_ = 1;

    static long long add(long long a, long long b) {
        long long r;
        if (__builtin_add_overflow(a, b, &r)) throw FastRationalOverflow();
        return r;
    }
    static FastRational make(long long n, long long d) {
        FastRational r;
        r.set(n, d);
        return r;
    }
    void set(long long n, long long d) {
        if (d == 0) throw std::domain_error("zero denominator");
        *this = reduce(n, d);
    }
    static FastRational reduce(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        if (n > INT64_MAX || n < -INT64_MAX || d > INT64_MAX) throw FastRationalOverflow();
        FastRational r;
        r.num_ = (long long)n;
        r.den_ = (long long)d;
        if (r.num_ == 0) r.den_ = 1;
        return r;
    }
};

inline std::ostream& operator<<(std::ostream& os, const FastRational& q) {
    os << q.num();
    if (q.den() != 1) os << '/' << q.den();
    return os;
}

// Uniform access to the three scalar types. Catalog activations are only
// defined for the floating types.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    static constexpr ScalarMode mode = ScalarMode::rational;
    static constexpr bool exact = true;
    static Rational from_rational(const Rational& q) { return q; }
    static double to_double(const Rational& q) { return q.get_d(); }
    static int sign(const Rational& q) { return sgn(q); }
    static std::string to_string(const Rational& q) { return format_rational(q); }
};

template <>
struct ScalarTraits<FastRational> {
    static constexpr ScalarMode mode = ScalarMode::rational;
    static constexpr bool exact = true;
    static FastRational from_rational(const Rational& q) { return FastRational::from_rational(q); }
    static double to_double(const FastRational& q) { return (double)q.num() / (double)q.den(); }
    static int sign(const FastRational& q) { return q.sign(); }
    static std::string to_string(const FastRational& q) { return format_rational(q.to_rational()); }
};

template <>
struct ScalarTraits<double> {
    static constexpr ScalarMode mode = ScalarMode::binary64;
    static constexpr bool exact = false;
    static double from_rational(const Rational& q) { return q.get_d(); }
    static double to_double(double x) { return x; }
    static int sign(double x) { return (x > 0) - (x < 0); }
    static std::string to_string(double x);
};

template <>
struct ScalarTraits<BigFloat> {
    static constexpr ScalarMode mode = ScalarMode::multiprecision;
    static constexpr bool exact = false;
    static BigFloat from_rational(const Rational& q);
    static double to_double(const BigFloat& x) { return x.convert_to<double>(); }
    static int sign(const BigFloat& x) { return x.sign(); }
    static std::string to_string(const BigFloat& x);
};

template <class T>
T scalar_from_rational(const Rational& q) {
    return ScalarTraits<T>::from_rational(q);
}

template <class T>
double to_double(const T& x) {
    return ScalarTraits<T>::to_double(x);
}

template <class T>
int sign_of(const T& x) {
    return ScalarTraits<T>::sign(x);
}

template <class T>
T relu(const T& x) {
    return sign_of(x) > 0 ? x : T(0);
}

template <class T>
T abs_of(const T& x) {
    return sign_of(x) < 0 ? T(-x) : x;
}

}  // namespace relux
