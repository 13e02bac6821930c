#include "relux/scalar.hpp"

#include "relux/errors.hpp"

#include <cctype>
#include <cstdio>

namespace relux {

std::string mode_name(ScalarMode m) {
    switch (m) {
        case ScalarMode::rational: return "rational";
        case ScalarMode::binary64: return "binary64";
        case ScalarMode::multiprecision: return "multiprecision";
    }
    return "?";
}

ScalarMode parse_mode(const std::string& s) {
    if (s == "rational") return ScalarMode::rational;
    if (s == "binary64") return ScalarMode::binary64;
    if (s == "multiprecision") return ScalarMode::multiprecision;
    throw ParseError("unknown scalar mode '" + s + "'");
}

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

mpz_class pow10(long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
    return r;
}

}  // namespace

Rational parse_rational(const std::string& text) {
    std::string s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    s = s.substr(b);
    if (s.empty()) throw ParseError("empty rational");
    bool neg = false;
    std::string body = s;
    if (body[0] == '-' || body[0] == '+') {
        neg = body[0] == '-';
        body = body.substr(1);
    }
    Rational q;
    auto slash = body.find('/');
    if (slash != std::string::npos) {
        std::string p = body.substr(0, slash), d = body.substr(slash + 1);
        if (!all_digits(p) || !all_digits(d)) throw ParseError("malformed rational '" + text + "'");
        mpz_class den(d, 10);
        if (den == 0) throw ParseError("zero denominator in '" + text + "'");
        q = Rational(mpz_class(p, 10), den);
    } else {
        std::string mant = body;
        long exp10 = 0;
        auto e = body.find_first_of("eE");
        if (e != std::string::npos) {
            mant = body.substr(0, e);
            std::string es = body.substr(e + 1);
            bool eneg = false;
            if (!es.empty() && (es[0] == '-' || es[0] == '+')) {
                eneg = es[0] == '-';
                es = es.substr(1);
            }
            if (!all_digits(es) || es.size() > 6) throw ParseError("malformed exponent in '" + text + "'");
            exp10 = std::stol(es) * (eneg ? -1 : 1);
        }
        std::string ip = mant, fp;
        auto dot = mant.find('.');
        if (dot != std::string::npos) {
            ip = mant.substr(0, dot);
            fp = mant.substr(dot + 1);
        }
        if (ip.empty() && fp.empty()) throw ParseError("malformed number '" + text + "'");
        if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)))
            throw ParseError("malformed number '" + text + "'");
        mpz_class num(ip + fp, 10);
        exp10 -= static_cast<long>(fp.size());
        if (exp10 >= 0)
            q = Rational(num * pow10(exp10));
        else
            q = Rational(num, pow10(-exp10));
    }
    q.canonicalize();
    return neg ? Rational(-q) : q;
}

std::string format_rational(const Rational& q) { return q.get_str(); }

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw ContractError("non-finite value has no rational form");
    Rational q(x);  // exact: mpq_set_d
    return q;
}

PrecisionGuard::PrecisionGuard(unsigned digits10) : saved_(BigFloat::default_precision()) {
    BigFloat::default_precision(digits10);
}

PrecisionGuard::~PrecisionGuard() { BigFloat::default_precision(saved_); }

FastRational FastRational::from_rational(const Rational& q) {
    if (!q.get_num().fits_slong_p() || !q.get_den().fits_slong_p()) throw FastRationalOverflow();
    return FastRational(q.get_num().get_si(), q.get_den().get_si());
}

std::string ScalarTraits<double>::to_string(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

BigFloat ScalarTraits<BigFloat>::from_rational(const Rational& q) {
    BigFloat n(q.get_num().get_str()), d(q.get_den().get_str());
    return n / d;
}

std::string ScalarTraits<BigFloat>::to_string(const BigFloat& x) {
    return x.str(0, std::ios_base::scientific);
}

}  // namespace relux
