#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstdint>
#include <ios>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace expmod {

// Exact rational scalar (GMP backed). Used wherever "rational mode" is
// requested and as the ground-truth oracle for float results.
using rational = boost::multiprecision::mpq_rational;
using bigint = boost::multiprecision::mpz_int;

// Arbitrary-precision binary float (MPFR backed, runtime precision).
// Expression templates are off: every operation materializes, which keeps
// precision propagation predictable in the recurrence loops.
using big_float = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                                boost::multiprecision::et_off>;

inline unsigned digits10_for_bits(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 2;
}

// Scoped working precision for big_float, in bits. Values keep the precision
// they were constructed with, so results may be returned out of the scope.
class precision_guard {
  public:
    explicit precision_guard(unsigned bits)
        : saved_(big_float::default_precision()) {
        if (bits < 53) throw std::invalid_argument("precision must be at least 53 bits");
        big_float::default_precision(digits10_for_bits(bits));
    }
    precision_guard(const precision_guard&) = delete;
    precision_guard& operator=(const precision_guard&) = delete;
    ~precision_guard() { big_float::default_precision(saved_); }

  private:
    unsigned saved_;
};

// A probability parsed from user input. "1/10" style input keeps the
// fraction flag set, which is what makes a run eligible for rational mode.
// Raised when an iterative or finite-precision computation cannot reach its
// target accuracy (convergence cap hit, precision ladder exhausted). Callers
// that map errors to process exit codes treat this as a numeric failure.
struct numeric_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact integer power by squaring; works for rational, float and extended
// float scalars alike (std::pow would lose exactness for rationals).
template <class T>
T int_pow(T base, unsigned long long exponent) {
    T acc(1);
    while (exponent) {
        if (exponent & 1ull) acc = acc * base;
        base = base * base;
        exponent >>= 1;
    }
    return acc;
}

struct probability {
    std::string text;      // original spelling, used for reproducible echo
    rational exact;        // exact value (decimal strings are exact in base 10)
    bool from_fraction = false;

    double as_double() const { return exact.convert_to<double>(); }
    big_float as_float() const {
        return big_float(numerator(exact)) / big_float(denominator(exact));
    }
};

inline bool parse_uint_digits(const std::string& s, std::size_t from, std::size_t to) {
    if (from >= to) return false;
    for (std::size_t i = from; i < to; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

// Leading zeros would make the GMP string constructor guess octal.
inline bigint digits_to_bigint(std::string digits) {
    auto first = digits.find_first_not_of('0');
    if (first == std::string::npos) return bigint(0);
    return bigint(digits.substr(first));
}

// Accepts "0.35", ".5", "1/10". Throws std::invalid_argument on anything
// else or when the value lies outside the open interval (0, 1).
inline probability parse_probability(const std::string& s) {
    probability out;
    out.text = s;
    auto bad = [&] { throw std::invalid_argument("invalid probability '" + s + "'"); };
    if (s.empty()) bad();
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        if (!parse_uint_digits(s, 0, slash) || !parse_uint_digits(s, slash + 1, s.size())) bad();
        bigint num = digits_to_bigint(s.substr(0, slash));
        bigint den = digits_to_bigint(s.substr(slash + 1));
        if (den == 0) bad();
        out.exact = rational(num, den);
        out.from_fraction = true;
    } else {
        auto dot = s.find('.');
        if (dot == std::string::npos) {
            if (!parse_uint_digits(s, 0, s.size())) bad();
            out.exact = rational(digits_to_bigint(s));
        } else {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            std::size_t frac_len = s.size() - dot - 1;
            if (digits.empty() || frac_len == 0 || !parse_uint_digits(digits, 0, digits.size())) bad();
            bigint den = 1;
            for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
            out.exact = rational(digits_to_bigint(digits), den);
        }
    }
    if (out.exact <= 0 || out.exact >= 1) bad();
    return out;
}

// Round-trip-safe float formatting: 17 significant digits, scientific.
inline std::string format_float(const big_float& v) {
    return v.str(17, std::ios_base::scientific);
}

inline std::string format_float(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(16) << v;
    return os.str();
}

// Rationals render as "num/den", including a unit denominator, so the
// column type never changes shape.
inline std::string format_rational(const rational& v) {
    std::string s = v.str();
    if (s.find('/') == std::string::npos) s += "/1";
    return s;
}

}  // namespace expmod
