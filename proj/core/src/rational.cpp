#include "compmdp/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "compmdp/errors.hpp"

namespace compmdp {

namespace {

using Int = boost::multiprecision::mpz_int;

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Int parse_int(std::string_view s) {
    // strip leading zeros; GMP would read them as an octal prefix
    while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
    return Int(std::string(s));
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) throw InputError("empty number literal");

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) throw InputError("bare sign in number literal '" + std::string(text) + "'");

    auto fail = [&]() -> Rational {
        throw InputError("cannot parse number literal '" + std::string(text) + "'");
    };

    Rational value;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        std::string_view num = s.substr(0, slash);
        std::string_view den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) return fail();
        Int d = parse_int(den);
        if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
        value = Rational(parse_int(num), d);
    } else {
        std::string_view mantissa = s;
        long exponent10 = 0;
        if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
            mantissa = s.substr(0, e);
            std::string exp_text(s.substr(e + 1));
            if (exp_text.empty()) return fail();
            char* end = nullptr;
            exponent10 = std::strtol(exp_text.c_str(), &end, 10);
            if (end == nullptr || *end != '\0') return fail();
        }
        std::string digits;
        long frac_digits = 0;
        if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
            std::string_view ip = mantissa.substr(0, dot), fp = mantissa.substr(dot + 1);
            if (ip.empty() && fp.empty()) return fail();
            if (!ip.empty() && !all_digits(ip)) return fail();
            if (!fp.empty() && !all_digits(fp)) return fail();
            digits = std::string(ip) + std::string(fp);
            frac_digits = static_cast<long>(fp.size());
        } else {
            if (!all_digits(mantissa)) return fail();
            digits = std::string(mantissa);
        }
        if (digits.empty()) return fail();
        Int numerator = parse_int(digits);
        long shift = exponent10 - frac_digits;
        Int pow10 = 1;
        for (long i = 0; i < std::labs(shift); ++i) pow10 *= 10;
        value = shift >= 0 ? Rational(numerator * pow10) : Rational(numerator, pow10);
    }
    return negative ? -value : value;
}

std::string to_fraction_string(const Rational& q) {
    if (denominator(q) == 1) return numerator(q).str();
    return numerator(q).str() + "/" + denominator(q).str();
}

double to_double_down(const Rational& q) {
    // mpq_get_d truncates toward zero (boost's convert_to rounds to
    // nearest, which is not sound here); fix up the sign cases explicitly.
    double d = mpq_get_d(q.backend().data());
    while (exact(d) > q) d = std::nextafter(d, -HUGE_VAL);
    return d;
}

double to_double_up(const Rational& q) {
    double d = mpq_get_d(q.backend().data());
    while (exact(d) < q) d = std::nextafter(d, HUGE_VAL);
    return d;
}

Rational exact(double x) {
    if (!std::isfinite(x)) throw InputError("non-finite value cannot become a rational");
    return Rational(x);
}

std::vector<Rational> exact(const std::vector<double>& xs) {
    std::vector<Rational> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(exact(x));
    return out;
}

std::vector<double> down(const std::vector<Rational>& qs) {
    std::vector<double> out;
    out.reserve(qs.size());
    for (const Rational& q : qs) out.push_back(to_double_down(q));
    return out;
}

}  // namespace compmdp
