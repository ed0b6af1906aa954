#include "lo/rational.hpp"

#include <cctype>
#include <limits>

#include "lo/error.hpp"

namespace lo {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Integer parse_integer(std::string_view s, std::string_view whole) {
    bool neg = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) throw InvalidParameter("malformed rational '" + std::string(whole) + "'");
    Integer z(std::string(s), 10);
    return neg ? Integer(-z) : z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw InvalidParameter("empty rational");

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Integer num = parse_integer(text.substr(0, slash), text);
        Integer den = parse_integer(text.substr(slash + 1), text);
        if (den == 0) throw InvalidParameter("zero denominator in '" + std::string(text) + "'");
        Rational r(num, den);
        r.canonicalize();
        return r;
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view ip = text.substr(0, dot);
        std::string_view fp = text.substr(dot + 1);
        bool neg = !ip.empty() && ip.front() == '-';
        if (!ip.empty() && (ip.front() == '-' || ip.front() == '+')) ip.remove_prefix(1);
        if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)))
            throw InvalidParameter("malformed decimal '" + std::string(text) + "'");
        Integer whole = ip.empty() ? Integer(0) : Integer(std::string(ip), 10);
        Integer frac = fp.empty() ? Integer(0) : Integer(std::string(fp), 10);
        Integer scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
        Rational r(whole * scale + frac, scale);
        r.canonicalize();
        return neg ? Rational(-r) : r;
    }
    return Rational(parse_integer(text, text));
}

std::string to_string(const Rational& value) {
    Rational v = value;
    v.canonicalize();
    return v.get_num().get_str() + "/" + v.get_den().get_str();
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw InvalidParameter("zero denominator");
    Rational r(Integer(static_cast<long>(num)), Integer(static_cast<long>(den)));
    r.canonicalize();
    return r;
}

QVec add(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw SizeMismatch("vector dimensions differ");
    QVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

QVec sub(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw SizeMismatch("vector dimensions differ");
    QVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

QVec scale(const QVec& a, const Rational& s) {
    QVec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
    return out;
}

void add_scaled(QVec& acc, const QVec& v, const Rational& s) {
    if (acc.size() != v.size()) throw SizeMismatch("vector dimensions differ");
    if (s == 0) return;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i] * s;
}

Rational dot(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw SizeMismatch("vector dimensions differ");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rational norm2(const QVec& a) {
    Rational s = 0;
    for (const auto& x : a) s += x * x;
    return s;
}

Rational dist2(const QVec& a, const QVec& b) {
    if (a.size() != b.size()) throw SizeMismatch("vector dimensions differ");
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        Rational t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

bool is_zero(const QVec& a) {
    for (const auto& x : a)
        if (x != 0) return false;
    return true;
}

Integer floor_of(const Rational& x) {
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return q;
}

Integer round_half_down(const Rational& x) {
    // ceil(x - 1/2)
    Rational shifted = x - Rational(1, 2);
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
    return q;
}

Rational pow(const Rational& base, unsigned exponent) {
    Rational out = 1;
    mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
    mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
    out.canonicalize();
    return out;
}

std::int64_t to_int64(const Integer& x) {
    if (!x.fits_slong_p()) throw InvalidParameter("integer out of int64 range: " + x.get_str());
    return static_cast<std::int64_t>(x.get_si());
}

std::int64_t to_int64(const Rational& x) {
    if (x.get_den() != 1) throw InvalidParameter("expected an integer, got " + to_string(x));
    return to_int64(x.get_num());
}

}  // namespace lo
