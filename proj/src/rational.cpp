#include "rtlab/rational.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>

namespace rtlab {

namespace {
constexpr mpfr_prec_t kPrec = 256;

Q from_mpfr(const mpfr_t v) {
    Q out;
    mpfr_get_q(out.get_mpq_t(), v);
    return out;
}
}  // namespace

Q q(long num, long den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    Q v(num, den);
    v.canonicalize();
    return v;
}

Q q_parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational");
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        if (s.find('/') != std::string::npos) throw std::invalid_argument("bad rational: " + s);
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        size_t frac = s.size() - dot - 1;
        Q v;
        if (v.get_num().set_str(digits, 10) != 0) throw std::invalid_argument("bad rational: " + s);
        v.get_den() = zpow(10, frac);
        v.canonicalize();
        return v;
    }
    Q v;
    if (v.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
    if (v.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    v.canonicalize();
    return v;
}

std::string q_str(const Q& v) { return v.get_str(10); }

double q_double(const Q& v) { return v.get_d(); }

long double q_ldouble(const Q& v) {
    // mpq_get_d truncates; go through MPFR for a correctly rounded long double.
    mpfr_t t;
    mpfr_init2(t, 128);
    mpfr_set_q(t, v.get_mpq_t(), MPFR_RNDN);
    long double out = mpfr_get_ld(t, MPFR_RNDN);
    mpfr_clear(t);
    return out;
}

Q q_from_double(double d) {
    if (!std::isfinite(d)) throw std::invalid_argument("non-finite double");
    Q v(d);
    v.canonicalize();
    return v;
}

Z zpow(long base, unsigned long e) {
    Z out;
    mpz_ui_pow_ui(out.get_mpz_t(), static_cast<unsigned long>(std::labs(base)), e);
    if (base < 0 && (e % 2 == 1)) out = -out;
    return out;
}

Q qpow(const Q& base, long e) {
    if (e == 0) return Q(1);
    Q b = base;
    if (e < 0) {
        if (b == 0) throw std::domain_error("0 to a negative power");
        b = 1 / b;
        e = -e;
    }
    Q out;
    mpz_pow_ui(out.get_num_mpz_t(), b.get_num_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(out.get_den_mpz_t(), b.get_den_mpz_t(), static_cast<unsigned long>(e));
    out.canonicalize();
    return out;
}

Z q_floor(const Q& v) {
    Z out;
    mpz_fdiv_q(out.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
    return out;
}

Z q_ceil(const Q& v) {
    Z out;
    mpz_cdiv_q(out.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
    return out;
}

bool q_is_integer(const Q& v) { return v.get_den() == 1; }

IntervalQ::IntervalQ(Q l, Q r) : left(std::move(l)), right(std::move(r)) {
    if (!(left < right)) throw std::invalid_argument("interval requires left < right: " + str());
}

std::string IntervalQ::str() const { return "[" + q_str(left) + ", " + q_str(right) + ")"; }

Q overlap(const IntervalQ& a, const IntervalQ& b) {
    const Q& l = std::max(a.left, b.left);
    const Q& r = std::min(a.right, b.right);
    return l < r ? Q(r - l) : Q(0);
}

Enclosure::Enclosure(Q l, Q h) : lo(std::move(l)), hi(std::move(h)) {
    if (hi < lo) throw std::invalid_argument("enclosure requires lo <= hi");
}

std::string Enclosure::str() const {
    if (exact()) return q_str(lo);
    return "[" + q_str(lo) + ", " + q_str(hi) + "]";
}

Enclosure operator+(const Enclosure& a, const Enclosure& b) { return {a.lo + b.lo, a.hi + b.hi}; }
Enclosure operator-(const Enclosure& a, const Enclosure& b) { return {a.lo - b.hi, a.hi - b.lo}; }

Enclosure operator*(const Enclosure& a, const Enclosure& b) {
    if (a.exact() && b.exact()) return Enclosure(Q(a.lo * b.lo));
    if (a.lo >= 0 && b.lo >= 0) return {a.lo * b.lo, a.hi * b.hi};
    Q c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

Enclosure operator/(const Enclosure& a, const Enclosure& b) {
    if (b.lo <= 0 && b.hi >= 0) throw std::domain_error("division by enclosure containing 0");
    return a * Enclosure(Q(1 / b.hi), Q(1 / b.lo));
}

Enclosure& operator+=(Enclosure& a, const Enclosure& b) {
    a.lo += b.lo;
    a.hi += b.hi;
    return a;
}

Enclosure pow(const Enclosure& a, long e) {
    if (e < 0) return Enclosure(Q(1)) / pow(a, -e);
    if (a.lo < 0) throw std::domain_error("pow of enclosure with negative part");
    return {qpow(a.lo, e), qpow(a.hi, e)};
}

Enclosure hull(const Enclosure& a, const Enclosure& b) {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

Enclosure intersect(const Enclosure& a, const Enclosure& b) {
    Q l = std::max(a.lo, b.lo), h = std::min(a.hi, b.hi);
    if (h < l) throw std::logic_error("disjoint enclosures: " + a.str() + " and " + b.str());
    return {l, h};
}

Enclosure pow_enclosure(const Q& base, const Q& expo) {
    if (base <= 0) throw std::domain_error("pow_enclosure needs a positive base");
    if (q_is_integer(expo) && mpz_fits_slong_p(expo.get_num_mpz_t()))
        return Enclosure(qpow(base, expo.get_num().get_si()));
    mpfr_t b[2], e[2], r;
    for (int i = 0; i < 2; ++i) {
        mpfr_init2(b[i], kPrec);
        mpfr_init2(e[i], kPrec);
    }
    mpfr_init2(r, kPrec);
    mpfr_set_q(b[0], base.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(b[1], base.get_mpq_t(), MPFR_RNDU);
    mpfr_set_q(e[0], expo.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(e[1], expo.get_mpq_t(), MPFR_RNDU);
    Q lo, hi;
    bool first = true;
    // b^e is monotone in each argument for b > 0, so the corners bound it.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            mpfr_pow(r, b[i], e[j], MPFR_RNDD);
            Q l = from_mpfr(r);
            mpfr_pow(r, b[i], e[j], MPFR_RNDU);
            Q h = from_mpfr(r);
            if (first || l < lo) lo = l;
            if (first || h > hi) hi = h;
            first = false;
        }
    for (int i = 0; i < 2; ++i) {
        mpfr_clear(b[i]);
        mpfr_clear(e[i]);
    }
    mpfr_clear(r);
    return {lo, hi};
}

Enclosure log_enclosure(const Q& x) {
    if (x <= 0) throw std::domain_error("log of non-positive value");
    if (x == 1) return Enclosure(Q(0));
    mpfr_t a, r;
    mpfr_init2(a, kPrec);
    mpfr_init2(r, kPrec);
    mpfr_set_q(a, x.get_mpq_t(), MPFR_RNDD);
    mpfr_log(r, a, MPFR_RNDD);
    Q lo = from_mpfr(r);
    mpfr_set_q(a, x.get_mpq_t(), MPFR_RNDU);
    mpfr_log(r, a, MPFR_RNDU);
    Q hi = from_mpfr(r);
    mpfr_clear(a);
    mpfr_clear(r);
    return {lo, hi};
}

Enclosure double_enclosure(double v, double relpad) {
    double pad = std::fabs(v) * relpad + 1e-300;
    return {q_from_double(std::nextafter(v - pad, -INFINITY)), q_from_double(std::nextafter(v + pad, INFINITY))};
}

}  // namespace rtlab
