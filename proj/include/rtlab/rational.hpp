#pragma once

#include <gmpxx.h>

#include <ostream>
#include <string>
#include <stdexcept>

namespace rtlab {

/* Exact rationals. mpq_class keeps values canonical (lowest terms, positive
   denominator) as long as every constructor path calls canonicalize(). */
using Q = mpq_class;
using Z = mpz_class;

Q q(long num, long den = 1);
Q q_parse(const std::string& s);          // "a/b", "a", or a decimal like "0.25"
std::string q_str(const Q& v);            // "a/b" (or "a" for integers)
double q_double(const Q& v);
long double q_ldouble(const Q& v);
Q q_from_double(double d);                // exact binary value

Z zpow(long base, unsigned long e);
Q qpow(const Q& base, long e);            // e may be negative (base != 0)
Z q_floor(const Q& v);
Z q_ceil(const Q& v);
bool q_is_integer(const Q& v);

struct IntervalQ {
    Q left, right;

    IntervalQ() : left(0), right(1) {}
    IntervalQ(Q l, Q r);

    Q length() const { return right - left; }
    bool contains(const Q& x) const { return left <= x && x < right; }
    bool contains(const IntervalQ& o) const { return left <= o.left && o.right <= right; }
    bool intersects(const IntervalQ& o) const { return left < o.right && o.left < right; }
    bool operator==(const IntervalQ& o) const { return left == o.left && right == o.right; }
    std::string str() const;
};

// Length of the intersection (0 when disjoint).
Q overlap(const IntervalQ& a, const IntervalQ& b);

/* Certified rational interval. Exact quantities have lo == hi. */
struct Enclosure {
    Q lo, hi;

    Enclosure() : lo(0), hi(0) {}
    Enclosure(const Q& v) : lo(v), hi(v) {}  // NOLINT: implicit from exact value
    Enclosure(Q l, Q h);

    bool exact() const { return lo == hi; }
    Q width() const { return hi - lo; }
    Q mid() const { return (lo + hi) / 2; }
    bool contains(const Q& v) const { return lo <= v && v <= hi; }
    bool contains(const Enclosure& o) const { return lo <= o.lo && o.hi <= hi; }
    bool operator==(const Enclosure& o) const { return lo == o.lo && hi == o.hi; }
    std::string str() const;
};

inline std::ostream& operator<<(std::ostream& os, const Enclosure& e) { return os << e.str(); }

Enclosure operator+(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a, const Enclosure& b);
Enclosure operator*(const Enclosure& a, const Enclosure& b);
Enclosure operator/(const Enclosure& a, const Enclosure& b);  // b must not contain 0
Enclosure& operator+=(Enclosure& a, const Enclosure& b);
Enclosure pow(const Enclosure& a, long e);                     // a >= 0 for even safety
Enclosure hull(const Enclosure& a, const Enclosure& b);
Enclosure intersect(const Enclosure& a, const Enclosure& b);

/* Directed-rounding evaluation through MPFR; results are converted to exact
   rationals so they can enter Enclosure arithmetic. */
Enclosure pow_enclosure(const Q& base, const Q& expo);   // base > 0
Enclosure log_enclosure(const Q& x);                      // x > 0
Enclosure double_enclosure(double v, double relpad);      // v*(1 -+ relpad), outward

}  // namespace rtlab
