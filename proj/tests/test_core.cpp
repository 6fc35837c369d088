#include "gen.hpp"
#include "rtlab/step.hpp"
#include "rtlab/triadic.hpp"

#include <doctest.h>

#include <cmath>

using namespace rtlab;

TEST_SUITE("core") {

TEST_CASE("rational parsing and printing") {
    CHECK(q_parse("3/6") == Q(1, 2));
    CHECK(q_parse("0.25") == Q(1, 4));
    CHECK(q_parse("-7") == Q(-7));
    CHECK(q_str(Q(4, 69)) == "4/69");
    CHECK_THROWS_AS(q_parse("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(q_parse("abc"), std::invalid_argument);
    CHECK_THROWS_AS(q_parse(""), std::invalid_argument);
}

TEST_CASE("enclosure arithmetic contains exact results") {
    Gen g(11);
    for (int t = 0; t < 500; ++t) {
        const Q a = g.rational(50, 30), b = g.rational(50, 30);
        const Q wa = abs(g.rational(5, 40)), wb = abs(g.rational(5, 40));
        const Enclosure A(a - wa, a + wa), B(b - wb, b + wb);
        CHECK((A + B).contains(a + b));
        CHECK((A - B).contains(a - b));
        CHECK((A * B).contains(a * b));
        if (!B.contains(Q(0))) CHECK((A / B).contains(a / b));
    }
}

TEST_CASE("directed power and log enclosures") {
    Gen g(12);
    for (int t = 0; t < 200; ++t) {
        const Q base(g.range(1, 40), g.range(1, 40));
        const long e = g.range(-6, 6);
        const Enclosure p = pow_enclosure(base, Q(e));
        CHECK(p.contains(qpow(base, e)));
        const Enclosure l = log_enclosure(base);
        CHECK(q_double(l.lo) <= std::log(q_double(base)) + 1e-12);
        CHECK(q_double(l.hi) >= std::log(q_double(base)) - 1e-12);
        CHECK(l.width() < Q(1, 1000000000));
    }
    CHECK(pow_enclosure(Q(9, 4), Q(1, 2)).contains(Q(3, 2)));
}

TEST_CASE("triadic cells") {
    const TriadicCell c = cell_from_address("12");
    CHECK(c.left() == Q(5, 9));
    CHECK(c.length() == Q(1, 9));
    CHECK(c.parent() == cell_from_address("1"));
    CHECK(middle_child(c) == cell_from_address("121"));
    CHECK(cell_from_address("1").contains(c));
    CHECK(c.disjoint(cell_from_address("11")));
    CHECK(base3_digits(Z(5), 3) == "012");
    CHECK(cell_containing(Q(1, 2), 2) == cell_from_address("11"));
}

TEST_CASE("triadic cover is a disjoint exact cover") {
    Gen g(13);
    for (int t = 0; t < 200; ++t) {
        Q a = g.triadic_point(4), b = g.triadic_point(4);
        if (a == b) continue;
        if (b < a) std::swap(a, b);
        const auto cover = triadic_cover(IntervalQ(a, b), 4);
        Q total = 0;
        for (size_t i = 0; i < cover.size(); ++i) {
            total += cover[i].length();
            CHECK(IntervalQ(a, b).contains(cover[i].interval()));
            for (size_t j = i + 1; j < cover.size(); ++j) CHECK(cover[i].disjoint(cover[j]));
        }
        CHECK(total == b - a);
    }
}

TEST_CASE("step functions") {
    const StepFunction f({Q(0), Q(1, 3), Q(1)}, {Q(2), Q(-1)});
    CHECK(f.at(Q(1, 4)) == 2);
    CHECK(f.at(Q(1, 2)) == -1);
    CHECK(f.integral() == Q(2, 3) - Q(2, 3));
    CHECK(f.abs().integral() == Q(4, 3));
    CHECK(f.pow(2).integral() == Q(4, 3) + Q(2, 3));
    CHECK((f * f).integral() == f.pow(2).integral());
    CHECK(f.sup() == 2);
    CHECK(union_length({IntervalQ(Q(0), Q(1, 2)), IntervalQ(Q(1, 4), Q(3, 4))}) == Q(3, 4));
}

}
