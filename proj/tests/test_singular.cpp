#include "gen.hpp"
#include "rtlab/singular.hpp"

#include <doctest.h>

#include <cmath>
#include <tuple>

using namespace rtlab;

namespace {
WeightModel model(int k, int D) {
    ConstructionParams P;
    P.k = k;
    P.depth = D;
    return WeightModel(P);
}

// Direct sum of log kernels over the pieces of a deep truncation.
long double direct_hilbert(const WeightModel& deep, const Q& x) {
    const long double xd = q_ldouble(x);
    long double s = 0;
    auto add = [&](const Q& a, const Q& b, long double v) {
        s += v * (std::log(std::fabs(xd - q_ldouble(a))) - std::log(std::fabs(xd - q_ldouble(b))));
    };
    for (int m = 1; m <= deep.depth(); ++m)
        deep.for_each_support(m, [&](const SupportCell& c) { add(c.I.left(), c.I.right(), q_ldouble(c.w_value.lo)); });
    const long double v = q_ldouble(deep.value(deep.depth(), Which::W).lo);
    deep.for_each_K(deep.depth(), [&](const TriadicCell& K) { add(K.left(), K.right(), v); });
    return s;
}
}  // namespace

TEST_SUITE("singular") {

TEST_CASE("Hilbert transform of an indicator") {
    CHECK(hilbert_indicator(0.0, 1.0, 2.0) == doctest::Approx(std::log(2.0)));
    CHECK(hilbert_indicator(0.0, 1.0, 0.5) == doctest::Approx(0.0));
    CHECK(hilbert_indicator(Q(0), Q(1), Q(-1)) == doctest::Approx(-std::log(2.0)));
    CHECK_THROWS_AS(hilbert_indicator(0.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("centroid of a K cell for k = 2") {
    // c = (1/4)(13/18 + sum_{j<3} (1/3 + j/9 + c/9))  =>  c = 37/66
    const CellMoments cm = cell_moments(model(2, 3), 0);
    CHECK(cm.centroid == Q(37, 66));
    CHECK(cm.variance > 0);
}

TEST_CASE("Hilbert enclosures contain a deep direct sum") {
    for (auto [k, deepD] : {std::pair{2, 9}, std::pair{3, 6}}) {
        const WeightModel deep = model(k, deepD), M = model(k, 4);
        for (int m = 1; m <= 2; ++m)
            for (const auto& [s, E] : sample_support(M, m, 3, 7)) {
                const Q x = E.left() + E.length() / 3;
                HilbertQuery q;
                q.x = x;
                const HilbertValue hv = hilbert_weight(M, q);
                const double ref = static_cast<double>(direct_hilbert(deep, x));
                // The deep truncation differs from the limit by far less than the enclosure width.
                CHECK(q_double(hv.value.lo) <= ref + 1e-9);
                CHECK(ref - 1e-9 <= q_double(hv.value.hi));
            }
    }
}

TEST_CASE("Hilbert enclosure width shrinks with the model depth") {
    for (int k : {2, 3}) {
        const WeightModel M4 = model(k, 4), M6 = model(k, 6);
        for (const auto& [s, E] : sample_support(M4, 2, 3, 7)) {
            HilbertQuery q;
            q.x = E.left() + E.length() / 3;
            q.tailBudget = 1e-4;
            const HilbertValue a = hilbert_weight(M4, q), b = hilbert_weight(M6, q);
            CHECK(b.budgetMet);
            CHECK(b.relWidth <= a.relWidth);
            CHECK(b.value.lo <= a.value.hi);
            CHECK(a.value.lo <= b.value.hi);
        }
    }
}

TEST_CASE("Hilbert transform rejects sigma and points inside unresolved cells") {
    const WeightModel M = model(2, 2);
    HilbertQuery q;
    q.x = Q(1, 2);
    CHECK_THROWS_AS(hilbert_weight(M, q, Which::Sigma), std::invalid_argument);
    // Deep inside a generation-2 K cell.
    q.x = M.K_cell(2, Z(0)).left() + M.length_K(2) / 2;
    CHECK_THROWS_AS(hilbert_weight(M, q), std::domain_error);
}

TEST_CASE("rescaled Hilbert value is k^{-r} times the plain one") {
    const WeightModel M = model(4, 3);
    HilbertQuery q;
    q.x = sample_support(M, 1, 1, 3).front().second.left() + M.length_K(1) / 81;
    const HilbertValue a = hilbert_weight(M, q), b = hilbert_weight(M, q, Which::WTilde);
    CHECK(b.mid == doctest::Approx(a.mid * std::pow(4.0, -1.5)).epsilon(1e-6));
}

TEST_CASE("pointwise medians grow with k") {
    double prev = 0;
    for (int k : {4, 6, 8}) {
        const HilbertStats st = hilbert_pointwise_report(model(k, 3), 1, 2, 5, 4);
        CHECK(st.median > prev);
        CHECK(st.worstRelWidth < 0.01);
        prev = st.median;
    }
}

TEST_CASE("maximal function brackets and stays below 13 w") {
    for (int k = 2; k <= 5; ++k) {
        const WeightModel M = model(k, 4);
        const MaximalReport rep = maximal_report(M, 2, 3, 9);
        for (const auto& s : rep.samples) {
            CHECK(s.M.value.lo <= s.M.value.hi);
            // The average over I(J) itself is w(x).
            CHECK(s.M.value.lo >= s.M.w);
        }
        CHECK(rep.withinThirteen);
    }
}

TEST_CASE("maximal function rejects points off the support") {
    const WeightModel M = model(2, 3);
    CHECK_THROWS_AS(maximal_at(M, Q(1, 10)), std::domain_error);
}

TEST_CASE("support sampling is reproducible and sorted") {
    const WeightModel M = model(5, 3);
    const auto a = sample_support(M, 2, 10, 4), b = sample_support(M, 2, 10, 4);
    REQUIRE(a.size() == 10);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].second == b[i].second);
        if (i) CHECK(a[i - 1].second.left() < a[i].second.left());
    }
}

}
