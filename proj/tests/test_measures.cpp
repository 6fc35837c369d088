#include "gen.hpp"
#include "rtlab/measures.hpp"

#include <doctest.h>

using namespace rtlab;

namespace {
WeightModel model(int k, int D, Q p = 2, Q r = Q(3, 2), Placement pl = Placement::Right) {
    ConstructionParams P;
    P.k = k;
    P.depth = D;
    P.p = p;
    P.r = r;
    P.placement = pl;
    return WeightModel(P);
}
}  // namespace

TEST_SUITE("construction") {

TEST_CASE("parameter validation") {
    ConstructionParams P;
    P.k = 1;
    CHECK_THROWS_AS(P.validate(), std::invalid_argument);
    P.k = 2;
    P.p = 3;  // p' = 3/2, so r = 3/2 is outside the open range
    CHECK_THROWS_AS(P.validate(), std::invalid_argument);
    P.r = Q(5, 4);
    CHECK_NOTHROW(P.validate());
}

TEST_CASE("k = 2 constants") {
    const WeightModel M = model(2, 3);
    CHECK(M.n() == 3);
    CHECK(M.rho() == Q(9, 4));
    CHECK(M.a_kp().contains(Q(4, 27)));
    CHECK(M.c_kp().contains(Q(12, 23)));
    CHECK(M.count_K(2) == 9);
    CHECK(M.length_K(2) == Q(1, 81));
    CHECK(M.value(2, Which::W) == Enclosure(Q(81, 16)));
    CHECK(M.value(2, Which::Sigma) == Enclosure(Q(16, 81)));
}

TEST_CASE("I(J) placement") {
    const WeightModel R = model(2, 2), L = model(2, 2, 2, Q(3, 2), Placement::Left);
    const TriadicCell root;
    // J = [1/3, 2/3), |I(J)| = 1/9.
    CHECK(R.I_of(root, 0).interval() == IntervalQ(Q(2, 3), Q(7, 9)));
    CHECK(L.I_of(root, 0).interval() == IntervalQ(Q(2, 9), Q(1, 3)));
    const WeightModel A = model(2, 3, 2, Q(3, 2), Placement::Alternating);
    CHECK(A.side(1) == Side::Right);
    CHECK(A.side(2) == Side::Left);
}

TEST_CASE("K cells and support cells") {
    const WeightModel M = model(3, 2);
    CHECK(M.is_K_cell(TriadicCell()));
    CHECK(M.generation_of_K(M.K_cell(1, Z(4))) == 1);
    CHECK(M.K_cell(1, Z(0)).address() == "100");
    CHECK(M.generation_of_K(cell_from_address("0")) == -1);
    size_t count = 0;
    M.for_each_support(2, [&](const SupportCell& s) {
        ++count;
        CHECK(s.generation == 2);
        CHECK(s.I.length() == M.length_K(2));
        CHECK(s.w_value.contains(qpow(M.rho(), 2)));
    });
    CHECK(count == 9);
}

}

TEST_SUITE("measures") {

TEST_CASE("total mass is one at every depth") {
    for (int k = 2; k <= 5; ++k)
        for (int D = 1; D <= 4; ++D) CHECK(mass(model(k, D), Which::W, IntervalQ()) == Enclosure(Q(1)));
}

TEST_CASE("sigma mass for k = 2, p = 2 is 4/69") {
    for (int D = 1; D <= 4; ++D) CHECK(mass(model(2, D), Which::Sigma, IntervalQ()) == Enclosure(Q(4, 69)));
}

TEST_CASE("closed-form averages on K cells") {
    for (int k = 2; k <= 4; ++k) {
        const WeightModel M = model(k, 3);
        const Q a = Q(M.n() + 1) / Q(zpow(3, k + 1));
        for (int i = 0; i < 3; ++i) {
            const TriadicCell K = M.K_cell(i, Z(0));
            CHECK(average(M, Which::W, K.interval()) == Enclosure(qpow(M.rho(), i)));
            const Q s = qpow(M.rho(), -i) * 3 * a / (Q(zpow(3, k)) * (1 - a));
            CHECK(average(M, Which::Sigma, K.interval()) == Enclosure(s));
        }
    }
}

TEST_CASE("simulated redistribution agrees with the exact masses") {
    const WeightModel M = model(3, 3);
    const SimulatedMasses sim = simulate_redistribution(M);
    CHECK(sim.total == 1);
    for (int i = 0; i <= 3; ++i)
        for (const Q& m : sim.K_mass[static_cast<size_t>(i)]) CHECK(m == M.cell_mass(i, Which::W).lo);
}

TEST_CASE("mass is additive over random splits") {
    Gen g(21);
    for (int k : {2, 3}) {
        const WeightModel M = model(k, 3);
        for (int t = 0; t < 300; ++t) {
            Q pts[3] = {g.triadic_point(7), g.triadic_point(7), g.triadic_point(7)};
            std::sort(pts, pts + 3);
            if (pts[0] == pts[1] || pts[1] == pts[2]) continue;
            for (Which w : {Which::W, Which::Sigma}) {
                const Enclosure whole = mass(M, w, IntervalQ(pts[0], pts[2]));
                const Enclosure parts = mass(M, w, IntervalQ(pts[0], pts[1])) + mass(M, w, IntervalQ(pts[1], pts[2]));
                // Cutting at pts[1] can only widen the enclosure.
                CHECK(parts.lo <= whole.hi);
                CHECK(whole.lo <= parts.hi);
                if (parts.exact()) CHECK(whole == parts);
            }
        }
    }
}

TEST_CASE("closed-interval upper bound dominates the mass") {
    Gen g(22);
    const WeightModel M = model(2, 2);
    for (int t = 0; t < 200; ++t) {
        Q a = g.triadic_point(6), b = g.triadic_point(6);
        if (a == b) continue;
        if (b < a) std::swap(a, b);
        CHECK(mass(M, Which::W, IntervalQ(a, b)).hi <= mass_upper_closed(M, Which::W, IntervalQ(a, b)));
    }
}

TEST_CASE("A_p product equals one on I(J) and stays below one on K cells") {
    for (int k = 2; k <= 5; ++k) {
        const WeightModel M = model(k, 2);
        M.for_each_support(1, [&](const SupportCell& s) {
            CHECK(ap_product(M, s.I.interval(), Direction::Forward) == Enclosure(Q(1)));
        });
        CHECK(ap_product(M, IntervalQ(), Direction::Forward).hi < 1);
    }
}

TEST_CASE("packing sum encloses (3^{k-1}+1) w(K)") {
    for (int k = 2; k <= 6; ++k) {
        const WeightModel M = model(k, 3);
        const Enclosure ps = packing_sum(M, TriadicCell(), Which::W);
        CHECK(ps.contains(Q(M.n() + 1)));
    }
}

}
