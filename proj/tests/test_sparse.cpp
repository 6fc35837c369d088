#include "gen.hpp"
#include "rtlab/sparse.hpp"

#include <doctest.h>

#include <algorithm>

using namespace rtlab;

namespace {
WeightModel model(int k, int D) {
    ConstructionParams P;
    P.k = k;
    P.depth = D;
    return WeightModel(P);
}
}  // namespace

TEST_SUITE("sparse") {

TEST_CASE("containment forest") {
    const std::vector<IntervalQ> iv{IntervalQ(), IntervalQ(Q(0), Q(1, 3)), IntervalQ(Q(0), Q(1, 9)), IntervalQ(Q(2, 3), Q(1))};
    const FamilyForest f = build_forest(iv);
    CHECK(f.parent == std::vector<int>{-1, 0, 1, 0});
    CHECK(f.depth == std::vector<int>{0, 1, 2, 1});
    CHECK(f.children[0] == std::vector<int>{1, 3});
    CHECK_THROWS_AS(build_forest({IntervalQ(Q(0), Q(1, 2)), IntervalQ(Q(1, 3), Q(2, 3))}), std::invalid_argument);
    CHECK_THROWS_AS(build_forest({IntervalQ(), IntervalQ()}), std::invalid_argument);
}

TEST_CASE("martingale sparseness") {
    SparseFamily F;
    F.intervals = {IntervalQ(), IntervalQ(Q(0), Q(1, 3)), IntervalQ(Q(2, 3), Q(1))};
    CHECK(is_martingale_sparse(F, Q(2, 3)).ok);
    const SparseCheck bad = is_martingale_sparse(F, Q(1, 2));
    CHECK_FALSE(bad.ok);
    CHECK(bad.parent == 0);
    CHECK(bad.excess == Q(1, 6));
}

TEST_CASE("random martingale families are sparse and nested-or-disjoint") {
    const WeightModel M = model(3, 3);
    for (uint64_t seed = 0; seed < 60; ++seed) {
        const Q eps = std::vector<Q>{Q(1, 3), Q(1, 2), Q(2, 3)}[seed % 3];
        const SparseFamily F = gen_random_martingale(7, eps, seed, seed % 2 ? &M : nullptr);
        CHECK(is_martingale_sparse(F, eps).ok);
        CHECK_NOTHROW(build_forest(F.intervals));
        for (const auto& I : F.intervals) {
            CHECK(q_is_integer(I.left / I.length()));
            CHECK(I.length().get_num() == 1);
            CHECK(zpow(3, 7) % I.length().get_den() == 0);
        }
    }
}

TEST_CASE("generated families are reproducible") {
    const SparseFamily a = gen_random_martingale(6, Q(1, 2), 99), b = gen_random_martingale(6, Q(1, 2), 99);
    CHECK(to_json(a) == to_json(b));
    CHECK(to_json(family_from_json(to_json(a))) == to_json(a));
}

TEST_CASE("S3 chain length") {
    CHECK(s3_chain_length(4, Q(1, 3)) == 4);
    CHECK(s3_chain_length(12, Q(1, 3)) == 12);
    for (int k = 4; k <= 12; ++k)
        for (const Q& eps : {Q(1, 3), Q(1, 2), Q(2, 3)}) {
            const int N = s3_chain_length(k, eps);
            CHECK(qpow(eps, N - 1) >= Q(2) / Q(zpow(3, k)));
            CHECK(qpow(eps, N) < Q(2) / Q(zpow(3, k)));
            CHECK(N <= s3_chain_bound(k, eps) + 1e-9);
            const SparseFamily F = gen_adversarial(model(k, 2), AdversarialKind::S3, TriadicCell(), eps);
            CHECK(static_cast<int>(F.intervals.size()) == N);
            CHECK(is_martingale_sparse(F, eps).ok);
        }
}

TEST_CASE("testing sweep agrees with the single-L report") {
    const WeightModel M = model(3, 3);
    for (uint64_t seed = 1; seed < 20; ++seed) {
        SparseFamily F = gen_random_martingale(6, Q(1, 2), seed, &M);
        if (std::find(F.intervals.begin(), F.intervals.end(), IntervalQ()) == F.intervals.end())
            F.intervals.insert(F.intervals.begin(), IntervalQ());
        if (!is_martingale_sparse(F, Q(1, 2)).ok) continue;
        const TestingReport rep = testing_report(M, F, IntervalQ());
        const TestingSweep sw = testing_sweep(M, F);
        CHECK(sw.worst.hi >= rep.kFreeRatio.lo);
    }
}

TEST_CASE("constant-weight chain inside I(J) saturates the testing ratio") {
    const WeightModel M = model(4, 2);
    const TriadicCell I = M.I_of(TriadicCell(), 0);
    SparseFamily F;
    F.param = Q(1, 3);
    TriadicCell c = I;
    for (int j = 0; j < 5; ++j) {
        F.intervals.push_back(c.interval());
        c = c.child(0);
    }
    const TestingSweep sw = testing_sweep(M, F);
    // sum over the chain of w(I) = (1 - 3^{-5}) w(L) / (1 - 1/3)
    CHECK(sw.worst == Enclosure(1 - Q(1, 243)));
}

TEST_CASE("packing, chain, restricted and Carleson inequalities on random instances") {
    Gen g(31);
    for (uint64_t seed = 0; seed < 40; ++seed) {
        const Q eps(1, 2);
        const SparseFamily F = gen_random_martingale(5, eps, seed);
        CHECK(packing_check(F, IntervalQ(), eps).holds);
        if (F.intervals.empty()) continue;
        CHECK(chain_check(F, eps, 2).holds);
        std::vector<IntervalQ> E;
        for (const auto& c : triadic_cover(IntervalQ(), 2))
            if (g.below(2)) E.push_back(c.interval());
        CHECK(restricted_packing_check(F, IntervalQ(), E, eps, 2).holds);
        std::vector<Q> coeffs;
        for (size_t i = 0; i < F.intervals.size(); ++i) coeffs.push_back(Q(g.range(0, 4), 3));
        const StepFunction mu({Q(0), Q(1, 2), Q(1)}, {Q(g.range(1, 5)), Q(g.range(1, 5))});
        const StepFunction f({Q(0), Q(1, 3), Q(1)}, {Q(g.range(0, 9)), Q(g.range(0, 9))});
        const Q A = carleson_constant(F.intervals, coeffs, mu);
        if (A > 0) CHECK(carleson_check(F.intervals, coeffs, mu, f, 2, A).holds);
    }
}

TEST_CASE("Carleson check rejects a too-small constant") {
    const std::vector<IntervalQ> grid{IntervalQ()};
    const StepFunction mu = StepFunction::constant(Q(1));
    CHECK_THROWS_AS(carleson_check(grid, {Q(2)}, mu, mu, 2, Q(1)), std::invalid_argument);
}

TEST_CASE("weak families split into martingale families covering every member") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
        const Q eta(1, 2);
        const SparseFamily F = gen_random_weak(10, eta, seed);
        CHECK(is_weak_sparse(F, eta).ok);
        const SplitResult sp = split_weak_to_martingale(F, eta);
        REQUIRE(sp.assignment.size() == F.intervals.size());
        for (size_t i = 0; i < F.intervals.size(); ++i) {
            const auto [fi, mi] = sp.assignment[i];
            const IntervalQ& cover = sp.families[static_cast<size_t>(fi)].intervals[static_cast<size_t>(mi)];
            CHECK(cover.contains(F.intervals[i]));
        }
        for (const auto& fam : sp.families) CHECK(is_martingale_sparse(fam, sp.eps).ok);
    }
}

}
