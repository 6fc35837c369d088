#include "gen.hpp"
#include "rtlab/lorentz.hpp"

#include <doctest.h>

#include <cmath>

using namespace rtlab;

namespace {
WeightModel model(int k, int D) {
    ConstructionParams P;
    P.k = k;
    P.depth = D;
    return WeightModel(P);
}

StepFunction random_step(Gen& g) {
    const int n = static_cast<int>(g.range(1, 8));
    std::vector<Q> b{Q(0)}, v;
    for (int i = 1; i < n; ++i) b.push_back(Q(i, n));
    b.push_back(Q(1));
    for (int i = 0; i < n; ++i) v.push_back(Q(g.range(0, 300), g.range(1, 7)));
    return StepFunction(b, v);
}
}  // namespace

TEST_SUITE("lorentz") {

TEST_CASE("function classes validate") {
    CHECK(validate(phi0()).empty());
    CHECK(validate(psi_fn(Q(3, 2))).empty());
    CHECK(validate(Phi_r(Q(3, 2))).empty());
    CHECK(validate(LlogL()).empty());
    const QuasiConcaveFn square{"square", [](long double s) { return s * s; }, {}};
    CHECK_FALSE(validate(square).empty());
    CHECK_THROWS_AS(custom_phi("square", square.eval), std::invalid_argument);
    CHECK_NOTHROW(custom_phi("sqrt", [](long double s) { return std::sqrt(s); }));
}

TEST_CASE("Young inverse") {
    const YoungFn Phi = Phi_r(Q(3, 2));
    for (long double y : {1e-8L, 0.5L, 3.0L, 1e6L}) {
        const InverseResult r = young_inverse(Phi, y);
        CHECK(r.converged);
        CHECK(static_cast<double>(std::fabs(Phi(r.value) - y) / std::max(1.0L, y)) < 1e-10);
    }
}

TEST_CASE("distribution of w for k = 2") {
    const WeightModel M = model(2, 3);
    const DistributionSteps d = distribution(M, TriadicCell(), Which::W);
    CHECK_NOTHROW(d.validate());
    CHECK(d.N(0) == Q(1, 6));
    CHECK(d.N(Q(9, 4)) == Q(1, 18));
    CHECK(d.N(Q(81, 16)) == Q(1, 54));
    CHECK(d.layer_cake() == 1);
    const DistributionSteps s = distribution(M, TriadicCell(), Which::Sigma);
    CHECK(s.layer_cake() == Q(4, 69));
}

TEST_CASE("distribution over a K cell matches its mass") {
    for (int k = 2; k <= 5; ++k) {
        const WeightModel M = model(k, 3);
        const TriadicCell K = M.K_cell(1, Z(0));
        const DistributionSteps d = distribution(M, K, Which::W);
        // Normalized measure: the layer cake is the average.
        CHECK(d.layer_cake() == M.rho());
    }
}

TEST_CASE("distribution of a step function") {
    const StepFunction f({Q(0), Q(1, 4), Q(1, 2), Q(1)}, {Q(3), Q(-1), Q(3)});
    const DistributionSteps d = distribution_of(f, IntervalQ());
    CHECK(d.N(0) == 1);
    CHECK(d.N(1) == Q(3, 4));
    CHECK(d.N(3) == 0);
    CHECK(d.layer_cake() == f.abs().integral());
}

TEST_CASE("Lorentz and Luxemburg norms of constants") {
    const StepFunction c = StepFunction::constant(Q(5));
    const DistributionSteps d = distribution_of(c, IntervalQ());
    CHECK(static_cast<double>(q_ldouble(lorentz_norm(d, phi0()).value.mid())) == doctest::Approx(5.0));
    // x log x = 1 at x = 1/Omega.
    CHECK(static_cast<double>(luxemburg_norm(d, LlogL()).value) == doctest::Approx(5.0 * 0.5671432904097838).epsilon(1e-10));
}

TEST_CASE("two Lorentz formulas agree on step functions") {
    Gen g(41);
    const QuasiConcaveFn psi = psi_fn(Q(3, 2));
    for (int t = 0; t < 100; ++t) {
        const DistributionSteps d = distribution_of(random_step(g), IntervalQ());
        const LorentzValue a = lorentz_norm(d, psi);
        const long double b = lorentz_norm_rearrangement(d, psi);
        CHECK(static_cast<double>(b) == doctest::Approx(q_double(a.value.mid())).epsilon(1e-9));
        CHECK(a.value.lo <= a.value.hi);
    }
}

TEST_CASE("Orlicz norm is dominated by the Lorentz norm of its fundamental function") {
    Gen g(42);
    const YoungFn Phi = Phi_r(Q(3, 2));
    const QuasiConcaveFn phi = fundamental_of(Phi);
    for (int t = 0; t < 100; ++t) {
        const DistributionSteps d = distribution_of(random_step(g), IntervalQ());
        if (d.layer_cake() == 0) continue;
        const LuxemburgResult lux = luxemburg_norm(d, Phi);
        CHECK(lux.converged);
        CHECK(static_cast<double>(lux.value) <= 2 * q_double(lorentz_norm(d, phi).value.hi));
    }
}

TEST_CASE("fundamental function comparison window") {
    const FundamentalWindow w = fundamental_compare(Phi_r(Q(3, 2)), psi_fn(Q(3, 2)), logspace(1e-12L, 1.0L, 200));
    CHECK(w.lo >= 1.0L / 64);
    CHECK(w.hi <= 64.0L);
    CHECK(w.worstResidual < 1e-10L);
    CHECK(w.flagged == 0);
}

TEST_CASE("series ratios") {
    for (long double x : {0.5L, 0.9L, 0.99L})
        for (auto mode : {SeriesMode::First, SeriesMode::Second}) {
            const SeriesRatio s = series_ratio(Q(3, 2), x, mode);
            CHECK(s.ratio <= 10);
            CHECK(s.tailBound < 1e-9L);
        }
    CHECK_THROWS_AS(series_ratio(Q(3, 2), 0.999999L, SeriesMode::Second, 1e-9L, 1000), std::runtime_error);
}

TEST_CASE("bump norm names round-trip") {
    for (auto b : {BumpNorm::EntropyPhi0, BumpNorm::LorentzPsi, BumpNorm::OrliczPhi}) CHECK(bump_from_string(to_string(b)) == b);
    CHECK_THROWS(bump_from_string("nope"));
}

TEST_CASE("bump products need unions of triadic cells") {
    const WeightModel M = model(3, 2);
    CHECK_NOTHROW(bump_product(M, IntervalQ(), BumpNorm::EntropyPhi0, Direction::Forward));
    CHECK_THROWS_AS(bump_product(M, IntervalQ(Q(0), Q(1, 2)), BumpNorm::EntropyPhi0, Direction::Forward), std::invalid_argument);
}

TEST_CASE("blow-up rows") {
    const auto rows = blowup_suite({6, 7, 8}, Q(3, 2));
    REQUIRE(rows.size() == 3);
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].halving);
        CHECK(rows[i].apProduct > Q(1, 2));
        CHECK(rows[i].apProduct < 2);
        if (i) CHECK(rows[i].B.lo > rows[i - 1].B.hi);
    }
}

}
