#include "rtlab/lorentz.hpp"
#include "rtlab/report.hpp"
#include "rtlab/singular.hpp"
#include "rtlab/sparse.hpp"

#include "scenario_ctx.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rtlab::detail {

namespace {

std::string istr(long v) { return std::to_string(v); }
std::string ustr(size_t v) { return std::to_string(v); }

// Midpoint of the admissible r-range for exponent p.
Q mid_r(const Q& p) {
    const Q lower = std::max(Q(1), Q(1 / (p - 1)));
    return (lower + p / (p - 1)) / 2;
}

WeightModel make_model(int k, int depth, const Q& p = 2, const Q& r = Q(3, 2),
                       Placement placement = Placement::Right) {
    ConstructionParams P;
    P.k = k;
    P.depth = depth;
    P.p = p;
    P.r = r;
    P.placement = placement;
    return WeightModel(P);
}

void require_k(Params& ps, const std::vector<int>& ks, int lo, int hi) {
    for (int k : ks)
        if (k < lo || k > hi) ps.fail("k", "value " + istr(k) + " outside the supported range [" + istr(lo) + ", " + istr(hi) + "]");
}

// max/min of positive values, or 0 when fewer than one.
double variation(const std::vector<double>& v) {
    if (v.empty()) return 0;
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return *mx / *mn;
}

std::vector<double> logs(const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) out.push_back(std::log(x));
    return out;
}

std::vector<double> log_ints(const std::vector<int>& v) {
    std::vector<double> out;
    for (int x : v) out.push_back(std::log(static_cast<double>(x)));
    return out;
}

// ---------------------------------------------------------------- measures

Section averages_exact(Ctx& c) {
    const auto ks = c.params.ints("k", {2, 3, 4});
    const auto ps = c.params.rationals("p", {Q(2), Q(3)});
    const int D = c.params.integer("depth", 4);
    require_k(c.params, ks, 2, 6);
    if (D < 1 || D > 6) c.params.fail("depth", "expected 1..6");
    for (const auto& p : ps)
        if (!q_is_integer(p) || p < 2) c.params.fail("p", "exact comparison needs an integer p >= 2, got " + q_str(p));

    Section s;
    Table t{"averages", {"k", "p", "generation", "cells", "avg_w", "avg_sigma"}, {}};
    size_t total = 0;
    for (int k : ks) {
        for (const auto& p : ps) {
            const WeightModel M = make_model(k, D, p, mid_r(p));
            const Z n = zpow(3, k - 1);
            const Q rho(zpow(3, k), n + 1);
            const long pm1 = p.get_num().get_si() - 1;
            const Q a = qpow(Q(n + 1), pm1) / qpow(Q(3), k * pm1 + 1);
            const std::string tag = " k=" + istr(k) + " p=" + q_str(p);

            s.rows.push_back(make_row("a_kp" + tag, fmt_q(a), "in-open", "[" + q_str(qpow(Q(3), -p.get_num().get_si())) + ", 1/3]"));
            s.rows.push_back(make_row("a_kp enclosure" + tag, fmt_enclosure(M.a_kp()), "contains", fmt_q(a)));

            long mismatchW = 0, mismatchS = 0, mismatchSeries = 0, mismatchSim = 0;
            const SimulatedMasses sim = simulate_redistribution(M);
            for (int i = 0; i < D; ++i) {
                const Q avgW = qpow(rho, i);
                const Q avgS = qpow(rho, -pm1 * i) * 3 * a / (qpow(Q(3), k) * (1 - a));
                // sigma(K)/|K| summed over the generations below K, as a geometric series.
                const Q first = qpow(Q(3), -k) * qpow(rho, -pm1 * (i + 1));
                const Q ratio = Q(n) * qpow(Q(3), -k) * qpow(rho, -pm1);
                if (first / (1 - ratio) != avgS) ++mismatchSeries;
                size_t idx = 0, cells = 0;
                M.for_each_K(i, [&](const TriadicCell& K) {
                    const Enclosure w = average(M, Which::W, K.interval());
                    const Enclosure sg = average(M, Which::Sigma, K.interval());
                    if (!w.exact() || w.lo != avgW) ++mismatchW;
                    if (!sg.exact() || sg.lo != avgS) ++mismatchS;
                    if (sim.K_mass.at(static_cast<size_t>(i)).at(idx) / K.length() != avgW) ++mismatchSim;
                    ++idx;
                    ++cells;
                });
                total += cells;
                t.rows.push_back({istr(k), q_str(p), istr(i), ustr(cells), fmt_q(avgW), fmt_q(avgS)});
            }
            s.rows.push_back(make_row("<w>_K mismatches" + tag, istr(mismatchW), "==", "0"));
            s.rows.push_back(make_row("<sigma>_K mismatches" + tag, istr(mismatchS), "==", "0"));
            s.rows.push_back(make_row("sigma series vs closed form mismatches" + tag, istr(mismatchSeries), "==", "0"));
            s.rows.push_back(make_row("simulated redistribution mismatches" + tag, istr(mismatchSim), "==", "0"));
        }
    }
    s.tables.push_back(std::move(t));
    s.summary = ustr(total) + " K cells compared exactly";
    return s;
}

Section mass_conservation(Ctx& c) {
    const auto ks = c.params.ints("k", {2, 3, 4});
    const auto Ds = c.params.ints("depth", {1, 2, 3, 4});
    require_k(c.params, ks, 2, 8);
    for (int D : Ds)
        if (D < 1 || D > 8) c.params.fail("depth", "expected values in 1..8");
    Section s;
    for (int k : ks)
        for (int D : Ds) {
            const WeightModel M = make_model(k, D);
            const std::string tag = " k=" + istr(k) + " D=" + istr(D);
            s.rows.push_back(make_row("w([0,1))" + tag, fmt_enclosure(mass(M, Which::W, IntervalQ())), "==", "1"));
            if (M.count_K(D) <= 600000)
                s.rows.push_back(make_row("simulated total" + tag, fmt_q(simulate_redistribution(M).total), "==", "1"));
        }
    s.summary = ustr(s.rows.size()) + " exact mass checks";
    return s;
}

Section packing(Ctx& c) {
    const auto ks = c.params.ints("k", {2, 3, 4, 5, 6, 7, 8});
    const int D = c.params.integer("depth", 3);
    const int budget = c.params.integer("cellBudget", 200000);
    require_k(c.params, ks, 2, 12);
    if (D < 2) c.params.fail("depth", "expected >= 2");
    Section s;
    Table t{"packing", {"k", "generation", "enclosure_lo", "enclosure_hi", "limit", "limit_over_3k_wK"}, {}};
    for (int k : ks) {
        const WeightModel M = make_model(k, D);
        const Z n = M.n();
        const Q limitRatio = Q(n + 1) / Q(zpow(3, k));
        for (int i = 0; i < 2; ++i) {
            const TriadicCell K = M.K_cell(i, Z(0));
            const Enclosure ps = packing_sum(M, K, Which::W, static_cast<size_t>(budget));
            const Q target = Q(n + 1) * M.cell_mass(i, Which::W).lo;
            const std::string tag = " k=" + istr(k) + " K in K_" + istr(i);
            s.rows.push_back(make_row("packing sum" + tag, fmt_enclosure(ps), "contains", fmt_q(target)));
            t.rows.push_back({istr(k), istr(i), fmt_double(lo_d(ps)), fmt_double(hi_d(ps)), fmt_q(target), fmt_q(limitRatio)});
        }
        s.rows.push_back(make_row("packing/(3^k w(K)) lower k=" + istr(k), fmt_q(limitRatio), ">", "1/3"));
        s.rows.push_back(make_row("packing/(3^k w(K)) upper k=" + istr(k), fmt_q(limitRatio), "<=", "4/9"));
    }
    s.tables.push_back(std::move(t));
    s.summary = istr(static_cast<int>(ks.size())) + " values of k";
    return s;
}

struct ApWalk {
    const WeightModel& M;
    bool full;
    Q sup = 0;
    size_t cells = 0;
    std::string argmax;

    void visit(const TriadicCell& C) {
        const CellWeight cw = M.weight_on_cell(C, Which::W);
        if (cw.kind == CellWeight::Kind::Vanishing) return;
        const Enclosure ap = ap_product(M, C.interval(), Direction::Forward);
        ++cells;
        if (ap.hi > sup) {
            sup = ap.hi;
            argmax = C.address();
        }
        if (cw.kind == CellWeight::Kind::Constant) return;
        if (C.depth() >= static_cast<size_t>(M.depth() * M.k())) return;
        for (int d = 0; d < 3; ++d) {
            const TriadicCell ch = C.child(d);
            if (!full && M.generation_of_K(ch) >= 1) {
                // K-children of one J are translates of each other.
                const std::string& a = ch.address();
                const size_t w = static_cast<size_t>(M.k() - 1);
                if (a.find_first_not_of('0', a.size() - w) != std::string::npos) continue;
            }
            visit(ch);
        }
    }
};

Section ap_uniformity(Ctx& c) {
    const auto ks = c.params.ints("k", {2, 3, 4, 5, 6, 7, 8});
    const int D = c.params.integer("depth", 2);
    const int full = c.params.integer("allTranslates", 0);
    require_k(c.params, ks, 2, 10);
    if (D < 1 || D > 4) c.params.fail("depth", "expected 1..4");
    Section s;
    Table t{"ap", {"k", "cells", "sup", "argmax", "IJ_cells"}, {}};
    Q overall = 0;
    for (int k : ks) {
        const WeightModel M = make_model(k, D);
        ApWalk walk{M, full != 0, Q(0), 0, {}};
        walk.visit(TriadicCell());
        long notOne = 0, ij = 0;
        for (int m = 1; m <= D; ++m)
            M.for_each_support(m, [&](const SupportCell& sc) {
                const Enclosure ap = ap_product(M, sc.I.interval(), Direction::Forward);
                if (!ap.exact() || ap.lo != 1) ++notOne;
                ++ij;
            });
        s.rows.push_back(make_row("sup <w><sigma> k=" + istr(k), fmt_q(walk.sup), "<=", "2"));
        s.rows.push_back(make_row("I(J) cells with <w><sigma> != 1, k=" + istr(k), istr(notOne), "==", "0"));
        t.rows.push_back({istr(k), ustr(walk.cells), fmt_q(walk.sup), walk.argmax, istr(ij)});
        overall = std::max(overall, walk.sup);
    }
    s.tables.push_back(std::move(t));
    s.summary = "sup over k = " + fmt_q(overall);
    return s;
}

// ---------------------------------------------------------------- sparse

const std::vector<Q> kEps{Q(1, 3), Q(1, 2), Q(2, 3)};

void check_eps(Params& ps, const std::vector<Q>& eps) {
    for (const auto& e : eps)
        if (!(e > 0 && e < 1)) ps.fail("eps", "each value must lie in (0, 1), got " + q_str(e));
}

Section triadic_testing(Ctx& c) {
    const auto ks = c.params.ints("k", {2, 3, 4, 5, 6});
    const auto eps = c.params.rationals("eps", kEps);
    const int seeds = c.params.integer("seeds", 100);
    const int D = c.params.integer("depth", 3);
    const int gridFactor = c.params.integer("gridFactor", 3);
    const double factor = c.tol.real("variation", 1.5);
    require_k(c.params, ks, 2, 8);
    check_eps(c.params, eps);
    if (seeds < 0) c.params.fail("seeds", "expected >= 0");
    if (D < 1 || D > 4) c.params.fail("depth", "expected 1..4");

    struct PerK {
        double random = 0, adversarial = 0;
        size_t families = 0, unresolved = 0;
        bool violation = false;
        std::vector<std::vector<std::string>> rows;
    };
    std::vector<PerK> res(ks.size());
    parallel_for(ks.size(), c.threads, [&](size_t idx) {
        const int k = ks[idx];
        const WeightModel M = make_model(k, D);
        PerK& r = res[idx];
        auto take = [&](const SparseFamily& F, double& slot, const std::string& id) {
            const TestingSweep sw = testing_sweep(M, F);
            r.unresolved += sw.unresolved;
            r.violation = r.violation || sw.supportViolation;
            ++r.families;
            if (!sw.evaluated) return;
            slot = std::max(slot, hi_d(sw.worst));
            r.rows.push_back({istr(k), q_str(M.params().p), q_str(F.param), id, fmt_double(lo_d(sw.sum)), fmt_double(hi_d(sw.sum)),
                              fmt_double(lo_d(sw.mass)), fmt_double(hi_d(sw.worst))});
        };
        for (size_t e = 0; e < eps.size(); ++e) {
            for (int sd = 0; sd < seeds; ++sd) {
                const uint64_t seed = c.seed * 1000003ULL + static_cast<uint64_t>(k) * 10007ULL + e * 1009ULL + static_cast<uint64_t>(sd);
                take(gen_random_martingale(static_cast<size_t>(gridFactor * k), eps[e], seed, &M), r.random,
                     "random-" + std::to_string(seed));
            }
            for (int i = 0; i < std::min(2, D); ++i)
                for (auto kind : {AdversarialKind::ChainTowardIJ, AdversarialKind::S1, AdversarialKind::S2})
                    take(gen_adversarial(M, kind, M.K_cell(i, Z(0)), eps[e]), r.adversarial,
                         to_string(kind) + "-K" + istr(i));
        }
    });

    Section s;
    Table t{"testing", {"k", "random_max", "adversarial_max", "max", "families", "unresolved_L"}, {}};
    // Per family: the worst L, its testing sum, the w(L) bound it is divided by, and the ratio.
    Table fam{"families", {"k", "p", "eps", "family", "sum_lo", "sum_hi", "bound", "ratio"}, {}};
    std::vector<double> maxima;
    bool violation = false;
    for (size_t i = 0; i < ks.size(); ++i) {
        const double m = std::max(res[i].random, res[i].adversarial);
        maxima.push_back(m);
        violation = violation || res[i].violation;
        t.rows.push_back({istr(ks[i]), fmt_double(res[i].random), fmt_double(res[i].adversarial), fmt_double(m),
                          ustr(res[i].families), ustr(res[i].unresolved)});
        for (auto& row : res[i].rows) fam.rows.push_back(std::move(row));
        s.rows.push_back(make_row("max sum(1-eps)/w(L) k=" + istr(ks[i]), fmt_double(m), "report", ""));
    }
    if (!ks.empty()) {
        s.rows.push_back(make_row("variation across k (max/min)", fmt_double(variation(maxima)), "<=", fmt_double(factor)));
        s.rows.push_back(make_row("support violations", bool_str(!violation), "true", ""));
    }
    s.tables.push_back(std::move(t));
    s.tables.push_back(std::move(fam));
    s.summary = ks.empty() ? "empty grid" : "variation " + fmt_double(variation(maxima));
    return s;
}

Section general_testing(Ctx& c) {
    const auto ks = c.params.ints("k", {4, 5, 6, 7, 8, 9, 10, 11, 12});
    const auto eps = c.params.rationals("eps", kEps);
    const int D = c.params.integer("depth", 2);
    const double maxSlope = c.tol.real("slope", 1.1);
    require_k(c.params, ks, 2, 16);
    check_eps(c.params, eps);

    std::vector<double> best(ks.size(), 0);
    std::vector<std::vector<std::string>> rows(ks.size() * eps.size());
    std::vector<long> viol(ks.size(), 0);
    parallel_for(ks.size(), c.threads, [&](size_t idx) {
        const int k = ks[idx];
        const WeightModel M = make_model(k, D);
        for (size_t e = 0; e < eps.size(); ++e) {
            const SparseFamily F = gen_adversarial(M, AdversarialKind::S3, TriadicCell(), eps[e]);
            const long N = static_cast<long>(F.intervals.size());
            const bool exactLen = N == s3_chain_length(k, eps[e]);
            // N <= (k log3 - log2)/log(1/eps) + 1  <=>  eps^{N-1} >= 2 3^{-k}
            const bool bound = qpow(eps[e], N - 1) >= Q(2) / Q(zpow(3, k));
            if (!exactLen || !bound) ++viol[idx];
            const TestingSweep sw = testing_sweep(M, F);
            best[idx] = std::max(best[idx], hi_d(sw.worst));
            rows[idx * eps.size() + e] = {istr(k), q_str(eps[e]), istr(N), fmt_double(s3_chain_bound(k, eps[e])),
                                          fmt_double(hi_d(sw.worst))};
        }
    });
    Section s;
    Table t{"s3", {"k", "eps", "N", "bound", "ratio"}, rows};
    long v = 0;
    for (long x : viol) v += x;
    if (!ks.empty()) s.rows.push_back(make_row("chain length violations", istr(v), "==", "0"));
    if (ks.size() >= 2) {
        const double slope = fit_slope(log_ints(ks), logs(best));
        s.rows.push_back(make_row("log-log exponent of ratio in k", fmt_double(slope), "<=", fmt_double(maxSlope), slope));
        s.summary = "exponent " + fmt_double(slope);
    }
    s.tables.push_back(std::move(t));
    return s;
}

Section rescaled_testing(Ctx& c) {
    const auto ks = c.params.ints("k", {4, 5, 6, 7, 8, 9, 10, 11, 12});
    const auto eps = c.params.rationals("eps", kEps);
    const Q r = c.params.rational("r", Q(3, 2));
    const Q p = c.params.rational("p", Q(2));
    const int D = c.params.integer("depth", 2);
    const double maxSlope = c.tol.real("slope", 0.0);
    require_k(c.params, ks, 2, 16);
    check_eps(c.params, eps);

    std::vector<double> plain(ks.size(), 0), tilde(ks.size(), 0);
    parallel_for(ks.size(), c.threads, [&](size_t idx) {
        const WeightModel M = make_model(ks[idx], D, p, r);
        auto take = [&](const SparseFamily& F) {
            plain[idx] = std::max(plain[idx], hi_d(testing_sweep(M, F).worst));
            tilde[idx] = std::max(tilde[idx], hi_d(testing_sweep(M, F, Direction::Forward, Which::WTilde).worst));
        };
        for (const auto& e : eps) {
            take(gen_adversarial(M, AdversarialKind::S3, TriadicCell(), e));
            for (int i = 0; i < std::min(2, D); ++i)
                for (auto kind : {AdversarialKind::ChainTowardIJ, AdversarialKind::S1, AdversarialKind::S2})
                    take(gen_adversarial(M, kind, M.K_cell(i, Z(0)), e));
        }
    });
    Section s;
    Table t{"rescaled", {"k", "ratio_w", "ratio_wtilde"}, {}};
    for (size_t i = 0; i < ks.size(); ++i) t.rows.push_back({istr(ks[i]), fmt_double(plain[i]), fmt_double(tilde[i])});
    if (ks.size() >= 2) {
        const double slope = fit_slope(log_ints(ks), logs(tilde));
        s.rows.push_back(make_row("fitted slope of rescaled ratio", fmt_double(slope), "<=", fmt_double(maxSlope), slope));
        s.summary = "slope " + fmt_double(slope);
    }
    s.tables.push_back(std::move(t));
    return s;
}

// Random step function on [0,1): up to `pieces` pieces on a 1/1000 grid.
StepFunction random_step(std::mt19937_64& g, int pieces, bool positive) {
    const int count = 1 + static_cast<int>(g() % static_cast<uint64_t>(pieces));
    std::vector<long> cuts;
    for (int i = 0; i + 1 < count; ++i) cuts.push_back(1 + static_cast<long>(g() % 999));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Q> b{Q(0)}, v;
    for (long x : cuts) b.push_back(Q(x, 1000));
    b.push_back(Q(1));
    for (size_t i = 0; i + 1 < b.size(); ++i) v.push_back(Q(static_cast<long>(g() % 1000) + (positive ? 1 : 0), 100));
    return StepFunction(b, v);
}

Section sparse_exactness(Ctx& c) {
    const int seeds = c.params.integer("seeds", 200);
    const auto eps = c.params.rationals("eps", kEps);
    const int grid = c.params.integer("gridDepth", 5);
    const int p = c.params.integer("p", 2);
    check_eps(c.params, eps);
    if (p < 2) c.params.fail("p", "exact checks need an integer p >= 2");
    if (grid < 1 || grid > 8) c.params.fail("gridDepth", "expected 1..8");

    struct Count {
        long instances = 0, members = 0, packing = 0, chain = 0, restricted = 0, carleson = 0, sparse = 0, split = 0;
    };
    std::vector<Count> res(static_cast<size_t>(std::max(0, seeds)));
    parallel_for(res.size(), c.threads, [&](size_t sd) {
        Count& r = res[sd];
        const Q& e = eps[sd % eps.size()];
        const uint64_t seed = c.seed * 7919ULL + sd;
        std::mt19937_64 g(seed);
        const SparseFamily F = gen_random_martingale(static_cast<size_t>(grid), e, seed);
        ++r.instances;
        r.members += static_cast<long>(F.intervals.size());
        if (!is_martingale_sparse(F, e).ok) ++r.sparse;
        std::vector<IntervalQ> Ls{IntervalQ()};
        Ls.insert(Ls.end(), F.intervals.begin(), F.intervals.end());
        std::vector<IntervalQ> E;
        for (const auto& cell : triadic_cover(IntervalQ(), 3))
            if (g() % 3 == 0) E.push_back(cell.interval());
        for (const auto& L : Ls) {
            if (!packing_check(F, L, e).holds) ++r.packing;
            if (!restricted_packing_check(F, L, E, e, p).holds) ++r.restricted;
        }
        if (!F.intervals.empty() && !chain_check(F, e, p).holds) ++r.chain;
        if (!F.intervals.empty()) {
            std::vector<Q> coeffs;
            for (size_t i = 0; i < F.intervals.size(); ++i) coeffs.push_back(Q(static_cast<long>(g() % 6), 5));
            const StepFunction mu = random_step(g, 9, true), f = random_step(g, 9, false);
            const Q A = carleson_constant(F.intervals, coeffs, mu);
            if (A > 0 && !carleson_check(F.intervals, coeffs, mu, f, p, A).holds) ++r.carleson;
        }
        try {
            const Q eta = Q(1, 2) + Q(static_cast<long>(sd % 4), 10);
            split_weak_to_martingale(gen_random_weak(10, eta, seed), eta);
        } catch (const std::runtime_error&) {
            ++r.split;
        }
    });
    Count tot;
    for (const auto& r : res) {
        tot.instances += r.instances;
        tot.members += r.members;
        tot.packing += r.packing;
        tot.chain += r.chain;
        tot.restricted += r.restricted;
        tot.carleson += r.carleson;
        tot.sparse += r.sparse;
        tot.split += r.split;
    }
    Section s;
    s.rows.push_back(make_row("instances", istr(tot.instances), "report", ""));
    s.rows.push_back(make_row("family members", istr(tot.members), "report", ""));
    s.rows.push_back(make_row("sparseness violations", istr(tot.sparse), "==", "0"));
    s.rows.push_back(make_row("packing violations", istr(tot.packing), "==", "0"));
    s.rows.push_back(make_row("chain violations", istr(tot.chain), "==", "0"));
    s.rows.push_back(make_row("restricted packing violations", istr(tot.restricted), "==", "0"));
    s.rows.push_back(make_row("Carleson embedding violations", istr(tot.carleson), "==", "0"));
    s.rows.push_back(make_row("weak-to-martingale split failures", istr(tot.split), "==", "0"));
    s.summary = istr(tot.instances) + " instances";
    return s;
}

// ---------------------------------------------------------------- singular

Section hilbert_growth(Ctx& c) {
    const auto ks = c.params.ints("k", {6, 8, 10, 12});
    const int gens = c.params.integer("generations", 2);
    const int D = c.params.integer("depth", 4);
    const int samples = c.params.integer("samplesPerCell", 4);
    const int cells = c.params.integer("cellsPerGeneration", 8);
    const Placement pl = placement_from_string(c.params.text("placement", "right"));
    const double maxWidth = c.tol.real("relativeWidth", 0.01);
    require_k(c.params, ks, 2, 20);
    if (D < gens + 2) c.params.fail("depth", "must be at least generations + 2");

    std::vector<HilbertStats> st(ks.size());
    parallel_for(ks.size(), c.threads, [&](size_t i) {
        const WeightModel M = make_model(ks[i], D, 2, Q(3, 2), pl);
        st[i] = hilbert_pointwise_report(M, gens, samples, c.seed, cells);
    });
    Section s;
    Table t{"samples", {"k", "policy", "generation", "x", "w", "Hw_lo", "Hw_hi", "ratio", "cell"}, {}};
    bool increasing = true;
    double width = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        for (const auto& sm : st[i].samples)
            t.rows.push_back({istr(ks[i]), to_string(pl), istr(sm.generation), fmt_double(q_double(sm.x)), fmt_enclosure(sm.w),
                              fmt_double(lo_d(sm.Hw.value)), fmt_double(hi_d(sm.Hw.value)), fmt_double(sm.ratio), sm.cell});
        s.rows.push_back(make_row("median |Hw|/w k=" + istr(ks[i]), fmt_double(st[i].median), "report", ""));
        if (i > 0 && !(st[i].median > st[i - 1].median)) increasing = false;
        width = std::max(width, st[i].worstRelWidth);
    }
    if (!ks.empty()) {
        s.rows.push_back(make_row("median strictly increasing in k", bool_str(increasing), "true", ""));
        s.rows.push_back(make_row("worst relative enclosure width", fmt_double(width), "<", fmt_double(maxWidth)));
        s.summary = "median " + fmt_double(st.front().median) + " at k=" + istr(ks.front()) + " to " + fmt_double(st.back().median) +
                    " at k=" + istr(ks.back()) + ", width " + fmt_double(width);
    }
    s.tables.push_back(std::move(t));
    return s;
}

Section norm_ratio(Ctx& c) {
    const auto ks = c.params.ints("k", {6, 7, 8, 9, 10, 11, 12, 13, 14});
    const Q p = c.params.rational("p", Q(2));
    const Q r = c.params.rational("r", Q(3, 2));
    const int D = c.params.integer("depth", 5);
    QuadratureSpec spec;
    spec.nodes = c.params.integer("nodes", spec.nodes);
    spec.levels = c.params.integer("levels", spec.levels);
    spec.fineNodes = c.params.integer("fineNodes", spec.fineNodes);
    spec.fineLevels = c.params.integer("fineLevels", spec.fineLevels);
    spec.generations = c.params.integer("generations", spec.generations);
    spec.cellsPerGeneration = c.params.integer("cellsPerGeneration", spec.cellsPerGeneration);
    spec.seed = c.seed;
    spec.threads = c.threads;
    const auto range = c.tol.reals("exponentRange", {0.1, 0.5});
    const double maxIndicator = c.tol.real("indicator", 1e-3);
    require_k(c.params, ks, 2, 20);
    if (range.size() != 2) c.tol.fail("exponentRange", "expected [lo, hi]");

    Section s;
    Table t{"norm_ratio", {"k", "value", "error", "indicator", "converged"}, {}};
    std::vector<double> vals;
    double ind = 0;
    for (int k : ks) {
        const WeightModel M = make_model(k, D, p, r);
        const NormRatio nr = hilbert_norm_ratio(M, p, spec);
        vals.push_back(nr.value);
        ind = std::max(ind, nr.indicator);
        t.rows.push_back({istr(k), fmt_double(nr.value), fmt_double(nr.error), fmt_double(nr.indicator), bool_str(nr.converged)});
    }
    if (!ks.empty()) s.rows.push_back(make_row("max quadrature indicator", fmt_double(ind), "<", fmt_double(maxIndicator)));
    if (ks.size() >= 2) {
        const double slope = fit_slope(log_ints(ks), logs(vals));
        s.rows.push_back(make_row("growth exponent", fmt_double(slope), "in",
                                  "[" + fmt_double(range[0]) + ", " + fmt_double(range[1]) + "]", slope));
        s.summary = "exponent " + fmt_double(slope);
    }
    s.tables.push_back(std::move(t));
    return s;
}

Section maximal(Ctx& c) {
    const auto ks = c.params.ints("k", {4, 5, 6, 7, 8});
    const int gens = c.params.integer("generations", 2);
    const int cells = c.params.integer("cellsPerGeneration", 4);
    const int D = c.params.integer("depth", 4);
    const Q bound = c.tol.rational("bound", Q(13));
    require_k(c.params, ks, 2, 12);
    if (D < gens) c.params.fail("depth", "must be at least generations");

    std::vector<MaximalReport> rep(ks.size());
    parallel_for(ks.size(), c.threads, [&](size_t i) {
        rep[i] = maximal_report(make_model(ks[i], D), gens, cells, c.seed, D);
    });
    Section s;
    Table t{"samples", {"k", "generation", "x", "M_lo", "M_hi", "w", "ratio_hi"}, {}};
    double worst = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        worst = std::max(worst, hi_d(Enclosure(rep[i].worstRatio)));
        for (const auto& sm : rep[i].samples)
            t.rows.push_back({istr(ks[i]), istr(sm.generation), fmt_double(q_double(sm.x)), fmt_double(lo_d(sm.M.value)),
                              fmt_double(hi_d(sm.M.value)), fmt_q(sm.M.w), fmt_double(q_double(sm.ratioHi))});
        s.rows.push_back(make_row("worst Mw/w upper k=" + istr(ks[i]), fmt_double(hi_d(Enclosure(rep[i].worstRatio))), "<=",
                                  fmt_q(bound)));
    }
    s.tables.push_back(std::move(t));
    if (!ks.empty()) s.summary = "worst Mw/w " + fmt_double(worst);
    return s;
}

// ---------------------------------------------------------------- lorentz

Section entropy(Ctx& c) {
    const auto ks = c.params.ints("k", {3, 4, 5, 6, 7, 8});
    const int D = c.params.integer("depth", 2);
    const double window = c.tol.real("window", 4);
    require_k(c.params, ks, 2, 14);
    std::vector<Enclosure> e(ks.size());
    parallel_for(ks.size(), c.threads, [&](size_t i) { e[i] = entropy_ratio(make_model(ks[i], D)); });
    Section s;
    double lo = INFINITY, hi = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        s.rows.push_back(make_row("entropy ratio k=" + istr(ks[i]), fmt_enclosure(e[i]), "report", ""));
        lo = std::min(lo, lo_d(e[i]));
        hi = std::max(hi, hi_d(e[i]));
    }
    if (!ks.empty()) {
        s.rows.push_back(make_row("window max/min", fmt_double(hi / lo), "<=", fmt_double(window)));
        s.summary = "window [" + fmt_double(lo) + ", " + fmt_double(hi) + "]";
    }
    return s;
}

Section blowup(Ctx& c) {
    const auto ks = c.params.ints("k", {6, 7, 8, 9, 10, 11, 12});
    const Q r = c.params.rational("r", Q(3, 2));
    const Q p = c.params.rational("p", Q(2));
    const double growth = c.tol.real("growth", 2);
    require_k(c.params, ks, 2, 16);
    const auto rows = blowup_suite(ks, r, p);
    Section s;
    Table t{"blowup", {"k", "normR_lo", "normR_hi", "normKprime_hi", "w_avg", "sigma_avg", "ap", "B_lo", "B_hi", "entropy_ratio"}, {}};
    bool monotone = true;
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& b = rows[i];
        t.rows.push_back({istr(b.k), fmt_double(lo_d(b.normR)), fmt_double(hi_d(b.normR)), fmt_double(hi_d(b.normKprime)),
                          fmt_q(b.wAvg), fmt_q(b.sigmaAvg), fmt_q(b.apProduct), fmt_double(lo_d(b.B)), fmt_double(hi_d(b.B)),
                          fmt_enclosure(b.entropyRatio)});
        s.rows.push_back(make_row("<w><sigma> on R_k k=" + istr(b.k), fmt_q(b.apProduct), "in", "[1/2, 2]"));
        s.rows.push_back(make_row("halving k=" + istr(b.k), bool_str(b.halving), "true", ""));
        if (i > 0 && !(b.B.lo > rows[i - 1].B.hi)) monotone = false;
    }
    if (rows.size() >= 2) {
        const double g = lo_d(rows.back().B) / hi_d(rows.front().B);
        s.rows.push_back(make_row("B_last/B_first", fmt_double(g), ">=", fmt_double(growth)));
        s.rows.push_back(make_row("B strictly increasing", bool_str(monotone), "true", ""));
        s.summary = "B_last/B_first = " + fmt_double(g);
    }
    s.tables.push_back(std::move(t));
    return s;
}

Section psi_bump(Ctx& c) {
    const auto ks = c.params.ints("k", {2, 3, 4, 5, 6, 7, 8});
    const int D = c.params.integer("depth", 3);
    const Q r = c.params.rational("r", Q(3, 2));
    const double maxVar = c.tol.real("variation", 2);
    require_k(c.params, ks, 2, 12);
    std::vector<TriadicBump> b(ks.size());
    parallel_for(ks.size(), c.threads, [&](size_t i) { b[i] = triadic_psi_bump(make_model(ks[i], D), r); });
    // The dual constant: psi(1), the largest value of psi on [0,1].
    const double psi1 = static_cast<double>(psi_fn(r)(1.0L));
    Section s;
    Table t{"psi_bump", {"k", "forward_lo", "forward_hi", "dual_lo", "dual_hi"}, {}};
    double flo = INFINITY, fhi = 0, dhi = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        t.rows.push_back({istr(ks[i]), fmt_double(lo_d(b[i].forward)), fmt_double(hi_d(b[i].forward)), fmt_double(lo_d(b[i].dual)),
                          fmt_double(hi_d(b[i].dual))});
        flo = std::min(flo, lo_d(b[i].forward));
        fhi = std::max(fhi, hi_d(b[i].forward));
        dhi = std::max(dhi, hi_d(b[i].dual));
    }
    if (!ks.empty()) {
        s.rows.push_back(make_row("forward sup, max/min across k", fmt_double(fhi / flo), "<=", fmt_double(maxVar)));
        s.rows.push_back(make_row("dual sup over k", fmt_double(dhi), "<=", fmt_double(psi1)));
        s.summary = "forward variation " + fmt_double(fhi / flo) + ", dual max " + fmt_double(dhi);
    }
    s.tables.push_back(std::move(t));
    return s;
}

Section fundamental(Ctx& c) {
    const Q r = c.params.rational("r", Q(3, 2));
    const double sMin = c.params.real("sMin", 1e-12);
    const double sMax = c.params.real("sMax", 1);
    const int points = c.params.integer("points", 200);
    const auto win = c.tol.rationals("window", {Q(1, 64), Q(64)});
    const double maxRes = c.tol.real("residual", 1e-10);
    if (!(0 < sMin && sMin < sMax && sMax <= 1)) c.params.fail("sMin", "need 0 < sMin < sMax <= 1");
    if (points < 2) c.params.fail("points", "expected >= 2");
    if (win.size() != 2) c.tol.fail("window", "expected [lo, hi]");
    const FundamentalWindow fw = fundamental_compare(Phi_r(r), psi_fn(r), logspace(sMin, sMax, points));
    Section s;
    const std::string range = "[" + q_str(win[0]) + ", " + q_str(win[1]) + "]";
    s.rows.push_back(make_row("psi(s) Phi^{-1}(1/s) range", "[" + fmt_double(static_cast<double>(fw.lo)) + ", " +
                                                                    fmt_double(static_cast<double>(fw.hi)) + "]",
                              "in", range));
    s.rows.push_back(make_row("worst bisection residual", fmt_double(static_cast<double>(fw.worstResidual)), "<", fmt_double(maxRes)));
    s.rows.push_back(make_row("unconverged inversions", istr(fw.flagged), "==", "0"));
    s.summary = "window [" + fmt_double(static_cast<double>(fw.lo)) + ", " + fmt_double(static_cast<double>(fw.hi)) + "]";
    return s;
}

Section series(Ctx& c) {
    const Q r = c.params.rational("r", Q(3, 2));
    const auto xs = c.params.reals("x", {0.9, 0.99, 0.999});
    const double tail = c.params.real("tailTolerance", 1e-9);
    const double bound = c.tol.real("bound", 10);
    for (double x : xs)
        if (!(x > 0 && x < 1)) c.params.fail("x", "values must lie in (0, 1)");
    Section s;
    Table t{"series", {"x", "mode", "partial", "majorant", "ratio", "tail", "N"}, {}};
    double worst = 0;
    for (double x : xs)
        for (auto mode : {SeriesMode::First, SeriesMode::Second}) {
            const SeriesRatio sr = series_ratio(r, x, mode, tail);
            const std::string m = mode == SeriesMode::First ? "first" : "second";
            const std::string tag = " x=" + fmt_double(x) + " " + m;
            t.rows.push_back({fmt_double(x), m, fmt_double(static_cast<double>(sr.partial)), fmt_double(static_cast<double>(sr.majorant)),
                              fmt_double(static_cast<double>(sr.ratio)), fmt_double(static_cast<double>(sr.tailBound)), istr(sr.N)});
            worst = std::max(worst, static_cast<double>(sr.ratio));
            s.rows.push_back(make_row("series ratio" + tag, fmt_double(static_cast<double>(sr.ratio)), "<=", fmt_double(bound)));
            s.rows.push_back(make_row("tail bound" + tag, fmt_double(static_cast<double>(sr.tailBound)), "<", fmt_double(tail)));
        }
    s.tables.push_back(std::move(t));
    if (!xs.empty()) s.summary = "max ratio " + fmt_double(worst);
    return s;
}

Section orlicz_lorentz(Ctx& c) {
    const int count = c.params.integer("functions", 100);
    const int pieces = c.params.integer("maxPieces", 12);
    const Q r = c.params.rational("r", Q(3, 2));
    const double factor = c.tol.real("factor", 2);
    const double spread = c.tol.real("windowSpread", 2);
    const auto range = c.tol.rationals("windowRange", {Q(1, 4), Q(4)});
    if (range.size() != 2) c.tol.fail("windowRange", "expected [lo, hi]");
    if (count < 1) c.params.fail("functions", "expected >= 1");
    if (pieces < 1) c.params.fail("maxPieces", "expected >= 1");
    const YoungFn Phi = Phi_r(r);
    const QuasiConcaveFn phi = fundamental_of(Phi);

    Section s;
    Table t{"functions", {"batch", "index", "pieces", "orlicz", "lorentz", "ratio", "llogl", "phi0", "llogl_over_phi0"}, {}};
    double worst = 0;
    std::vector<std::pair<double, double>> windows;
    for (int batch = 0; batch < 2; ++batch) {
        std::mt19937_64 g(c.seed * 104729ULL + static_cast<uint64_t>(batch));
        double lo = INFINITY, hi = 0;
        for (int i = 0; i < count; ++i) {
            StepFunction f = random_step(g, pieces, true);
            // Spread the values over several decades.
            for (auto& v : f.values) {
                const long e = static_cast<long>(g() % 9) - 4;
                if (e > 0) v *= qpow(Q(10), e);
            }
            const DistributionSteps d = distribution_of(f, IntervalQ());
            const LuxemburgResult lux = luxemburg_norm(d, Phi);
            const LorentzValue lor = lorentz_norm(d, phi);
            const double ratio = static_cast<double>(lux.value) / lo_d(lor.value);
            worst = std::max(worst, ratio);
            const LuxemburgResult l2 = luxemburg_norm(d, LlogL());
            const LorentzValue p0 = lorentz_norm(d, phi0());
            const double eq = static_cast<double>(l2.value) / q_double(p0.value.mid());
            lo = std::min(lo, eq);
            hi = std::max(hi, eq);
            t.rows.push_back({istr(batch), istr(i), ustr(f.values.size()), fmt_double(static_cast<double>(lux.value)),
                              fmt_enclosure(lor.value), fmt_double(ratio), fmt_double(static_cast<double>(l2.value)),
                              fmt_enclosure(p0.value), fmt_double(eq)});
        }
        windows.emplace_back(lo, hi);
        s.rows.push_back(make_row("L log L / Lambda_phi0 window, batch " + istr(batch),
                                  "[" + fmt_double(lo) + ", " + fmt_double(hi) + "]", "report", ""));
    }
    s.rows.push_back(make_row("max Orlicz/Lorentz", fmt_double(worst), "<=", fmt_double(factor)));
    const double drift = std::max(std::abs(windows[0].first - windows[1].first) / windows[0].first,
                                  std::abs(windows[0].second - windows[1].second) / windows[0].second);
    s.rows.push_back(make_row("window drift between batches", fmt_double(drift), "report", ""));
    const double lo = std::min(windows[0].first, windows[1].first), hi = std::max(windows[0].second, windows[1].second);
    s.rows.push_back(make_row("pooled window hi/lo", fmt_double(hi / lo), "<=", fmt_double(spread)));
    for (int b = 0; b < 2; ++b)
        s.rows.push_back(make_row("window inside fixed range, batch " + istr(b),
                                  "[" + fmt_double(windows[b].first) + ", " + fmt_double(windows[b].second) + "]", "in",
                                  "[" + q_str(range.at(0)) + ", " + q_str(range.at(1)) + "]"));
    s.tables.push_back(std::move(t));
    s.summary = "max ratio " + fmt_double(worst);
    return s;
}

// ---------------------------------------------------------------- misc

Section determinism(Ctx& c) {
    const auto names = c.params.texts("scenarios", {"mass-conservation", "packing", "sparse-exactness", "orlicz-lorentz", "series"});
    Section s;
    for (const auto& name : names) {
        if (name == "determinism") c.params.fail("scenarios", "cannot include itself");
        ScenarioConfig cfg;
        cfg.scenario = name;
        cfg.seed = c.seed;
        cfg.threads = c.threads;
        const Bundle a = run_scenario(cfg), b = run_scenario(cfg);
        const bool same = render_csv(a) == render_csv(b) && render_json(a) == render_json(b);
        s.rows.push_back(make_row("byte-identical re-run: " + name, bool_str(same), "true", ""));
    }
    s.summary = istr(static_cast<int>(names.size())) + " scenarios re-run";
    return s;
}

Section construct(Ctx& c) {
    const int k = c.params.integer("k", 2);
    const int D = c.params.integer("depth", 2);
    const Q p = c.params.rational("p", Q(2));
    const Q r = c.params.rational("r", Q(3, 2));
    const Placement pl = placement_from_string(c.params.text("placement", "right"));
    const int maxCells = c.params.integer("maxCells", 2000);
    const WeightModel M = make_model(k, D, p, r, pl);
    Section s;
    s.rows.push_back(make_row("w([0,1))", fmt_enclosure(mass(M, Which::W, IntervalQ())), "==", "1"));
    s.rows.push_back(make_row("sigma([0,1))", fmt_enclosure(mass(M, Which::Sigma, IntervalQ())), "report", ""));
    s.rows.push_back(make_row("rho", fmt_q(M.rho()), "report", ""));
    s.rows.push_back(make_row("a_kp", fmt_enclosure(M.a_kp()), "report", ""));
    Table t{"support", {"generation", "J", "I", "side", "w", "sigma"}, {}};
    for (int m = 1; m <= D; ++m)
        M.for_each_support(m, [&](const SupportCell& sc) {
            if (static_cast<int>(t.rows.size()) >= maxCells) return;
            t.rows.push_back({istr(m), sc.J.interval().str(), sc.I.interval().str(), to_string(sc.side), fmt_enclosure(sc.w_value),
                              fmt_enclosure(sc.sigma_value)});
        });
    Table g{"generations", {"generation", "K_cells", "K_length", "w_value", "K_mass"}, {}};
    for (int i = 0; i <= D; ++i)
        g.rows.push_back({istr(i), M.count_K(i).get_str(), fmt_q(M.length_K(i)), fmt_enclosure(M.value(i, Which::W)),
                          fmt_enclosure(M.cell_mass(i, Which::W))});
    s.tables.push_back(std::move(g));
    s.tables.push_back(std::move(t));
    return s;
}

}  // namespace

const std::vector<ScenarioEntry>& registry() {
    static const std::vector<ScenarioEntry> r{
        {"averages-exact", averages_exact, {}},
        {"mass-conservation", mass_conservation, {}},
        {"packing", packing, {}},
        {"ap-uniformity", ap_uniformity, {}},
        {"triadic-testing", triadic_testing, {}},
        {"general-testing", general_testing, {}},
        {"rescaled-testing", rescaled_testing, {}},
        {"sparse-exactness", sparse_exactness, {}},
        {"hilbert-growth", hilbert_growth, {}},
        {"norm-ratio", norm_ratio, {}},
        {"maximal", maximal, {}},
        {"entropy", entropy, {}},
        {"blowup", blowup, {}},
        {"psi-bump", psi_bump, {}},
        {"fundamental", fundamental, {}},
        {"series", series, {}},
        {"orlicz-lorentz", orlicz_lorentz, {}},
        {"determinism", determinism, {}},
        {"construct", construct, {}},
        {"measures", nullptr, {"averages-exact", "mass-conservation", "packing", "ap-uniformity"}},
        {"sparse", nullptr, {"triadic-testing", "general-testing", "rescaled-testing", "sparse-exactness"}},
        {"singular", nullptr, {"hilbert-growth", "norm-ratio", "maximal"}},
        {"lorentz", nullptr, {"fundamental", "series", "orlicz-lorentz"}},
        {"bumps", nullptr, {"entropy", "blowup", "psi-bump"}},
        {"counterexample", nullptr, {"triadic-testing", "hilbert-growth", "blowup"}},
    };
    return r;
}

}  // namespace rtlab::detail
