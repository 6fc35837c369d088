#include "rtlab/singular.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

namespace rtlab {

double hilbert_indicator(double a, double b, double x) {
    if (x == a || x == b) throw std::domain_error("hilbert_indicator: x at an endpoint");
    return std::log(std::fabs(x - a)) - std::log(std::fabs(x - b));
}

double hilbert_indicator(const Q& a, const Q& b, const Q& x) {
    if (x == a || x == b) throw std::domain_error("hilbert_indicator: x at an endpoint");
    return static_cast<double>(std::log(std::fabs(q_ldouble(x - a))) - std::log(std::fabs(q_ldouble(x - b))));
}

CellMoments cell_moments(const WeightModel& model, int generation) {
    const Z& nz = model.n();
    const Q n(nz);
    const Q h(Z(1), zpow(3, static_cast<unsigned long>(model.k())));
    const Q S1 = n / 3 + h * n * (n - 1) / 2;
    const Q S2 = n / 9 + h * n * (n - 1) / 3 + h * h * (n - 1) * n * (2 * n - 1) / 6;
    const Q b = n * h / (n + 1);
    const Q e = n * h * h / (n + 1);

    Q c[2], a[2];
    for (int par = 0; par < 2; ++par) {
        c[par] = model.side(par + 1) == Side::Right ? Q(2, 3) : Q(Q(1, 3) - h);
        a[par] = (c[par] + h / 2 + S1) / (n + 1);
    }
    Q g[2];
    g[0] = (a[0] + b * a[1]) / (1 - b * b);
    g[1] = a[1] + b * g[0];

    Q d[2];
    for (int par = 0; par < 2; ++par) {
        const Q& cc = c[par];
        d[par] = (cc * cc + cc * h + h * h / 3 + S2 + 2 * h * g[1 - par] * S1) / (n + 1);
    }
    Q m2[2];
    m2[0] = (d[0] + e * d[1]) / (1 - e * e);
    m2[1] = d[1] + e * m2[0];

    const int par = generation % 2;
    CellMoments out;
    out.centroid = g[par];
    out.variance = m2[par] - g[par] * g[par];
    return out;
}

namespace {

using LD = long double;

struct Acc {
    LD lo = 0, hi = 0, mag = 0;
    void add(LD l, LD h, LD m) {
        lo += l;
        hi += h;
        mag += m;
    }
};

struct HilbertCtx {
    HilbertCtx(const WeightModel& m, const Q& xx) : model(m), x(xx) {}
    const WeightModel& model;
    Q x;
    int D = 0;
    int W = 8;
    Q p3k;
    std::vector<LD> val;   // value(m, W) for m <= D
    LD gamma[2] = {0, 0};
    LD var[2] = {0, 0};
};

LD psi(LD y) { return boost::math::digamma(y); }
LD harmonic(LD y, LD N) { return psi(y + N) - psi(y); }  // sum_{i<N} 1/(y+i)
LD cubic(LD y, LD N) {                                  // sum_{i<N} 1/(y+i)^3
    return (boost::math::polygamma(2, y + N) - boost::math::polygamma(2, y)) / 2;
}

// Children j0..j1 of a comb, all on one side of x. u = (x - Jl)/h.
void far_block(const HilbertCtx& c, const Q& u, const Z& j0, const Z& j1, LD scale, int childGen, bool resolved,
               Acc& acc) {
    const LD N = q_ldouble(Q(j1 - j0 + 1));
    const bool xRight = u >= Q(j1 + 1);
    // Distances (in units of h) from x to the near and far edges of the block's end child.
    LD dNear, dFar;
    if (xRight) {
        dNear = q_ldouble(u - Q(j1) - 1);
        dFar = dNear + 1;
    } else {
        dNear = q_ldouble(Q(j0) - u);
        dFar = dNear + 1;
    }
    if (!(dNear > 0)) throw std::domain_error("hilbert_weight: x touches an unresolved cell; raise the depth");
    const LD sgn = xRight ? 1 : -1;
    LD lo, hi;
    const LD crudeA = sgn * scale * harmonic(dFar, N), crudeB = sgn * scale * harmonic(dNear, N);
    lo = std::min(crudeA, crudeB);
    hi = std::max(crudeA, crudeB);
    LD mag = scale * (std::fabs(psi(dNear + N)) + std::fabs(psi(dNear)) + 1);
    if (resolved) {
        const LD g = c.gamma[childGen % 2], v = c.var[childGen % 2];
        // Centroid of the end child sits gamma into it from its left end.
        const LD y = xRight ? dNear + 1 - g : dNear + g;
        const LD main = sgn * scale * harmonic(y, N);
        const LD rA = sgn * scale * v * cubic(dFar, N), rB = sgn * scale * v * cubic(dNear, N);
        const LD eLo = main + std::min(rA, rB), eHi = main + std::max(rA, rB);
        lo = std::max(lo, eLo);
        hi = std::min(hi, eHi);
        if (lo > hi) lo = hi = (lo + hi) / 2;
        mag += scale * (std::fabs(psi(y + N)) + std::fabs(psi(y)));
    }
    acc.add(lo, hi, mag);
}

// K of generation i at [A, A+s).
void eval_cell(const HilbertCtx& c, const Q& A, int i, const Q& s, Acc& acc) {
    const Q h = s / c.p3k;
    const Q Jl = A + s / 3;
    const Q Il = c.model.side(i + 1) == Side::Right ? Q(A + 2 * s / 3) : Q(Jl - h);
    const Q Ir = Il + h;
    if (c.x == Il || c.x == Ir) throw std::domain_error("hilbert_weight: x on an I(J) endpoint");
    {
        const LD v = c.val[static_cast<size_t>(i + 1)];
        const LD a = std::log(std::fabs(q_ldouble(c.x - Il))), b = std::log(std::fabs(q_ldouble(c.x - Ir)));
        const LD t = v * (a - b);
        acc.add(t, t, v * (std::fabs(a) + std::fabs(b)));
    }

    const int ci = i + 1;
    const Z& n = c.model.n();
    const Q u = (c.x - Jl) / h;
    const Z jx = q_floor(u);
    const LD scale = c.val[static_cast<size_t>(ci)];  // child mass over h

    if (ci >= c.D) {
        if (jx >= 0 && jx < n) throw std::domain_error("hilbert_weight: x inside an unresolved cell; raise the depth");
        far_block(c, u, Z(0), Z(n - 1), scale, ci, false, acc);
        return;
    }

    const Z W = c.W;
    Z nearLo = std::max(Z(jx - W), Z(0));
    Z nearHi = std::min(Z(jx + W), Z(n - 1));
    if (nearLo <= nearHi) {
        for (Z j = nearLo; j <= nearHi; ++j) eval_cell(c, Jl + Q(j) * h, ci, h, acc);
        if (nearLo > 0) far_block(c, u, Z(0), Z(nearLo - 1), scale, ci, true, acc);
        if (nearHi < n - 1) far_block(c, u, Z(nearHi + 1), Z(n - 1), scale, ci, true, acc);
    } else {
        far_block(c, u, Z(0), Z(n - 1), scale, ci, true, acc);
    }
}

}  // namespace

HilbertValue hilbert_weight(const WeightModel& model, const HilbertQuery& query, Which which) {
    if (which == Which::Sigma) throw std::invalid_argument("hilbert_weight: only w and wTilde are supported");
    if (!(query.x >= 0 && query.x < 1)) throw std::domain_error("hilbert_weight: x outside [0,1)");
    HilbertCtx c(model, query.x);
    c.D = std::max(1, std::min(query.depth, model.depth()));
    c.W = std::max(0, query.window);
    c.p3k = Q(zpow(3, static_cast<unsigned long>(model.k())));
    for (int m = 0; m <= c.D; ++m) c.val.push_back(q_ldouble(model.value(m, Which::W).lo));
    for (int par = 0; par < 2; ++par) {
        const CellMoments mo = cell_moments(model, par);
        c.gamma[par] = q_ldouble(mo.centroid);
        c.var[par] = q_ldouble(mo.variance);
    }

    Acc acc;
    eval_cell(c, Q(0), 0, Q(1), acc);
    const LD pad = acc.mag * 1e-15L + 1e-300L;
    HilbertValue out;
    Enclosure e(q_from_double(static_cast<double>(acc.lo - pad)), q_from_double(static_cast<double>(acc.hi + pad)));
    // Widen by one ulp in double after rounding.
    e = Enclosure(q_from_double(std::nextafter(q_double(e.lo), -HUGE_VAL)),
                  q_from_double(std::nextafter(q_double(e.hi), HUGE_VAL)));
    if (which == Which::WTilde) {
        const Enclosure s = model.scale(Which::WTilde);
        e = e * s;
    }
    out.value = e;
    out.mid = q_double(e.mid());
    const double amid = std::fabs(out.mid);
    out.relWidth = amid > 0 ? q_double(e.width()) / amid : HUGE_VAL;
    out.budgetMet = out.relWidth <= query.tailBudget;
    return out;
}

std::vector<std::pair<SupportCell, TriadicCell>> sample_support(const WeightModel& model, int generation, int cells,
                                                                 uint64_t seed) {
    if (generation < 1 || generation > model.depth())
        throw std::invalid_argument("sample_support: generation outside 1..depth");
    const Z count = model.count_K(generation - 1);
    std::set<Z> picks;
    if (count <= cells) {
        for (Z i = 0; i < count; ++i) picks.insert(i);
    } else {
        gmp_randclass r(gmp_randinit_mt);
        r.seed(static_cast<unsigned long>(seed));
        while (static_cast<int>(picks.size()) < cells) picks.insert(r.get_z_range(count));
    }
    std::vector<std::pair<SupportCell, TriadicCell>> out;
    for (const Z& i : picks) {
        const SupportCell s = model.support_of(model.K_cell(generation - 1, i), generation - 1);
        out.emplace_back(s, WeightModel::E_sample(s));
    }
    return out;
}

HilbertStats hilbert_pointwise_report(const WeightModel& model, int generations, int samplesPerCell, uint64_t seed,
                                      int cellsPerGeneration) {
    if (model.depth() < generations + 2)
        throw std::invalid_argument("hilbert_pointwise_report: depth must be at least generations + 2");
    HilbertStats st;
    std::vector<double> ratios;
    for (int m = 1; m <= generations; ++m) {
        const auto cells = sample_support(model, m, cellsPerGeneration, seed + static_cast<uint64_t>(m));
        std::mt19937_64 rng(seed * 1000003ULL + static_cast<uint64_t>(m));
        for (const auto& [s, E] : cells) {
            for (int t = 0; t < std::max(1, samplesPerCell); ++t) {
                Q x = t == 0 ? Q(E.left() + E.length() / 2)
                             : Q(E.left() + E.length() * Q(static_cast<long>(2 * (rng() % 1024) + 1), 2048));
                HilbertSample smp;
                smp.generation = m;
                smp.cell = E.address();
                smp.x = x;
                smp.w = s.w_value;
                HilbertQuery q;
                q.x = x;
                smp.Hw = hilbert_weight(model, q);
                smp.ratio = std::fabs(smp.Hw.mid) / q_double(s.w_value.mid());
                st.worstRelWidth = std::max(st.worstRelWidth, smp.Hw.relWidth);
                ratios.push_back(smp.ratio);
                st.samples.push_back(std::move(smp));
            }
        }
    }
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        st.min = ratios.front();
        st.max = ratios.back();
        const size_t h = ratios.size() / 2;
        st.median = ratios.size() % 2 ? ratios[h] : (ratios[h - 1] + ratios[h]) / 2;
    }
    return st;
}

namespace {

// Gauss-Legendre panels on (0,1), graded by 2^{-l} toward both ends.
template <unsigned N>
long double graded_integral(const std::function<long double(long double)>& g, int levels) {
    using GL = boost::math::quadrature::gauss<long double, N>;
    long double total = GL::integrate(g, 0.25L, 0.75L);
    long double a = 0.25L;
    for (int l = 0; l < levels; ++l) {
        const long double b = a / 2;
        const bool last = l + 1 == levels;
        const long double lo = last ? 0.0L : b;
        total += GL::integrate(g, lo, a);
        total += GL::integrate([&](long double t) { return g(1 - t); }, lo, a);
        a = b;
    }
    return total;
}

long double graded(const std::function<long double(long double)>& g, int nodes, int levels) {
    switch (nodes) {
        case 4: return graded_integral<4>(g, levels);
        case 5: return graded_integral<5>(g, levels);
        case 6: return graded_integral<6>(g, levels);
        case 8: return graded_integral<8>(g, levels);
        case 10: return graded_integral<10>(g, levels);
        case 12: return graded_integral<12>(g, levels);
        case 15: return graded_integral<15>(g, levels);
        case 20: return graded_integral<20>(g, levels);
    }
    throw std::invalid_argument("quadrature nodes must be one of 4,5,6,8,10,12,15,20");
}

}  // namespace

NormRatio hilbert_norm_ratio(const WeightModel& model, const Q& p, const QuadratureSpec& spec) {
    const int M = spec.generations;
    if (M < 1) throw std::invalid_argument("hilbert_norm_ratio: generations must be >= 1");
    if (model.depth() < M + 2) throw std::invalid_argument("hilbert_norm_ratio: depth must be at least generations + 2");
    if (p <= 1) throw std::invalid_argument("hilbert_norm_ratio: p must exceed 1");
    const long double pl = q_ldouble(p);

    struct Job {
        int m;
        SupportCell s;
        long double coarse = 0, fine = 0;
    };
    std::vector<Job> jobs;
    for (int m = 1; m <= M; ++m)
        for (const auto& [s, E] : sample_support(model, m, spec.cellsPerGeneration, spec.seed + static_cast<uint64_t>(m)))
            jobs.push_back({m, s});

    auto run = [&](Job& job) {
        const Q a = job.s.I.left(), h = job.s.I.length();
        const long double v = q_ldouble(job.s.w_value.mid());
        auto g = [&](long double t) -> long double {
            HilbertQuery q;
            q.x = a + h * q_from_double(static_cast<double>(t));
            const HilbertValue hv = hilbert_weight(model, q);
            return std::pow(std::fabs(static_cast<long double>(hv.mid)) / v, pl);
        };
        job.coarse = graded(g, spec.nodes, spec.levels);
        job.fine = graded(g, spec.fineNodes, spec.fineLevels);
    };

    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(std::max(1, spec.threads)));
    auto worker = [&](size_t w) {
        try {
            for (size_t i; (i = next.fetch_add(1)) < jobs.size();) run(jobs[i]);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (spec.threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < spec.threads; ++t) pool.emplace_back(worker, static_cast<size_t>(t));
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<long double> Ec(static_cast<size_t>(M + 1), 0), Ef(static_cast<size_t>(M + 1), 0),
        sq(static_cast<size_t>(M + 1), 0);
    std::vector<int> cnt(static_cast<size_t>(M + 1), 0);
    for (const auto& j : jobs) {
        Ec[static_cast<size_t>(j.m)] += j.coarse;
        Ef[static_cast<size_t>(j.m)] += j.fine;
        sq[static_cast<size_t>(j.m)] += j.fine * j.fine;
        cnt[static_cast<size_t>(j.m)]++;
    }
    for (int m = 1; m <= M; ++m) {
        const auto c = static_cast<long double>(cnt[static_cast<size_t>(m)]);
        Ec[static_cast<size_t>(m)] /= c;
        Ef[static_cast<size_t>(m)] /= c;
        sq[static_cast<size_t>(m)] = sq[static_cast<size_t>(m)] / c - Ef[static_cast<size_t>(m)] * Ef[static_cast<size_t>(m)];
    }

    const long double n = q_ldouble(Q(model.n()));
    const long double x = n / (n + 1);
    auto combine = [&](const std::vector<long double>& E) {
        long double s = 0;
        for (int m = 1; m < M; ++m) s += std::pow(x, m) * E[static_cast<size_t>(m)];
        s += E[static_cast<size_t>(M)] * std::pow(x, M) * (n + 1);
        return s / n;
    };
    const long double Nc = combine(Ec), Nf = combine(Ef);

    NormRatio out;
    const long double k = model.k();
    const long double r = q_ldouble(model.params().r);
    const long double pp = pl / (pl - 1);
    out.value = static_cast<double>(std::pow(k, -r / pp) * std::pow(Nf, 1 / pl));
    out.denominator = static_cast<double>(std::pow(std::pow(k, -r), 1 / pl));
    out.indicator = static_cast<double>(std::fabs(Nf - Nc) / std::fabs(Nf));
    const int cM = cnt[static_cast<size_t>(M)];
    const long double se = cM > 1 ? std::sqrt(std::max(0.0L, sq[static_cast<size_t>(M)]) / (cM - 1)) /
                                        std::max(Ef[static_cast<size_t>(M)], 1e-300L)
                                  : 0.0L;
    out.error = static_cast<double>(out.value * (out.indicator + se) / pl);
    out.converged = out.indicator < spec.tolerance;
    for (int m = 1; m <= M; ++m) out.E.push_back(static_cast<double>(Ef[static_cast<size_t>(m)]));
    return out;
}

}  // namespace rtlab
