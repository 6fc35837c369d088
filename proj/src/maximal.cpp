#include "rtlab/singular.hpp"

#include <algorithm>
#include <stdexcept>

namespace rtlab {

namespace {

struct Segment {
    enum class Kind { Zero, Constant, Unresolved };
    Q left, right;
    Kind kind;
    Q mass;
};

struct MaxCtx {
    const WeightModel& model;
    int D;
    Q wl, wr;  // window
    Q minSize; // cells shorter than this stay unresolved
    Q p3k;
    std::vector<Segment> segs;
};

constexpr long kChildBudget = 64;

void emit(MaxCtx& c, const Q& l, const Q& r, Segment::Kind kind, const Q& mass) {
    if (l < r) c.segs.push_back({l, r, kind, mass});
}

void walk(MaxCtx& c, const Q& A, int i, const Q& s) {
    const Q B = A + s;
    const Q Mk = c.model.cell_mass(i, Which::W).lo;
    if (i >= c.D || s < c.minSize || !(A < c.wr && B > c.wl)) {
        emit(c, A, B, Segment::Kind::Unresolved, Mk);
        return;
    }
    const Q h = s / c.p3k;
    const Q Jl = A + s / 3, Jr = A + 2 * s / 3;
    const Q v = c.model.value(i + 1, Which::W).lo;
    const Q Mc = c.model.cell_mass(i + 1, Which::W).lo;
    const Z& n = c.model.n();
    const bool right = c.model.side(i + 1) == Side::Right;

    auto comb = [&]() {
        Z jlo = std::max(Z(0), q_floor((c.wl - Jl) / h));
        Z jhi = std::min(Z(n - 1), Z(q_ceil((c.wr - Jl) / h) - 1));
        if (jlo > jhi) {
            emit(c, Jl, Jr, Segment::Kind::Unresolved, Q(n) * Mc);
            return;
        }
        emit(c, Jl, Jl + Q(jlo) * h, Segment::Kind::Unresolved, Q(jlo) * Mc);
        const Z count = jhi - jlo + 1;
        if (count > kChildBudget) {
            emit(c, Jl + Q(jlo) * h, Jl + Q(jhi + 1) * h, Segment::Kind::Unresolved, Q(count) * Mc);
        } else {
            for (Z j = jlo; j <= jhi; ++j) walk(c, Jl + Q(j) * h, i + 1, h);
        }
        emit(c, Jl + Q(jhi + 1) * h, Jr, Segment::Kind::Unresolved, Q(n - 1 - jhi) * Mc);
    };

    if (right) {
        emit(c, A, Jl, Segment::Kind::Zero, 0);
        comb();
        emit(c, Jr, Jr + h, Segment::Kind::Constant, v * h);
        emit(c, Jr + h, B, Segment::Kind::Zero, 0);
    } else {
        emit(c, A, Jl - h, Segment::Kind::Zero, 0);
        emit(c, Jl - h, Jl, Segment::Kind::Constant, v * h);
        comb();
        emit(c, Jr, B, Segment::Kind::Zero, 0);
    }
}

// Generation m and I(J) containing x, or throws.
std::pair<int, Q> locate(const WeightModel& model, const Q& x, int D, Q& Ilength) {
    Q A = 0, s = 1;
    const Q p3k(zpow(3, static_cast<unsigned long>(model.k())));
    for (int i = 0; i < D; ++i) {
        const Q h = s / p3k;
        const Q Jl = A + s / 3, Jr = A + 2 * s / 3;
        const Q Il = model.side(i + 1) == Side::Right ? Jr : Q(Jl - h);
        if (Il <= x && x < Il + h) {
            Ilength = h;
            return {i + 1, model.value(i + 1, Which::W).lo};
        }
        if (!(Jl <= x && x < Jr)) throw std::domain_error("maximal_at: x is not in the support of w");
        const Z j = q_floor((x - Jl) / h);
        A = Jl + Q(j) * h;
        s = h;
    }
    throw std::domain_error("maximal_at: x lies beyond the materialized generations");
}

}  // namespace

MaximalValue maximal_at(const WeightModel& model, const Q& x, int maxDepth) {
    if (!(x >= 0 && x < 1)) throw std::domain_error("maximal_at: x outside [0,1)");
    const int D = std::max(1, std::min(maxDepth, model.depth()));
    Q ell;
    const auto [m, wx] = locate(model, x, D, ell);
    (void)m;
    const Q omega = 8 * ell;

    MaxCtx c{model, D, std::max(Q(0), Q(x - omega)), std::min(Q(1), Q(x + omega)), ell,
             Q(zpow(3, static_cast<unsigned long>(model.k()))), {}};
    walk(c, Q(0), 0, Q(1));

    // Split the constant segment holding x.
    std::vector<Segment> segs;
    segs.reserve(c.segs.size() + 1);
    for (const auto& sg : c.segs) {
        if (sg.left < x && x < sg.right) {
            if (sg.kind != Segment::Kind::Constant) throw std::logic_error("maximal_at: x not in a constant segment");
            const Q dens = sg.mass / (sg.right - sg.left);
            segs.push_back({sg.left, x, sg.kind, dens * (x - sg.left)});
            segs.push_back({x, sg.right, sg.kind, dens * (sg.right - x)});
        } else {
            segs.push_back(sg);
        }
    }
    const size_t S = segs.size();
    std::vector<Q> cpt(S + 1), F(S + 1);
    cpt[0] = segs[0].left;
    F[0] = 0;
    for (size_t t = 0; t < S; ++t) {
        if (segs[t].left != cpt[t]) throw std::logic_error("maximal_at: segments do not tile [0,1)");
        cpt[t + 1] = segs[t].right;
        F[t + 1] = F[t] + segs[t].mass;
    }
    const size_t p = static_cast<size_t>(std::find(cpt.begin(), cpt.end(), x) - cpt.begin());
    if (p > S) throw std::logic_error("maximal_at: x is not a breakpoint");
    size_t iL = p, jR = p;
    while (iL > 0 && cpt[iL] > c.wl) --iL;
    while (jR < S && cpt[jR] < c.wr) ++jR;

    Q lower = 0, upper = 0;
    for (size_t i = iL; i <= p; ++i) {
        for (size_t j = std::max(p, i + 1); j <= jR; ++j) {
            const Q num = F[j] - F[i];
            const Q avg = num / (cpt[j] - cpt[i]);
            if (avg > lower) lower = avg;
            const Q a = segs[i].kind == Segment::Kind::Unresolved ? cpt[i + 1] : cpt[i];
            const Q b = segs[j - 1].kind == Segment::Kind::Unresolved ? cpt[j - 1] : cpt[j];
            if (!(a < b)) {
                if (num > 0) throw std::logic_error("maximal_at: unresolved cells on both sides of x");
                continue;
            }
            const Q up = num / (b - a);
            if (up > upper) upper = up;
        }
    }

    // Intervals of length >= omega.
    for (Q L = omega;; L *= 2) {
        if (Q(1) / L <= upper) break;
        const Q l = std::max(Q(0), Q(x - 2 * L)), r = std::min(Q(1), Q(x + 2 * L));
        const Q b = mass_upper_closed(model, Which::W, IntervalQ(l, r), D) / L;
        if (b > upper) upper = b;
        if (l == 0 && r == 1) {
            upper = std::max(upper, Q(Q(1) / (2 * L)));
            break;
        }
    }

    MaximalValue out;
    out.value = Enclosure(lower, std::max(lower, upper));
    out.w = wx;
    out.candidates = static_cast<int>(jR - iL + 1);
    return out;
}

MaximalReport maximal_report(const WeightModel& model, int generations, int cellsPerGeneration, uint64_t seed,
                             int maxDepth) {
    MaximalReport rep;
    rep.worstRatio = 0;
    for (int m = 1; m <= generations; ++m) {
        for (const auto& [s, E] : sample_support(model, m, cellsPerGeneration, seed + static_cast<uint64_t>(m))) {
            MaximalSample smp;
            smp.generation = m;
            smp.x = E.left() + E.length() / 2;
            smp.M = maximal_at(model, smp.x, maxDepth);
            smp.ratioHi = smp.M.value.hi / smp.M.w;
            if (smp.ratioHi > rep.worstRatio) rep.worstRatio = smp.ratioHi;
            if (smp.ratioHi > 13) rep.withinThirteen = false;
            rep.samples.push_back(std::move(smp));
        }
    }
    return rep;
}

}  // namespace rtlab
