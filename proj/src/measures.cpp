#include "rtlab/measures.hpp"

#include <algorithm>

namespace rtlab {

namespace {

struct MassCtx {
    const WeightModel& model;
    Which which;
    int depth;    // K cells of this generation are not opened
    bool closed;  // closed-interval upper bound mode
    Q a, b;
};

Z clampZ(const Z& v, const Z& lo, const Z& hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Mass of the query inside the K cell [A, A+s) of generation i.
Enclosure mass_rec(const MassCtx& c, const Q& A, int i, const Q& s) {
    const Q R = A + s;
    if (c.closed) {
        if (c.b < A || c.a > R) return Enclosure();
    } else if (c.b <= A || c.a >= R) {
        return Enclosure();
    }
    const Enclosure M = c.model.cell_mass(i, c.which);
    if (c.a <= A && R <= c.b) return M;
    if (i >= c.depth) return Enclosure(Q(0), M.hi);

    const int k = c.model.k();
    const Q h = s / Q(zpow(3, k));
    const Q Jl = A + s / 3;
    const Q Jr = A + 2 * s / 3;
    Enclosure out;

    // Support piece I(J), constant on its cell.
    const Q Il = c.model.side(i + 1) == Side::Right ? Jr : Q(Jl - h);
    const Q ov = std::min(c.b, Q(Il + h)) - std::max(c.a, Il);
    if (ov > 0) out += c.model.value(i + 1, c.which) * Enclosure(ov);

    // Children K' of J: [Jl + j h, Jl + (j+1) h), j = 0..n-1.
    const Z last = c.model.n() - 1;
    const Q ua = (c.a - Jl) / h, ub = (c.b - Jl) / h;
    Z lo, hi;
    if (c.closed) {
        lo = q_ceil(ua - 1);
        hi = q_floor(ub);
    } else {
        lo = q_floor(ua - 1) + 1;
        hi = q_ceil(ub) - 1;
    }
    if (lo > last || hi < 0) return out;
    lo = clampZ(lo, Z(0), last);
    hi = clampZ(hi, Z(0), last);
    if (lo > hi) return out;
    const Z f0 = std::max(q_ceil(ua), lo);
    const Z f1 = std::min(Z(q_floor(ub) - 1), hi);
    const Enclosure child = c.model.cell_mass(i + 1, c.which);
    if (f0 <= f1) out += Enclosure(Q(f1 - f0 + 1)) * child;
    auto partial = [&](const Z& j) {
        if (j >= f0 && j <= f1) return;
        out += mass_rec(c, Jl + Q(j) * h, i + 1, h);
    };
    partial(lo);
    if (hi != lo) partial(hi);
    return out;
}

int effective_depth(const WeightModel& model, int maxDepth) { return std::min(maxDepth, model.depth()); }

void check_domain(const IntervalQ& iv) {
    if (iv.left < 0 || iv.right > 1) throw std::out_of_range("interval outside [0,1): " + iv.str());
}

}  // namespace

Enclosure mass(const WeightModel& model, Which which, const IntervalQ& iv, int maxDepth) {
    check_domain(iv);
    MassCtx c{model, which, effective_depth(model, maxDepth), false, iv.left, iv.right};
    return mass_rec(c, Q(0), 0, Q(1));
}

Enclosure mass(const WeightModel& model, const MeasureQuery& query) {
    return mass(model, query.which, query.interval, query.maxDepth);
}

Q mass_upper_closed(const WeightModel& model, Which which, const IntervalQ& iv, int maxDepth) {
    check_domain(iv);
    MassCtx c{model, which, effective_depth(model, maxDepth), true, iv.left, iv.right};
    return mass_rec(c, Q(0), 0, Q(1)).hi;
}

Enclosure average(const WeightModel& model, Which which, const IntervalQ& iv, int maxDepth) {
    return mass(model, which, iv, maxDepth) * Enclosure(Q(1 / iv.length()));
}

Enclosure average(const WeightModel& model, const MeasureQuery& query) {
    return average(model, query.which, query.interval, query.maxDepth);
}

Enclosure pow_q(const Enclosure& base, const Q& expo) {
    if (base.lo < 0) throw std::domain_error("pow_q needs a nonnegative base");
    if (expo <= 0) throw std::domain_error("pow_q needs a positive exponent");
    if (q_is_integer(expo) && mpz_fits_slong_p(expo.get_num_mpz_t())) return pow(base, expo.get_num().get_si());
    Q lo = base.lo == 0 ? Q(0) : pow_enclosure(base.lo, expo).lo;
    Q hi = base.hi == 0 ? Q(0) : pow_enclosure(base.hi, expo).hi;
    return {lo, hi};
}

Enclosure ap_product(const WeightModel& model, const IntervalQ& iv, Direction dir, int maxDepth) {
    Enclosure w = average(model, Which::W, iv, maxDepth);
    Enclosure s = average(model, Which::Sigma, iv, maxDepth);
    const Q& p = model.params().p;
    if (dir == Direction::Forward) return pow_q(w, p - 1) * s;
    return pow_q(s, model.params().pPrime() - 1) * w;
}

Enclosure packing_sum(const WeightModel& model, const TriadicCell& K, Which which, size_t cellBudget) {
    const int i = model.generation_of_K(K);
    if (i < 0) throw std::invalid_argument("packing_sum needs a K-family cell, got '" + K.address() + "'");
    if (i > model.depth()) throw std::invalid_argument("cell beyond the materialized depth");
    Enclosure partial;
    int last = i - 1;
    for (int j = i; j <= model.depth(); ++j) {
        const Z count = zpow(3, static_cast<unsigned long>(j - i) * (model.k() - 1));
        if (count > Z(static_cast<unsigned long>(cellBudget))) break;
        // Enumerate K' in K_j below K by extending K's address.
        const size_t w = static_cast<size_t>(model.k() - 1);
        for (Z idx = 0; idx < count; ++idx) {
            std::string digits = base3_digits(idx, static_cast<size_t>(j - i) * w);
            std::string addr = K.address();
            for (int g = 0; g < j - i; ++g) {
                addr.push_back('1');
                addr.append(digits, static_cast<size_t>(g) * w, w);
            }
            TriadicCell c = cell_from_address(addr);
            partial += mass(model, which, c.interval());
        }
        last = j;
    }
    // Tail: generation j contributes (ratio)^{j-i} times the mass of K, with
    // ratio n/(n+1) for w and a_{k,p} for sigma.
    Enclosure ratio = which == Which::Sigma ? model.a_kp()
                                            : Enclosure(Q(model.n(), model.n() + 1));
    const Enclosure top = model.cell_mass(i, which);
    const long next = last - i + 1;
    Enclosure tail = top * pow(ratio, next) / (Enclosure(Q(1)) - ratio);
    return {partial.lo, partial.hi + tail.hi};
}

SimulatedMasses simulate_redistribution(const WeightModel& model) {
    SimulatedMasses out;
    const int k = model.k();
    const Z n = model.n();
    out.K_mass.push_back({Q(1)});
    Q supportTotal = 0;
    for (int i = 0; i < model.depth(); ++i) {
        const Q s = model.length_K(i);
        const Q h = s / Q(zpow(3, k));
        const Q spread = s / 3 + h;  // |J cup I(J)|
        std::vector<Q> next;
        next.reserve(out.K_mass.back().size() * n.get_ui());
        for (const Q& M : out.K_mass.back()) {
            const Q density = M / spread;
            supportTotal += density * h;
            for (Z j = 0; j < n; ++j) next.push_back(density * h);
        }
        out.K_mass.push_back(std::move(next));
    }
    out.total = supportTotal;
    for (const Q& M : out.K_mass.back()) out.total += M;
    return out;
}

CellWeight WeightModel::weight_on_cell(const TriadicCell& cell, Which which) const {
    CellWeight out;
    TriadicCell K;  // root
    int i = 0;
    while (true) {
        if (cell.contains(K)) {
            out.kind = CellWeight::Kind::Unresolved;
            out.mass = rtlab::mass(*this, which, cell.interval());
            return out;
        }
        if (i >= params_.depth) {
            out.kind = CellWeight::Kind::Unresolved;
            out.mass = rtlab::mass(*this, which, cell.interval());
            return out;
        }
        const TriadicCell J = middle_child(K);
        const TriadicCell I = I_of(K, i);
        if (!J.contains(cell)) {
            if (I.contains(cell)) {
                out.kind = CellWeight::Kind::Constant;
                out.value = value(i + 1, which);
                out.mass = out.value * Enclosure(cell.length());
            } else if (cell.contains(I)) {
                out.kind = CellWeight::Kind::Mixed;
                out.mass = value(i + 1, which) * Enclosure(I.length());
            } else {
                out.kind = CellWeight::Kind::Vanishing;
            }
            return out;
        }
        if (cell.depth() < K.depth() + static_cast<size_t>(params_.k)) {
            // A union of whole K-children of J.
            out.kind = CellWeight::Kind::Unresolved;
            out.mass = rtlab::mass(*this, which, cell.interval());
            return out;
        }
        K = cell_from_address(cell.address().substr(0, K.depth() + params_.k));
        ++i;
    }
}

Enclosure CompositeWeight::mass(const IntervalQ& interval, Which which, int maxDepth) const {
    Enclosure out;
    for (const auto& c : copies) {
        const Q l = std::max(Q(interval.left - c.shift), Q(0));
        const Q r = std::min(Q(interval.right - c.shift), Q(1));
        if (!(l < r)) continue;
        const Which base = which == Which::Sigma ? Which::Sigma : Which::W;
        Enclosure m = rtlab::mass(*c.model, base, IntervalQ(l, r), maxDepth);
        out += which == Which::WTilde ? m * c.scale : m;
    }
    return out;
}

CompositeWeight direct_sum(const std::vector<std::shared_ptr<const WeightModel>>& models, int k0, int k1) {
    if (k0 < 2 || k1 < k0) throw std::invalid_argument("direct_sum needs 2 <= k0 <= k1");
    CompositeWeight out;
    for (const auto& m : models) {
        if (m->k() < k0 || m->k() > k1) continue;
        const Q shift(zpow(9, static_cast<unsigned long>(m->k())));
        for (const auto& c : out.copies)
            if (c.shift == shift) throw std::invalid_argument("overlapping shifts for k = " + std::to_string(m->k()));
        out.copies.push_back({shift, m, m->scale(Which::WTilde)});
    }
    return out;
}

void write_measure_csv_header(std::ostream& os) { os << "interval_left,interval_right,which,lo,hi,reference,match\n"; }

void write_measure_csv_row(std::ostream& os, const MeasureQuery& q, const Enclosure& value,
                           const std::string& reference, bool match) {
    os << q_str(q.interval.left) << ',' << q_str(q.interval.right) << ',' << to_string(q.which) << ','
       << q_str(value.lo) << ',' << q_str(value.hi) << ',' << reference << ',' << (match ? "true" : "false") << '\n';
}

}  // namespace rtlab
