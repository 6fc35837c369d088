#include "rtlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rtlab {

FamilyForest build_forest(const std::vector<IntervalQ>& iv) {
    const int n = static_cast<int>(iv.size());
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (iv[a].left != iv[b].left) return iv[a].left < iv[b].left;
        return iv[a].right > iv[b].right;
    });
    FamilyForest f;
    f.parent.assign(static_cast<size_t>(n), -1);
    f.children.assign(static_cast<size_t>(n), {});
    f.depth.assign(static_cast<size_t>(n), 0);
    std::vector<int> stack;
    for (int cur : order) {
        while (!stack.empty() && !iv[stack.back()].contains(iv[cur])) {
            const int top = stack.back();
            if (iv[top].right > iv[cur].left)
                throw std::invalid_argument("family is not nested-or-disjoint: " + iv[top].str() + " and " +
                                            iv[cur].str());
            stack.pop_back();
        }
        if (!stack.empty()) {
            const int top = stack.back();
            if (iv[top] == iv[cur]) throw std::invalid_argument("duplicate member " + iv[cur].str());
            f.parent[cur] = top;
            f.children[top].push_back(cur);
            f.depth[cur] = f.depth[top] + 1;
        }
        stack.push_back(cur);
    }
    return f;
}

SparseCheck is_martingale_sparse(const SparseFamily& family, const Q& eps) {
    FamilyForest f = build_forest(family.intervals);
    SparseCheck out;
    for (size_t r = 0; r < family.intervals.size(); ++r) {
        Q sum = 0;
        for (int c : f.children[r]) sum += family.intervals[c].length();
        const Q excess = sum - eps * family.intervals[r].length();
        if (excess > 0) {
            out.ok = false;
            out.parent = static_cast<int>(r);
            out.parentStr = family.intervals[r].str();
            out.excess = excess;
            return out;
        }
    }
    return out;
}

SparseCheck is_weak_sparse(const SparseFamily& family, const Q& eta) {
    SparseCheck out;
    if (family.witness.size() != family.intervals.size())
        throw std::invalid_argument("weak family needs one witness set per member");
    std::vector<IntervalQ> all;
    for (size_t i = 0; i < family.intervals.size(); ++i) {
        const auto& I = family.intervals[i];
        Q len = 0;
        for (const auto& e : family.witness[i]) {
            if (!I.contains(e)) {
                out.ok = false;
                out.parent = static_cast<int>(i);
                out.parentStr = I.str() + " (witness leaves member)";
                return out;
            }
            len += e.length();
            all.push_back(e);
        }
        const Q deficit = (1 - eta) * I.length() - len;
        if (deficit > 0) {
            out.ok = false;
            out.parent = static_cast<int>(i);
            out.parentStr = I.str();
            out.excess = deficit;
            return out;
        }
    }
    std::sort(all.begin(), all.end(), [](const IntervalQ& a, const IntervalQ& b) { return a.left < b.left; });
    for (size_t i = 1; i < all.size(); ++i)
        if (all[i].left < all[i - 1].right) {
            out.ok = false;
            out.parentStr = "witness sets overlap at " + all[i].str();
            return out;
        }
    return out;
}

namespace {

using Rng = std::mt19937_64;

uint64_t below(Rng& rng, uint64_t n) { return rng() % n; }
bool coin(Rng& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

// Number of triadic levels s with 3^{-s} <= eps.
size_t sparse_step(const Q& eps) {
    size_t s = 1;
    Q len(1, 3);
    while (len > eps) {
        len /= 3;
        ++s;
    }
    return s;
}

char exit_digit(Side s) { return s == Side::Right ? '2' : '0'; }
char pad_digit(Side s) { return s == Side::Right ? '0' : '2'; }

// Next digit of an address that tends to follow the K-structure of the model.
char structured_digit(const WeightModel& model, const std::string& a, Rng& rng) {
    const size_t k = static_cast<size_t>(model.k());
    size_t pos = 0;
    int gen = 0;
    while (true) {
        const size_t rem = a.size() - pos;
        if (rem == 0) {
            if (coin(rng, 0.5)) return '1';
            return exit_digit(model.side(gen + 1));
        }
        if (a[pos] == '1') {
            if (rem < k) return static_cast<char>('0' + below(rng, 3));
            pos += k;
            ++gen;
            continue;
        }
        const Side s = model.side(gen + 1);
        if (a[pos] == exit_digit(s)) {
            size_t j = pos + 1;
            while (j < a.size() && a[j] == pad_digit(s)) ++j;
            if (j == a.size() && j - pos - 1 < k - 1)
                return coin(rng, 0.8) ? pad_digit(s) : static_cast<char>('0' + below(rng, 3));
        }
        return static_cast<char>('0' + below(rng, 3));
    }
}

}  // namespace

SparseFamily gen_random_martingale(size_t gridDepth, const Q& eps, uint64_t seed, const WeightModel* model,
                                   const TriadicCell& root) {
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
    Rng rng(seed);
    SparseFamily fam;
    fam.kind = SparseFamily::Kind::Martingale;
    fam.param = eps;
    const size_t step = sparse_step(eps);
    const size_t cap = 600;
    std::vector<TriadicCell> queue{root};
    fam.intervals.push_back(root.interval());
    for (size_t qi = 0; qi < queue.size() && fam.intervals.size() < cap; ++qi) {
        const TriadicCell R = queue[qi];
        if (R.depth() + step > gridDepth) continue;
        Q budget = eps * R.length();
        std::vector<TriadicCell> accepted;
        const size_t span = std::min<size_t>(gridDepth - R.depth() - step, 6);
        for (int attempt = 0; attempt < 10 && fam.intervals.size() < cap; ++attempt) {
            const size_t delta = step + static_cast<size_t>(below(rng, span + 1));
            std::string addr = R.address();
            const bool structured = model != nullptr && coin(rng, 0.6);
            for (size_t d = 0; d < delta; ++d)
                addr.push_back(structured ? structured_digit(*model, addr, rng)
                                          : static_cast<char>('0' + below(rng, 3)));
            TriadicCell C = cell_from_address(addr);
            if (C.length() > budget) continue;
            bool clash = false;
            for (const auto& A : accepted)
                if (!A.disjoint(C)) clash = true;
            if (clash) continue;
            accepted.push_back(C);
            budget -= C.length();
            fam.intervals.push_back(C.interval());
            queue.push_back(C);
        }
    }
    return fam;
}

SparseFamily gen_random_weak(size_t count, const Q& eta, uint64_t seed) {
    if (!(eta > 0 && eta < 1)) throw std::invalid_argument("eta must lie in (0,1)");
    Rng rng(seed);
    SparseFamily fam;
    fam.kind = SparseFamily::Kind::Weak;
    fam.param = eta;
    std::vector<size_t> queue;
    fam.intervals.push_back(IntervalQ(Q(0), Q(1)));
    queue.push_back(0);
    std::vector<std::vector<IntervalQ>> kids(1);
    for (size_t qi = 0; qi < queue.size() && fam.intervals.size() < count; ++qi) {
        const IntervalQ R = fam.intervals[queue[qi]];
        const long c = 1 + static_cast<long>(below(rng, 3));
        const Q slot = R.length() / c;
        for (long j = 0; j < c && fam.intervals.size() < count; ++j) {
            const Q u(static_cast<long>(16 + below(rng, 49)), 64);  // [1/4, 1]
            const Q len = eta * R.length() / c * u;
            const Q room = slot - len;
            const Q off = room * Q(static_cast<long>(below(rng, 1025)), 1024);
            const Q l = R.left + slot * j + off;
            IntervalQ C(l, l + len);
            kids[queue[qi]].push_back(C);
            fam.intervals.push_back(C);
            kids.emplace_back();
            queue.push_back(fam.intervals.size() - 1);
        }
    }
    // E(R) = R minus its children.
    for (size_t i = 0; i < fam.intervals.size(); ++i) {
        auto ch = kids[i];
        std::sort(ch.begin(), ch.end(), [](const IntervalQ& a, const IntervalQ& b) { return a.left < b.left; });
        std::vector<IntervalQ> E;
        Q cur = fam.intervals[i].left;
        for (const auto& c : ch) {
            if (cur < c.left) E.emplace_back(cur, c.left);
            cur = c.right;
        }
        if (cur < fam.intervals[i].right) E.emplace_back(cur, fam.intervals[i].right);
        fam.witness.push_back(std::move(E));
    }
    return fam;
}

std::string to_string(AdversarialKind k) {
    switch (k) {
        case AdversarialKind::ChainTowardIJ: return "chainToward_IJ";
        case AdversarialKind::S1: return "S1";
        case AdversarialKind::S2: return "S2";
        case AdversarialKind::S3: return "S3";
        case AdversarialKind::S4: return "S4";
        case AdversarialKind::BoundaryChain: return "boundaryChain";
    }
    return "?";
}

AdversarialKind adversarial_from_string(const std::string& s) {
    for (auto k : {AdversarialKind::ChainTowardIJ, AdversarialKind::S1, AdversarialKind::S2, AdversarialKind::S3,
                   AdversarialKind::S4, AdversarialKind::BoundaryChain})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown adversarial kind '" + s + "'");
}

int s3_chain_length(int k, const Q& eps) {
    if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
    const Q floor = Q(2) / Q(zpow(3, static_cast<unsigned long>(k)));
    int N = 1;
    Q e = eps;  // eps^{N}
    while (e >= floor) {
        ++N;
        e *= eps;
    }
    return N;
}

double s3_chain_bound(int k, const Q& eps) {
    return (k * std::log(3.0) - std::log(2.0)) / std::log(1.0 / q_double(eps)) + 1.0;
}

SparseFamily gen_adversarial(const WeightModel& model, AdversarialKind kind, const TriadicCell& K, const Q& eps,
                             size_t budget) {
    const int i = model.generation_of_K(K);
    if (i < 0 || i >= model.depth())
        throw std::invalid_argument("adversarial families need a K cell of generation < D, got '" + K.address() + "'");
    const int k = model.k();
    const Side side = model.side(i + 1);
    const TriadicCell J = middle_child(K);
    const TriadicCell I = model.I_of(K, i);
    const size_t step = sparse_step(eps);
    SparseFamily fam;
    fam.param = eps;
    auto add = [&](const IntervalQ& iv) {
        if (fam.intervals.size() < budget) fam.intervals.push_back(iv);
    };
    // Common endpoint of J and I(J).
    const Q x0 = side == Side::Right ? J.right() : J.left();

    switch (kind) {
        case AdversarialKind::ChainTowardIJ: {
            add(K.interval());
            const std::string suffix = I.address().substr(K.depth());
            for (size_t d = step; d < suffix.size(); d += step) add(cell_from_address(K.address() + suffix.substr(0, d)).interval());
            std::string a = I.address();
            if ((suffix.size() % step) != 0 || suffix.size() < step) add(I.interval());
            for (int t = 0; t < 2; ++t) {
                a += std::string(step, '1');
                add(cell_from_address(a).interval());
            }
            break;
        }
        case AdversarialKind::S1: {
            const TriadicCell V = K.child(side == Side::Right ? 0 : 2);
            for (const TriadicCell& top : {J, V}) {
                for (size_t d = 0; d + 2 <= static_cast<size_t>(k); d += step) {
                    if (&top == &V && d > 0) break;
                    add(cell_from_address(top.address() + std::string(d, '1')).interval());
                }
            }
            break;
        }
        case AdversarialKind::S2: {
            const std::string suffix = I.address().substr(K.depth());  // exit digit + pads
            for (size_t d = 1; d <= suffix.size(); d += step) add(cell_from_address(K.address() + suffix.substr(0, d)).interval());
            if (((suffix.size() - 1) % step) != 0) add(I.interval());
            std::string a = I.address();
            for (int t = 0; t < 2; ++t) {
                a += std::string(step, '1');
                add(cell_from_address(a).interval());
            }
            break;
        }
        case AdversarialKind::S3: {
            const int N = s3_chain_length(k, eps);
            Q len = K.length();
            for (int n = 1; n <= N; ++n) {
                if (side == Side::Right)
                    add(IntervalQ(x0 - 2 * len / 3, x0 + len / 3));
                else
                    add(IntervalQ(x0 - len / 3, x0 + 2 * len / 3));
                len *= eps;
            }
            break;
        }
        case AdversarialKind::S4: {
            Q len = 3 * I.length() / 2;
            for (int n = 0; n < 4; ++n) {
                add(IntervalQ(x0 - len / 2, x0 + len / 2));
                len *= eps;
            }
            break;
        }
        case AdversarialKind::BoundaryChain: {
            Q len = K.length();
            while (len >= I.length()) {
                if (side == Side::Right)
                    add(IntervalQ(K.right() - len, K.right()));
                else
                    add(IntervalQ(K.left(), K.left() + len));
                len *= eps;
            }
            break;
        }
    }
    SparseCheck chk = is_martingale_sparse(fam, eps);
    if (!chk.ok)
        throw std::logic_error("adversarial family " + to_string(kind) + " violates sparseness at " + chk.parentStr);
    return fam;
}

namespace {

Q exponent_value(const WeightModel& model, Exponent e) { return e == Exponent::P ? model.params().p : model.params().pPrime(); }

Enclosure testing_term(const Enclosure& aw, const Enclosure& as, const Q& len, const Q& expo, Direction dir) {
    if (dir == Direction::Forward) return pow_q(aw, expo) * as * Enclosure(len);
    return pow_q(as, expo) * aw * Enclosure(len);
}

}  // namespace

Enclosure testing_sum(const WeightModel& model, const SparseFamily& family, const IntervalQ& L, Exponent exponent,
                      Direction direction, Which wWhich) {
    const Q expo = exponent_value(model, exponent);
    Enclosure sum;
    for (const auto& I : family.intervals) {
        if (!L.contains(I)) continue;
        Enclosure aw = average(model, wWhich, I);
        Enclosure as = average(model, Which::Sigma, I);
        if (aw.hi == 0 || as.hi == 0) continue;
        sum += testing_term(aw, as, I.length(), expo, direction);
    }
    return sum;
}

Enclosure testing_sum(const CompositeWeight& weight, const SparseFamily& family, const IntervalQ& L, const Q& p,
                      Direction direction, int maxDepth) {
    const Q expo = direction == Direction::Forward ? p : Q(p / (p - 1));
    Enclosure sum;
    for (const auto& I : family.intervals) {
        if (!L.contains(I)) continue;
        const Enclosure inv(Q(1 / I.length()));
        Enclosure aw = weight.mass(I, Which::WTilde, maxDepth) * inv;
        Enclosure as = weight.mass(I, Which::Sigma, maxDepth) * inv;
        if (aw.hi == 0 || as.hi == 0) continue;
        sum += testing_term(aw, as, I.length(), expo, direction);
    }
    return sum;
}

TestingReport testing_report(const WeightModel& model, const SparseFamily& family, const IntervalQ& L,
                             Direction direction, Which wWhich) {
    TestingReport rep;
    const Q eps = family.param;
    rep.sum = testing_sum(model, family, L, direction == Direction::Forward ? Exponent::P : Exponent::PPrime,
                          direction, wWhich);
    const Enclosure den = mass(model, direction == Direction::Forward ? wWhich : Which::Sigma, L);
    const Enclosure k(Q(model.k()));
    const Enclosure scale(Q(1 - eps));
    rep.triadic = true;
    auto is_triadic = [](const IntervalQ& iv) {
        if (iv.left < 0 || iv.right > 1) return false;
        Q len = iv.length();
        while (len < 1) len *= 3;
        if (len != 1) return false;
        return q_is_integer(iv.left / iv.length());
    };
    for (const auto& I : family.intervals) rep.triadic = rep.triadic && is_triadic(I);
    rep.triadic = rep.triadic && is_triadic(L);
    if (den.hi == 0) {
        rep.supportViolation = rep.sum.hi > 0;
        rep.verdict = rep.supportViolation ? "violation" : "report-only";
        return rep;
    }
    if (den.lo == 0) throw std::domain_error("weight mass of " + L.str() + " is not resolved away from 0");
    rep.bound = k * den / scale;
    rep.ratio = rep.sum * scale / (k * den);
    rep.kFreeRatio = rep.sum * scale / den;
    rep.verdict = "report-only";
    return rep;
}

TestingSweep testing_sweep(const WeightModel& model, const SparseFamily& family, Direction direction, Which wWhich) {
    TestingSweep out;
    const size_t n = family.intervals.size();
    if (n == 0) return out;
    const FamilyForest forest = build_forest(family.intervals);
    const Q expo = direction == Direction::Forward ? model.params().p : model.params().pPrime();
    std::vector<Enclosure> sub(n);
    for (size_t i = 0; i < n; ++i) {
        const IntervalQ& I = family.intervals[i];
        const Enclosure aw = average(model, wWhich, I), as = average(model, Which::Sigma, I);
        if (aw.hi == 0 || as.hi == 0) continue;
        sub[i] = testing_term(aw, as, I.length(), expo, direction);
    }
    // Children after parents in depth order; accumulate deepest first.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return forest.depth[a] > forest.depth[b]; });
    for (size_t i : order)
        if (forest.parent[i] >= 0) sub[static_cast<size_t>(forest.parent[i])] += sub[i];
    const Enclosure scale(Q(1 - family.param));
    const Which denWhich = direction == Direction::Forward ? wWhich : Which::Sigma;
    bool first = true;
    for (size_t i = 0; i < n; ++i) {
        const Enclosure den = mass(model, denWhich, family.intervals[i]);
        if (den.hi == 0) {
            if (sub[i].hi > 0) out.supportViolation = true;
            continue;
        }
        if (den.lo == 0) {
            ++out.unresolved;
            continue;
        }
        ++out.evaluated;
        const Enclosure r = sub[i] * scale / den;
        if (first || r.hi > out.worst.hi) {
            out.worst = r;
            out.argL = static_cast<int>(i);
            out.sum = sub[i];
            out.mass = den;
            first = false;
        }
    }
    return out;
}

Q carleson_constant(const std::vector<IntervalQ>& grid, const std::vector<Q>& coeffs, const StepFunction& mu) {
    Q A = 0;
    for (const auto& R : grid) {
        const Q muR = mu.integral(R);
        Q s = 0;
        for (size_t j = 0; j < grid.size(); ++j)
            if (R.contains(grid[j])) s += coeffs[j] * mu.integral(grid[j]);
        if (muR == 0) {
            if (s > 0) throw std::invalid_argument("Carleson sum positive on a mu-null cell " + R.str());
            continue;
        }
        A = std::max(A, Q(s / muR));
    }
    return A;
}

BoundReport carleson_check(const std::vector<IntervalQ>& grid, const std::vector<Q>& coeffs, const StepFunction& mu,
                           const StepFunction& f, long p, const Q& A) {
    if (grid.size() != coeffs.size()) throw std::invalid_argument("one coefficient per grid cell");
    if (p < 2) throw std::invalid_argument("Carleson check needs p >= 2 (integer)");
    for (const auto& R : grid) {
        Q s = 0;
        for (size_t j = 0; j < grid.size(); ++j)
            if (R.contains(grid[j])) {
                if (coeffs[j] < 0) throw std::invalid_argument("negative coefficient on " + grid[j].str());
                s += coeffs[j] * mu.integral(grid[j]);
            }
        if (s > A * mu.integral(R)) throw std::invalid_argument("Carleson condition fails on R = " + R.str());
    }
    const StepFunction fmu = f * mu;
    BoundReport rep;
    rep.quantity = "carleson";
    for (size_t j = 0; j < grid.size(); ++j) {
        const Q muQ = mu.integral(grid[j]);
        if (muQ == 0) continue;
        rep.lhs += qpow(fmu.integral(grid[j]) / muQ, p) * coeffs[j] * muQ;
    }
    const Q pp = Q(p, p - 1);
    rep.rhs = qpow(pp, p) * A * (f.pow(p) * mu).integral();
    rep.holds = rep.lhs <= rep.rhs;
    return rep;
}

BoundReport packing_check(const SparseFamily& family, const IntervalQ& L, const Q& eps) {
    BoundReport rep;
    rep.quantity = "sparse-packing";
    for (const auto& Qv : family.intervals)
        if (L.contains(Qv)) rep.lhs += Qv.length();
    rep.rhs = L.length() / (1 - eps);
    rep.holds = rep.lhs <= rep.rhs;
    return rep;
}

BoundReport chain_check(const SparseFamily& family, const Q& eps, long p) {
    FamilyForest f = build_forest(family.intervals);
    BoundReport rep;
    rep.quantity = "chain";
    rep.holds = true;
    Q worst = -1;
    for (size_t b = 0; b < family.intervals.size(); ++b) {
        const Q c = family.intervals[b].length();
        Q lhs = 0;
        for (int j = static_cast<int>(b); j >= 0; j = f.parent[j]) lhs += 1 / qpow(family.intervals[j].length(), p);
        const Q rhs = 1 / (qpow(c, p) * (1 - eps));
        if (lhs > rhs) rep.holds = false;
        const Q ratio = lhs / rhs;
        if (ratio > worst) {
            worst = ratio;
            rep.lhs = lhs;
            rep.rhs = rhs;
        }
    }
    return rep;
}

BoundReport restricted_packing_check(const SparseFamily& family, const IntervalQ& L, const std::vector<IntervalQ>& E,
                                     const Q& eps, long p) {
    BoundReport rep;
    rep.quantity = "restricted-packing";
    for (const auto& Qv : family.intervals) {
        if (!L.contains(Qv)) continue;
        Q inter = 0;
        for (const auto& e : E) inter += overlap(Qv, e);
        rep.lhs += qpow(inter / Qv.length(), p + 1) * Qv.length();
    }
    Q LE = 0;
    for (const auto& e : E) LE += overlap(L, e);
    const Q C = qpow(Q(p + 1, p), p + 1);
    rep.rhs = C * LE / (1 - eps);
    rep.holds = rep.lhs <= rep.rhs;
    return rep;
}

Enclosure sparse_apply(const SparseFamily& family, const StepFunction& f, const Q& p, const Q& x) {
    if (p < 1) throw std::invalid_argument("sparse p-function needs p >= 1");
    const StepFunction af = f.abs();
    Enclosure sum;
    for (const auto& Qv : family.intervals) {
        if (!Qv.contains(x)) continue;
        const Q avg = af.integral(Qv) / Qv.length();
        if (avg == 0) continue;
        sum += pow_q(Enclosure(avg), p);
    }
    if (sum.hi == 0) return Enclosure();
    return pow_q(sum, Q(1 / p));
}

Q sparse_maximal(const SparseFamily& family, const StepFunction& f, const Q& x) {
    const StepFunction af = f.abs();
    Q best = 0;
    for (const auto& Qv : family.intervals)
        if (Qv.contains(x)) best = std::max(best, Q(af.integral(Qv) / Qv.length()));
    return best;
}

namespace {

Q pow2(long n) { return n >= 0 ? Q(Z(1), zpow(2, static_cast<unsigned long>(n))) : Q(zpow(2, static_cast<unsigned long>(-n))); }

struct LatticeCell {
    int t;
    long n;
    Z m;
    IntervalQ iv;
};

// Cell of one of the three shifted dyadic lattices containing Q with |R| <= 6|Q|.
LatticeCell lattice_cover(const IntervalQ& Qv) {
    const Q len = Qv.length();
    const long guess = static_cast<long>(std::floor(-std::log2(6.0 * q_double(len)))) - 1;
    for (long n = guess; n <= guess + 6; ++n) {
        const Q s = pow2(n);
        if (s < len || s > 6 * len) continue;
        for (int t = 0; t < 3; ++t) {
            const Q off = (n % 2 == 0 ? Q(t, 3) : Q(-t, 3)) * s;
            const Z m = q_floor((Qv.left - off) / s);
            IntervalQ R(Q(m) * s + off, Q(m + 1) * s + off);
            if (R.contains(Qv)) return {t, n, m, R};
        }
    }
    throw std::runtime_error("no lattice cell of size <= 6|Q| contains " + Qv.str());
}

}  // namespace

SplitResult split_weak_to_martingale(const SparseFamily& family, const Q& eta) {
    if (!(eta > 0 && eta < 1)) throw std::invalid_argument("eta must lie in (0,1)");
    if (!family.witness.empty()) {
        SparseCheck w = is_weak_sparse(family, eta);
        if (!w.ok) throw std::invalid_argument("input is not weak eta-sparse: " + w.parentStr);
    }
    SplitResult out;
    const Q packing = Q(6) / (1 - eta);  // 6^d/(1-eta), d = 1
    const Q lower = std::max(Q(2), Q(packing - 1));
    out.m = static_cast<int>(q_floor(lower).get_si()) + 1;
    out.eps = (packing - 1) / out.m;

    bool already = false;
    try {
        already = is_martingale_sparse(family, out.eps).ok;
    } catch (const std::invalid_argument&) {
        already = false;
    }
    if (already) {
        SparseFamily f = family;
        f.kind = SparseFamily::Kind::Martingale;
        f.param = out.eps;
        f.witness.clear();
        out.families.push_back(std::move(f));
        for (size_t i = 0; i < family.intervals.size(); ++i) out.assignment.emplace_back(0, static_cast<int>(i));
        return out;
    }

    // Lattice cells per t, deduplicated.
    std::vector<std::vector<IntervalQ>> cells(3);
    std::vector<std::pair<int, size_t>> where;
    std::map<std::tuple<long, std::string>, size_t> seen[3];
    for (const auto& Qv : family.intervals) {
        LatticeCell c = lattice_cover(Qv);
        auto key = std::make_tuple(c.n, c.m.get_str());
        auto it = seen[c.t].find(key);
        size_t idx;
        if (it == seen[c.t].end()) {
            idx = cells[c.t].size();
            cells[c.t].push_back(c.iv);
            seen[c.t].emplace(key, idx);
        } else {
            idx = it->second;
        }
        where.emplace_back(c.t, idx);
    }
    // Layered round-robin by nesting depth inside each lattice.
    std::map<std::pair<int, int>, int> slot;  // (t, layer) -> family index
    std::vector<std::vector<int>> member_of(3), family_of(3);
    for (int t = 0; t < 3; ++t) {
        if (cells[t].empty()) continue;
        FamilyForest f = build_forest(cells[t]);
        member_of[t].assign(cells[t].size(), -1);
        family_of[t].assign(cells[t].size(), -1);
        for (size_t c = 0; c < cells[t].size(); ++c) {
            const int layer = f.depth[c] % out.m;
            auto key = std::make_pair(t, layer);
            auto it = slot.find(key);
            if (it == slot.end()) {
                it = slot.emplace(key, static_cast<int>(out.families.size())).first;
                SparseFamily nf;
                nf.kind = SparseFamily::Kind::Martingale;
                nf.param = out.eps;
                out.families.push_back(nf);
            }
            auto& fam = out.families[static_cast<size_t>(it->second)];
            member_of[t][c] = static_cast<int>(fam.intervals.size());
            family_of[t][c] = it->second;
            fam.intervals.push_back(cells[t][c]);
        }
    }
    for (const auto& [t, c] : where) out.assignment.emplace_back(family_of[t][c], member_of[t][c]);

    // Postconditions, always re-validated.
    if (out.families.size() > static_cast<size_t>(3 * out.m))
        throw std::runtime_error("split produced more than 3m families");
    for (size_t i = 0; i < out.families.size(); ++i) {
        SparseCheck chk = is_martingale_sparse(out.families[i], out.eps);
        if (!chk.ok)
            throw std::runtime_error("split family " + std::to_string(i) + " violates eps-sparseness at " + chk.parentStr);
    }
    for (size_t i = 0; i < family.intervals.size(); ++i) {
        const auto& [fi, mi] = out.assignment[i];
        if (fi < 0 || mi < 0) throw std::runtime_error("input " + family.intervals[i].str() + " was not assigned");
        const IntervalQ& R = out.families[static_cast<size_t>(fi)].intervals[static_cast<size_t>(mi)];
        if (!R.contains(family.intervals[i]) || R.length() > 6 * family.intervals[i].length())
            throw std::runtime_error("cover cell " + R.str() + " does not fit " + family.intervals[i].str());
    }
    return out;
}

nlohmann::ordered_json to_json(const SparseFamily& family) {
    nlohmann::ordered_json j;
    j["kind"] = family.kind == SparseFamily::Kind::Weak ? "weak" : "martingale";
    j["param"] = q_str(family.param);
    nlohmann::ordered_json iv = nlohmann::ordered_json::array();
    for (const auto& I : family.intervals) iv.push_back({q_str(I.left), q_str(I.right)});
    j["intervals"] = iv;
    if (!family.witness.empty()) {
        nlohmann::ordered_json w = nlohmann::ordered_json::array();
        for (const auto& E : family.witness) {
            nlohmann::ordered_json parts = nlohmann::ordered_json::array();
            for (const auto& e : E) parts.push_back({q_str(e.left), q_str(e.right)});
            w.push_back(parts);
        }
        j["witness"] = w;
    }
    return j;
}

SparseFamily family_from_json(const nlohmann::json& j) {
    SparseFamily f;
    const std::string kind = j.value("kind", "martingale");
    if (kind == "weak")
        f.kind = SparseFamily::Kind::Weak;
    else if (kind == "martingale")
        f.kind = SparseFamily::Kind::Martingale;
    else
        throw std::invalid_argument("family kind must be weak|martingale, got '" + kind + "'");
    f.param = q_parse(j.value("param", std::string("1/2")));
    auto pair = [](const nlohmann::json& p) {
        if (!p.is_array() || p.size() != 2) throw std::invalid_argument("interval must be a [left, right] pair");
        return IntervalQ(q_parse(p[0].get<std::string>()), q_parse(p[1].get<std::string>()));
    };
    for (const auto& p : j.at("intervals")) f.intervals.push_back(pair(p));
    if (j.contains("witness"))
        for (const auto& E : j["witness"]) {
            std::vector<IntervalQ> parts;
            for (const auto& p : E) parts.push_back(pair(p));
            f.witness.push_back(std::move(parts));
        }
    return f;
}

}  // namespace rtlab
