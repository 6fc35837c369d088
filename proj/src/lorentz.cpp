#include "rtlab/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace rtlab {

using LD = long double;

namespace {

constexpr int kBisectionCap = 128;
const LD kE = std::exp(1.0L);
const LD kEe = std::exp(kE);

LD ld(const Q& v) { return q_ldouble(v); }

// g(L) = phi(e^{-L}) e^{L}
LD phi_ratio(const QuasiConcaveFn& phi, LD L) {
    if (phi.ratioLog) return phi.ratioLog(L);
    if (L > 11000) throw std::domain_error("quasi-concave function " + phi.id + " has no log form for tiny arguments");
    return phi(std::exp(-L)) * std::exp(L);
}

// h(L) = Phi(e^L) e^{-L}
LD young_ratio(const YoungFn& Phi, LD L) {
    if (Phi.ratioLog) return Phi.ratioLog(L);
    if (L > 11000) throw std::domain_error("Young function " + Phi.id + " has no log form for huge arguments");
    return Phi(std::exp(L)) * std::exp(-L);
}

Enclosure ld_enclosure(LD lo, LD hi) {
    return Enclosure(q_from_double(std::nextafter(static_cast<double>(lo), -HUGE_VAL)),
                     q_from_double(std::nextafter(static_cast<double>(hi), HUGE_VAL)));
}

}  // namespace

QuasiConcaveFn phi0() {
    QuasiConcaveFn f;
    f.id = "phi0";
    f.eval = [](LD s) { return s * (1 - std::log(s)); };
    f.ratioLog = [](LD L) { return 1 + L; };
    return f;
}

QuasiConcaveFn psi_fn(const Q& r) {
    const LD rr = ld(r);
    QuasiConcaveFn f;
    f.id = "psi(" + q_str(r) + ")";
    f.eval = [rr](LD s) {
        const LD a = 12 - std::log(s);
        return s * a * std::pow(std::log(a), rr);
    };
    f.ratioLog = [rr](LD L) { return (12 + L) * std::pow(std::log(12 + L), rr); };
    return f;
}

QuasiConcaveFn custom_phi(const std::string& id, std::function<LD(LD)> fn) {
    QuasiConcaveFn f{id, std::move(fn), {}};
    const std::string err = validate(f);
    if (!err.empty()) throw std::invalid_argument("custom quasi-concave function " + id + ": " + err);
    return f;
}

YoungFn Phi_r(const Q& r) {
    const LD rr = ld(r);
    YoungFn F;
    F.id = "Phi_r(" + q_str(r) + ")";
    F.eval = [rr](LD t) { return t * std::log(kE + t) * std::pow(std::log(std::log(kEe + t)), rr); };
    F.ratioLog = [rr](LD L) {
        const LD a = L > 1 ? L + std::log1p(std::exp(1 - L)) : std::log(kE + std::exp(L));
        const LD b = L > kE ? L + std::log1p(std::exp(kE - L)) : std::log(kEe + std::exp(L));
        return a * std::pow(std::log(b), rr);
    };
    return F;
}

YoungFn LlogL() {
    YoungFn F;
    F.id = "LlogL";
    F.eval = [](LD t) { return t > 1 ? t * std::log(t) : 0.0L; };
    F.ratioLog = [](LD L) { return std::max(L, 0.0L); };
    return F;
}

YoungFn custom_young(const std::string& id, std::function<LD(LD)> fn) {
    YoungFn F{id, std::move(fn), {}};
    const std::string err = validate(F);
    if (!err.empty()) throw std::invalid_argument("custom Young function " + id + ": " + err);
    return F;
}

std::vector<LD> logspace(LD a, LD b, int count) {
    if (count < 1 || !(a > 0) || !(b > 0)) throw std::invalid_argument("logspace: need count >= 1 and positive ends");
    std::vector<LD> out;
    out.reserve(static_cast<size_t>(count));
    const LD la = std::log(a), lb = std::log(b);
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? a : std::exp(la + (lb - la) * i / (count - 1)));
    return out;
}

std::string validate(const QuasiConcaveFn& phi) {
    const auto grid = logspace(1e-12L, 1.0L, 241);
    LD prev = 0, prevRatio = std::numeric_limits<LD>::infinity();
    for (LD s : grid) {
        const LD v = phi(s);
        if (!(v > 0)) return "not positive at s=" + std::to_string(static_cast<double>(s));
        if (v < prev * (1 - 1e-15L)) return "not increasing at s=" + std::to_string(static_cast<double>(s));
        if (v / s > prevRatio * (1 + 1e-15L)) return "phi(s)/s not decreasing at s=" + std::to_string(static_cast<double>(s));
        prev = v;
        prevRatio = v / s;
    }
    return {};
}

std::string validate(const YoungFn& Phi) {
    if (Phi(0) != 0) return "Phi(0) != 0";
    const auto grid = logspace(1e-6L, 1e6L, 241);
    LD prev = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const LD v = Phi(grid[i]);
        if (v < prev) return "not increasing at t=" + std::to_string(static_cast<double>(grid[i]));
        if (i > 0) {
            const LD a = grid[i - 1], b = grid[i];
            if (Phi((a + b) / 2) > (Phi(a) + v) / 2 * (1 + 1e-15L) + 1e-300L)
                return "not convex near t=" + std::to_string(static_cast<double>(b));
        }
        prev = v;
    }
    if (!(Phi(1e6L) / 1e6L > Phi(1e3L) / 1e3L)) return "Phi(t)/t does not grow";
    return {};
}

InverseResult young_inverse(const YoungFn& Phi, LD y) {
    InverseResult out;
    if (!(y > 0)) {
        out.converged = true;
        return out;
    }
    LD lo = 0, hi = 1;
    int it = 0;
    while (Phi(hi) < y && it < 16384) {
        lo = hi;
        hi *= 2;
        ++it;
    }
    for (int b = 0; b < kBisectionCap; ++b) {
        if (hi - lo <= 1e-12L * hi) {
            out.converged = true;
            break;
        }
        const LD mid = (lo + hi) / 2;
        if (Phi(mid) < y)
            lo = mid;
        else
            hi = mid;
        ++out.iterations;
    }
    if (hi - lo <= 1e-12L * hi) out.converged = true;
    out.value = (lo + hi) / 2;
    out.residual = std::fabs(Phi(out.value) - y) / std::max(1.0L, y);
    return out;
}

QuasiConcaveFn fundamental_of(const YoungFn& Phi) {
    QuasiConcaveFn f;
    f.id = "fundamental(" + Phi.id + ")";
    f.eval = [Phi](LD s) { return 1 / young_inverse(Phi, 1 / s).value; };
    f.ratioLog = [Phi](LD L) {
        const LD y = std::exp(L);
        return y / young_inverse(Phi, y).value;
    };
    return f;
}

// ---- distributions ----

Q DistributionSteps::total_measure() const {
    Q s = 0;
    for (const auto& l : levels) s += l.measure;
    if (hasTail) s += mu0 / (1 - theta);
    return s;
}

Q DistributionSteps::N(const Q& t) const {
    Q s = 0;
    for (const auto& l : levels)
        if (l.value > t) s += l.measure;
    if (!hasTail) return s;
    if (lambda > 1) {
        Q v = v0;
        Q th = 1;
        while (v <= t) {
            v *= lambda;
            th *= theta;
        }
        s += mu0 * th / (1 - theta);
    } else {
        if (t < 0) return s + mu0 / (1 - theta);
        if (t == 0) return s + mu0 / (1 - theta);
        Q v = v0, th = 1;
        while (v > t) {
            v *= lambda;
            th *= theta;
        }
        s += mu0 * (1 - th) / (1 - theta);
    }
    return s;
}

Q DistributionSteps::layer_cake() const {
    Q s = 0;
    for (const auto& l : levels) s += l.value * l.measure;
    if (hasTail) {
        if (lambda * theta >= 1) throw std::domain_error("layer_cake: tail mass diverges");
        s += v0 * mu0 / (1 - lambda * theta);
    }
    return s;
}

void DistributionSteps::validate() const {
    for (size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i].value > 0) || !(levels[i].measure > 0)) throw std::logic_error("distribution: non-positive level");
        if (i > 0 && !(levels[i].value < levels[i - 1].value)) throw std::logic_error("distribution: levels not descending");
    }
    if (hasTail) {
        if (!(theta > 0 && theta < 1) || !(lambda > 0) || lambda == 1 || !(v0 > 0) || !(mu0 > 0))
            throw std::logic_error("distribution: malformed tail");
        if (!levels.empty()) {
            if (lambda > 1 && !(v0 > levels.front().value)) throw std::logic_error("distribution: tail below explicit levels");
            if (lambda < 1 && !(v0 < levels.back().value)) throw std::logic_error("distribution: tail above explicit levels");
        }
    }
    if (total_measure() > 1) throw std::logic_error("distribution: total measure exceeds 1");
}

DistributionSteps distribution_of(const StepFunction& f, const IntervalQ& on) {
    std::map<Q, Q> acc;
    for (size_t i = 0; i < f.values.size(); ++i) {
        const Q v = abs(f.values[i]);
        if (v == 0) continue;
        const Q len = overlap(IntervalQ(f.breaks[i], f.breaks[i + 1]), on);
        if (len > 0) acc[v] += len;
    }
    DistributionSteps d;
    const Q L = on.length();
    for (auto it = acc.rbegin(); it != acc.rend(); ++it) d.levels.push_back({it->first, it->second / L});
    return d;
}

namespace {

struct LadderAcc {
    std::map<int, Q> explicitLen;                 // generation m -> length carrying value v_m
    std::vector<std::pair<int, Z>> fullK;         // (generation i, count)
};

void ladder_walk(const WeightModel& model, const TriadicCell& T, const Q& A, int i, const Q& s, LadderAcc& acc) {
    const IntervalQ K(A, A + s);
    const IntervalQ t = T.interval();
    if (t.contains(K)) {
        acc.fullK.emplace_back(i, Z(1));
        return;
    }
    if (!t.intersects(K)) return;
    const Q h = s / Q(zpow(3, static_cast<unsigned long>(model.k())));
    const Q Jl = A + s / 3, Jr = A + 2 * s / 3;
    const Q Il = model.side(i + 1) == Side::Right ? Jr : Q(Jl - h);
    const Q ov = overlap(t, IntervalQ(Il, Il + h));
    if (ov > 0) acc.explicitLen[i + 1] += ov;
    const Q ovJ = overlap(t, IntervalQ(Jl, Jr));
    if (ovJ == 0) return;
    if (t.length() >= h) {
        acc.fullK.emplace_back(i + 1, Z(q_floor(ovJ / h)));
    } else {
        const Z j = q_floor((t.left - Jl) / h);
        ladder_walk(model, T, Jl + Q(j) * h, i + 1, h, acc);
    }
}

Q ladder_value(const WeightModel& model, int m, Which which) {
    if (which == Which::Sigma) {
        const Q& p = model.params().p;
        if (!q_is_integer(p)) throw std::invalid_argument("sigma distribution needs an integer p");
        return qpow(model.rho(), -(p.get_num().get_si() - 1) * m);
    }
    if (which == Which::WTilde) throw std::invalid_argument("distribution: use w and scale by k^{-r}");
    return qpow(model.rho(), m);
}

}  // namespace

DistributionSteps distribution(const WeightModel& model, const std::vector<TriadicCell>& cells, Which which) {
    LadderAcc acc;
    Q total = 0;
    for (const auto& T : cells) {
        total += T.length();
        ladder_walk(model, T, Q(0), 0, Q(1), acc);
    }
    if (total == 0) throw std::invalid_argument("distribution: empty cell list");
    const int k = model.k();
    int M0 = 0;
    for (const auto& [i, c] : acc.fullK) M0 = std::max(M0, i + 1);
    if (!acc.explicitLen.empty()) M0 = std::max(M0, acc.explicitLen.rbegin()->first + 1);
    Q coef = 0;  // tail length at generation m is coef * 3^{-m}
    for (const auto& [i, c] : acc.fullK) {
        const Q per = Q(c) / Q(zpow(3, static_cast<unsigned long>((i + 1) * (k - 1))));
        coef += per;
        for (int m = i + 1; m < M0; ++m) acc.explicitLen[m] += per / Q(zpow(3, static_cast<unsigned long>(m)));
    }
    std::vector<DistributionSteps::Level> lv;
    for (const auto& [m, len] : acc.explicitLen)
        if (len > 0) lv.push_back({ladder_value(model, m, which), len / total});
    std::sort(lv.begin(), lv.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    DistributionSteps d;
    d.levels = std::move(lv);
    if (coef > 0) {
        d.hasTail = true;
        d.v0 = ladder_value(model, M0, which);
        d.lambda = ladder_value(model, 1, which);
        d.theta = Q(1, 3);
        d.mu0 = coef / Q(zpow(3, static_cast<unsigned long>(M0))) / total;
    }
    d.validate();
    return d;
}

DistributionSteps distribution(const WeightModel& model, const TriadicCell& K, Which which) {
    return distribution(model, std::vector<TriadicCell>{K}, which);
}

// ---- Lorentz ----

LorentzValue lorentz_norm(const DistributionSteps& dist, const QuasiConcaveFn& phi, LD relTol, long maxTerms) {
    LorentzValue out;
    LD sum = 0, remLo = 0, remHi = 0;
    const auto& L = dist.levels;
    const bool up = dist.hasTail && dist.lambda > 1;
    const bool down = dist.hasTail && dist.lambda < 1;
    const Q Ctail = up ? Q(dist.mu0 / (1 - dist.theta)) : Q(0);

    // Explicit segments, top to bottom.
    Q S = Ctail;
    if (up) {
        const Q gap = L.empty() ? dist.v0 : Q(dist.v0 - L.front().value);
        sum += phi(ld(Ctail)) * ld(gap);
        ++out.terms;
    }
    for (size_t j = 0; j < L.size(); ++j) {
        S += L[j].measure;
        const Q next = j + 1 < L.size() ? L[j + 1].value : (down ? dist.v0 : Q(0));
        sum += phi(ld(S)) * ld(L[j].value - next);
        ++out.terms;
    }

    if (up) {
        // t in [v0 lambda^j, v0 lambda^{j+1}): N = Ctail theta^{j+1}.
        const LD c = ld(Ctail), th = ld(dist.theta), lam = ld(dist.lambda), v0 = ld(dist.v0);
        const LD x = th * lam;
        const LD C0 = c * th * v0 * (lam - 1);
        const LD dL = -std::log(th);
        LD Lj = -std::log(c) + dL, xp = 1;
        LD T = C0 * phi_ratio(phi, Lj), prevQ = std::numeric_limits<LD>::infinity();
        out.tailClosed = false;
        for (long j = 0; j < maxTerms; ++j) {
            sum += T;
            ++out.terms;
            const LD Ln = Lj + dL;
            xp *= x;
            const LD Tn = C0 * xp * phi_ratio(phi, Ln);
            if (Tn == 0) {
                out.tailClosed = true;
                remHi = std::numeric_limits<LD>::min();
                break;
            }
            const LD q = Tn / T;
            if (q < 1 && q <= prevQ && Tn / (1 - q) <= relTol * sum) {
                remHi = Tn / (1 - q);
                out.tailClosed = true;
                break;
            }
            prevQ = q;
            T = Tn;
            Lj = Ln;
        }
    } else if (down) {
        // t in [v0 lambda^{j+1}, v0 lambda^j): N = S + mu0 (1 - theta^{j+1})/(1 - theta).
        const LD Sx = ld(S), mu = ld(dist.mu0), th = ld(dist.theta), lam = ld(dist.lambda), v0 = ld(dist.v0);
        const LD Nmax = Sx + mu / (1 - th);
        LD thp = th, len = v0 * (1 - lam);  // thp = theta^{j+1}, len = v0 lambda^j (1 - lambda)
        LD top = v0;                        // v0 lambda^j
        out.tailClosed = false;
        for (long j = 0; j < maxTerms; ++j) {
            const LD Nj = Sx + mu * (1 - thp) / (1 - th);
            sum += phi(Nj) * len;
            ++out.terms;
            top *= lam;
            len *= lam;
            thp *= th;
            const LD hiRem = phi(Nmax) * top;
            if (hiRem <= relTol * sum) {
                remLo = phi(Sx + mu * (1 - thp) / (1 - th)) * top;
                remHi = hiRem;
                out.tailClosed = true;
                break;
            }
        }
    }
    const LD pad = sum * (1e-15L + static_cast<LD>(out.terms) * 4e-19L);
    out.sum = sum;
    out.tailBound = remHi;
    out.value = ld_enclosure(sum - pad + remLo, sum + pad + remHi);
    if (!out.tailClosed) throw std::runtime_error("lorentz_norm: tail bound did not close within the term cap");
    return out;
}

LD lorentz_norm_rearrangement(const DistributionSteps& dist, const QuasiConcaveFn& phi) {
    if (dist.hasTail) throw std::invalid_argument("lorentz_norm_rearrangement: explicit levels only");
    LD sum = 0, prev = 0;
    Q S = 0;
    for (const auto& l : dist.levels) {
        S += l.measure;
        const LD cur = phi(ld(S));
        sum += ld(l.value) * (cur - prev);
        prev = cur;
    }
    return sum;
}

// ---- Luxemburg ----

namespace {

LD orlicz_integral(const DistributionSteps& dist, const YoungFn& Phi, LD lam) {
    LD s = 0;
    for (const auto& l : dist.levels) s += ld(l.measure) * Phi(ld(l.value) / lam);
    if (!dist.hasTail) return s;
    // mu0 theta^j Phi(v0 lambda_v^j / lam) = mu0 (v0/lam) (theta lambda_v)^j h(log(v0/lam) + j log lambda_v)
    const LD mu = ld(dist.mu0), th = ld(dist.theta), lv = ld(dist.lambda);
    const LD base = mu * ld(dist.v0) / lam;
    const LD x = th * lv, dL = std::log(lv);
    if (x >= 1) throw std::domain_error("luxemburg_norm: tail diverges");
    LD L = std::log(ld(dist.v0) / lam), xp = 1;
    LD T = base * young_ratio(Phi, L), prevQ = std::numeric_limits<LD>::infinity();
    LD tail = 0;
    for (long j = 0; j < 400000000L; ++j) {
        tail += T;
        xp *= x;
        L += dL;
        const LD Tn = base * xp * young_ratio(Phi, L);
        if (Tn == 0) return s + tail;
        const LD q = T > 0 ? Tn / T : 0;
        if (q < 1 && q <= prevQ && Tn / (1 - q) <= 1e-15L * (s + tail)) return s + tail + Tn / (1 - q);
        prevQ = q;
        T = Tn;
    }
    throw std::runtime_error("luxemburg_norm: tail did not close");
}

}  // namespace

LuxemburgResult luxemburg_norm(const DistributionSteps& dist, const YoungFn& Phi, LD tol) {
    LuxemburgResult out;
    if (dist.levels.empty() && !dist.hasTail) {
        out.converged = true;
        return out;
    }
    LD hi = dist.levels.empty() ? ld(dist.v0) : ld(dist.levels.front().value);
    int guard = 0;
    while (orlicz_integral(dist, Phi, hi) > 1 && guard++ < 16384) hi *= 2;
    LD lo = hi / 2;
    guard = 0;
    while (orlicz_integral(dist, Phi, lo) <= 1 && guard++ < 16384) {
        hi = lo;
        lo /= 2;
    }
    for (int b = 0; b < kBisectionCap && hi - lo > tol * hi; ++b) {
        const LD mid = (lo + hi) / 2;
        if (orlicz_integral(dist, Phi, mid) > 1)
            lo = mid;
        else
            hi = mid;
        ++out.iterations;
    }
    out.converged = hi - lo <= tol * hi;
    out.value = hi;
    out.residual = std::fabs(orlicz_integral(dist, Phi, hi) - 1);
    return out;
}

LuxemburgResult luxemburg_norm(const StepFunction& f, const IntervalQ& on, const YoungFn& Phi, LD tol) {
    return luxemburg_norm(distribution_of(f, on), Phi, tol);
}

FundamentalWindow fundamental_compare(const YoungFn& Phi, const QuasiConcaveFn& psi, const std::vector<LD>& sGrid) {
    FundamentalWindow w;
    w.lo = std::numeric_limits<LD>::infinity();
    w.hi = 0;
    for (LD s : sGrid) {
        if (!(s > 0 && s <= 1)) throw std::invalid_argument("fundamental_compare: grid must lie in (0,1]");
        const InverseResult inv = young_inverse(Phi, 1 / s);
        if (!inv.converged) ++w.flagged;
        w.worstResidual = std::max(w.worstResidual, inv.residual);
        const LD v = psi(s) * inv.value;
        w.lo = std::min(w.lo, v);
        w.hi = std::max(w.hi, v);
    }
    return w;
}

SeriesRatio series_ratio(const Q& r, LD x, SeriesMode mode, LD tailTol, long maxN) {
    if (!(x > 0 && x < 1)) throw std::invalid_argument("series_ratio: x must lie in (0,1)");
    const LD rr = ld(r);
    const bool second = mode == SeriesMode::Second;
    auto term = [&](long n) {
        const LD nn = static_cast<LD>(n);
        return (second ? nn : 1.0L) * std::pow(std::log(nn), rr) * std::pow(x, nn);
    };
    SeriesRatio out;
    LD t = term(2);
    long n = 2;
    for (; n <= maxN; ++n) {
        out.partial += t;
        const LD tn = term(n + 1);
        const LD q = t > 0 ? tn / t : 0;
        // The term ratio decreases in n, so the geometric bound covers the rest.
        if (q < 1 && tn / (1 - q) < tailTol) {
            out.tailBound = tn / (1 - q);
            break;
        }
        t = tn;
    }
    if (n > maxN) {
        const long need = static_cast<long>(std::ceil(std::log(tailTol) / std::log(x))) * 4;
        throw std::runtime_error("series_ratio: tail not closed; need N of about " + std::to_string(need));
    }
    out.N = n;
    const LD lg = std::pow(-std::log1p(-x), rr);
    out.majorant = second ? lg / ((1 - x) * (1 - x)) : lg / (1 - x);
    out.ratio = (out.partial + out.tailBound) / out.majorant;
    return out;
}

// ---- bumps ----

std::string to_string(BumpNorm b) {
    switch (b) {
        case BumpNorm::EntropyPhi0: return "entropyPhi0";
        case BumpNorm::LorentzPsi: return "lorentzPsi";
        case BumpNorm::OrliczPhi: return "orliczPhi";
    }
    return "?";
}

BumpNorm bump_from_string(const std::string& s) {
    if (s == "entropyPhi0") return BumpNorm::EntropyPhi0;
    if (s == "lorentzPsi") return BumpNorm::LorentzPsi;
    if (s == "orliczPhi") return BumpNorm::OrliczPhi;
    throw std::invalid_argument("unknown bump norm '" + s + "' (entropyPhi0 | lorentzPsi | orliczPhi)");
}

namespace {

std::vector<TriadicCell> exact_cells(const WeightModel& model, const IntervalQ& iv) {
    const size_t depth = static_cast<size_t>(model.k()) * static_cast<size_t>(model.depth() + 2);
    std::vector<TriadicCell> cells = triadic_cover(iv, depth);
    Q total = 0;
    for (const auto& c : cells) {
        if (!iv.contains(c.interval())) throw std::invalid_argument("bump_product: " + iv.str() + " is not a union of triadic cells");
        total += c.length();
    }
    if (total != iv.length() || cells.size() > 4096)
        throw std::invalid_argument("bump_product: " + iv.str() + " is not a finite union of triadic cells");
    return cells;
}

Enclosure norm_of(const DistributionSteps& d, BumpNorm norm, const Q& r) {
    switch (norm) {
        case BumpNorm::EntropyPhi0: return lorentz_norm(d, phi0()).value;
        case BumpNorm::LorentzPsi: return lorentz_norm(d, psi_fn(r)).value;
        case BumpNorm::OrliczPhi: {
            const LuxemburgResult lx = luxemburg_norm(d, Phi_r(r));
            if (!lx.converged) throw std::runtime_error("bump_product: Luxemburg bisection did not converge");
            return ld_enclosure(lx.value * (1 - 1e-11L), lx.value * (1 + 1e-11L));
        }
    }
    return {};
}

}  // namespace

BumpValue bump_product(const WeightModel& model, const IntervalQ& interval, BumpNorm norm, Direction direction,
                       const Q& r) {
    const std::vector<TriadicCell> cells = exact_cells(model, interval);
    const Which f = direction == Direction::Forward ? Which::W : Which::Sigma;
    const Which g = direction == Direction::Forward ? Which::Sigma : Which::W;
    BumpValue out;
    out.norm = norm_of(distribution(model, cells, f), norm, r);
    out.average = average(model, g, interval);
    out.product = out.norm * out.average;
    return out;
}

IntervalQ blowup_interval(const WeightModel& model) {
    const TriadicCell root;
    const SupportCell s = model.support_of(root, 0);
    const TriadicCell Kp = s.side == Side::Right ? model.K_cell(1, Z(model.n() - 1)) : model.K_cell(1, Z(0));
    const Q l = std::min(s.I.left(), Kp.left()), rgt = std::max(s.I.right(), Kp.right());
    if (rgt - l != s.I.length() + Kp.length()) throw std::logic_error("blowup_interval: K' is not adjacent to I(J)");
    return IntervalQ(l, rgt);
}

std::vector<BlowupRow> blowup_suite(const std::vector<int>& ks, const Q& r, const Q& p) {
    std::vector<BlowupRow> rows;
    for (int k : ks) {
        ConstructionParams P;
        P.k = k;
        P.p = p;
        P.r = r;
        P.depth = 2;
        const WeightModel model(P);
        const IntervalQ R = blowup_interval(model);
        const SupportCell s = model.support_of(TriadicCell(), 0);
        const TriadicCell Kp = s.side == Side::Right ? model.K_cell(1, Z(model.n() - 1)) : model.K_cell(1, Z(0));

        BlowupRow row;
        row.k = k;
        row.normR = lorentz_norm(distribution(model, {s.I, Kp}, Which::W), phi0()).value;
        row.normKprime = lorentz_norm(distribution(model, Kp, Which::W), phi0()).value;
        row.halving = row.normR.lo >= row.normKprime.hi / 2;
        row.wAvg = average(model, Which::W, R).lo;
        const Enclosure sa = average(model, Which::Sigma, R);
        row.sigmaAvg = sa.mid();
        row.apProduct = row.wAvg * row.sigmaAvg;
        row.B = pow_enclosure(Q(k), Q(-r)) * row.normR * sa;
        row.entropyRatio = row.normR / Enclosure(Q(zpow(3, static_cast<unsigned long>(k))) * row.wAvg);
        rows.push_back(std::move(row));
    }
    return rows;
}

Enclosure entropy_ratio(const WeightModel& model) {
    const Enclosure n = lorentz_norm(distribution(model, TriadicCell(), Which::W), phi0()).value;
    return n / Enclosure(Q(zpow(3, static_cast<unsigned long>(model.k()))));
}

TriadicBump triadic_psi_bump(const WeightModel& model, const Q& r) {
    TriadicBump out;
    out.k = model.k();
    const QuasiConcaveFn psi = psi_fn(r);
    const Enclosure kr = pow_enclosure(Q(model.k()), Q(-r));
    bool first = true;
    for (int i = 0; i < model.depth(); ++i) {
        const TriadicCell K = model.K_cell(i, Z(0));
        const Enclosure fw = lorentz_norm(distribution(model, K, Which::W), psi).value *
                             average(model, Which::Sigma, K.interval()) * kr;
        const Enclosure du = lorentz_norm(distribution(model, K, Which::Sigma), psi).value *
                             average(model, Which::W, K.interval());
        if (first) {
            out.forward = fw;
            out.dual = du;
            first = false;
        } else {
            out.forward = Enclosure(std::max(out.forward.lo, fw.lo), std::max(out.forward.hi, fw.hi));
            out.dual = Enclosure(std::max(out.dual.lo, du.lo), std::max(out.dual.hi, du.hi));
        }
    }
    return out;
}

}  // namespace rtlab
