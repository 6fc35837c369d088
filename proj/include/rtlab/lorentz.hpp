#pragma once

#include "rtlab/measures.hpp"
#include "rtlab/step.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rtlab {

/* phi on [0,1]: increasing, phi(0) = 0, phi(s)/s decreasing. Evaluated in
   long double; callers pad results outward. */
struct QuasiConcaveFn {
    std::string id;
    std::function<long double(long double)> eval;
    // Optional g(L) = phi(e^{-L}) e^{L}, used where s underflows.
    std::function<long double(long double)> ratioLog;
    long double operator()(long double s) const { return s <= 0 ? 0.0L : eval(s); }
};

QuasiConcaveFn phi0();                    // s(1 - log s)
QuasiConcaveFn psi_fn(const Q& r);        // s(12 - log s)(log(12 - log s))^r
QuasiConcaveFn custom_phi(const std::string& id, std::function<long double(long double)> f);

struct YoungFn {
    std::string id;
    std::function<long double(long double)> eval;
    // Optional h(L) = Phi(e^L) e^{-L}, used where t overflows.
    std::function<long double(long double)> ratioLog;
    long double operator()(long double t) const { return t <= 0 ? 0.0L : eval(t); }
};

YoungFn Phi_r(const Q& r);                // t log(e+t) (log log(e^e+t))^r
YoungFn LlogL();                          // t (log t)^+
YoungFn custom_young(const std::string& id, std::function<long double(long double)> f);

// Sampled checks on a log grid; the string names the first failure, empty when fine.
std::string validate(const QuasiConcaveFn& phi);
std::string validate(const YoungFn& Phi);

struct InverseResult {
    long double value = 0;
    long double residual = 0;  // |Phi(value) - y| / max(1, y)
    int iterations = 0;
    bool converged = false;
};
// Bracket doubling, then bisection (cap 128, relative tolerance 1e-12).
InverseResult young_inverse(const YoungFn& Phi, long double y);

// phi(s) = 1 / Phi^{-1}(1/s).
QuasiConcaveFn fundamental_of(const YoungFn& Phi);

/* Distribution of |f| on a probability space, as level sets. Explicit levels
   have distinct values; the optional tail adds values v0 lambda^j on sets of
   measure mu0 theta^j, j >= 0. With lambda > 1 every tail value exceeds the
   explicit ones; with lambda < 1 every tail value is below them. */
struct DistributionSteps {
    struct Level {
        Q value, measure;
    };
    std::vector<Level> levels;  // sorted by value, descending
    bool hasTail = false;
    Q v0, mu0, lambda, theta;

    Q total_measure() const;
    Q N(const Q& t) const;         // measure of {|f| > t}
    Q layer_cake() const;          // int N(t) dt = int |f|, exact
    void validate() const;         // throws std::logic_error
};

DistributionSteps distribution_of(const StepFunction& f, const IntervalQ& on);

/* Distribution of w or sigma over a union of disjoint triadic cells with
   normalized Lebesgue measure. Sigma requires an integer p (exact values). */
DistributionSteps distribution(const WeightModel& model, const std::vector<TriadicCell>& cells, Which which);
DistributionSteps distribution(const WeightModel& model, const TriadicCell& K, Which which);

struct LorentzValue {
    Enclosure value;
    long double sum = 0;
    long double tailBound = 0;
    long terms = 0;
    bool tailClosed = true;
};

// int_0^infty phi(N(t)) dt, explicit part plus a ratio-test tail bound.
LorentzValue lorentz_norm(const DistributionSteps& dist, const QuasiConcaveFn& phi, long double relTol = 1e-13L,
                          long maxTerms = 400000000L);
// int_0^1 f*(s) dphi(s) as a step sum; explicit levels only.
long double lorentz_norm_rearrangement(const DistributionSteps& dist, const QuasiConcaveFn& phi);

struct LuxemburgResult {
    long double value = 0;
    long double residual = 0;  // |int Phi(f/value) - 1|
    int iterations = 0;
    bool converged = false;
};
LuxemburgResult luxemburg_norm(const DistributionSteps& dist, const YoungFn& Phi, long double tol = 1e-12L);
LuxemburgResult luxemburg_norm(const StepFunction& f, const IntervalQ& on, const YoungFn& Phi,
                               long double tol = 1e-12L);

struct FundamentalWindow {
    long double lo = 0, hi = 0;
    long double worstResidual = 0;
    int flagged = 0;  // points whose bisection did not converge
};
// min and max of psi(s) Phi^{-1}(1/s) over the grid.
FundamentalWindow fundamental_compare(const YoungFn& Phi, const QuasiConcaveFn& psi, const std::vector<long double>& sGrid);
std::vector<long double> logspace(long double a, long double b, int count);

enum class SeriesMode { First, Second };
struct SeriesRatio {
    long double partial = 0, tailBound = 0, majorant = 0, ratio = 0;
    long N = 0;
};
/* First: sum_{n>=2} (log n)^r x^n against (-log(1-x))^r/(1-x).
   Second: sum n (log n)^r x^n against (-log(1-x))^r/(1-x)^2.
   Throws std::runtime_error naming the required N if the tail does not close. */
SeriesRatio series_ratio(const Q& r, long double x, SeriesMode mode, long double tailTol = 1e-9L,
                         long maxN = 100000000L);

enum class BumpNorm { EntropyPhi0, LorentzPsi, OrliczPhi };
std::string to_string(BumpNorm b);
BumpNorm bump_from_string(const std::string& s);

struct BumpValue {
    Enclosure norm;     // ||f||_{norm over interval}
    Enclosure average;  // <g>_interval of the partner weight
    Enclosure product;
};
/* Forward: ||w|| <sigma>; dual: ||sigma|| <w>. The interval must be a finite
   union of triadic cells. */
BumpValue bump_product(const WeightModel& model, const IntervalQ& interval, BumpNorm norm, Direction direction,
                       const Q& r = Q(3, 2));

// R_k = I(J) cup K' for the generation-1 J, K' the K-cell of J adjacent to I(J).
IntervalQ blowup_interval(const WeightModel& model);

struct BlowupRow {
    int k = 0;
    Enclosure normR;        // ||w_k||*_{R_k}
    Enclosure normKprime;   // ||w_k||*_{K'}
    bool halving = false;   // normR >= normKprime / 2
    Q wAvg, sigmaAvg;       // on R_k
    Q apProduct;
    Enclosure B;            // k^{-r} normR <sigma>_R
    Enclosure entropyRatio; // normR / (3^k <w>_R)
};
std::vector<BlowupRow> blowup_suite(const std::vector<int>& ks, const Q& r, const Q& p = 2);

// ||w_k||*_{[0,1)} / (3^k <w>_{[0,1)}).
Enclosure entropy_ratio(const WeightModel& model);

struct TriadicBump {
    int k = 0;
    Enclosure forward;  // sup over K of ||w||_{Lambda_psi(K)} <sigma>_K / k^r
    Enclosure dual;     // sup over K of ||sigma||_{Lambda_psi(K)} <w>_K
};
TriadicBump triadic_psi_bump(const WeightModel& model, const Q& r);

}  // namespace rtlab
