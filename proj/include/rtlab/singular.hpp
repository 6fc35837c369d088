#pragma once

#include "rtlab/measures.hpp"

#include <cstdint>
#include <vector>

namespace rtlab {

/* Hf(x) = p.v. int f(t)/(x - t) dt, no 1/pi. For f = 1_[a,b):
   log|x - a| - log|x - b|. Throws std::domain_error when x is an endpoint. */
double hilbert_indicator(double a, double b, double x);
double hilbert_indicator(const Q& a, const Q& b, const Q& x);

struct HilbertQuery {
    Q x;
    int depth = 1 << 20;      // clamped to the model depth
    double tailBudget = 1e-2; // budgetMet is false above this relative width
    int window = 8;           // comb children opened on each side of x
};

struct HilbertValue {
    Enclosure value;
    double mid = 0;
    double relWidth = 0;
    bool budgetMet = true;
};

/* Hw(x) for the infinite construction. Support cells of generation <= depth
   are handled exactly or by centroid expansion with a one-sided remainder
   bound; cells beyond depth contribute mass times the kernel range over the
   cell. Which::WTilde scales by k^{-r}; Which::Sigma is rejected. */
HilbertValue hilbert_weight(const WeightModel& model, const HilbertQuery& query, Which which = Which::W);

// Exact normalized centroid and variance of a generation-i K cell.
struct CellMoments {
    Q centroid;  // in units of |K|, from the left end
    Q variance;  // in units of |K|^2
};
CellMoments cell_moments(const WeightModel& model, int generation);

struct HilbertSample {
    int generation = 0;
    std::string cell;  // address of the E-cell (middle child of I(J))
    Q x;
    Enclosure w;
    HilbertValue Hw;
    double ratio = 0;  // |Hw| / w
};

struct HilbertStats {
    std::vector<HilbertSample> samples;
    double min = 0, median = 0, max = 0;
    double worstRelWidth = 0;
};

HilbertStats hilbert_pointwise_report(const WeightModel& model, int generations, int samplesPerCell, uint64_t seed,
                                      int cellsPerGeneration = 16);

struct QuadratureSpec {
    int nodes = 6, levels = 10;           // coarse rule
    int fineNodes = 10, fineLevels = 20;  // refined rule
    int generations = 3;                  // generations integrated before extrapolation
    int cellsPerGeneration = 6;           // sampled support cells for generations >= 2
    uint64_t seed = 1;
    int threads = 1;
    double tolerance = 1e-3;
};

struct NormRatio {
    double value = 0;       // ||H wTilde||_{L^p(sigma)} / ||1||_{L^p(wTilde)}
    double error = 0;       // quadrature + sampling error bar
    double indicator = 0;   // relative change between the two rules
    bool converged = false;
    double denominator = 0; // (k^{-r})^{1/p}
    std::vector<double> E;  // normalized |Hw/w|^p averages per generation
};

NormRatio hilbert_norm_ratio(const WeightModel& model, const Q& p, const QuadratureSpec& spec);

/* Maximal function. Lower bound: best candidate interval with endpoints in
   the breakpoint set near x. Upper bound: unresolved cells may concentrate
   their mass next to the candidate endpoint, plus a dyadic far-field sweep. */
struct MaximalValue {
    Enclosure value;
    Q w;        // w(x)
    int candidates = 0;
};
MaximalValue maximal_at(const WeightModel& model, const Q& x, int maxDepth = 1 << 20);

struct MaximalSample {
    int generation = 0;
    Q x;
    MaximalValue M;
    Q ratioHi;  // upper / w(x)
};
struct MaximalReport {
    std::vector<MaximalSample> samples;
    Q worstRatio;
    bool withinThirteen = true;
};
MaximalReport maximal_report(const WeightModel& model, int generations, int cellsPerGeneration = 8,
                             uint64_t seed = 1, int maxDepth = 1 << 20);

// x-points in (I(J))^m for the sampled support cells of generation m.
std::vector<std::pair<SupportCell, TriadicCell>> sample_support(const WeightModel& model, int generation,
                                                                 int cells, uint64_t seed);

}  // namespace rtlab
