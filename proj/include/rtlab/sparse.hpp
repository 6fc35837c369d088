#pragma once

#include "rtlab/measures.hpp"
#include "rtlab/step.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rtlab {

struct SparseFamily {
    enum class Kind { Weak, Martingale };
    std::vector<IntervalQ> intervals;
    Kind kind = Kind::Martingale;
    Q param = Q(1, 2);  // eta (weak) or epsilon (martingale)
    // Weak kind: witness sets E(I) as disjoint interval unions, parallel to intervals.
    std::vector<std::vector<IntervalQ>> witness;
};

/* Containment forest of a nested-or-disjoint family. parent[i] is the index
   of the smallest strict super-member, or -1. Throws std::invalid_argument
   naming the first crossing pair or duplicate. */
struct FamilyForest {
    std::vector<int> parent;
    std::vector<std::vector<int>> children;  // ch_S(R): maximal strict sub-members
    std::vector<int> depth;                  // number of strict ancestors
};
FamilyForest build_forest(const std::vector<IntervalQ>& intervals);

struct SparseCheck {
    bool ok = true;
    int parent = -1;       // offending member when !ok
    std::string parentStr;
    Q excess;              // sum of children lengths minus eps |R|
};

SparseCheck is_martingale_sparse(const SparseFamily& family, const Q& eps);
SparseCheck is_weak_sparse(const SparseFamily& family, const Q& eta);

/* Random martingale eps-sparse subfamily of the triadic grid down to
   gridDepth. When a model is supplied, sub-cell addresses follow the weight's
   K-structure part of the time so that members meet the support. */
SparseFamily gen_random_martingale(size_t gridDepth, const Q& eps, uint64_t seed,
                                   const WeightModel* model = nullptr, const TriadicCell& root = TriadicCell());

// Random weak eta-sparse family of non-triadic intervals with witness sets.
SparseFamily gen_random_weak(size_t count, const Q& eta, uint64_t seed);

enum class AdversarialKind { ChainTowardIJ, S1, S2, S3, S4, BoundaryChain };
std::string to_string(AdversarialKind k);
AdversarialKind adversarial_from_string(const std::string& s);

SparseFamily gen_adversarial(const WeightModel& model, AdversarialKind kind, const TriadicCell& K, const Q& eps,
                             size_t budget = SIZE_MAX);

// Largest N with eps^{N-1} >= 2 * 3^{-k}, decided exactly.
int s3_chain_length(int k, const Q& eps);
// (k log3 - log2)/log(1/eps) + 1 as a double.
double s3_chain_bound(int k, const Q& eps);

enum class Exponent { P, PPrime };

/* Forward: sum over I in S, I inside L, of <w>^p <sigma> |I|.
   Dual: sum of <sigma>^{p'} <w> |I|. `wWhich` selects w or wTilde. */
Enclosure testing_sum(const WeightModel& model, const SparseFamily& family, const IntervalQ& L, Exponent exponent,
                      Direction direction, Which wWhich = Which::W);
Enclosure testing_sum(const CompositeWeight& weight, const SparseFamily& family, const IntervalQ& L,
                      const Q& p, Direction direction, int maxDepth);

struct TestingReport {
    Enclosure sum;
    Enclosure bound;         // k w(L) / (1 - eps)
    Enclosure ratio;         // sum (1 - eps) / (k w(L))
    Enclosure kFreeRatio;    // sum (1 - eps) / w(L)
    bool triadic = false;    // family and L triadic
    bool supportViolation = false;
    std::string verdict;     // "report-only" or "violation"
};
TestingReport testing_report(const WeightModel& model, const SparseFamily& family, const IntervalQ& L,
                             Direction direction = Direction::Forward, Which wWhich = Which::W);

/* Testing ratios with L running over the members of the family: sums over
   I inside L come from subtree sums of the containment forest. */
struct TestingSweep {
    Enclosure worst;       // max over L of sum (1 - eps) / w(L), by upper end
    int argL = -1;         // member index attaining it
    Enclosure sum, mass;   // sum over I inside L, and w(L), at argL
    size_t evaluated = 0;
    size_t unresolved = 0; // members whose w-mass is not bounded away from 0
    bool supportViolation = false;
};
TestingSweep testing_sweep(const WeightModel& model, const SparseFamily& family,
                           Direction direction = Direction::Forward, Which wWhich = Which::W);

struct BoundReport {
    std::string quantity;
    Q lhs, rhs;
    bool holds = false;
    std::string detail;
};

/* Carleson embedding on a finite grid with measure density mu (a step
   function) and coefficients a_Q. Validates sum_{Q in R} a_Q mu(Q) <= A mu(R)
   over every R in the grid first; throws naming R if it fails. Exact for
   integer p. */
BoundReport carleson_check(const std::vector<IntervalQ>& grid, const std::vector<Q>& coeffs, const StepFunction& mu,
                           const StepFunction& f, long p, const Q& A);
// Smallest admissible A for the given coefficients.
Q carleson_constant(const std::vector<IntervalQ>& grid, const std::vector<Q>& coeffs, const StepFunction& mu);

/* Packing and chain inequalities for a martingale eps-sparse family. */
BoundReport packing_check(const SparseFamily& family, const IntervalQ& L, const Q& eps);
BoundReport chain_check(const SparseFamily& family, const Q& eps, long p);
// sum (|Q cap E|/|Q|)^{p+1}|Q| against ((p+1)')^{p+1} |L cap E| / (1 - eps).
BoundReport restricted_packing_check(const SparseFamily& family, const IntervalQ& L,
                                     const std::vector<IntervalQ>& E, const Q& eps, long p);

Enclosure sparse_apply(const SparseFamily& family, const StepFunction& f, const Q& p, const Q& x);
Q sparse_maximal(const SparseFamily& family, const StepFunction& f, const Q& x);

struct SplitResult {
    std::vector<SparseFamily> families;  // martingale eps-sparse, validated
    Q eps;
    int m = 0;
    // For input i: (family index, member index) of the covering cell.
    std::vector<std::pair<int, int>> assignment;
};
/* Weak eta-sparse to martingale: three shifted dyadic lattices, then layered
   round-robin by nesting depth. Throws std::runtime_error if a postcondition
   fails after re-validation. */
SplitResult split_weak_to_martingale(const SparseFamily& family, const Q& eta);

nlohmann::ordered_json to_json(const SparseFamily& family);
SparseFamily family_from_json(const nlohmann::json& j);

}  // namespace rtlab
