#pragma once

#include "rtlab/construction.hpp"

#include <ostream>
#include <string>

namespace rtlab {

struct MeasureQuery {
    Which which = Which::W;
    IntervalQ interval;
    int maxDepth = 1 << 20;  // clamped to the model depth
};

enum class Direction { Forward, Dual };

/* Mass of the weight on the query interval. Exact when the recursion resolves
   the endpoints; otherwise partially cut unresolved cells contribute [0, M]. */
Enclosure mass(const WeightModel& model, const MeasureQuery& query);
Enclosure mass(const WeightModel& model, Which which, const IntervalQ& iv, int maxDepth = 1 << 20);

/* Upper bound for the mass of the closed interval, counting every unresolved
   cell that merely touches an endpoint at its full mass. */
Q mass_upper_closed(const WeightModel& model, Which which, const IntervalQ& iv, int maxDepth = 1 << 20);

Enclosure average(const WeightModel& model, const MeasureQuery& query);
Enclosure average(const WeightModel& model, Which which, const IntervalQ& iv, int maxDepth = 1 << 20);

// Forward: <w>^{p-1}<sigma>; dual: <sigma>^{p'-1}<w>.
Enclosure ap_product(const WeightModel& model, const IntervalQ& iv, Direction dir, int maxDepth = 1 << 20);

// Nonnegative enclosure raised to a positive rational power.
Enclosure pow_q(const Enclosure& base, const Q& expo);

/* Sum of masses over all K' in the K-family with K' inside K (K included).
   Generations are summed cell by cell while the cell budget allows; the rest
   is the exact geometric tail. */
Enclosure packing_sum(const WeightModel& model, const TriadicCell& K, Which which, size_t cellBudget = 200000);

/* Generation-by-generation simulation of the redistribution steps
   w^{(i)}|_K = w^{(i-1)}(K) 1_{J cup I(J)} / |J cup I(J)|. Independent of
   the closed forms; used as a cross-check for small models. */
struct SimulatedMasses {
    std::vector<std::vector<Q>> K_mass;  // per generation, in K_cell index order
    Q total;                             // w^{(D)}([0,1))
};
SimulatedMasses simulate_redistribution(const WeightModel& model);

void write_measure_csv_header(std::ostream& os);
void write_measure_csv_row(std::ostream& os, const MeasureQuery& q, const Enclosure& value,
                           const std::string& reference, bool match);

}  // namespace rtlab
