#pragma once

#include "rtlab/rational.hpp"

#include <vector>

namespace rtlab {

/* Piecewise-constant function: values[i] on [breaks[i], breaks[i+1]).
   Zero outside [breaks.front(), breaks.back()). */
struct StepFunction {
    std::vector<Q> breaks;
    std::vector<Q> values;

    StepFunction() = default;
    StepFunction(std::vector<Q> b, std::vector<Q> v);  // validates shape and order

    static StepFunction constant(const Q& c, const IntervalQ& on = IntervalQ());
    static StepFunction indicator(const std::vector<IntervalQ>& parts);  // disjoint parts

    Q at(const Q& x) const;
    Q integral(const IntervalQ& iv) const;
    Q integral() const;
    StepFunction abs() const;
    StepFunction pow(long e) const;
    StepFunction operator*(const StepFunction& o) const;
    Q sup() const;
};

// Common refinement of two breakpoint lists.
std::vector<Q> merge_breaks(const std::vector<Q>& a, const std::vector<Q>& b);

// Total length of a union of intervals (overlaps counted once).
Q union_length(std::vector<IntervalQ> parts);

}  // namespace rtlab
