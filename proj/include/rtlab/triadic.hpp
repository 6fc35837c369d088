#pragma once

#include "rtlab/rational.hpp"

#include <string>
#include <vector>

namespace rtlab {

/* A triadic subinterval of [0,1) addressed by its base-3 digits, most
   significant first. The empty address is [0,1). */
class TriadicCell {
public:
    TriadicCell() : left_(0), length_(1) {}

    const std::string& address() const { return address_; }
    size_t depth() const { return address_.size(); }
    const Q& left() const { return left_; }
    const Q& length() const { return length_; }
    Q right() const { return left_ + length_; }
    IntervalQ interval() const { return {left_, right()}; }

    TriadicCell child(int digit) const;
    TriadicCell parent() const;

    bool contains(const TriadicCell& o) const;   // o nested in (or equal to) *this
    bool disjoint(const TriadicCell& o) const;
    bool operator==(const TriadicCell& o) const { return address_ == o.address_; }
    bool operator<(const TriadicCell& o) const { return address_ < o.address_; }

    friend TriadicCell cell_from_address(const std::string& address);

private:
    std::string address_;
    Q left_, length_;
};

TriadicCell cell_from_address(const std::string& address);
TriadicCell middle_child(const TriadicCell& cell);

// Smallest triadic cell of depth <= maxDepth containing the point x in [0,1).
TriadicCell cell_containing(const Q& x, size_t depth);

// Minimal pairwise-disjoint cover of `interval` by cells of depth <= depth.
std::vector<TriadicCell> triadic_cover(const IntervalQ& interval, size_t depth);

// Base-3 digits of `index` padded to `width` (most significant first).
std::string base3_digits(const Z& index, size_t width);

}  // namespace rtlab
