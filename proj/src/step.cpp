#include "rtlab/step.hpp"

#include <algorithm>
#include <stdexcept>

namespace rtlab {

StepFunction::StepFunction(std::vector<Q> b, std::vector<Q> v) : breaks(std::move(b)), values(std::move(v)) {
    if (breaks.empty() && values.empty()) return;
    if (breaks.size() != values.size() + 1) throw std::invalid_argument("step function needs one more break than values");
    for (size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i - 1] < breaks[i])) throw std::invalid_argument("step breaks must increase strictly");
}

StepFunction StepFunction::constant(const Q& c, const IntervalQ& on) { return StepFunction({on.left, on.right}, {c}); }

StepFunction StepFunction::indicator(const std::vector<IntervalQ>& parts) {
    std::vector<IntervalQ> p = parts;
    std::sort(p.begin(), p.end(), [](const IntervalQ& a, const IntervalQ& b) { return a.left < b.left; });
    std::vector<Q> b, v;
    for (const auto& iv : p) {
        if (!b.empty() && iv.left < b.back()) throw std::invalid_argument("indicator parts overlap");
        if (!b.empty() && iv.left == b.back()) {
            b.back() = iv.right;  // adjacent: extend the current run
            continue;
        }
        if (!b.empty()) {
            v.push_back(0);
        }
        b.push_back(iv.left);
        v.push_back(1);
        b.push_back(iv.right);
    }
    return StepFunction(std::move(b), std::move(v));
}

Q StepFunction::at(const Q& x) const {
    if (breaks.empty() || x < breaks.front() || x >= breaks.back()) return 0;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    return values[static_cast<size_t>(it - breaks.begin()) - 1];
}

Q StepFunction::integral(const IntervalQ& iv) const {
    Q out = 0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0) continue;
        const Q l = std::max(breaks[i], iv.left), r = std::min(breaks[i + 1], iv.right);
        if (l < r) out += values[i] * (r - l);
    }
    return out;
}

Q StepFunction::integral() const {
    Q out = 0;
    for (size_t i = 0; i < values.size(); ++i) out += values[i] * (breaks[i + 1] - breaks[i]);
    return out;
}

StepFunction StepFunction::abs() const {
    StepFunction out = *this;
    for (auto& v : out.values) v = ::abs(v);
    return out;
}

StepFunction StepFunction::pow(long e) const {
    StepFunction out = *this;
    for (auto& v : out.values) v = qpow(v, e);
    return out;
}

StepFunction StepFunction::operator*(const StepFunction& o) const {
    if (breaks.empty() || o.breaks.empty()) return {};
    std::vector<Q> b = merge_breaks(breaks, o.breaks);
    std::vector<Q> v;
    v.reserve(b.size() - 1);
    for (size_t i = 0; i + 1 < b.size(); ++i) v.push_back(at(b[i]) * o.at(b[i]));
    return StepFunction(std::move(b), std::move(v));
}

Q StepFunction::sup() const {
    Q out = 0;
    for (const auto& v : values) out = std::max(out, v);
    return out;
}

std::vector<Q> merge_breaks(const std::vector<Q>& a, const std::vector<Q>& b) {
    std::vector<Q> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Q union_length(std::vector<IntervalQ> parts) {
    std::sort(parts.begin(), parts.end(), [](const IntervalQ& a, const IntervalQ& b) { return a.left < b.left; });
    Q total = 0;
    bool open = false;
    Q l, r;
    for (const auto& iv : parts) {
        if (open && iv.left <= r) {
            r = std::max(r, iv.right);
            continue;
        }
        if (open) total += r - l;
        l = iv.left;
        r = iv.right;
        open = true;
    }
    if (open) total += r - l;
    return total;
}

}  // namespace rtlab
