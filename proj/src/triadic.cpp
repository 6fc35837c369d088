#include "rtlab/triadic.hpp"

namespace rtlab {

TriadicCell cell_from_address(const std::string& address) {
    TriadicCell c;
    Z num = 0;
    for (size_t i = 0; i < address.size(); ++i) {
        char ch = address[i];
        if (ch < '0' || ch > '2')
            throw std::invalid_argument("invalid base-3 digit '" + std::string(1, ch) + "' at position " +
                                        std::to_string(i));
        num = num * 3 + (ch - '0');
    }
    c.address_ = address;
    Z den = zpow(3, address.size());
    c.left_ = Q(num, den);
    c.left_.canonicalize();
    c.length_ = Q(Z(1), den);
    c.length_.canonicalize();
    return c;
}

TriadicCell TriadicCell::child(int digit) const {
    if (digit < 0 || digit > 2) throw std::invalid_argument("child digit must be 0, 1 or 2");
    TriadicCell c;
    c.address_ = address_ + static_cast<char>('0' + digit);
    c.length_ = length_ / 3;
    c.left_ = left_ + c.length_ * digit;
    return c;
}

TriadicCell TriadicCell::parent() const {
    if (address_.empty()) throw std::logic_error("root cell has no parent");
    return cell_from_address(address_.substr(0, address_.size() - 1));
}

bool TriadicCell::contains(const TriadicCell& o) const {
    return o.address_.size() >= address_.size() && o.address_.compare(0, address_.size(), address_) == 0;
}

bool TriadicCell::disjoint(const TriadicCell& o) const { return !contains(o) && !o.contains(*this); }

TriadicCell middle_child(const TriadicCell& cell) { return cell.child(1); }

std::string base3_digits(const Z& index, size_t width) {
    std::string out(width, '0');
    Z v = index;
    for (size_t i = 0; i < width; ++i) {
        Z d = v % 3;
        out[width - 1 - i] = static_cast<char>('0' + d.get_si());
        v /= 3;
    }
    if (v != 0) throw std::out_of_range("index does not fit the digit width");
    return out;
}

TriadicCell cell_containing(const Q& x, size_t depth) {
    if (x < 0 || x >= 1) throw std::out_of_range("point outside [0,1): " + q_str(x));
    Z idx = q_floor(x * Q(zpow(3, depth)));
    return cell_from_address(base3_digits(idx, depth));
}

namespace {
void cover_rec(const TriadicCell& c, const IntervalQ& iv, size_t depth, std::vector<TriadicCell>& out) {
    if (!c.interval().intersects(iv)) return;
    if (iv.contains(c.interval()) || c.depth() >= depth) {
        out.push_back(c);
        return;
    }
    for (int d = 0; d < 3; ++d) cover_rec(c.child(d), iv, depth, out);
}
}  // namespace

std::vector<TriadicCell> triadic_cover(const IntervalQ& interval, size_t depth) {
    if (interval.left < 0 || interval.right > 1)
        throw std::out_of_range("interval outside [0,1): " + interval.str());
    std::vector<TriadicCell> out;
    cover_rec(TriadicCell(), interval, depth, out);
    return out;
}

}  // namespace rtlab
