#include "rtlab/construction.hpp"

#include <stdexcept>

namespace rtlab {

std::string to_string(Placement p) {
    switch (p) {
        case Placement::Right: return "right";
        case Placement::Left: return "left";
        case Placement::Alternating: return "alternating";
    }
    return "?";
}

std::string to_string(Side s) { return s == Side::Left ? "left" : "right"; }

std::string to_string(Which w) {
    switch (w) {
        case Which::W: return "w";
        case Which::Sigma: return "sigma";
        case Which::WTilde: return "wTilde";
    }
    return "?";
}

Placement placement_from_string(const std::string& s) {
    if (s == "right") return Placement::Right;
    if (s == "left") return Placement::Left;
    if (s == "alternating") return Placement::Alternating;
    throw std::invalid_argument("unknown placement policy '" + s + "' (expected right|left|alternating)");
}

Which which_from_string(const std::string& s) {
    if (s == "w") return Which::W;
    if (s == "sigma") return Which::Sigma;
    if (s == "wTilde" || s == "wtilde") return Which::WTilde;
    throw std::invalid_argument("unknown weight '" + s + "' (expected w|sigma|wTilde)");
}

void ConstructionParams::validate() const {
    if (k < 2) throw std::invalid_argument("k must be >= 2 (got " + std::to_string(k) + ")");
    if (depth < 1) throw std::invalid_argument("depth D must be >= 1");
    if (p <= 1) throw std::invalid_argument("p must exceed 1 (got " + q_str(p) + ")");
    Q lower = std::max(Q(1), Q(1 / (p - 1)));
    if (!(lower < r && r < pPrime()))
        throw std::invalid_argument("r must lie strictly inside (max(1, 1/(p-1)), p') = (" + q_str(lower) + ", " +
                                    q_str(pPrime()) + "), got " + q_str(r));
}

WeightModel::WeightModel(ConstructionParams params) : params_(std::move(params)) {
    params_.validate();
    const int k = params_.k;
    n_ = zpow(3, k - 1);
    rho_ = Q(zpow(3, k), n_ + 1);
    rho_.canonicalize();
    const Q pm1 = params_.p - 1;
    sigma_exact_ = q_is_integer(params_.p);

    Q base = Q(n_ + 1, zpow(3, k));
    base.canonicalize();
    a_kp_ = pow_enclosure(base, pm1) * Enclosure(Q(1, 3));
    // c = 3a/(1-a) is increasing in a.
    auto cfun = [](const Q& a) { return Q(3 * a / (1 - a)); };
    c_kp_ = Enclosure(cfun(a_kp_.lo), cfun(a_kp_.hi));
    tilde_scale_ = pow_enclosure(Q(k), -params_.r);

    const int cache = params_.depth + 8;
    w_vals_.reserve(cache + 1);
    s_vals_.reserve(cache + 1);
    for (int m = 0; m <= cache; ++m) {
        w_vals_.emplace_back(qpow(rho_, m));
        s_vals_.push_back(pow_enclosure(rho_, Q(-pm1 * m)));
    }
    // Every I(J) fits on either side because |I(J)| = |K|/3^k < |K|/3; the
    // fallback in I_of is therefore never taken for triadic placements.
    flips_ = 0;
}

WeightModel build_construction(const ConstructionParams& params) { return WeightModel(params); }

Z WeightModel::count_K(int i) const { return zpow(3, static_cast<unsigned long>(i) * (params_.k - 1)); }

Z WeightModel::count_J(int i) const {
    if (i < 1) throw std::invalid_argument("J generations start at 1");
    return count_K(i - 1);
}

Q WeightModel::length_K(int i) const { return Q(Z(1), zpow(3, static_cast<unsigned long>(i) * params_.k)); }

Enclosure WeightModel::scale(Which which) const { return which == Which::WTilde ? tilde_scale_ : Enclosure(Q(1)); }

Enclosure WeightModel::value(int m, Which which) const {
    if (m < 0) throw std::invalid_argument("negative generation");
    const bool cached = m < static_cast<int>(w_vals_.size());
    switch (which) {
        case Which::W: return cached ? w_vals_[m] : Enclosure(qpow(rho_, m));
        case Which::WTilde: return tilde_scale_ * (cached ? w_vals_[m] : Enclosure(qpow(rho_, m)));
        case Which::Sigma: return cached ? s_vals_[m] : pow_enclosure(rho_, Q(-(params_.p - 1) * m));
    }
    return {};
}

Enclosure WeightModel::cell_mass(int i, Which which) const {
    Enclosure len(length_K(i));
    switch (which) {
        case Which::W: return value(i, Which::W) * len;
        case Which::WTilde: return value(i, Which::WTilde) * len;
        case Which::Sigma:
            return c_kp_ * Enclosure(Q(Z(1), zpow(3, params_.k))) * value(i, Which::Sigma) * len;
    }
    return {};
}

Side WeightModel::side(int m) const {
    switch (params_.placement) {
        case Placement::Right: return Side::Right;
        case Placement::Left: return Side::Left;
        case Placement::Alternating: return (m % 2 == 1) ? Side::Right : Side::Left;
    }
    return Side::Right;
}

TriadicCell WeightModel::K_cell(int i, const Z& index) const {
    const size_t w = static_cast<size_t>(params_.k - 1);
    std::string digits = base3_digits(index, static_cast<size_t>(i) * w);
    std::string addr;
    addr.reserve(static_cast<size_t>(i) * params_.k);
    for (int g = 0; g < i; ++g) {
        addr.push_back('1');
        addr.append(digits, static_cast<size_t>(g) * w, w);
    }
    return cell_from_address(addr);
}

TriadicCell WeightModel::I_of(const TriadicCell& K, int generationOfK) const {
    Side s = side(generationOfK + 1);
    const std::string pad(static_cast<size_t>(params_.k - 1), s == Side::Right ? '0' : '2');
    TriadicCell I = cell_from_address(K.address() + (s == Side::Right ? "2" : "0") + pad);
    if (!K.contains(I)) {
        // Opposite side; unreachable for triadic geometry but kept as the documented fallback.
        const std::string other(static_cast<size_t>(params_.k - 1), s == Side::Right ? '2' : '0');
        I = cell_from_address(K.address() + (s == Side::Right ? "0" : "2") + other);
    }
    return I;
}

SupportCell WeightModel::support_of(const TriadicCell& K, int generationOfK) const {
    SupportCell s;
    s.generation = generationOfK + 1;
    s.J = middle_child(K);
    s.I = I_of(K, generationOfK);
    s.side = s.I.left() > s.J.left() ? Side::Right : Side::Left;
    s.w_value = value(s.generation, Which::W);
    s.sigma_value = value(s.generation, Which::Sigma);
    return s;
}

bool WeightModel::is_K_cell(const TriadicCell& c) const { return generation_of_K(c) >= 0; }

int WeightModel::generation_of_K(const TriadicCell& c) const {
    const auto& a = c.address();
    const size_t k = static_cast<size_t>(params_.k);
    if (a.size() % k != 0) return -1;
    for (size_t g = 0; g < a.size(); g += k)
        if (a[g] != '1') return -1;
    return static_cast<int>(a.size() / k);
}

void WeightModel::for_each_K(int i, const std::function<void(const TriadicCell&)>& fn) const {
    const Z total = count_K(i);
    for (Z idx = 0; idx < total; ++idx) fn(K_cell(i, idx));
}

void WeightModel::for_each_support(int m, const std::function<void(const SupportCell&)>& fn) const {
    if (m < 1) throw std::invalid_argument("support generations start at 1");
    for_each_K(m - 1, [&](const TriadicCell& K) { fn(support_of(K, m - 1)); });
}

nlohmann::ordered_json to_json(const ConstructionParams& params) {
    nlohmann::ordered_json j;
    j["k"] = params.k;
    j["p"] = q_str(params.p);
    j["pPrime"] = q_str(params.pPrime());
    j["r"] = q_str(params.r);
    j["placement"] = to_string(params.placement);
    j["depth"] = params.depth;
    return j;
}

namespace {
nlohmann::ordered_json enc_json(const Enclosure& e) {
    if (e.exact()) return q_str(e.lo);
    return nlohmann::ordered_json{{"lo", q_str(e.lo)}, {"hi", q_str(e.hi)}};
}
}  // namespace

nlohmann::ordered_json to_json(const WeightModel& model, size_t maxCells) {
    nlohmann::ordered_json j;
    j["params"] = to_json(model.params());
    j["rho"] = q_str(model.rho());
    j["a_kp"] = enc_json(model.a_kp());
    j["c_kp"] = enc_json(model.c_kp());
    nlohmann::ordered_json counts = nlohmann::ordered_json::array();
    Z total = 0;
    for (int i = 0; i <= model.depth(); ++i) {
        nlohmann::ordered_json c;
        c["i"] = i;
        c["K"] = model.count_K(i).get_str();
        c["K_length"] = q_str(model.length_K(i));
        if (i >= 1) {
            c["J"] = model.count_J(i).get_str();
            total += model.count_J(i);
        }
        counts.push_back(c);
    }
    j["families"] = counts;
    if (total + model.count_K(model.depth()) > Z(static_cast<unsigned long>(maxCells)))
        throw std::length_error("model too large to serialize (" + total.get_str() +
                                " support cells); lower the depth or raise the cell cap");
    nlohmann::ordered_json support = nlohmann::ordered_json::array();
    for (int m = 1; m <= model.depth(); ++m)
        model.for_each_support(m, [&](const SupportCell& s) {
            nlohmann::ordered_json c;
            c["generation"] = s.generation;
            c["J"] = s.J.address();
            c["I"] = s.I.address();
            c["side"] = to_string(s.side);
            c["w"] = enc_json(s.w_value);
            c["sigma"] = enc_json(s.sigma_value);
            support.push_back(c);
        });
    j["support"] = support;
    nlohmann::ordered_json unresolved;
    unresolved["generation"] = model.depth();
    unresolved["count"] = model.count_K(model.depth()).get_str();
    unresolved["w_mass"] = enc_json(model.cell_mass(model.depth(), Which::W));
    unresolved["sigma_mass"] = enc_json(model.cell_mass(model.depth(), Which::Sigma));
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    model.for_each_K(model.depth(), [&](const TriadicCell& K) { cells.push_back(K.address()); });
    unresolved["cells"] = cells;
    j["unresolved"] = unresolved;
    j["placement_flips"] = model.flips();
    return j;
}

}  // namespace rtlab
