#pragma once

#include "rtlab/rational.hpp"
#include "rtlab/triadic.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rtlab {

enum class Placement { Right, Left, Alternating };
enum class Side { Left, Right };
enum class Which { W, Sigma, WTilde };

std::string to_string(Placement p);
std::string to_string(Side s);
std::string to_string(Which w);
Placement placement_from_string(const std::string& s);
Which which_from_string(const std::string& s);

struct ConstructionParams {
    int k = 2;
    Q p = 2;
    Q r = Q(3, 2);
    Placement placement = Placement::Right;
    int depth = 1;  // number of generations materialized (D)

    Q pPrime() const { return p / (p - 1); }
    void validate() const;  // throws std::invalid_argument
};

struct SupportCell {
    int generation = 0;  // m >= 1
    TriadicCell J;       // element of J_m
    TriadicCell I;       // I(J)
    Side side = Side::Right;
    Enclosure w_value;
    Enclosure sigma_value;
};

/* What a weight looks like on one triadic cell. */
struct CellWeight {
    enum class Kind { Constant, Vanishing, Mixed, Unresolved };
    Kind kind = Kind::Vanishing;
    Enclosure value;  // Constant: the constant value
    Enclosure mass;   // always the cell's mass (enclosure when unresolved)
};

/* The fractal pair (w_k, sigma_k) truncated at depth D. Families are
   enumerated on demand; generation counts grow like 3^{i(k-1)}. */
class WeightModel {
public:
    explicit WeightModel(ConstructionParams params);

    const ConstructionParams& params() const { return params_; }
    int k() const { return params_.k; }
    int depth() const { return params_.depth; }
    const Z& n() const { return n_; }      // 3^{k-1}: K-children per J
    const Q& rho() const { return rho_; }  // 3^k / (3^{k-1} + 1)
    bool sigma_exact() const { return sigma_exact_; }

    Z count_K(int i) const;  // #K_i
    Z count_J(int i) const;  // #J_i (i >= 1)
    Q length_K(int i) const; // 3^{-ik}

    // Constant value on I(J) for J in J_m, and the mass of a K in K_i.
    Enclosure value(int m, Which which) const;
    Enclosure cell_mass(int i, Which which) const;
    Enclosure scale(Which which) const;  // k^{-r} for WTilde, 1 otherwise

    Enclosure a_kp() const { return a_kp_; }
    Enclosure c_kp() const { return c_kp_; }

    Side side(int m) const;  // side of I(J) for J in J_m

    TriadicCell K_cell(int i, const Z& index) const;
    TriadicCell J_of(const TriadicCell& K) const { return middle_child(K); }
    TriadicCell I_of(const TriadicCell& K, int generationOfK) const;
    SupportCell support_of(const TriadicCell& K, int generationOfK) const;
    static TriadicCell E_sample(const SupportCell& s) { return middle_child(s.I); }

    bool is_K_cell(const TriadicCell& c) const;
    int generation_of_K(const TriadicCell& c) const;  // -1 if not a K cell

    void for_each_K(int i, const std::function<void(const TriadicCell&)>& fn) const;
    void for_each_support(int m, const std::function<void(const SupportCell&)>& fn) const;

    CellWeight weight_on_cell(const TriadicCell& cell, Which which) const;

    int flips() const { return flips_; }

private:
    ConstructionParams params_;
    Z n_;
    Q rho_;
    bool sigma_exact_ = false;
    Enclosure a_kp_, c_kp_, sigma_ratio_, tilde_scale_;
    std::vector<Enclosure> w_vals_, s_vals_;
    int flips_ = 0;
};

WeightModel build_construction(const ConstructionParams& params);

/* Shifted copies w~(x) = sum_k k^{-r} w_k(x - 9^k). */
struct CompositeCopy {
    Q shift;
    std::shared_ptr<const WeightModel> model;
    Enclosure scale;
};

struct CompositeWeight {
    std::vector<CompositeCopy> copies;
    Enclosure mass(const IntervalQ& interval, Which which, int maxDepth) const;
};

CompositeWeight direct_sum(const std::vector<std::shared_ptr<const WeightModel>>& models, int k0, int k1);

nlohmann::ordered_json to_json(const ConstructionParams& params);
nlohmann::ordered_json to_json(const WeightModel& model, size_t maxCells = 200000);

}  // namespace rtlab
