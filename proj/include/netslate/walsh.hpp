#pragma once
// Walsh character dictionary over {-1,+1}^p: subset-product features,
// contrast directions, and response-surface evaluation.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "netslate/graph.hpp"

namespace netslate {

// Ordered list of subset bitmasks S subseteq [p] with |S| <= order_cap,
// sorted by (popcount, numeric value). Index 0 is the empty set.
struct WalshIndexSet {
    int p = 0;
    int order_cap = 0;
    std::vector<std::uint32_t> indices;

    static WalshIndexSet build(int p, int order_cap) {
        if (p < 0 || p > 25) throw std::invalid_argument("WalshIndexSet: p out of supported range");
        if (order_cap < 0 || order_cap > p)
            throw std::invalid_argument("WalshIndexSet: order_cap must lie in [0, p]");
        WalshIndexSet s;
        s.p = p;
        s.order_cap = order_cap;
        for (int k = 0; k <= order_cap; ++k)
            for (std::uint32_t mask = 0; mask < (1u << p); ++mask)
                if (__builtin_popcount(mask) == k) s.indices.push_back(mask);
        return s;
    }

    int size() const { return static_cast<int>(indices.size()); }

    bool operator==(const WalshIndexSet& o) const {
        return p == o.p && order_cap == o.order_cap && indices == o.indices;
    }
};

// Coefficient vector aligned with a WalshIndexSet.
struct WalshCoeffs {
    WalshIndexSet index_set;
    std::vector<double> values;

    static WalshCoeffs zeros(const WalshIndexSet& set) {
        return WalshCoeffs{set, std::vector<double>(static_cast<std::size_t>(set.size()), 0.0)};
    }
};

// Z_S(t) = prod_{l in S} t_l for every S in the index set; empty set -> 1.
inline std::vector<double> walsh_features(const Slate& t, const WalshIndexSet& set) {
    if (t.dim() != set.p) throw std::invalid_argument("walsh_features: slate dimension mismatch");
    std::vector<double> z(static_cast<std::size_t>(set.size()));
    for (std::size_t k = 0; k < z.size(); ++k) {
        int prod = 1;
        std::uint32_t mask = set.indices[k];
        while (mask) {
            const int l = __builtin_ctz(mask);
            prod *= t.bits[static_cast<std::size_t>(l)];
            mask &= mask - 1;
        }
        z[k] = static_cast<double>(prod);
    }
    return z;
}

// v_{t,t'} = Z(t') - Z(t); entries in {-2, 0, +2}.
inline std::vector<double> contrast_direction(const Slate& t, const Slate& t2, const WalshIndexSet& set) {
    if (t.dim() != t2.dim()) throw std::invalid_argument("contrast_direction: slate dimension mismatch");
    auto za = walsh_features(t, set);
    auto zb = walsh_features(t2, set);
    for (std::size_t k = 0; k < za.size(); ++k) za[k] = zb[k] - za[k];
    return za;
}

// <alpha, Z(t)>
inline double evaluate_response(const WalshCoeffs& alpha, const Slate& t) {
    if (static_cast<int>(alpha.values.size()) != alpha.index_set.size())
        throw std::invalid_argument("evaluate_response: coefficient length mismatch");
    const auto z = walsh_features(t, alpha.index_set);
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) acc += alpha.values[k] * z[k];
    return acc;
}

// Position of subset `mask` in the canonical order, or -1 when outside the cap.
inline int index_of_subset(const WalshIndexSet& set, std::uint32_t mask) {
    for (std::size_t k = 0; k < set.indices.size(); ++k)
        if (set.indices[k] == mask) return static_cast<int>(k);
    return -1;
}

} // namespace netslate
