#pragma once
// Simple undirected graph plus the {-1,+1}^p treatment slate type.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace netslate {

// A treatment slate: length-p vector over {-1,+1}.
struct Slate {
    std::vector<std::int8_t> bits;

    Slate() = default;
    explicit Slate(std::vector<std::int8_t> b) : bits(std::move(b)) { validate(); }

    static Slate constant(int p, int value) {
        if (p < 0) throw std::invalid_argument("Slate: negative dimension");
        return Slate(std::vector<std::int8_t>(static_cast<std::size_t>(p),
                                              static_cast<std::int8_t>(value)));
    }

    int dim() const { return static_cast<int>(bits.size()); }

    Slate with_coordinate(int k, int value) const {
        Slate s = *this;
        s.bits.at(static_cast<std::size_t>(k)) = static_cast<std::int8_t>(value);
        s.validate();
        return s;
    }

    Slate flipped(int k) const {
        Slate s = *this;
        auto& b = s.bits.at(static_cast<std::size_t>(k));
        b = static_cast<std::int8_t>(-b);
        return s;
    }

    bool operator==(const Slate& o) const { return bits == o.bits; }
    bool operator!=(const Slate& o) const { return !(*this == o); }

    void validate() const {
        for (auto b : bits)
            if (b != 1 && b != -1) throw std::invalid_argument("Slate: entries must be -1 or +1");
    }
};

inline int hamming_distance(const Slate& a, const Slate& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("hamming_distance: dimension mismatch");
    int d = 0;
    for (int i = 0; i < a.dim(); ++i)
        if (a.bits[static_cast<std::size_t>(i)] != b.bits[static_cast<std::size_t>(i)]) ++d;
    return d;
}

// Simple undirected graph: no self-loops, no duplicate edges.
class Graph {
public:
    Graph() : num_nodes_(0) {}
    Graph(int num_nodes, std::vector<std::pair<int, int>> edges) : num_nodes_(num_nodes) {
        if (num_nodes <= 0) throw std::invalid_argument("Graph: num_nodes must be positive");
        adjacency_.assign(static_cast<std::size_t>(num_nodes), {});
        for (auto& [u, v] : edges) {
            if (u == v) throw std::invalid_argument("Graph: self-loop");
            if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
                throw std::invalid_argument("Graph: edge endpoint out of range");
            if (u > v) std::swap(u, v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges_ = std::move(edges);
        for (const auto& [u, v] : edges_) {
            adjacency_[static_cast<std::size_t>(u)].push_back(v);
            adjacency_[static_cast<std::size_t>(v)].push_back(u);
        }
        for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    }

    int num_nodes() const { return num_nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& neighbors(int v) const {
        return adjacency_.at(static_cast<std::size_t>(v));
    }
    int degree(int v) const { return static_cast<int>(neighbors(v).size()); }

private:
    int num_nodes_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adjacency_;
};

} // namespace netslate
