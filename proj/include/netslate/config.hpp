#pragma once
// Rooted, treatment-marked network configurations and the truncated
// rooted-graph distance d_R. The mark-discrepancy search is exact: it
// enumerates root-preserving isomorphisms with depth/degree pruning and
// branch-and-bounds on the mismatch count.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "netslate/graph.hpp"

namespace netslate {

// Ego-centered configuration around a root unit. Vertex 0 is the root;
// vertices are stored in BFS order, so depths are nondecreasing.
struct RootedConfig {
    int radius = 0;
    std::vector<int> depth;                      // depth[0] == 0
    std::vector<std::pair<int, int>> edges;      // local edges, u < v
    std::vector<Slate> marks;                    // one slate per local vertex
    std::vector<int> covariate_marks;            // optional; empty when unused

    int size() const { return static_cast<int>(depth.size()); }
    int slate_dim() const { return marks.empty() ? 0 : marks.front().dim(); }
    bool has_covariate_marks() const { return !covariate_marks.empty(); }

    const std::vector<std::vector<int>>& adjacency() const;
    void validate() const;

    // Deterministic serialization (root-first BFS order, sorted adjacency);
    // equal configs produce equal keys, used to cache pairwise distances.
    std::string canonical_key() const;

    mutable std::vector<std::vector<int>> adjacency_cache_;
};

// Induced ball of radius R around `root`, depths from BFS, marks copied from
// the per-node slates (optionally restricted to mark_coords).
RootedConfig extract_config(const Graph& graph, const std::vector<Slate>& slates, int root, int radius,
                            const std::vector<int>& mark_coords = {},
                            const std::vector<int>* covariate_marks = nullptr);

// Sub-configuration on vertices with depth <= r.
RootedConfig ball_restrict(const RootedConfig& config, int r);

struct DiscrepancyOptions {
    int max_ball_size = 64;   // hard cap; exact search only, fail fast beyond it
    bool compare_covariate_marks = false;
};

// Normalized minimum mark-mismatch over root-preserving isomorphisms of the
// radius-r balls; exactly 1 when the unmarked balls are not root-isomorphic.
// The root's own mark is scored at r = 0; for r >= 1 the score is the
// minimum number of mismatched non-root vertices divided by |V(B_r)| - 1.
double mark_discrepancy(const RootedConfig& g, const RootedConfig& g2, int r,
                        const DiscrepancyOptions& opts = {});

// d_R(g, g') = sum_{r=0..R} 2^{-(r+1)} * Delta_r(g, g'); value in [0, 1-2^{-(R+1)}].
double config_distance(const RootedConfig& g, const RootedConfig& g2, int radius,
                       const DiscrepancyOptions& opts = {});

// Copy with the root's slate replaced by a constant sentinel; used by the
// nuisance learner so a unit's own treatment never enters its own smoothing
// weights.
RootedConfig mask_root_mark(const RootedConfig& config);

// BFS spanning tree of the configuration (each non-root vertex keeps the
// edge to its lowest-id parent). Collapses local isomorphism classes to
// depth/degree shape plus marks, which keeps kernel windows populated.
RootedConfig tree_projection(const RootedConfig& config);

// Symmetric pairwise distance matrix with canonical-key caching (many configs
// repeat under projected marks, so caching collapses the quadratic cost).
std::vector<std::vector<double>> pairwise_config_distances(const std::vector<RootedConfig>& configs,
                                                           int radius,
                                                           const DiscrepancyOptions& opts = {});

} // namespace netslate
