#include "netslate/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace netslate {

const std::vector<std::vector<int>>& RootedConfig::adjacency() const {
    if (adjacency_cache_.empty() && size() > 0) {
        adjacency_cache_.assign(static_cast<std::size_t>(size()), {});
        for (const auto& [u, v] : edges) {
            adjacency_cache_[static_cast<std::size_t>(u)].push_back(v);
            adjacency_cache_[static_cast<std::size_t>(v)].push_back(u);
        }
        for (auto& nbrs : adjacency_cache_) std::sort(nbrs.begin(), nbrs.end());
    }
    return adjacency_cache_;
}

void RootedConfig::validate() const {
    const int n = size();
    if (n == 0) throw std::invalid_argument("RootedConfig: empty vertex set");
    if (depth[0] != 0) throw std::invalid_argument("RootedConfig: root depth must be 0");
    for (int d : depth)
        if (d < 0 || d > radius) throw std::invalid_argument("RootedConfig: depth outside [0, radius]");
    if (static_cast<int>(marks.size()) != n)
        throw std::invalid_argument("RootedConfig: one mark per vertex required");
    const int p = marks.front().dim();
    for (const auto& m : marks)
        if (m.dim() != p) throw std::invalid_argument("RootedConfig: slate dimension mismatch");
    if (!covariate_marks.empty() && static_cast<int>(covariate_marks.size()) != n)
        throw std::invalid_argument("RootedConfig: covariate mark count mismatch");
    std::vector<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
        if (u == v || u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("RootedConfig: bad local edge");
        if (u > v) std::swap(u, v);
        seen.emplace_back(u, v);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw std::invalid_argument("RootedConfig: duplicate local edge");

    // depths must equal BFS distance from the root in the local edge set
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::deque<int> queue{0};
    dist[0] = 0;
    const auto& adj = adjacency();
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int w : adj[static_cast<std::size_t>(u)]) {
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(w);
            }
        }
    }
    for (int v = 0; v < n; ++v)
        if (dist[static_cast<std::size_t>(v)] != depth[static_cast<std::size_t>(v)])
            throw std::invalid_argument("RootedConfig: depths are not BFS-consistent");
}

namespace {

bool star_shaped(const RootedConfig& config) {
    if (static_cast<int>(config.edges.size()) != config.size() - 1) return false;
    for (const auto& [u, v] : config.edges)
        if (u != 0 && v != 0) return false;
    for (int d : config.depth)
        if (d > 1) return false;
    return true;
}

} // namespace

std::string RootedConfig::canonical_key() const {
    std::ostringstream os;
    // Star-shaped balls are determined up to root-isomorphism by the root
    // mark and the leaf-mark multiset, so sort the leaves; this lets distance
    // caches collapse isomorphic configs into one class.
    if (star_shaped(*this)) {
        os << "star;" << radius << ';' << size() << ';';
        for (auto b : marks[0].bits) os << (b > 0 ? '+' : '-');
        if (has_covariate_marks()) os << ':' << covariate_marks[0];
        os << ';';
        std::vector<std::string> leaves;
        leaves.reserve(static_cast<std::size_t>(size()) - 1);
        for (int v = 1; v < size(); ++v) {
            std::string t;
            for (auto b : marks[static_cast<std::size_t>(v)].bits) t += (b > 0 ? '+' : '-');
            if (has_covariate_marks()) t += ':' + std::to_string(covariate_marks[static_cast<std::size_t>(v)]);
            leaves.push_back(std::move(t));
        }
        std::sort(leaves.begin(), leaves.end());
        for (const auto& t : leaves) os << t << ',';
        return os.str();
    }

    os << radius << ';' << size() << ';';
    for (int d : depth) os << d << ',';
    os << ';';
    auto sorted_edges = edges;
    for (auto& [u, v] : sorted_edges)
        if (u > v) std::swap(u, v);
    std::sort(sorted_edges.begin(), sorted_edges.end());
    for (const auto& [u, v] : sorted_edges) os << u << '-' << v << ',';
    os << ';';
    for (const auto& m : marks) {
        for (auto b : m.bits) os << (b > 0 ? '+' : '-');
        os << ',';
    }
    os << ';';
    for (int c : covariate_marks) os << c << ',';
    return os.str();
}

RootedConfig extract_config(const Graph& graph, const std::vector<Slate>& slates, int root, int radius,
                            const std::vector<int>& mark_coords,
                            const std::vector<int>* covariate_marks) {
    if (root < 0 || root >= graph.num_nodes())
        throw std::invalid_argument("extract_config: root out of range");
    if (radius < 0) throw std::invalid_argument("extract_config: negative radius");
    if (static_cast<int>(slates.size()) != graph.num_nodes())
        throw std::invalid_argument("extract_config: slates must cover all nodes");
    const int p = slates.empty() ? 0 : slates.front().dim();
    for (const auto& s : slates)
        if (s.dim() != p) throw std::invalid_argument("extract_config: slate dimension mismatch across nodes");
    for (int c : mark_coords)
        if (c < 0 || c >= p) throw std::invalid_argument("extract_config: mark coordinate out of range");

    std::vector<int> dist(static_cast<std::size_t>(graph.num_nodes()), -1);
    std::vector<int> order;
    std::deque<int> queue{root};
    dist[static_cast<std::size_t>(root)] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        order.push_back(u);
        if (dist[static_cast<std::size_t>(u)] == radius) continue;
        for (int w : graph.neighbors(u)) {
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(w);
            }
        }
    }

    std::vector<int> local_id(static_cast<std::size_t>(graph.num_nodes()), -1);
    for (std::size_t i = 0; i < order.size(); ++i) local_id[static_cast<std::size_t>(order[i])] = static_cast<int>(i);

    RootedConfig cfg;
    cfg.radius = radius;
    cfg.depth.reserve(order.size());
    cfg.marks.reserve(order.size());
    for (int node : order) {
        cfg.depth.push_back(dist[static_cast<std::size_t>(node)]);
        const Slate& full = slates[static_cast<std::size_t>(node)];
        if (mark_coords.empty()) {
            cfg.marks.push_back(full);
        } else {
            std::vector<std::int8_t> bits;
            bits.reserve(mark_coords.size());
            for (int c : mark_coords) bits.push_back(full.bits[static_cast<std::size_t>(c)]);
            cfg.marks.push_back(Slate(std::move(bits)));
        }
        if (covariate_marks) cfg.covariate_marks.push_back((*covariate_marks)[static_cast<std::size_t>(node)]);
    }
    for (int node : order) {
        for (int w : graph.neighbors(node)) {
            int lu = local_id[static_cast<std::size_t>(node)];
            int lw = local_id[static_cast<std::size_t>(w)];
            if (lw >= 0 && lu < lw) cfg.edges.emplace_back(lu, lw);
        }
    }
    std::sort(cfg.edges.begin(), cfg.edges.end());
    return cfg;
}

RootedConfig ball_restrict(const RootedConfig& config, int r) {
    if (r < 0 || r > config.radius) throw std::invalid_argument("ball_restrict: r exceeds config radius");
    const int n = config.size();
    std::vector<int> keep(static_cast<std::size_t>(n), -1);
    RootedConfig out;
    out.radius = r;
    int next = 0;
    for (int v = 0; v < n; ++v) {
        if (config.depth[static_cast<std::size_t>(v)] <= r) {
            keep[static_cast<std::size_t>(v)] = next++;
            out.depth.push_back(config.depth[static_cast<std::size_t>(v)]);
            out.marks.push_back(config.marks[static_cast<std::size_t>(v)]);
            if (config.has_covariate_marks())
                out.covariate_marks.push_back(config.covariate_marks[static_cast<std::size_t>(v)]);
        }
    }
    for (const auto& [u, v] : config.edges) {
        int lu = keep[static_cast<std::size_t>(u)];
        int lv = keep[static_cast<std::size_t>(v)];
        if (lu >= 0 && lv >= 0) out.edges.emplace_back(std::min(lu, lv), std::max(lu, lv));
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

RootedConfig mask_root_mark(const RootedConfig& config) {
    RootedConfig out = config;
    out.marks[0] = Slate::constant(config.slate_dim(), 1);
    if (out.has_covariate_marks()) out.covariate_marks[0] = 0;
    out.adjacency_cache_.clear();
    return out;
}

RootedConfig tree_projection(const RootedConfig& config) {
    RootedConfig out = config;
    out.edges.clear();
    out.adjacency_cache_.clear();
    const auto& adj = config.adjacency();
    for (int v = 1; v < config.size(); ++v) {
        for (int u : adj[static_cast<std::size_t>(v)]) {
            if (config.depth[static_cast<std::size_t>(u)] ==
                config.depth[static_cast<std::size_t>(v)] - 1) {
                out.edges.emplace_back(std::min(u, v), std::max(u, v));
                break;   // adjacency lists are sorted, so this is the lowest-id parent
            }
        }
    }
    std::sort(out.edges.begin(), out.edges.end());
    return out;
}

namespace {

struct BallView {
    int n = 0;
    std::vector<int> depth;
    std::vector<int> degree;
    std::vector<std::uint64_t> adj_bits;       // n <= 64
    std::vector<const Slate*> marks;
    std::vector<int> cov;
    // refinement signature per vertex: depth, degree, sorted neighbor (depth,degree) profile
    std::vector<std::vector<int>> signature;
};

BallView make_ball_view(const RootedConfig& ball, int max_ball_size) {
    BallView b;
    b.n = ball.size();
    if (b.n > max_ball_size)
        throw std::runtime_error("mark_discrepancy: ball size " + std::to_string(b.n) +
                                 " exceeds the exact-search cap of " + std::to_string(max_ball_size));
    b.depth = ball.depth;
    b.degree.assign(static_cast<std::size_t>(b.n), 0);
    b.adj_bits.assign(static_cast<std::size_t>(b.n), 0);
    for (const auto& [u, v] : ball.edges) {
        b.adj_bits[static_cast<std::size_t>(u)] |= (1ULL << v);
        b.adj_bits[static_cast<std::size_t>(v)] |= (1ULL << u);
        ++b.degree[static_cast<std::size_t>(u)];
        ++b.degree[static_cast<std::size_t>(v)];
    }
    b.marks.resize(static_cast<std::size_t>(b.n));
    for (int v = 0; v < b.n; ++v) b.marks[static_cast<std::size_t>(v)] = &ball.marks[static_cast<std::size_t>(v)];
    b.cov = ball.covariate_marks;

    b.signature.resize(static_cast<std::size_t>(b.n));
    const auto& adj = ball.adjacency();
    for (int v = 0; v < b.n; ++v) {
        std::vector<std::pair<int, int>> profile;
        for (int w : adj[static_cast<std::size_t>(v)])
            profile.emplace_back(b.depth[static_cast<std::size_t>(w)], b.degree[static_cast<std::size_t>(w)]);
        std::sort(profile.begin(), profile.end());
        auto& sig = b.signature[static_cast<std::size_t>(v)];
        sig.reserve(2 + 2 * profile.size());
        sig.push_back(b.depth[static_cast<std::size_t>(v)]);
        sig.push_back(b.degree[static_cast<std::size_t>(v)]);
        for (auto& [d, g] : profile) {
            sig.push_back(d);
            sig.push_back(g);
        }
    }
    return b;
}

bool marks_match(const BallView& a, int v, const BallView& b, int w, bool compare_cov) {
    if (*a.marks[static_cast<std::size_t>(v)] != *b.marks[static_cast<std::size_t>(w)]) return false;
    if (compare_cov && !a.cov.empty() && !b.cov.empty() &&
        a.cov[static_cast<std::size_t>(v)] != b.cov[static_cast<std::size_t>(w)])
        return false;
    return true;
}

// Exact backtracking over root-preserving isomorphisms, minimizing the
// number of mismatched non-root marks. Candidate sets are kept as bitmasks;
// mark-matching images are tried first so branch-and-bound prunes early, and
// candidates with identical adjacency rows and marks are interchangeable, so
// only one per orbit is expanded at each node.
struct Matcher {
    const BallView& a;
    const BallView& b;
    std::vector<std::uint64_t> compat;       // signature-compatible images
    std::vector<std::uint64_t> mark_eq;      // images with equal marks
    std::vector<int> b_mark_class;           // mark-equality class id per b-vertex
    std::vector<int> map_ab;
    std::uint64_t used_b = 0;
    int best = std::numeric_limits<int>::max();
    bool found = false;

    Matcher(const BallView& a_, const BallView& b_, bool cov) : a(a_), b(b_) {
        map_ab.assign(static_cast<std::size_t>(a.n), -1);
        compat.assign(static_cast<std::size_t>(a.n), 0);
        mark_eq.assign(static_cast<std::size_t>(a.n), 0);
        for (int v = 0; v < a.n; ++v)
            for (int w = 0; w < b.n; ++w) {
                if (a.signature[static_cast<std::size_t>(v)] != b.signature[static_cast<std::size_t>(w)])
                    continue;
                compat[static_cast<std::size_t>(v)] |= (1ULL << w);
                if (marks_match(a, v, b, w, cov)) mark_eq[static_cast<std::size_t>(v)] |= (1ULL << w);
            }
        b_mark_class.assign(static_cast<std::size_t>(b.n), -1);
        int next_class = 0;
        for (int w = 0; w < b.n; ++w) {
            if (b_mark_class[static_cast<std::size_t>(w)] >= 0) continue;
            b_mark_class[static_cast<std::size_t>(w)] = next_class;
            for (int w2 = w + 1; w2 < b.n; ++w2)
                if (b_mark_class[static_cast<std::size_t>(w2)] < 0 && marks_match(b, w, b, w2, cov))
                    b_mark_class[static_cast<std::size_t>(w2)] = next_class;
            ++next_class;
        }
    }

    void search(int v, int cost) {
        if (cost >= best) return;
        if (v == a.n) {
            best = cost;
            found = true;
            return;
        }
        std::uint64_t allowed = compat[static_cast<std::size_t>(v)] & ~used_b;
        for (int u = 0; u < v && allowed; ++u) {
            const std::uint64_t image_row = b.adj_bits[static_cast<std::size_t>(map_ab[static_cast<std::size_t>(u)])];
            if ((a.adj_bits[static_cast<std::size_t>(v)] >> u) & 1ULL) allowed &= image_row;
            else allowed &= ~image_row;
        }
        const std::uint64_t match_first[2] = {allowed & mark_eq[static_cast<std::size_t>(v)],
                                              allowed & ~mark_eq[static_cast<std::size_t>(v)]};
        // orbit pruning state: (adjacency row, mark class) pairs already expanded
        std::uint64_t tried_rows[16];
        int tried_cls[16];
        int tried_count = 0;
        for (int pass = 0; pass < 2; ++pass) {
            const int add = (pass == 0 || v == 0) ? 0 : 1;
            std::uint64_t mask = match_first[pass];
            while (mask) {
                const int w = __builtin_ctzll(mask);
                mask &= mask - 1;
                const std::uint64_t row = b.adj_bits[static_cast<std::size_t>(w)];
                const int cls = b_mark_class[static_cast<std::size_t>(w)];
                bool duplicate = false;
                for (int t = 0; t < tried_count; ++t)
                    if (tried_rows[t] == row && tried_cls[t] == cls) {
                        duplicate = true;
                        break;
                    }
                if (duplicate) continue;
                if (tried_count < 16) {
                    tried_rows[tried_count] = row;
                    tried_cls[tried_count] = cls;
                    ++tried_count;
                }
                map_ab[static_cast<std::size_t>(v)] = w;
                used_b |= (1ULL << w);
                search(v + 1, cost + add);
                used_b &= ~(1ULL << w);
                map_ab[static_cast<std::size_t>(v)] = -1;
            }
        }
    }
};

bool is_pure_star(const RootedConfig& ball) {
    if (static_cast<int>(ball.edges.size()) != ball.size() - 1) return false;
    for (const auto& [u, v] : ball.edges)
        if (u != 0 && v != 0) return false;
    return true;
}

// Orders leaves by (mark bits, covariate mark) without allocating tokens.
struct LeafMarkLess {
    const RootedConfig* ball;
    bool use_cov;
    bool operator()(int a, int b) const {
        const auto& ma = ball->marks[static_cast<std::size_t>(a)].bits;
        const auto& mb = ball->marks[static_cast<std::size_t>(b)].bits;
        if (ma != mb) return ma < mb;
        if (use_cov && ball->has_covariate_marks())
            return ball->covariate_marks[static_cast<std::size_t>(a)] <
                   ball->covariate_marks[static_cast<std::size_t>(b)];
        return false;
    }
    bool equal(int a, const RootedConfig& other, int b) const {
        if (ball->marks[static_cast<std::size_t>(a)].bits != other.marks[static_cast<std::size_t>(b)].bits)
            return false;
        if (use_cov && ball->has_covariate_marks() && other.has_covariate_marks())
            return ball->covariate_marks[static_cast<std::size_t>(a)] ==
                   other.covariate_marks[static_cast<std::size_t>(b)];
        return true;
    }
};

// (root-isomorphic?, minimum non-root mismatch count)
std::optional<int> min_mismatches(const RootedConfig& ball_a, const RootedConfig& ball_b,
                                  const DiscrepancyOptions& opts) {
    if (ball_a.size() != ball_b.size()) return std::nullopt;

    // Pure stars: every leaf permutation is an automorphism, so the optimal
    // matching is multiset overlap of leaf marks.
    if (is_pure_star(ball_a) && is_pure_star(ball_b)) {
        const int leaves = ball_a.size() - 1;
        std::vector<int> ia(static_cast<std::size_t>(leaves)), ib(static_cast<std::size_t>(leaves));
        for (int v = 1; v <= leaves; ++v) {
            ia[static_cast<std::size_t>(v - 1)] = v;
            ib[static_cast<std::size_t>(v - 1)] = v;
        }
        LeafMarkLess less_a{&ball_a, opts.compare_covariate_marks};
        LeafMarkLess less_b{&ball_b, opts.compare_covariate_marks};
        std::sort(ia.begin(), ia.end(), less_a);
        std::sort(ib.begin(), ib.end(), less_b);
        int common = 0;
        std::size_t i = 0, j = 0;
        while (i < ia.size() && j < ib.size()) {
            if (less_a.equal(ia[i], ball_b, ib[j])) {
                ++common;
                ++i;
                ++j;
            } else {
                // advance whichever leaf sorts lower across the two balls
                const auto& ma = ball_a.marks[static_cast<std::size_t>(ia[i])].bits;
                const auto& mb = ball_b.marks[static_cast<std::size_t>(ib[j])].bits;
                bool a_lower;
                if (ma != mb) {
                    a_lower = ma < mb;
                } else {
                    const int ca = opts.compare_covariate_marks && ball_a.has_covariate_marks()
                                       ? ball_a.covariate_marks[static_cast<std::size_t>(ia[i])]
                                       : 0;
                    const int cb = opts.compare_covariate_marks && ball_b.has_covariate_marks()
                                       ? ball_b.covariate_marks[static_cast<std::size_t>(ib[j])]
                                       : 0;
                    a_lower = ca < cb;
                }
                if (a_lower) ++i;
                else ++j;
            }
        }
        return leaves - common;
    }

    // cheap necessary conditions before building search structures
    if (ball_a.edges.size() != ball_b.edges.size()) return std::nullopt;
    {
        std::vector<int> da = ball_a.depth, db = ball_b.depth;
        std::sort(da.begin(), da.end());
        std::sort(db.begin(), db.end());
        if (da != db) return std::nullopt;
    }

    BallView a = make_ball_view(ball_a, opts.max_ball_size);
    BallView b = make_ball_view(ball_b, opts.max_ball_size);
    {
        auto sa = a.signature;
        auto sb = b.signature;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return std::nullopt;
        if (a.signature[0] != b.signature[0]) return std::nullopt;   // roots must correspond
    }

    Matcher m(a, b, opts.compare_covariate_marks);
    // root maps to root by definition
    if (!(m.compat[0] & 1ULL)) return std::nullopt;
    m.map_ab[0] = 0;
    m.used_b = 1ULL;
    m.search(1, 0);
    if (!m.found) return std::nullopt;
    return m.best;
}

} // namespace

double mark_discrepancy(const RootedConfig& g, const RootedConfig& g2, int r, const DiscrepancyOptions& opts) {
    if (r < 0) throw std::invalid_argument("mark_discrepancy: negative radius");
    if (r > g.radius || r > g2.radius)
        throw std::invalid_argument("mark_discrepancy: r exceeds a config radius");
    if (g.slate_dim() != g2.slate_dim())
        throw std::invalid_argument("mark_discrepancy: slate dimension mismatch");

    if (r == 0) {
        bool match = g.marks[0] == g2.marks[0];
        if (opts.compare_covariate_marks && g.has_covariate_marks() && g2.has_covariate_marks())
            match = match && g.covariate_marks[0] == g2.covariate_marks[0];
        return match ? 0.0 : 1.0;
    }

    // avoid the restriction copy when the config already has the target radius
    std::optional<RootedConfig> tmp_a, tmp_b;
    const RootedConfig* ball_a = &g;
    const RootedConfig* ball_b = &g2;
    if (g.radius != r) {
        tmp_a = ball_restrict(g, r);
        ball_a = &*tmp_a;
    }
    if (g2.radius != r) {
        tmp_b = ball_restrict(g2, r);
        ball_b = &*tmp_b;
    }

    auto mismatches = min_mismatches(*ball_a, *ball_b, opts);
    if (!mismatches.has_value()) return 1.0;
    const int denom = ball_a->size() - 1;
    if (denom == 0) return 0.0;   // isolated roots; nothing beyond the root to compare
    return static_cast<double>(*mismatches) / static_cast<double>(denom);
}

double config_distance(const RootedConfig& g, const RootedConfig& g2, int radius,
                       const DiscrepancyOptions& opts) {
    if (radius < 0) throw std::invalid_argument("config_distance: negative radius");
    if (radius > g.radius || radius > g2.radius)
        throw std::invalid_argument("config_distance: insufficient config radius");

    double total = 0.0;
    for (int r = 0; r <= radius; ++r) {
        const double weight = std::ldexp(1.0, -(r + 1));   // 2^{-(r+1)}
        total += weight * mark_discrepancy(g, g2, r, opts);
    }
    return total;
}

std::vector<std::vector<double>> pairwise_config_distances(const std::vector<RootedConfig>& configs,
                                                           int radius, const DiscrepancyOptions& opts) {
    const std::size_t n = configs.size();
    // group identical configs by canonical key; distances only depend on the key
    std::unordered_map<std::string, int> key_to_class;
    std::vector<int> cls(n);
    std::vector<std::size_t> representative;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string key = configs[i].canonical_key();
        auto [it, inserted] = key_to_class.emplace(key, static_cast<int>(representative.size()));
        if (inserted) representative.push_back(i);
        cls[i] = it->second;
    }

    const std::size_t k = representative.size();
    std::vector<std::vector<double>> class_dist(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            const double d =
                config_distance(configs[representative[a]], configs[representative[b]], radius, opts);
            class_dist[a][b] = d;
            class_dist[b][a] = d;
        }

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = class_dist[static_cast<std::size_t>(cls[i])][static_cast<std::size_t>(cls[j])];
            dist[i][j] = d;
            dist[j][i] = d;
        }
    return dist;
}

} // namespace netslate
