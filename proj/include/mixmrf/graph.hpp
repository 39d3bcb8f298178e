#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixmrf/common.hpp"
#include "mixmrf/random.hpp"

namespace mixmrf {

/// Undirected simple graph over nodes 0..p-1 with optional edge weights.
/// Edges are stored normalized (s < t); weights exist only on present edges.
class Graph {
public:
    Graph() = default;
    explicit Graph(int p) : p_(p) {
        if (p < 0) throw input_error("graph: node count must be nonnegative");
    }

    int p() const { return p_; }

    static std::pair<int, int> key(int s, int t) {
        return s < t ? std::make_pair(s, t) : std::make_pair(t, s);
    }

    void add_edge(int s, int t) {
        check_pair(s, t);
        edges_.insert(key(s, t));
    }

    void add_edge(int s, int t, double w) {
        add_edge(s, t);
        weights_[key(s, t)] = w;
    }

    void remove_edge(int s, int t) {
        edges_.erase(key(s, t));
        weights_.erase(key(s, t));
    }

    bool has_edge(int s, int t) const {
        if (s == t) return false;
        return edges_.count(key(s, t)) > 0;
    }

    /// Weight of an existing edge; unweighted edges count as 1.
    double weight(int s, int t) const {
        auto it = weights_.find(key(s, t));
        return it == weights_.end() ? 1.0 : it->second;
    }

    void set_weight(int s, int t, double w) {
        if (!has_edge(s, t)) throw input_error("graph: weight on missing edge");
        weights_[key(s, t)] = w;
    }

    bool weighted() const { return !weights_.empty(); }

    const std::set<std::pair<int, int>>& edges() const { return edges_; }

    std::size_t edge_count() const { return edges_.size(); }

private:
    void check_pair(int s, int t) const {
        if (s == t) throw input_error("graph: self-loops not allowed");
        if (s < 0 || t < 0 || s >= p_ || t >= p_) throw input_error("graph: node out of range");
    }

    int p_ = 0;
    std::set<std::pair<int, int>> edges_;
    std::map<std::pair<int, int>, double> weights_;
};

/// Edge-recovery confusion counts of an estimated graph against the truth.
struct RecoveryMetrics {
    long true_positives = 0;
    long false_positives = 0;
    long false_negatives = 0;
    double sensitivity = 1.0;  // TP/(TP+FN); vacuously 1 when the truth is empty
    std::optional<double> precision;  // undefined iff no edges were estimated
};

inline Graph erdos_renyi(int p, double p_edge, std::uint64_t seed) {
    if (p < 1) throw input_error("erdos_renyi: p must be >= 1");
    if (p_edge < 0.0 || p_edge > 1.0) throw input_error("erdos_renyi: p_edge must lie in [0,1]");
    Graph g(p);
    Rng rng(seed);
    for (int s = 0; s < p; ++s)
        for (int t = s + 1; t < p; ++t)
            if (rng.bernoulli(p_edge)) g.add_edge(s, t);
    return g;
}

inline std::vector<int> neighbors(const Graph& g, int s) {
    if (s < 0 || s >= g.p()) throw input_error("neighbors: node out of range");
    std::vector<int> out;
    for (int t = 0; t < g.p(); ++t)
        if (t != s && g.has_edge(s, t)) out.push_back(t);
    return out;
}

namespace detail {

inline std::vector<std::uint64_t> adjacency_masks(const Graph& g) {
    if (g.p() > 64) throw input_error("clique routines support at most 64 nodes");
    std::vector<std::uint64_t> adj(g.p(), 0);
    for (const auto& [s, t] : g.edges()) {
        adj[s] |= (1ULL << t);
        adj[t] |= (1ULL << s);
    }
    return adj;
}

inline void bron_kerbosch(std::uint64_t R, std::uint64_t P, std::uint64_t X,
                          const std::vector<std::uint64_t>& adj,
                          std::vector<std::uint64_t>& out) {
    if (P == 0 && X == 0) {
        out.push_back(R);
        return;
    }
    // pivot with the most neighbors in P
    std::uint64_t PX = P | X;
    int pivot = -1, best = -1;
    for (std::uint64_t m = PX; m;) {
        int v = std::countr_zero(m);
        m &= m - 1;
        int cnt = std::popcount(P & adj[v]);
        if (cnt > best) { best = cnt; pivot = v; }
    }
    std::uint64_t cand = P & ~adj[pivot];
    for (std::uint64_t m = cand; m;) {
        int v = std::countr_zero(m);
        m &= m - 1;
        std::uint64_t bit = 1ULL << v;
        bron_kerbosch(R | bit, P & adj[v], X & adj[v], adj, out);
        P &= ~bit;
        X |= bit;
    }
}

inline std::vector<int> mask_to_set(std::uint64_t m) {
    std::vector<int> s;
    while (m) {
        s.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return s;
}

}  // namespace detail

/// All maximal cliques (Bron-Kerbosch with pivoting), each sorted, list sorted
/// by (size, lexicographic) for deterministic output.
inline std::vector<std::vector<int>> maximal_cliques(const Graph& g) {
    auto adj = detail::adjacency_masks(g);
    std::vector<std::uint64_t> masks;
    std::uint64_t all = g.p() == 64 ? ~0ULL : ((1ULL << g.p()) - 1);
    detail::bron_kerbosch(0, all, 0, adj, masks);
    std::vector<std::vector<int>> out;
    out.reserve(masks.size());
    for (auto m : masks) out.push_back(detail::mask_to_set(m));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

/// True iff the graph has no chordless cycle of length >= 4 (perfect
/// elimination ordering exists). Maximum cardinality search + PEO check.
inline bool is_triangulated(const Graph& g) {
    const int p = g.p();
    if (p <= 3) return true;
    auto adj = detail::adjacency_masks(g);
    std::vector<int> order(p, -1), pos(p, -1);
    std::vector<int> score(p, 0);
    std::vector<bool> done(p, false);
    for (int i = 0; i < p; ++i) {
        int v = -1, best = -1;
        for (int u = 0; u < p; ++u)
            if (!done[u] && score[u] > best) { best = score[u]; v = u; }
        done[v] = true;
        order[i] = v;
        pos[v] = i;
        for (std::uint64_t m = adj[v]; m;) {
            int u = std::countr_zero(m);
            m &= m - 1;
            if (!done[u]) ++score[u];
        }
    }
    // elimination order = reverse of pick order; check each vertex's
    // later neighbors via its first later neighbor
    for (int i = p - 1; i >= 0; --i) {
        int v = order[i];
        std::uint64_t later = 0;
        int first = -1, first_pos = std::numeric_limits<int>::max();
        for (std::uint64_t m = adj[v]; m;) {
            int u = std::countr_zero(m);
            m &= m - 1;
            if (pos[u] < pos[v]) {
                later |= (1ULL << u);
                if (pos[u] < first_pos) { first_pos = pos[u]; first = u; }
            }
        }
        if (first < 0) continue;
        std::uint64_t rest = later & ~(1ULL << first);
        if ((rest & ~adj[first]) != 0) return false;
    }
    return true;
}

/// Per-node centrality. Weighted graphs use distance 1/|w| on shortest paths;
/// betweenness counts all shortest paths (Brandes) and is reported as the
/// fraction of pairs whose shortest paths pass through the node.
struct CentralityReport {
    Eigen::VectorXd degree, closeness, betweenness;
    Eigen::VectorXd degree_z, closeness_z, betweenness_z;
    bool disconnected = false;  // closeness computed over reachable sets only
};

namespace detail {

inline Eigen::VectorXd zscores(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    if (n < 2) return Eigen::VectorXd::Zero(n);
    double mean = x.mean();
    double ss = (x.array() - mean).square().sum();
    double sd = std::sqrt(ss / (n - 1));
    if (sd < 1e-300) return Eigen::VectorXd::Zero(n);
    return (x.array() - mean) / sd;
}

}  // namespace detail

inline CentralityReport centrality(const Graph& g, bool absolute_weights = true) {
    const int p = g.p();
    CentralityReport rep;
    rep.degree = Eigen::VectorXd::Zero(p);
    rep.closeness = Eigen::VectorXd::Zero(p);
    rep.betweenness = Eigen::VectorXd::Zero(p);

    const bool weighted = g.weighted();
    for (const auto& [s, t] : g.edges()) {
        double w = weighted ? g.weight(s, t) : 1.0;
        double dval = absolute_weights ? std::abs(w) : w;
        if (!weighted) dval = 1.0;
        rep.degree[s] += dval;
        rep.degree[t] += dval;
    }

    // adjacency lists with path distances (1/|w| for weighted graphs)
    std::vector<std::vector<std::pair<int, double>>> adj(p);
    for (const auto& [s, t] : g.edges()) {
        double w = weighted ? std::abs(g.weight(s, t)) : 1.0;
        if (weighted && w <= 0.0) continue;  // zero-weight edge carries no path
        double dist = weighted ? 1.0 / w : 1.0;
        adj[s].push_back({t, dist});
        adj[t].push_back({s, dist});
    }

    Eigen::VectorXd between_raw = Eigen::VectorXd::Zero(p);
    const double inf = std::numeric_limits<double>::infinity();
    for (int src = 0; src < p; ++src) {
        // Dijkstra with all-shortest-path counting
        std::vector<double> dist(p, inf);
        std::vector<double> sigma(p, 0.0);
        std::vector<std::vector<int>> pred(p);
        std::vector<int> settled_order;
        dist[src] = 0.0;
        sigma[src] = 1.0;
        using QItem = std::pair<double, int>;
        std::priority_queue<QItem, std::vector<QItem>, std::greater<>> q;
        q.push({0.0, src});
        std::vector<bool> settled(p, false);
        while (!q.empty()) {
            auto [dv, v] = q.top();
            q.pop();
            if (settled[v]) continue;
            settled[v] = true;
            settled_order.push_back(v);
            for (auto [u, w] : adj[v]) {
                double alt = dv + w;
                if (alt < dist[u] - 1e-12) {
                    dist[u] = alt;
                    sigma[u] = sigma[v];
                    pred[u] = {v};
                    q.push({alt, u});
                } else if (std::abs(alt - dist[u]) <= 1e-12) {
                    sigma[u] += sigma[v];
                    pred[u].push_back(v);
                }
            }
        }
        double total = 0.0;
        int reachable = 0;
        for (int t = 0; t < p; ++t) {
            if (t != src && dist[t] < inf) {
                total += dist[t];
                ++reachable;
            }
        }
        if (reachable < p - 1) rep.disconnected = true;
        rep.closeness[src] = total > 0.0 ? 1.0 / total : 0.0;

        // Brandes dependency accumulation
        std::vector<double> delta(p, 0.0);
        for (auto it = settled_order.rbegin(); it != settled_order.rend(); ++it) {
            int w = *it;
            for (int v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != src) between_raw[w] += delta[w];
        }
    }
    // each unordered pair counted twice; normalize to fraction of pairs
    double pairs = static_cast<double>(p - 1) * (p - 2) / 2.0;
    if (pairs > 0) rep.betweenness = between_raw / (2.0 * pairs);

    rep.degree_z = detail::zscores(rep.degree);
    rep.closeness_z = detail::zscores(rep.closeness);
    rep.betweenness_z = detail::zscores(rep.betweenness);
    return rep;
}

inline RecoveryMetrics compare_graphs(const Graph& estimated, const Graph& truth) {
    if (estimated.p() != truth.p()) throw input_error("compare_graphs: node count mismatch");
    RecoveryMetrics m;
    for (const auto& e : estimated.edges())
        (truth.edges().count(e) ? m.true_positives : m.false_positives)++;
    for (const auto& e : truth.edges())
        if (!estimated.edges().count(e)) ++m.false_negatives;
    if (m.true_positives + m.false_negatives > 0)
        m.sensitivity = static_cast<double>(m.true_positives) /
                        static_cast<double>(m.true_positives + m.false_negatives);
    if (m.true_positives + m.false_positives > 0)
        m.precision = static_cast<double>(m.true_positives) /
                      static_cast<double>(m.true_positives + m.false_positives);
    return m;
}

// ---------------------------------------------------------------------------
// serialization: JSON {p, edges:[[s,t,w],...]} and CSV edge list (0-based)

inline nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json j;
    j["p"] = g.p();
    auto edges = nlohmann::json::array();
    for (const auto& [s, t] : g.edges()) edges.push_back({s, t, g.weight(s, t)});
    j["edges"] = edges;
    return j;
}

inline Graph graph_from_json(const nlohmann::json& j) {
    Graph g(j.at("p").get<int>());
    for (const auto& e : j.at("edges")) {
        int s = e.at(0).get<int>();
        int t = e.at(1).get<int>();
        if (e.size() >= 3)
            g.add_edge(s, t, e.at(2).get<double>());
        else
            g.add_edge(s, t);
    }
    return g;
}

inline std::string graph_to_csv(const Graph& g) {
    std::ostringstream os;
    if (g.weighted()) {
        os << "s,t,weight\n";
        for (const auto& [s, t] : g.edges())
            os << s << "," << t << "," << format_double(g.weight(s, t)) << "\n";
    } else {
        os << "s,t\n";
        for (const auto& [s, t] : g.edges()) os << s << "," << t << "\n";
    }
    return os.str();
}

/// Reads an edge list CSV ("s,t" or "s,t,weight", header optional). Node count
/// is max index + 1 unless a larger p is given.
inline Graph graph_from_csv(std::istream& in, int p_hint = 0) {
    std::vector<std::tuple<int, int, double, bool>> rows;
    std::string line;
    int maxnode = -1;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::string a, b, c;
        ls >> a >> b;
        bool has_w = static_cast<bool>(ls >> c);
        if (first) {
            first = false;
            if (!a.empty() && !std::isdigit(static_cast<unsigned char>(a[0])) && a[0] != '-') continue;  // header
        }
        int s = 0, t = 0;
        double w = 1.0;
        try {
            s = std::stoi(a);
            t = std::stoi(b);
            if (has_w) w = std::stod(c);
        } catch (const std::exception&) {
            throw input_error("graph csv: malformed line '" + line + "'");
        }
        rows.push_back({s, t, w, has_w});
        maxnode = std::max({maxnode, s, t});
    }
    Graph g(std::max(p_hint, maxnode + 1));
    for (auto& [s, t, w, has_w] : rows) {
        if (has_w)
            g.add_edge(s, t, w);
        else
            g.add_edge(s, t);
    }
    return g;
}

}  // namespace mixmrf
