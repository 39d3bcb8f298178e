#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mixmrf/graph.hpp"
#include "mixmrf/random.hpp"

namespace mixmrf {

enum class Family { gaussian, bernoulli, categorical, poisson, exponential };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::bernoulli: return "bernoulli";
        case Family::categorical: return "categorical";
        case Family::poisson: return "poisson";
        case Family::exponential: return "exponential";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    if (s == "gaussian") return Family::gaussian;
    if (s == "bernoulli") return Family::bernoulli;
    if (s == "categorical") return Family::categorical;
    if (s == "poisson") return Family::poisson;
    if (s == "exponential") return Family::exponential;
    throw input_error("unknown family '" + s + "'");
}

/// One node's conditional exponential family. The family fixes the sufficient
/// statistic and base measure: Gaussian phi=x/sigma, C=-x^2/(2 sigma^2);
/// Bernoulli phi=x in {0,1}, C=0; Categorical phi=level indicators, C=0;
/// Poisson phi=x, C=-log(x!); Exponential phi=x on x>=0, C=0.
struct NodeSpec {
    Family family = Family::gaussian;
    double sigma = 1.0;  // gaussian only
    int m = 2;           // categorical only

    static NodeSpec Gaussian(double sigma = 1.0) {
        if (!(sigma > 0.0)) throw input_error("gaussian sigma must be > 0");
        return {Family::gaussian, sigma, 2};
    }
    static NodeSpec Bernoulli() { return {Family::bernoulli, 1.0, 2}; }
    static NodeSpec Categorical(int m) {
        if (m < 2) throw input_error("categorical m must be >= 2");
        return {Family::categorical, 1.0, m};
    }
    static NodeSpec Poisson() { return {Family::poisson, 1.0, 2}; }
    static NodeSpec Exponential() { return {Family::exponential, 1.0, 2}; }

    bool discrete() const { return family == Family::bernoulli || family == Family::categorical; }

    /// Dimension of the statistic as it enters pairwise blocks (full indicator
    /// for categorical nodes, scalar otherwise).
    int stat_dim() const { return family == Family::categorical ? m : 1; }

    /// Dimension of the threshold vector (reference level carries none).
    int threshold_dim() const { return family == Family::categorical ? m - 1 : 1; }

    bool in_support(double x) const {
        switch (family) {
            case Family::gaussian: return std::isfinite(x);
            case Family::bernoulli: return x == 0.0 || x == 1.0;
            case Family::categorical: return x == std::floor(x) && x >= 0.0 && x < m;
            case Family::poisson: return x == std::floor(x) && x >= 0.0;
            case Family::exponential: return x >= 0.0 && std::isfinite(x);
        }
        return false;
    }

    /// Sufficient statistic as a vector (size stat_dim()).
    Eigen::VectorXd phi(double x) const {
        if (family == Family::categorical) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
            v[static_cast<int>(x)] = 1.0;
            return v;
        }
        Eigen::VectorXd v(1);
        v[0] = family == Family::gaussian ? x / sigma : x;
        return v;
    }

    double base_measure(double x) const {
        switch (family) {
            case Family::gaussian: return -x * x / (2.0 * sigma * sigma);
            case Family::poisson: return -std::lgamma(x + 1.0);
            default: return 0.0;
        }
    }
};

/// Natural parameter of a node conditional: scalar, or one value per level for
/// categorical nodes. Exponential nodes require value < 0.
struct NaturalParam {
    Family family;
    Eigen::VectorXd value;

    double scalar() const { return value[0]; }
};

/// Pairwise mixed exponential-family MRF. Thresholds are length m-1 for
/// categorical nodes (last level is the reference, threshold 0) and scalar
/// otherwise; pairwise blocks are stored once per edge at full statistic
/// dimension, with block(t,s) the transpose of block(s,t).
struct MixedModel {
    std::vector<NodeSpec> specs;
    std::vector<Eigen::VectorXd> thresholds;
    Graph graph;
    std::map<std::pair<int, int>, Eigen::MatrixXd> pairwise;  // key s < t
    std::vector<std::string> warnings;  // joint-normalizability caveats

    int p() const { return static_cast<int>(specs.size()); }

    const Eigen::MatrixXd& stored_block(int s, int t) const {
        auto it = pairwise.find(Graph::key(s, t));
        if (it == pairwise.end()) throw input_error("model: no pairwise block for edge");
        return it->second;
    }

    /// Block oriented as (s-dim) x (t-dim).
    Eigen::MatrixXd block(int s, int t) const {
        const Eigen::MatrixXd& b = stored_block(s, t);
        return s < t ? b : Eigen::MatrixXd(b.transpose());
    }

    double threshold_at(int s, int level) const {
        const NodeSpec& sp = specs[s];
        if (sp.family != Family::categorical) return thresholds[s][0];
        return level < sp.m - 1 ? thresholds[s][level] : 0.0;
    }

    /// Threshold contribution to the energy at value x of node s.
    double threshold_energy(int s, double x) const {
        if (specs[s].family == Family::categorical) return threshold_at(s, static_cast<int>(x));
        return thresholds[s][0] * specs[s].phi(x)[0];
    }
};

namespace detail {

inline void check_block_shape(const MixedModel& m, int s, int t, const Eigen::MatrixXd& b) {
    if (b.rows() != m.specs[s].stat_dim() || b.cols() != m.specs[t].stat_dim())
        throw input_error("model: pairwise block shape mismatch on edge (" + std::to_string(s) +
                          "," + std::to_string(t) + ")");
}

}  // namespace detail

/// Structural validation plus the eager normalizability check: for every
/// Exponential node, the natural parameter must stay below -1e-6 under the
/// most adverse neighbor configuration (unbounded-statistic neighbors with a
/// coupling of the wrong sign make that impossible and are rejected).
/// Double-infinite pairings (Gaussian-Poisson, positive Poisson-Poisson)
/// only emit warnings, mirroring the unresolved joint-normalizability caveat.
inline void validate_model(MixedModel& m) {
    const int p = m.p();
    if (static_cast<int>(m.thresholds.size()) != p) throw input_error("model: thresholds size mismatch");
    if (m.graph.p() != p) throw input_error("model: graph size mismatch");
    for (int s = 0; s < p; ++s) {
        if (m.thresholds[s].size() != m.specs[s].threshold_dim())
            throw input_error("model: threshold dimension mismatch at node " + std::to_string(s));
        if (m.specs[s].family == Family::gaussian && !(m.specs[s].sigma > 0.0))
            throw input_error("model: gaussian sigma must be > 0");
        if (m.specs[s].family == Family::categorical && m.specs[s].m < 2)
            throw input_error("model: categorical m must be >= 2");
    }
    for (const auto& [e, b] : m.pairwise) {
        if (!m.graph.has_edge(e.first, e.second))
            throw input_error("model: pairwise block on missing edge");
        detail::check_block_shape(m, e.first, e.second, b);
    }
    for (const auto& e : m.graph.edges())
        if (!m.pairwise.count(e)) throw input_error("model: edge without pairwise block");

    m.warnings.clear();
    for (int s = 0; s < p; ++s) {
        if (m.specs[s].family != Family::exponential) continue;
        double sup = m.thresholds[s][0];
        for (int t : neighbors(m.graph, s)) {
            Eigen::MatrixXd b = m.block(s, t);  // 1 x dim(t)
            switch (m.specs[t].family) {
                case Family::bernoulli:
                    sup += std::max(0.0, b(0, 0));
                    break;
                case Family::categorical:
                    sup += b.row(0).maxCoeff();
                    break;
                case Family::poisson:
                case Family::exponential:
                    if (b(0, 0) > 0.0)
                        throw input_error("model: exponential node " + std::to_string(s) +
                                          " has positive coupling to an unbounded statistic");
                    break;
                case Family::gaussian:
                    if (b(0, 0) != 0.0)
                        throw input_error("model: exponential node " + std::to_string(s) +
                                          " coupled to a gaussian node cannot stay normalizable");
                    break;
            }
        }
        if (sup >= -1e-6)
            throw input_error("model: exponential node " + std::to_string(s) +
                              " can reach natural parameter " + std::to_string(sup) + " >= -1e-6");
    }
    for (const auto& e : m.graph.edges()) {
        Family a = m.specs[e.first].family, b = m.specs[e.second].family;
        const Eigen::MatrixXd& blk = m.pairwise.at(e);
        bool nonzero = blk.cwiseAbs().maxCoeff() > 0.0;
        if (!nonzero) continue;
        if ((a == Family::gaussian && b == Family::poisson) ||
            (a == Family::poisson && b == Family::gaussian))
            m.warnings.push_back("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                 "): gaussian-poisson pairs have no normalizable joint in general");
        if (a == Family::poisson && b == Family::poisson && blk(0, 0) > 0.0)
            m.warnings.push_back("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                 "): positive poisson-poisson coupling is not jointly normalizable");
    }
}

/// Natural parameter of the conditional of node s given the other coordinates:
/// threshold plus the sum of pairwise blocks applied to neighbor statistics.
/// `x` must be a full assignment; entry s is ignored.
inline NaturalParam node_conditional(const MixedModel& m, int s, const Eigen::VectorXd& x) {
    const NodeSpec& sp = m.specs[s];
    Eigen::VectorXd eta;
    if (sp.family == Family::categorical) {
        eta = Eigen::VectorXd::Zero(sp.m);
        for (int l = 0; l < sp.m - 1; ++l) eta[l] = m.thresholds[s][l];
    } else {
        eta = m.thresholds[s];
    }
    for (int t : neighbors(m.graph, s)) {
        if (!m.specs[t].in_support(x[t]))
            throw input_error("node_conditional: value of node " + std::to_string(t) + " outside support");
        eta += m.block(s, t) * m.specs[t].phi(x[t]);
    }
    if (sp.family == Family::exponential && eta[0] >= 0.0)
        throw numerical_error("node_conditional: exponential node " + std::to_string(s) +
                              " reached nonnegative natural parameter " + std::to_string(eta[0]));
    return NaturalParam{sp.family, eta};
}

/// Log density up to the normalizing constant: sum of threshold terms,
/// one pairwise term per edge, and base measures.
inline double log_unnormalized_density(const MixedModel& m, const Eigen::VectorXd& x) {
    const int p = m.p();
    if (x.size() != p) throw input_error("log_unnormalized_density: assignment size mismatch");
    double e = 0.0;
    for (int s = 0; s < p; ++s) {
        if (!m.specs[s].in_support(x[s]))
            throw input_error("log_unnormalized_density: node " + std::to_string(s) + " outside support");
        e += m.threshold_energy(s, x[s]) + m.specs[s].base_measure(x[s]);
    }
    for (const auto& [st, b] : m.pairwise) {
        auto [s, t] = st;
        e += m.specs[s].phi(x[s]).transpose() * b * m.specs[t].phi(x[t]);
    }
    return e;
}

/// Scales every nonzero pairwise entry by an independent U(0.3, 1) draw and
/// negates it. Zero entries (and hence the block support) stay untouched.
inline MixedModel apply_edge_noise(const MixedModel& m, std::uint64_t seed) {
    MixedModel out = m;
    Rng rng(mix_seed(seed, 0xED6E));
    for (auto& [e, b] : out.pairwise) {
        for (int i = 0; i < b.rows(); ++i)
            for (int j = 0; j < b.cols(); ++j)
                if (b(i, j) != 0.0) b(i, j) *= -rng.uniform(0.3, 1.0);
    }
    return out;
}

enum class SimKindType { categorical, binary_gaussian, binary_poisson, binary_exponential };

struct SimKind {
    SimKindType type = SimKindType::categorical;
    int m = 2;  // categorical level count

    std::string name() const {
        switch (type) {
            case SimKindType::categorical: return "categorical-m" + std::to_string(m);
            case SimKindType::binary_gaussian: return "binary-gaussian";
            case SimKindType::binary_poisson: return "binary-poisson";
            case SimKindType::binary_exponential: return "binary-exponential";
        }
        return "?";
    }

    static SimKind parse(const std::string& s) {
        if (s.rfind("categorical-m", 0) == 0) {
            int m = std::stoi(s.substr(13));
            return {SimKindType::categorical, m};
        }
        if (s == "binary-gaussian") return {SimKindType::binary_gaussian, 2};
        if (s == "binary-poisson") return {SimKindType::binary_poisson, 2};
        if (s == "binary-exponential") return {SimKindType::binary_exponential, 2};
        throw input_error("unknown simulation kind '" + s + "'");
    }
};

// declared in sampler.hpp; needed for the PD resampling loop below
bool check_gaussian_subgraph_pd(const MixedModel& m);

/// Simulation model of the benchmark protocol: Potts identity blocks between
/// categorical pairs, unit couplings otherwise, thresholds 0 (-0.1 for Poisson
/// and Exponential nodes), then edge noise (U(0.3,1) scaling and sign flip).
/// In mixed kinds the first half of the nodes is binary. Binary-Gaussian
/// models redraw the noise until the Gaussian conditional precision matrix is
/// positive definite; past `retry_cap` attempts this throws.
inline MixedModel build_simulation_model(SimKind kind, const Graph& graph, std::uint64_t seed,
                                         int retry_cap = 1000) {
    const int p = graph.p();
    MixedModel base;
    base.graph = graph;
    base.specs.resize(p);
    const int n_binary = p / 2;
    for (int s = 0; s < p; ++s) {
        switch (kind.type) {
            case SimKindType::categorical: base.specs[s] = NodeSpec::Categorical(kind.m); break;
            case SimKindType::binary_gaussian:
                base.specs[s] = s < n_binary ? NodeSpec::Bernoulli() : NodeSpec::Gaussian(1.0);
                break;
            case SimKindType::binary_poisson:
                base.specs[s] = s < n_binary ? NodeSpec::Bernoulli() : NodeSpec::Poisson();
                break;
            case SimKindType::binary_exponential:
                base.specs[s] = s < n_binary ? NodeSpec::Bernoulli() : NodeSpec::Exponential();
                break;
        }
    }
    base.thresholds.resize(p);
    for (int s = 0; s < p; ++s) {
        base.thresholds[s] = Eigen::VectorXd::Zero(base.specs[s].threshold_dim());
        if (base.specs[s].family == Family::poisson || base.specs[s].family == Family::exponential)
            base.thresholds[s][0] = -0.1;
    }
    for (const auto& [s, t] : graph.edges()) {
        int rs = base.specs[s].stat_dim(), ct = base.specs[t].stat_dim();
        base.pairwise[{s, t}] = (rs == ct && rs > 1)
                                    ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(rs, ct))
                                    : Eigen::MatrixXd(Eigen::MatrixXd::Ones(rs, ct));
    }

    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        MixedModel noisy = apply_edge_noise(base, mix_seed(seed, 0x51, attempt));
        if (kind.type == SimKindType::binary_gaussian && !check_gaussian_subgraph_pd(noisy)) continue;
        validate_model(noisy);
        return noisy;
    }
    throw numerical_error("build_simulation_model: no positive definite gaussian subgraph within " +
                          std::to_string(retry_cap) + " noise draws");
}

// ---------------------------------------------------------------------------
// JSON: {nodes:[{family,...}], thresholds:[...], edges:[{s,t,block}]}

inline nlohmann::json model_to_json(const MixedModel& m) {
    nlohmann::json j;
    j["p"] = m.p();
    auto nodes = nlohmann::json::array();
    for (const auto& sp : m.specs) {
        nlohmann::json n;
        n["family"] = family_name(sp.family);
        if (sp.family == Family::gaussian) n["sigma"] = sp.sigma;
        if (sp.family == Family::categorical) n["m"] = sp.m;
        nodes.push_back(n);
    }
    j["nodes"] = nodes;
    auto th = nlohmann::json::array();
    for (int s = 0; s < m.p(); ++s) {
        if (m.specs[s].family == Family::categorical) {
            auto v = nlohmann::json::array();
            for (int l = 0; l < m.thresholds[s].size(); ++l) v.push_back(m.thresholds[s][l]);
            th.push_back(v);
        } else {
            th.push_back(m.thresholds[s][0]);
        }
    }
    j["thresholds"] = th;
    auto edges = nlohmann::json::array();
    for (const auto& [e, b] : m.pairwise) {
        nlohmann::json je;
        je["s"] = e.first;
        je["t"] = e.second;
        if (b.rows() == 1 && b.cols() == 1) {
            je["block"] = b(0, 0);
        } else {
            auto rows = nlohmann::json::array();
            for (int i = 0; i < b.rows(); ++i) {
                auto row = nlohmann::json::array();
                for (int k = 0; k < b.cols(); ++k) row.push_back(b(i, k));
                rows.push_back(row);
            }
            je["block"] = rows;
        }
        edges.push_back(je);
    }
    j["edges"] = edges;
    return j;
}

inline MixedModel model_from_json(const nlohmann::json& j) {
    MixedModel m;
    const int p = j.at("p").get<int>();
    m.graph = Graph(p);
    for (const auto& n : j.at("nodes")) {
        Family f = family_from_name(n.at("family").get<std::string>());
        switch (f) {
            case Family::gaussian: m.specs.push_back(NodeSpec::Gaussian(n.value("sigma", 1.0))); break;
            case Family::bernoulli: m.specs.push_back(NodeSpec::Bernoulli()); break;
            case Family::categorical: m.specs.push_back(NodeSpec::Categorical(n.at("m").get<int>())); break;
            case Family::poisson: m.specs.push_back(NodeSpec::Poisson()); break;
            case Family::exponential: m.specs.push_back(NodeSpec::Exponential()); break;
        }
    }
    if (static_cast<int>(m.specs.size()) != p) throw input_error("model json: nodes size mismatch");
    const auto& th = j.at("thresholds");
    if (static_cast<int>(th.size()) != p) throw input_error("model json: thresholds size mismatch");
    for (int s = 0; s < p; ++s) {
        if (th.at(s).is_array()) {
            Eigen::VectorXd v(th.at(s).size());
            for (int l = 0; l < v.size(); ++l) v[l] = th.at(s).at(l).get<double>();
            m.thresholds.push_back(v);
        } else {
            Eigen::VectorXd v(1);
            v[0] = th.at(s).get<double>();
            m.thresholds.push_back(v);
        }
    }
    for (const auto& je : j.at("edges")) {
        int s = je.at("s").get<int>();
        int t = je.at("t").get<int>();
        if (s > t) std::swap(s, t);
        m.graph.add_edge(s, t);
        const auto& jb = je.at("block");
        Eigen::MatrixXd b;
        if (jb.is_array()) {
            int rows = static_cast<int>(jb.size());
            int cols = static_cast<int>(jb.at(0).size());
            b.resize(rows, cols);
            for (int i = 0; i < rows; ++i)
                for (int k = 0; k < cols; ++k) b(i, k) = jb.at(i).at(k).get<double>();
        } else {
            b.resize(1, 1);
            b(0, 0) = jb.get<double>();
        }
        m.pairwise[{s, t}] = b;
    }
    validate_model(m);
    return m;
}

}  // namespace mixmrf
