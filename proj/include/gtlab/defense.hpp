#pragma once

// Backdoor defenses. Model inspection reverse-engineers minimal triggers per
// class and compares the per-class perturbation-cost distributions with a
// one-tailed KS test; input inspection subsamples incoming graphs and takes
// a majority vote over the predictions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gtlab/attack.hpp"
#include "gtlab/common.hpp"
#include "gtlab/gnn.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/mixing.hpp"
#include "gtlab/optim.hpp"
#include "gtlab/rng.hpp"
#include "gtlab/stats.hpp"
#include "gtlab/tensor.hpp"

namespace gtlab {

// --- Perturbation cost ------------------------------------------------------------

// L1 distance between a candidate trigger and the subgraph it replaces, over
// the concatenation of each node's within-site adjacency row and feature row.
// Each node pair shows up in both endpoint rows, so an edge flip costs 2.
inline double perturbation_cost(const Graph& g, const std::vector<int>& site,
                                const SubgraphPatch& patch) {
    check_site(g, site);
    patch.validate();
    require(patch.n == static_cast<int>(site.size()), "perturbation_cost: site size mismatch");
    require(patch.feat_dim == g.feat_dim, "perturbation_cost: feature dimension mismatch");
    double c = 0.0;
    for (int a = 0; a < patch.n; ++a) {
        for (int b = 0; b < patch.n; ++b) {
            if (a == b) continue;
            double host = g.has_edge(site[a], site[b]) ? 1.0 : 0.0;
            c += std::fabs(
                static_cast<double>(patch.adj[static_cast<std::size_t>(a) * patch.n + b]) -
                host);
        }
        for (int k = 0; k < g.feat_dim; ++k)
            c += std::fabs(patch.features[static_cast<std::size_t>(a) * patch.feat_dim + k] -
                           g.feature(site[a], k));
    }
    return c;
}

// --- Reverse-trigger search -------------------------------------------------------

// Trigger families for the reverse search, from least to most adaptive: one
// topology and feature set shared by every graph, shared topology with
// per-graph features, and per-graph topology and features.
enum class TriggerDef { UniversalAll, UniversalTopology, Adaptive };

struct MpcConfig {
    TriggerDef def = TriggerDef::Adaptive;
    int n_trigger = 3;
    int samples_per_class = 100;
    int budget = 60;             // optimization steps per search
    double lr = 0.1;
    double hinge_margin = 0.05;  // target logit must clear the runner-up by this
    double asr_threshold = 0.8;  // flip rate a universal trigger must reach
    double alpha = 0.05;         // KS significance level

    void validate() const {
        require(n_trigger > 0, "MpcConfig: n_trigger must be positive");
        require(samples_per_class > 0, "MpcConfig: samples_per_class must be positive");
        require(budget >= 0, "MpcConfig: negative budget");
        require(lr > 0.0, "MpcConfig: lr must be positive");
        require(hinge_margin >= 0.0, "MpcConfig: negative hinge margin");
        require(asr_threshold >= 0.0 && asr_threshold <= 1.0,
                "MpcConfig: asr_threshold outside [0, 1]");
        require(alpha > 0.0 && alpha < 1.0, "MpcConfig: alpha outside (0, 1)");
    }
};

namespace detail {

inline double inf() { return std::numeric_limits<double>::infinity(); }

// Hinge on the target-class margin: positive while the best other logit
// beats the target by more than -margin. The runner-up index is frozen per
// evaluation, which is the usual subgradient choice for a max.
inline Tensor target_margin_hinge(const Tensor& logits, int target, double margin) {
    const int c = logits.cols();
    require(logits.rows() == 1 && target >= 0 && target < c,
            "target_margin_hinge: bad logits or target");
    int best = -1;
    double bv = -inf();
    for (int j = 0; j < c; ++j) {
        if (j == target) continue;
        if (logits.at(0, j) > bv) {
            bv = logits.at(0, j);
            best = j;
        }
    }
    std::vector<double> w(c, 0.0);
    w[best] = 1.0;
    w[target] = -1.0;
    return relu(add_scalar(sum(mul(logits, Tensor::from_values(1, c, std::move(w)))), margin));
}

inline double logit_of(double p, double lo = 0.02) {
    double q = std::min(1.0 - lo, std::max(lo, p));
    return std::log(q / (1.0 - q));
}

inline Tensor host_feature_logits(const Graph& g, const std::vector<int>& site) {
    const int n_t = static_cast<int>(site.size());
    std::vector<double> v(static_cast<std::size_t>(n_t) * g.feat_dim, 0.0);
    for (int a = 0; a < n_t; ++a)
        for (int k = 0; k < g.feat_dim; ++k)
            v[static_cast<std::size_t>(a) * g.feat_dim + k] = logit_of(g.feature(site[a], k));
    return Tensor::from_values(n_t, g.feat_dim, std::move(v)).as_param();
}

inline Tensor host_adj_logits(const Graph& g, const std::vector<int>& site) {
    const int n_t = static_cast<int>(site.size());
    std::vector<double> v(static_cast<std::size_t>(n_t) * n_t, 0.0);
    for (int a = 0; a < n_t; ++a)
        for (int b = 0; b < n_t; ++b)
            if (a != b) {
                double e = g.has_edge(site[a], site[b]) ? 2.0 : -2.0;
                v[static_cast<std::size_t>(a) * n_t + b] = e;
            }
    return Tensor::from_values(n_t, n_t, std::move(v)).as_param();
}

inline Tensor offdiag_mask(int n_t) {
    std::vector<double> v(static_cast<std::size_t>(n_t) * n_t, 1.0);
    for (int a = 0; a < n_t; ++a) v[static_cast<std::size_t>(a) * n_t + a] = 0.0;
    return Tensor::from_values(n_t, n_t, std::move(v));
}

// Symmetric soft adjacency in (0, 1) with a zero diagonal.
inline Tensor soft_adj_from_logits(const Tensor& logits, const Tensor& mask) {
    return mul(sigmoid(scale(add(logits, transpose(logits)), 0.5)), mask);
}

inline std::vector<std::uint8_t> complete_topology(int n_t) {
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(n_t) * n_t, 1);
    for (int a = 0; a < n_t; ++a) adj[static_cast<std::size_t>(a) * n_t + a] = 0;
    return adj;
}

inline std::vector<std::uint8_t> threshold_topology(const Tensor& soft) {
    const int n_t = soft.rows();
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(n_t) * n_t, 0);
    for (int a = 0; a < n_t; ++a)
        for (int b = 0; b < n_t; ++b)
            if (a != b && soft.at(a, b) >= 0.5) adj[static_cast<std::size_t>(a) * n_t + b] = 1;
    return adj;
}

inline SubgraphPatch make_patch(const std::vector<std::uint8_t>& adj, const Tensor& feats) {
    SubgraphPatch p;
    p.n = feats.rows();
    p.feat_dim = feats.cols();
    p.adj = adj;
    p.features = feats.values();
    return p;
}

inline SubgraphPatch host_patch(const Graph& g, const std::vector<int>& site) {
    const int n_t = static_cast<int>(site.size());
    SubgraphPatch p;
    p.n = n_t;
    p.feat_dim = g.feat_dim;
    p.adj.assign(static_cast<std::size_t>(n_t) * n_t, 0);
    p.features.resize(static_cast<std::size_t>(n_t) * g.feat_dim);
    for (int a = 0; a < n_t; ++a) {
        for (int b = 0; b < n_t; ++b)
            if (a != b && g.has_edge(site[a], site[b]))
                p.adj[static_cast<std::size_t>(a) * n_t + b] = 1;
        for (int k = 0; k < g.feat_dim; ++k)
            p.features[static_cast<std::size_t>(a) * g.feat_dim + k] = g.feature(site[a], k);
    }
    return p;
}

inline bool patch_flips(const GnnModel& m, const Graph& g, const std::vector<int>& site,
                        const SubgraphPatch& patch, int y) {
    return argmax_row(classify(m, substitute(g, site, patch))) == y;
}

// Candidate replacement sites: the wiring-closest placement for the trigger
// topology, plus the node tuple whose feature rows pull the target logit
// hardest on the unperturbed graph.
inline std::vector<std::vector<int>> candidate_sites(const GnnModel& m, const Graph& g,
                                                     int target, int n_t,
                                                     const std::vector<std::uint8_t>& topo) {
    std::vector<std::vector<int>> out;
    out.push_back(find_best_site(g, topo, n_t).nodes);

    GradientTape tape;
    Tensor f = features_tensor(g).as_param();
    Tensor loss = ce_loss_rows(graph_logits(m, adjacency_tensor(g), f), {target}, {0});
    Tensor grad = tape.backward(loss).grad_or_zero(f);
    std::vector<double> score(g.n, 0.0);
    for (int v = 0; v < g.n; ++v)
        for (int k = 0; k < g.feat_dim; ++k) score[v] += std::fabs(grad.at(v, k));
    std::vector<int> order(g.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    std::vector<int> salient(order.begin(), order.begin() + n_t);
    std::sort(salient.begin(), salient.end());

    std::vector<int> first = out[0];
    std::sort(first.begin(), first.end());
    if (salient != first) out.push_back(salient);
    return out;
}

struct ReverseOutcome {
    double cost = inf();
    bool flipped = false;

    void offer(double c) {
        flipped = true;
        if (c < cost) cost = c;
    }
};

// NC-style search at one site: minimize weight * hinge + soft L1 cost, with
// the hinge weight doubling while the hard trigger fails to flip the graph.
// Every iterate's hard trigger competes for the cheapest flipping incumbent,
// starting from the zero-perturbation host patch.
inline Tensor dense_tensor(const std::vector<std::uint8_t>& adj, int n_t) {
    std::vector<double> v(adj.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = adj[i];
    return Tensor::from_values(n_t, n_t, std::move(v));
}

inline ReverseOutcome reverse_search_site(const GnnModel& m, const Graph& g,
                                          const std::vector<int>& site, int y,
                                          const MpcConfig& cfg) {
    require(static_cast<int>(site.size()) == cfg.n_trigger,
            "reverse_search_site: site size mismatch");
    ReverseOutcome out;
    if (patch_flips(m, g, site, host_patch(g, site), y)) out.offer(0.0);

    const bool adapt_topology = cfg.def == TriggerDef::Adaptive;
    const Tensor mask = offdiag_mask(cfg.n_trigger);
    const Tensor host_feats = site_features(g, site);
    const Tensor host_adj = site_adjacency(g, site);
    const std::vector<std::uint8_t> fixed_topo = complete_topology(cfg.n_trigger);
    const Tensor fixed_adj = dense_tensor(fixed_topo, cfg.n_trigger);

    std::vector<Tensor> params = {host_feature_logits(g, site)};
    if (adapt_topology) params.push_back(host_adj_logits(g, site));
    Optimizer opt = Optimizer::adam(cfg.lr);
    double weight = 1.0;

    for (int it = 0; it < cfg.budget; ++it) {
        GradientTape tape;
        Tensor f = sigmoid(params[0]);
        Tensor a = adapt_topology ? soft_adj_from_logits(params[1], mask) : fixed_adj;
        SoftEmbedded se = embed_soft(g, site, a, f);
        Tensor hinge = target_margin_hinge(graph_logits(m, se.adj, se.feats), y,
                                           cfg.hinge_margin);
        Tensor soft_cost = l1_norm(sub(f, host_feats));
        if (adapt_topology) soft_cost = add(soft_cost, l1_norm(sub(a, host_adj)));
        Tensor loss = add(scale(hinge, weight), soft_cost);
        opt.step(params, tape.backward(loss));

        std::vector<std::uint8_t> topo =
            adapt_topology ? threshold_topology(soft_adj_from_logits(params[1], mask))
                           : fixed_topo;
        SubgraphPatch patch = make_patch(topo, sigmoid(params[0]));
        if (patch_flips(m, g, site, patch, y))
            out.offer(perturbation_cost(g, site, patch));
        else
            weight = std::min(weight * 2.0, 1e6);
    }
    return out;
}

// Shared search for the fully universal family: one feature logit matrix
// optimized against every graph at its wiring-closest site. The incumbent is
// the cheapest iterate whose flip rate clears the detection threshold; if no
// iterate does, the final one stands.
inline Tensor universal_feature_logits(const GnnModel& m, const Dataset& ds,
                                       const std::vector<int>& graphs, int y,
                                       const std::vector<std::vector<int>>& sites,
                                       const MpcConfig& cfg) {
    Tensor flogits = Tensor::zeros(cfg.n_trigger, ds.feat_dim).as_param();
    std::vector<Tensor> params = {flogits};
    Optimizer opt = Optimizer::adam(cfg.lr);
    const std::vector<std::uint8_t> topo = complete_topology(cfg.n_trigger);
    double weight = 1.0;

    Tensor best = params[0];
    double best_cost = inf();

    const Tensor a = dense_tensor(topo, cfg.n_trigger);
    for (int it = 0; it < cfg.budget; ++it) {
        GradientTape tape;
        Tensor f = sigmoid(params[0]);
        Tensor acc = Tensor::scalar(0.0);
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const Graph& g = ds.by_index(graphs[i]);
            SoftEmbedded se = embed_soft(g, sites[i], a, f);
            Tensor hinge = target_margin_hinge(graph_logits(m, se.adj, se.feats), y,
                                               cfg.hinge_margin);
            Tensor cost = l1_norm(sub(f, site_features(g, sites[i])));
            acc = add(acc, add(scale(hinge, weight), cost));
        }
        opt.step(params, tape.backward(scale(acc, 1.0 / static_cast<double>(graphs.size()))));

        Tensor hard_f = sigmoid(params[0]);
        int flips = 0;
        double total = 0.0;
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const Graph& g = ds.by_index(graphs[i]);
            SubgraphPatch patch = make_patch(topo, hard_f);
            if (patch_flips(m, g, sites[i], patch, y)) {
                ++flips;
                total += perturbation_cost(g, sites[i], patch);
            }
        }
        double rate = static_cast<double>(flips) / static_cast<double>(graphs.size());
        if (rate >= cfg.asr_threshold && (flips == 0 ? inf() : total / flips) < best_cost) {
            best = params[0];
            best_cost = total / flips;
        }
        if (rate < cfg.asr_threshold) weight = std::min(weight * 2.0, 1e6);
    }
    return best_cost < inf() ? best : params[0];
}

}  // namespace detail

// Per-graph minimum perturbation cost for steering every out-of-class graph
// into class y. Graphs the search cannot flip within budget keep an infinite
// sentinel.
inline std::vector<double> mpc_search(const GnnModel& m, const Dataset& ds,
                                      const std::vector<int>& sample_idx, int y,
                                      const MpcConfig& cfg) {
    cfg.validate();
    require(!ds.transductive, "mpc_search: needs a graph-classification dataset");
    require(y >= 0 && y < ds.num_classes, "mpc_search: class out of range");
    std::vector<int> others;
    for (int i : sample_idx)
        if (ds.by_index(i).label != y) others.push_back(i);
    require(!others.empty(), "mpc_search: no graphs outside the class");
    for (int i : others)
        require(ds.by_index(i).n >= cfg.n_trigger, "mpc_search: host smaller than trigger");

    std::vector<double> costs(others.size(), detail::inf());
    if (cfg.budget <= 0) return costs;

    const std::vector<std::uint8_t> topo = detail::complete_topology(cfg.n_trigger);

    if (cfg.def == TriggerDef::UniversalAll) {
        std::vector<std::vector<int>> sites;
        sites.reserve(others.size());
        for (int i : others)
            sites.push_back(find_best_site(ds.by_index(i), topo, cfg.n_trigger).nodes);
        Tensor logits = detail::universal_feature_logits(m, ds, others, y, sites, cfg);
        Tensor feats = sigmoid(logits);
        for (std::size_t i = 0; i < others.size(); ++i) {
            const Graph& g = ds.by_index(others[i]);
            detail::ReverseOutcome out;
            for (const auto& site : detail::candidate_sites(m, g, y, cfg.n_trigger, topo)) {
                SubgraphPatch patch = detail::make_patch(topo, feats);
                if (detail::patch_flips(m, g, site, patch, y))
                    out.offer(perturbation_cost(g, site, patch));
            }
            if (out.flipped) costs[i] = out.cost;
        }
        return costs;
    }

    for (std::size_t i = 0; i < others.size(); ++i) {
        const Graph& g = ds.by_index(others[i]);
        detail::ReverseOutcome best;
        for (const auto& site : detail::candidate_sites(m, g, y, cfg.n_trigger, topo)) {
            detail::ReverseOutcome out = detail::reverse_search_site(m, g, site, y, cfg);
            if (out.flipped) best.offer(out.cost);
        }
        if (best.flipped) costs[i] = best.cost;
    }
    return costs;
}

// --- KS decision ------------------------------------------------------------------

enum class InspectStatus { Decided, Inconclusive };

// Decision table (two finite samples, significance alpha):
//   p <  alpha              -> "target lower" rejected: no backdoor signature
//   p >= alpha, support > 0 -> "target lower" retained and supported: flagged
//   p >= alpha, support = 0 -> no directional evidence at all: not flagged
// where p tests violations of "target lower" (statistic sup F_other - F_target)
// and support is the opposite one-sided statistic sup F_target - F_other.
struct KsDecision {
    double statistic = 0.0;
    double support = 0.0;
    double p_value = 1.0;
    bool flagged = false;
    int target_censored = 0;
    int other_censored = 0;
    InspectStatus status = InspectStatus::Decided;
};

inline KsDecision ks_decision(const std::vector<double>& mpc_target,
                              const std::vector<double>& mpc_other, double alpha) {
    require(!mpc_target.empty() && !mpc_other.empty(), "ks_decision: empty sample");
    require(alpha > 0.0 && alpha < 1.0, "ks_decision: alpha outside (0, 1)");
    KsDecision d;
    std::vector<double> target, other;
    for (double v : mpc_target) {
        if (std::isfinite(v))
            target.push_back(v);
        else
            ++d.target_censored;
    }
    for (double v : mpc_other) {
        if (std::isfinite(v))
            other.push_back(v);
        else
            ++d.other_censored;
    }
    if (target.empty() || other.empty()) {
        d.status = InspectStatus::Inconclusive;
        return d;
    }
    KsResult violation = ks_target_lower(target, other);
    d.statistic = violation.statistic;
    d.p_value = violation.p_value;
    d.support = ks_target_lower(other, target).statistic;
    d.flagged = d.p_value >= alpha && d.support > 0.0;
    return d;
}

// Runs the reverse search toward the target class and away from it, then
// applies the KS rule. Two-class models only: "away" means the one other
// class.
struct InspectReport {
    std::vector<double> mpc_target;
    std::vector<double> mpc_other;
    KsDecision decision;
};

inline InspectReport inspect_model(const GnnModel& m, const Dataset& ds,
                                   const std::vector<int>& sample_idx, int target_class,
                                   const MpcConfig& cfg) {
    cfg.validate();
    require(ds.num_classes == 2, "inspect_model: two-class inspection only");
    require(target_class == 0 || target_class == 1, "inspect_model: target class out of range");

    std::vector<int> sample;
    int kept[2] = {0, 0};
    for (int i : sample_idx) {
        int y = ds.by_index(i).label;
        require(y == 0 || y == 1, "inspect_model: graph label out of range");
        if (kept[y] < cfg.samples_per_class) {
            sample.push_back(i);
            ++kept[y];
        }
    }
    require(kept[0] > 0 && kept[1] > 0, "inspect_model: a class has no samples");

    InspectReport rep;
    rep.mpc_target = mpc_search(m, ds, sample, target_class, cfg);
    rep.mpc_other = mpc_search(m, ds, sample, 1 - target_class, cfg);
    rep.decision = ks_decision(rep.mpc_target, rep.mpc_other, cfg.alpha);
    return rep;
}

// --- Randomized smoothing ---------------------------------------------------------

struct SmoothingConfig {
    double beta = 0.8;    // subsampling ratio
    int n_subsamples = 25;

    void validate() const {
        require(beta > 0.0 && beta <= 1.0, "SmoothingConfig: beta outside (0, 1]");
        require(n_subsamples >= 1, "SmoothingConfig: need at least one subsample");
    }
};

// Keeps ceil(beta * n) nodes as an induced subgraph and zeroes
// floor((1 - beta) * d) random feature coordinates of every kept node.
// beta = 1 is the identity and leaves the random stream untouched.
inline Graph subsample_graph(const Graph& g, double beta, Rng& rng) {
    require(beta > 0.0 && beta <= 1.0, "subsample_graph: beta outside (0, 1]");
    if (beta == 1.0) return g;
    const int keep = static_cast<int>(std::ceil(beta * g.n));
    require(keep >= 1, "subsample_graph: no nodes survive");

    std::vector<int> nodes = rng.sample_indices(g.n, keep);
    std::sort(nodes.begin(), nodes.end());
    Graph out = Graph::make(keep, g.feat_dim);
    out.label = g.label;
    if (!g.node_labels.empty()) {
        out.node_labels.resize(keep);
        for (int a = 0; a < keep; ++a) out.node_labels[a] = g.node_labels[nodes[a]];
    }
    for (int a = 0; a < keep; ++a) {
        for (int b = a + 1; b < keep; ++b)
            if (g.has_edge(nodes[a], nodes[b])) out.set_edge(a, b);
        for (int k = 0; k < g.feat_dim; ++k) out.set_feature(a, k, g.feature(nodes[a], k));
    }
    const int zeroed = static_cast<int>(std::floor((1.0 - beta) * g.feat_dim));
    for (int a = 0; a < keep; ++a)
        for (int k : rng.sample_indices(g.feat_dim, zeroed)) out.set_feature(a, k, 0.0);
    return out;
}

struct SmoothedVote {
    int label = 0;
    std::vector<int> votes;  // per-class counts
};

// Majority vote over subsampled predictions; ties resolve to the lower class
// id so reruns are stable.
inline SmoothedVote smoothed_classify(const GnnModel& m, const Graph& g,
                                      const SmoothingConfig& sc, Rng& rng) {
    sc.validate();
    SmoothedVote out;
    out.votes.assign(m.cfg.classes, 0);
    for (int s = 0; s < sc.n_subsamples; ++s) {
        Graph sub = subsample_graph(g, sc.beta, rng);
        ++out.votes[argmax_row(classify(m, sub))];
    }
    for (int c = 1; c < m.cfg.classes; ++c)
        if (out.votes[c] > out.votes[out.label]) out.label = c;
    return out;
}

// ASR and CAD of the smoothed pipeline at one subsampling ratio: triggered
// out-of-class test graphs voted into the target class, and the voted clean
// accuracy measured against the plain model's.
struct SmoothingPoint {
    double beta = 1.0;
    double asr = 0.0;
    double cad = 0.0;
};

inline SmoothingPoint evaluate_smoothing(const GnnModel& m, const Dataset& ds,
                                         const std::vector<int>& test_idx,
                                         const TriggerHandle& trig, const ConstraintSet& cs,
                                         int target_class, int n_iter, double tau,
                                         const SmoothingConfig& sc, std::uint64_t seed) {
    sc.validate();
    require(!test_idx.empty(), "evaluate_smoothing: empty test set");
    Rng rng(seed);
    const double base_acc = eval_graph_accuracy(m, ds, test_idx);

    int clean_hits = 0, trig_total = 0, trig_hits = 0;
    for (int gi : test_idx) {
        const Graph& g = ds.by_index(gi);
        if (smoothed_classify(m, g, sc, rng).label == g.label) ++clean_hits;
        if (g.label == target_class) continue;
        EmbeddedGraph eg = embed_trigger(trig, cs, g, n_iter, tau, rng);
        ++trig_total;
        if (smoothed_classify(m, eg.graph, sc, rng).label == target_class) ++trig_hits;
    }

    SmoothingPoint p;
    p.beta = sc.beta;
    p.asr = trig_total > 0 ? static_cast<double>(trig_hits) / trig_total : 0.0;
    p.cad = base_acc - static_cast<double>(clean_hits) / static_cast<double>(test_idx.size());
    return p;
}

}  // namespace gtlab
