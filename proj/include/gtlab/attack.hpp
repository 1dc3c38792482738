#pragma once

// Bi-level trigger optimization. The outer problem shapes the trigger so that
// trigger-embedded graphs land on the target class; the inner problem keeps
// the released model indistinguishable from the clean one on benign inputs.
// The trigger side is updated through a one-step look-ahead hypergradient
// with the second-order term approximated by finite differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtlab/common.hpp"
#include "gtlab/gnn.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/mixing.hpp"
#include "gtlab/optim.hpp"
#include "gtlab/rng.hpp"
#include "gtlab/tensor.hpp"
#include "gtlab/trigger.hpp"

namespace gtlab {

enum class TriggerSource { Gta, BlI, BlII };

inline std::string trigger_source_name(TriggerSource s) {
    switch (s) {
        case TriggerSource::Gta: return "gta";
        case TriggerSource::BlI: return "bl1";
        case TriggerSource::BlII: return "bl2";
    }
    throw UsageError("trigger_source_name: bad enum");
}

inline TriggerSource trigger_source_from_name(const std::string& s) {
    if (s == "gta") return TriggerSource::Gta;
    if (s == "bl1") return TriggerSource::BlI;
    if (s == "bl2") return TriggerSource::BlII;
    throw UsageError("unknown trigger source '" + s + "'");
}

// Deployment-side restrictions on what the trigger may change. edge_mask
// entries of 1 pin the corresponding adjacency cell to the host value;
// addition_only / deletion_only derive such a mask from each host site.
// The weighted penalties are added to the attack loss.
struct ConstraintSet {
    std::vector<std::uint8_t> edge_mask;  // n_t*n_t, 1 = keep host entry; empty = none
    bool addition_only = false;
    bool deletion_only = false;
    double magnitude_weight = 0.0;    // on ||A - A~||_F, raw generator output
    double cardinality_weight = 0.0;  // on ||v_msk||_1

    bool any_edge_constraint() const {
        return !edge_mask.empty() || addition_only || deletion_only;
    }
};

struct AttackConfig {
    TriggerSource source = TriggerSource::Gta;
    int target_class = 1;
    int n_trigger = 3;
    double n_io = 1.0;   // inner (model) steps per outer (trigger) step
    double n_mask = 1.0; // fraction of feature coordinates the trigger may touch
    int n_iter = 3;      // trigger/site alternation limit
    double xi = 0.01;    // look-ahead step size
    double epsilon = 1e-5;
    int reset_period = 20;
    int stabilization_rounds = 5;
    int outer_iters = 200;
    int reset_epochs = 10;
    double theta_lr = 0.01;
    double omega_lr = 0.01;
    double grad_tol = 1e-4;
    double tau = kTopologyTau;
    int n_sites = 5;  // transductive: sampled placement subgraphs
    int k_hops = 2;   // transductive: receptive-field radius of the model
    ConstraintSet constraints;

    void validate() const {
        require(target_class >= 0, "AttackConfig: negative target class");
        require(n_trigger >= 2, "AttackConfig: trigger needs at least two nodes");
        require(n_io >= 0.0, "AttackConfig: n_io must be non-negative");
        require(n_mask >= 0.0 && n_mask <= 1.0, "AttackConfig: n_mask outside [0, 1]");
        require(n_iter >= 1, "AttackConfig: n_iter must be positive");
        require(epsilon > 0.0, "AttackConfig: epsilon must be positive");
        require(reset_period > 0, "AttackConfig: reset_period must be positive");
        require(stabilization_rounds >= 1, "AttackConfig: stabilization_rounds must be positive");
        require(outer_iters >= 1, "AttackConfig: outer_iters must be positive");
        require(reset_epochs >= 0, "AttackConfig: negative reset_epochs");
        require(theta_lr > 0.0 && omega_lr > 0.0, "AttackConfig: learning rates must be positive");
        require(grad_tol >= 0.0, "AttackConfig: negative grad_tol");
        require(tau > 0.0, "AttackConfig: tau must be positive");
        require(n_sites >= 1, "AttackConfig: n_sites must be positive");
        require(k_hops >= 0, "AttackConfig: negative k_hops");
        require(constraints.magnitude_weight >= 0.0 && constraints.cardinality_weight >= 0.0,
                "AttackConfig: negative penalty weight");
        if (!constraints.edge_mask.empty())
            require(constraints.edge_mask.size() ==
                        static_cast<std::size_t>(n_trigger) * n_trigger,
                    "AttackConfig: edge mask shape mismatch");
    }
};

// One trigger of either family behind a common emit/params surface, so the
// optimization loop is indifferent to whether the trigger adapts to its site.
struct TriggerHandle {
    TriggerSource source = TriggerSource::Gta;
    int n_trigger = 0;
    GeneratorParams gen;                     // Gta
    UniversalTrigger uni;                    // BlI / BlII
    std::vector<std::uint8_t> feature_mask;  // v_msk over feature coordinates

    std::vector<Tensor> params() const {
        return source == TriggerSource::Gta ? gen.all() : uni.all();
    }

    void adopt(const std::vector<Tensor>& ts) {
        if (source == TriggerSource::Gta)
            gen.adopt(ts);
        else
            uni.adopt(ts);
    }

    TriggerInstance emit(const Graph& g, const std::vector<int>& site, double tau) const {
        if (source == TriggerSource::Gta) return generate_trigger(gen, g, site, tau);
        TriggerInstance t = emit_universal(uni);
        require(t.n == static_cast<int>(site.size()), "TriggerHandle: site size mismatch");
        return t;
    }
};

inline TriggerHandle init_trigger(const AttackConfig& cfg, int feat_dim, Rng& rng) {
    TriggerHandle h;
    h.source = cfg.source;
    h.n_trigger = cfg.n_trigger;
    if (cfg.source == TriggerSource::Gta)
        h.gen = init_generator(feat_dim, rng);
    else
        h.uni = init_universal(
            cfg.source == TriggerSource::BlI ? BaselineKind::BlI : BaselineKind::BlII,
            cfg.n_trigger, feat_dim, rng);
    h.feature_mask = make_feature_mask(feat_dim, cfg.n_mask, rng);
    return h;
}

// --- Appendix C constraints ---------------------------------------------------

namespace detail {

// Per-site keep mask: 1 pins the cell to the host adjacency value.
inline std::vector<std::uint8_t> combined_edge_mask(const Graph& g, const std::vector<int>& site,
                                                    const ConstraintSet& cs) {
    const int n_t = static_cast<int>(site.size());
    std::vector<std::uint8_t> m(static_cast<std::size_t>(n_t) * n_t, 0);
    if (!cs.edge_mask.empty()) {
        require(cs.edge_mask.size() == m.size(), "apply_constraints: edge mask shape mismatch");
        m = cs.edge_mask;
    }
    for (int a = 0; a < n_t; ++a)
        for (int b = 0; b < n_t; ++b) {
            if (a == b) continue;
            bool host = g.has_edge(site[a], site[b]);
            if (cs.addition_only && host) m[static_cast<std::size_t>(a) * n_t + b] = 1;
            if (cs.deletion_only && !host) m[static_cast<std::size_t>(a) * n_t + b] = 1;
        }
    return m;
}

inline Tensor site_adjacency(const Graph& g, const std::vector<int>& site) {
    const int n_t = static_cast<int>(site.size());
    std::vector<double> v(static_cast<std::size_t>(n_t) * n_t, 0.0);
    for (int a = 0; a < n_t; ++a)
        for (int b = 0; b < n_t; ++b)
            if (a != b && g.has_edge(site[a], site[b]))
                v[static_cast<std::size_t>(a) * n_t + b] = 1.0;
    return Tensor::from_values(n_t, n_t, std::move(v));
}

inline Tensor site_features(const Graph& g, const std::vector<int>& site) {
    const int n_t = static_cast<int>(site.size());
    std::vector<double> v(static_cast<std::size_t>(n_t) * g.feat_dim);
    for (int a = 0; a < n_t; ++a)
        for (int k = 0; k < g.feat_dim; ++k)
            v[static_cast<std::size_t>(a) * g.feat_dim + k] = g.feature(site[a], k);
    return Tensor::from_values(n_t, g.feat_dim, std::move(v));
}

inline Tensor mask_tensor(const std::vector<std::uint8_t>& m, int rows, int cols) {
    std::vector<double> v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = m[i] ? 1.0 : 0.0;
    return Tensor::from_values(rows, cols, std::move(v));
}

}  // namespace detail

struct ConstrainedTrigger {
    Tensor adj;      // n_t x n_t, soft
    Tensor feats;    // n_t x feat_dim
    Tensor penalty;  // scalar, weighted magnitude + cardinality terms
};

// Blends the generated subgraph with the host site under the constraint set:
// masked adjacency cells keep their host value, unmasked feature coordinates
// keep the host features, and the penalty charges the raw (pre-mask) edit.
inline ConstrainedTrigger apply_constraints(const Graph& g, const std::vector<int>& site,
                                            const Tensor& soft_adj, const Tensor& feats,
                                            const ConstraintSet& cs,
                                            const std::vector<std::uint8_t>& v_msk) {
    check_site(g, site);
    const int n_t = static_cast<int>(site.size());
    require(soft_adj.rows() == n_t && soft_adj.cols() == n_t,
            "apply_constraints: adjacency shape mismatch");
    require(feats.rows() == n_t && feats.cols() == g.feat_dim,
            "apply_constraints: feature shape mismatch");
    Tensor host_adj = detail::site_adjacency(g, site);

    ConstrainedTrigger out;
    if (cs.any_edge_constraint()) {
        auto m = detail::combined_edge_mask(g, site, cs);
        Tensor keep = detail::mask_tensor(m, n_t, n_t);
        Tensor free = add_scalar(neg(keep), 1.0);
        out.adj = add(mul(keep, host_adj), mul(free, soft_adj));
    } else {
        out.adj = soft_adj;
    }
    out.feats = apply_feature_mask(detail::site_features(g, site), feats, v_msk);

    Tensor pen = Tensor::scalar(0.0);
    if (cs.magnitude_weight > 0.0)
        pen = add(pen, scale(frobenius_norm(sub(host_adj, soft_adj)), cs.magnitude_weight));
    if (cs.cardinality_weight > 0.0) {
        double card = 0.0;
        for (auto b : v_msk) card += b ? 1.0 : 0.0;
        pen = add(pen, Tensor::scalar(cs.cardinality_weight * card));
    }
    out.penalty = pen;
    return out;
}

// Hard-thresholded counterpart used at deployment time.
inline SubgraphPatch apply_constraints_hard(const Graph& g, const std::vector<int>& site,
                                            const TriggerInstance& t, const ConstraintSet& cs,
                                            const std::vector<std::uint8_t>& v_msk) {
    check_site(g, site);
    const int n_t = static_cast<int>(site.size());
    require(t.n == n_t, "apply_constraints_hard: trigger size mismatch");
    SubgraphPatch p;
    p.n = n_t;
    p.feat_dim = g.feat_dim;
    p.adj = t.adj;
    if (cs.any_edge_constraint()) {
        auto m = detail::combined_edge_mask(g, site, cs);
        for (int a = 0; a < n_t; ++a)
            for (int b = 0; b < n_t; ++b)
                if (a != b && m[static_cast<std::size_t>(a) * n_t + b])
                    p.adj[static_cast<std::size_t>(a) * n_t + b] =
                        g.has_edge(site[a], site[b]) ? 1 : 0;
    }
    Tensor feats = apply_feature_mask(detail::site_features(g, site), t.features, v_msk);
    p.features = feats.values();
    p.validate();
    return p;
}

// --- Soft embedding -------------------------------------------------------------

struct SoftEmbedded {
    Tensor adj;    // n x n host adjacency with the site block substituted
    Tensor feats;  // n x feat_dim with site rows substituted
};

// Differentiable analog of substitute(): gradients flow into the site block
// and site feature rows while the rest of the host graph stays constant.
inline SoftEmbedded embed_soft(const Graph& g, const std::vector<int>& site,
                               const Tensor& site_adj, const Tensor& site_feats) {
    check_site(g, site);
    const int n_t = static_cast<int>(site.size());
    require(site_adj.rows() == n_t && site_adj.cols() == n_t, "embed_soft: adjacency shape");
    require(site_feats.rows() == n_t && site_feats.cols() == g.feat_dim,
            "embed_soft: feature shape");

    std::vector<double> keep(static_cast<std::size_t>(g.n) * g.n, 1.0);
    std::vector<double> scatter(static_cast<std::size_t>(g.n) * n_t, 0.0);
    for (int a = 0; a < n_t; ++a) {
        scatter[static_cast<std::size_t>(site[a]) * n_t + a] = 1.0;
        for (int b = 0; b < n_t; ++b)
            if (a != b) keep[static_cast<std::size_t>(site[a]) * g.n + site[b]] = 0.0;
    }
    Tensor p = Tensor::from_values(g.n, n_t, std::move(scatter));
    Tensor host = mul(adjacency_tensor(g), Tensor::from_values(g.n, g.n, std::move(keep)));

    SoftEmbedded out;
    out.adj = add(host, matmul(matmul(p, site_adj), transpose(p)));
    out.feats = replace_rows(features_tensor(g), site, site_feats);
    return out;
}

// Trigger emission, constraint blend, and soft substitution in one step.
inline SoftEmbedded embed_trigger_soft(const TriggerHandle& trig, const ConstraintSet& cs,
                                       const Graph& g, const std::vector<int>& site, double tau,
                                       Tensor* penalty_out = nullptr) {
    TriggerInstance t = trig.emit(g, site, tau);
    ConstrainedTrigger ct = apply_constraints(g, site, t.soft_adj, t.features, cs,
                                              trig.feature_mask);
    if (penalty_out) *penalty_out = ct.penalty;
    return embed_soft(g, site, ct.adj, ct.feats);
}

// --- Inductive losses (graph classification) ------------------------------------

struct ClassPartition {
    std::vector<int> target;     // graph indices with label == y_t
    std::vector<int> nontarget;  // everything else
};

inline ClassPartition partition_by_class(const Dataset& ds, const std::vector<int>& idx,
                                         int target_class) {
    ClassPartition p;
    for (int i : idx) {
        const Graph& g = ds.by_index(i);
        require(g.label >= 0, "partition_by_class: graph lacks a label");
        (g.label == target_class ? p.target : p.nontarget).push_back(i);
    }
    require(!p.target.empty(), "partition_by_class: no graphs of the target class");
    require(!p.nontarget.empty(), "partition_by_class: no graphs outside the target class");
    return p;
}

// One attack-loss term: a non-target host (by position into the site table)
// paired with a target-class exemplar (by dataset index).
struct PairSample {
    int src = 0;
    int tgt = 0;
};

inline std::vector<PairSample> sample_pairs(const std::vector<int>& nontarget_idx,
                                            const std::vector<int>& target_idx, Rng& rng) {
    require(!target_idx.empty(), "sample_pairs: no graphs of the target class");
    require(!nontarget_idx.empty(), "sample_pairs: no non-target graphs");
    std::vector<PairSample> pairs(nontarget_idx.size());
    for (std::size_t i = 0; i < nontarget_idx.size(); ++i) {
        int j = static_cast<int>(rng.uniform() * target_idx.size());
        pairs[i] = {static_cast<int>(i), target_idx[j]};
    }
    return pairs;
}

// Eq. 3: mean squared embedding distance between trigger-embedded non-target
// graphs and target-class exemplars, plus any constraint penalties.
inline Tensor loss_atk_inductive(const GnnModel& m, const TriggerHandle& trig,
                                 const ConstraintSet& cs, const Dataset& ds,
                                 const std::vector<int>& nontarget_idx,
                                 const std::vector<std::vector<int>>& sites,
                                 const std::vector<PairSample>& pairs, double tau) {
    require(!pairs.empty(), "loss_atk_inductive: no pairs sampled");
    require(sites.size() == nontarget_idx.size(), "loss_atk_inductive: site table mismatch");
    Tensor acc = Tensor::scalar(0.0);
    for (const auto& pr : pairs) {
        require(pr.src >= 0 && pr.src < static_cast<int>(nontarget_idx.size()),
                "loss_atk_inductive: pair source out of range");
        const Graph& host = ds.by_index(nontarget_idx[pr.src]);
        const Graph& exemplar = ds.by_index(pr.tgt);
        Tensor penalty;
        SoftEmbedded se = embed_trigger_soft(trig, cs, host, sites[pr.src], tau, &penalty);
        Tensor emb_atk = forward_embed(m, se.adj, se.feats).graph;
        Tensor emb_tgt =
            forward_embed(m, adjacency_tensor(exemplar), features_tensor(exemplar)).graph;
        acc = add(acc, add(sq_sum(sub(emb_atk, emb_tgt)), penalty));
    }
    return scale(acc, 1.0 / static_cast<double>(pairs.size()));
}

// Frozen reference embeddings for the retention anchor.
inline std::vector<Tensor> clean_graph_embeddings(const GnnModel& clean, const Dataset& ds,
                                                  const std::vector<int>& idx) {
    std::vector<Tensor> out;
    out.reserve(idx.size());
    for (int i : idx) {
        const Graph& g = ds.by_index(i);
        out.push_back(forward_embed(clean, adjacency_tensor(g), features_tensor(g)).graph);
    }
    return out;
}

// Eq. 4: mean squared embedding distance between the trojan and clean models
// over clean graphs.
inline Tensor loss_ret_inductive(const GnnModel& m, const std::vector<Tensor>& clean_emb,
                                 const Dataset& ds, const std::vector<int>& idx) {
    require(!idx.empty(), "loss_ret_inductive: empty graph set");
    require(clean_emb.size() == idx.size(), "loss_ret_inductive: embedding cache mismatch");
    Tensor acc = Tensor::scalar(0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const Graph& g = ds.by_index(idx[i]);
        Tensor emb = forward_embed(m, adjacency_tensor(g), features_tensor(g)).graph;
        acc = add(acc, sq_sum(sub(emb, clean_emb[i])));
    }
    return scale(acc, 1.0 / static_cast<double>(idx.size()));
}

inline Tensor loss_ret_inductive(const GnnModel& m, const GnnModel& clean, const Dataset& ds,
                                 const std::vector<int>& idx) {
    return loss_ret_inductive(m, clean_graph_embeddings(clean, ds, idx), ds, idx);
}

// --- Transductive losses (node classification) -----------------------------------

struct NodePartition {
    std::vector<int> atk_nodes;  // unlabeled nodes within K hops of the site
    std::vector<int> ret_nodes;  // remaining unlabeled nodes
};

inline NodePartition transductive_node_partition(const Graph& g, const std::vector<int>& site,
                                                 int k, const std::vector<std::uint8_t>& labelled) {
    require(labelled.size() == static_cast<std::size_t>(g.n),
            "transductive_node_partition: labelled mask size mismatch");
    std::vector<int> hood = k_hop_neighborhood(g, site, k);
    std::vector<std::uint8_t> in_hood(g.n, 0);
    for (int v : hood) in_hood[v] = 1;
    NodePartition p;
    for (int v = 0; v < g.n; ++v) {
        if (labelled[v]) continue;
        (in_hood[v] ? p.atk_nodes : p.ret_nodes).push_back(v);
    }
    return p;
}

// Static context for the transductive losses: placement sites, their node
// partitions, and the clean model's predictive distribution on the clean graph.
struct TransductiveContext {
    const Graph* g = nullptr;
    std::vector<std::uint8_t> labelled;
    std::vector<std::vector<int>> sites;
    std::vector<NodePartition> parts;
    Tensor clean_log_probs;  // n x C, eval-mode log p of the clean model

    static TransductiveContext build(const Graph& g, const GnnModel& clean,
                                     const std::vector<int>& labelled_nodes,
                                     const std::vector<std::vector<int>>& sites, int k_hops) {
        TransductiveContext ctx;
        ctx.g = &g;
        ctx.labelled.assign(g.n, 0);
        for (int v : labelled_nodes) {
            require(v >= 0 && v < g.n, "TransductiveContext: labelled node out of range");
            ctx.labelled[v] = 1;
        }
        ctx.sites = sites;
        for (const auto& s : sites)
            ctx.parts.push_back(transductive_node_partition(g, s, k_hops, ctx.labelled));
        ctx.clean_log_probs =
            log_softmax_rows(node_logits(clean, adjacency_tensor(g), features_tensor(g)));
        return ctx;
    }
};

enum class TransMode { Atk, Ret };

// Eqs. 8 and 9, averaged over sampled sites. Atk drives unlabeled nodes in the
// trigger's receptive field toward the target class on the embedded graph; Ret
// is the KL divergence from the clean model's clean-graph predictions on the
// remaining unlabeled nodes, so it is exactly zero, with exactly zero gradient,
// for an unchanged model. Anything else would let the optimizer normalize
// rounding noise into full-size parameter steps.
inline Tensor loss_transductive(const GnnModel& m, const TriggerHandle& trig,
                                const ConstraintSet& cs, const TransductiveContext& ctx,
                                int target_class, double tau, TransMode mode) {
    require(!ctx.sites.empty(), "loss_transductive: no sites");
    const Graph& g = *ctx.g;
    Tensor acc = Tensor::scalar(0.0);
    for (std::size_t si = 0; si < ctx.sites.size(); ++si) {
        const auto& part = ctx.parts[si];
        Tensor penalty;
        SoftEmbedded se = embed_trigger_soft(trig, cs, g, ctx.sites[si], tau, &penalty);
        Tensor logits = node_logits(m, se.adj, se.feats);
        if (mode == TransMode::Atk) {
            require(!part.atk_nodes.empty(),
                    "loss_transductive: site neighborhood holds no unlabeled nodes");
            std::vector<int> labels(g.n, target_class);
            acc = add(acc, add(ce_loss_rows(logits, labels, part.atk_nodes), penalty));
        } else {
            require(!part.ret_nodes.empty(),
                    "loss_transductive: trigger neighborhood covers every unlabeled node");
            acc = add(acc, kl_div_rows(logits, ctx.clean_log_probs, part.ret_nodes));
        }
    }
    return scale(acc, 1.0 / static_cast<double>(ctx.sites.size()));
}

// --- Feature-mask selection -------------------------------------------------------

namespace detail {

inline std::vector<std::uint8_t> top_k_mask(const std::vector<double>& score, int k) {
    const int d = static_cast<int>(score.size());
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    std::vector<std::uint8_t> mask(d, 0);
    for (int i = 0; i < std::min(k, d); ++i) mask[order[i]] = 1;
    return mask;
}

inline void add_col_abs(std::vector<double>& score, const Tensor& grad) {
    for (int r = 0; r < grad.rows(); ++r)
        for (int c = 0; c < grad.cols(); ++c) score[c] += std::fabs(grad.at(r, c));
}

}  // namespace detail

// Appendix C treats the feature mask as an attack variable. Under a hard
// n_mask budget the choice reduces to a ranking: score each coordinate by the
// attack-gradient magnitude at the replaced feature rows (host wiring, given
// model), and keep the top round(n_mask * d).
inline std::vector<std::uint8_t> select_feature_mask(const GnnModel& m,
                                                     const TransductiveContext& ctx,
                                                     int target_class, double fraction) {
    const Graph& g = *ctx.g;
    const int k = static_cast<int>(std::lround(fraction * g.feat_dim));
    std::vector<double> score(g.feat_dim, 0.0);
    if (k >= g.feat_dim) return std::vector<std::uint8_t>(g.feat_dim, 1);
    if (k <= 0) return detail::top_k_mask(score, 0);
    std::vector<int> labels(g.n, target_class);
    for (std::size_t si = 0; si < ctx.sites.size(); ++si) {
        if (ctx.parts[si].atk_nodes.empty()) continue;
        GradientTape tape;
        Tensor f = detail::site_features(g, ctx.sites[si]).as_param();
        SoftEmbedded se =
            embed_soft(g, ctx.sites[si], detail::site_adjacency(g, ctx.sites[si]), f);
        Tensor loss =
            ce_loss_rows(node_logits(m, se.adj, se.feats), labels, ctx.parts[si].atk_nodes);
        detail::add_col_abs(score, tape.backward(loss).grad_or_zero(f));
    }
    return detail::top_k_mask(score, k);
}

// Inductive counterpart, scored over the given host/site pairs.
inline std::vector<std::uint8_t> select_feature_mask(const GnnModel& m, const Dataset& ds,
                                                     const std::vector<int>& hosts,
                                                     const std::vector<std::vector<int>>& sites,
                                                     int target_class, double fraction) {
    require(hosts.size() == sites.size(), "select_feature_mask: host/site count mismatch");
    require(!hosts.empty(), "select_feature_mask: no hosts");
    const int k = static_cast<int>(std::lround(fraction * ds.feat_dim));
    std::vector<double> score(ds.feat_dim, 0.0);
    if (k >= ds.feat_dim) return std::vector<std::uint8_t>(ds.feat_dim, 1);
    if (k <= 0) return detail::top_k_mask(score, 0);
    for (std::size_t i = 0; i < hosts.size(); ++i) {
        const Graph& g = ds.by_index(hosts[i]);
        GradientTape tape;
        Tensor f = detail::site_features(g, sites[i]).as_param();
        SoftEmbedded se = embed_soft(g, sites[i], detail::site_adjacency(g, sites[i]), f);
        Tensor loss = ce_loss_rows(graph_logits(m, se.adj, se.feats), {target_class}, {0});
        detail::add_col_abs(score, tape.backward(loss).grad_or_zero(f));
    }
    return detail::top_k_mask(score, k);
}

// --- Look-ahead hypergradient ----------------------------------------------------

// Both losses as closures over explicit parameter vectors, so the finite
// difference probes can re-evaluate them at shifted model parameters.
struct BilevelLosses {
    std::function<Tensor(const std::vector<Tensor>&, const std::vector<Tensor>&)> ret;
    std::function<Tensor(const std::vector<Tensor>&, const std::vector<Tensor>&)> atk;
};

// d l_atk(theta', omega) / d omega with theta' = theta - xi * grad_theta l_ret,
// where the chain through theta' is approximated by the symmetric finite
// difference of grad_omega l_ret at theta +- eps * grad_theta' l_atk.
inline GradMap lookahead_grad(const BilevelLosses& losses, const std::vector<Tensor>& theta,
                              const std::vector<Tensor>& omega, double xi, double eps) {
    require(eps > 0.0, "lookahead_grad: epsilon must be positive");

    std::vector<Tensor> theta_prime = theta;
    if (xi != 0.0) {
        GradientTape tape;
        Tensor ret = losses.ret(theta, omega);
        GradMap g_ret = tape.backward(ret);
        theta_prime = sgd_step_pure(theta, g_ret, xi);
    }

    GradMap g_atk;
    {
        GradientTape tape;
        Tensor atk = losses.atk(theta_prime, omega);
        g_atk = tape.backward(atk);
    }
    if (xi == 0.0) return g_atk;

    // The attack gradients are keyed by the look-ahead tensors; rekey them to
    // the base parameters before stepping those.
    GradMap atk_on_theta;
    for (std::size_t i = 0; i < theta.size(); ++i)
        atk_on_theta.put(theta[i], g_atk.grad_or_zero(theta_prime[i]));
    std::vector<Tensor> theta_plus = sgd_step_pure(theta, atk_on_theta, -eps);
    std::vector<Tensor> theta_minus = sgd_step_pure(theta, atk_on_theta, eps);

    auto omega_grad_of_ret = [&](const std::vector<Tensor>& th) {
        GradientTape tape;
        Tensor ret = losses.ret(th, omega);
        return tape.backward(ret);
    };
    GradMap g_plus = omega_grad_of_ret(theta_plus);
    GradMap g_minus = omega_grad_of_ret(theta_minus);

    GradMap out;
    const double coef = xi / (2.0 * eps);
    for (const auto& w : omega) {
        Tensor base = g_atk.grad_or_zero(w);
        Tensor diff = sub(g_plus.grad_or_zero(w), g_minus.grad_or_zero(w));
        out.put(w, sub(base, scale(diff, coef)));
    }
    return out;
}

inline double grad_norm(const GradMap& grads, const std::vector<Tensor>& params) {
    double s = 0.0;
    for (const auto& p : params) {
        Tensor g = grads.grad_or_zero(p);
        for (double v : g.values()) s += v * v;
    }
    return std::sqrt(s);
}

// --- Attack drivers --------------------------------------------------------------

struct AttackArtifact {
    GnnModel model;
    TriggerHandle trigger;
    AttackConfig config;
    std::vector<int> host_ids;            // inductive: adversary non-target graph indices
    std::vector<std::vector<int>> sites;  // parallel to host_ids, or sampled sites
    std::vector<double> atk_curve;
    std::vector<double> ret_curve;
    bool converged = false;
    int iters_run = 0;
};

namespace detail {

// Model steps per outer iteration under the inner/outer ratio: n_io >= 1 runs
// round(n_io) steps every iteration, fractional n_io runs one step every
// round(1/n_io) iterations.
inline int theta_steps_this_iter(double n_io, int iter) {
    if (n_io >= 1.0) return static_cast<int>(std::lround(n_io));
    if (n_io <= 0.0) return 0;
    int period = static_cast<int>(std::lround(1.0 / n_io));
    if (period < 1) period = 1;
    return iter % period == 0 ? 1 : 0;
}

inline std::vector<Tensor> clone_tensors(const std::vector<Tensor>& ts) {
    std::vector<Tensor> out;
    out.reserve(ts.size());
    for (const auto& t : ts) {
        Tensor c = Tensor::from_values(t.rows(), t.cols(), t.values());
        out.push_back(t.requires_grad() ? c.as_param() : c);
    }
    return out;
}

}  // namespace detail

// Deployment-time embedding: picks the site by alternating trigger emission
// with mismatch-minimizing placement, then hard-substitutes the trigger.
struct EmbeddedGraph {
    Graph graph;
    std::vector<int> site;
};

inline EmbeddedGraph embed_trigger(const TriggerHandle& trig, const ConstraintSet& cs,
                                   const Graph& g, int n_iter, double tau, Rng& rng) {
    require(g.n >= trig.n_trigger, "embed_trigger: host smaller than trigger");
    std::vector<int> site = rng.sample_indices(g.n, trig.n_trigger);
    TriggerInstance t = trig.emit(g, site, tau);
    for (int round = 0; round < n_iter; ++round) {
        std::vector<int> next = find_best_site(g, t.adj, trig.n_trigger).nodes;
        bool moved = next != site;
        site = next;
        t = trig.emit(g, site, tau);
        if (!moved) break;
    }
    EmbeddedGraph out;
    out.site = site;
    out.graph = substitute(g, site, apply_constraints_hard(g, site, t, cs, trig.feature_mask));
    return out;
}

// Algorithm 1 (inductive). Alternates inner model descent on the retention
// loss, one look-ahead trigger step, and per-host site refreshes; the model
// estimate is periodically replaced by a fresh retrain on the current trigger.
inline AttackArtifact run_inductive(const Dataset& ds, const std::vector<int>& adv_idx,
                                    const GnnModel& clean, const AttackConfig& cfg,
                                    std::uint64_t seed) {
    cfg.validate();
    require(!ds.transductive, "run_inductive: needs a graph-classification dataset");
    require(cfg.target_class < ds.num_classes, "run_inductive: target class out of range");
    for (int i : adv_idx)
        require(ds.by_index(i).n >= cfg.n_trigger, "run_inductive: host smaller than trigger");

    Rng root(seed);
    Rng rng_init = root.substream("trigger_init");
    Rng rng_sites = root.substream("sites");
    Rng rng_pairs = root.substream("pairs");

    ClassPartition part = partition_by_class(ds, adv_idx, cfg.target_class);
    TriggerHandle trig = init_trigger(cfg, ds.feat_dim, rng_init);
    GnnModel model = clone_model(clean);
    std::vector<Tensor> clean_emb = clean_graph_embeddings(clean, ds, adv_idx);

    std::vector<std::vector<int>> sites;
    sites.reserve(part.nontarget.size());
    for (int i : part.nontarget)
        sites.push_back(rng_sites.sample_indices(ds.by_index(i).n, cfg.n_trigger));

    if (cfg.n_mask < 1.0)
        trig.feature_mask = select_feature_mask(clean, ds, part.nontarget, sites,
                                                cfg.target_class, cfg.n_mask);

    const auto theta_names = model.param_names(false, true);
    auto ret_loss_at = [&](const std::vector<Tensor>& th) {
        GnnModel mm = model;
        mm.adopt(theta_names, th);
        return loss_ret_inductive(mm, clean_emb, ds, adv_idx);
    };
    auto atk_loss_at = [&](const std::vector<Tensor>& th, const std::vector<Tensor>& om,
                           const std::vector<PairSample>& pairs) {
        GnnModel mm = model;
        mm.adopt(theta_names, th);
        TriggerHandle tt = trig;
        tt.adopt(om);
        return loss_atk_inductive(mm, tt, cfg.constraints, ds, part.nontarget, sites, pairs,
                                  cfg.tau);
    };

    Optimizer theta_opt = Optimizer::adam(cfg.theta_lr);
    Optimizer omega_opt = Optimizer::adam(cfg.omega_lr);
    auto theta_step = [&]() {
        std::vector<Tensor> th = model.feature_params();
        GradientTape tape;
        Tensor loss = ret_loss_at(th);
        GradMap grads = tape.backward(loss);
        theta_opt.step(th, grads);
        model.adopt(theta_names, th);
    };

    AttackArtifact art;
    art.config = cfg;
    art.host_ids = part.nontarget;
    for (int it = 1; it <= cfg.outer_iters; ++it) {
        art.iters_run = it;

        for (int s = 0; s < detail::theta_steps_this_iter(cfg.n_io, it); ++s) theta_step();

        std::vector<PairSample> pairs = sample_pairs(part.nontarget, part.target, rng_pairs);
        BilevelLosses losses;
        losses.ret = [&](const std::vector<Tensor>& th, const std::vector<Tensor>&) {
            return ret_loss_at(th);
        };
        losses.atk = [&](const std::vector<Tensor>& th, const std::vector<Tensor>& om) {
            return atk_loss_at(th, om, pairs);
        };
        std::vector<Tensor> theta = model.feature_params();
        std::vector<Tensor> omega = trig.params();
        GradMap og = lookahead_grad(losses, theta, omega, cfg.xi, cfg.epsilon);
        if (grad_norm(og, omega) < cfg.grad_tol) {
            art.converged = true;
        } else {
            omega_opt.step(omega, og);
            trig.adopt(omega);
        }

        // Site refresh: re-emit at the current site, re-place by edit
        // distance, and repeat until the placement stops moving.
        for (std::size_t gi = 0; gi < sites.size(); ++gi) {
            const Graph& host = ds.by_index(part.nontarget[gi]);
            for (int round = 0; round < cfg.n_iter * cfg.stabilization_rounds; ++round) {
                TriggerInstance t = trig.emit(host, sites[gi], cfg.tau);
                std::vector<int> next = find_best_site(host, t.adj, cfg.n_trigger).nodes;
                if (next == sites[gi]) break;
                sites[gi] = next;
            }
        }

        if (!art.converged && it % cfg.reset_period == 0) {
            model.adopt(theta_names, detail::clone_tensors(clean.feature_params()));
            theta_opt = Optimizer::adam(cfg.theta_lr);
            for (int e = 0; e < cfg.reset_epochs; ++e) theta_step();
        }

        art.atk_curve.push_back(
            atk_loss_at(model.feature_params(), trig.params(), pairs).item());
        art.ret_curve.push_back(ret_loss_at(model.feature_params()).item());
        if (art.converged) break;
    }

    art.model = model;
    art.trigger = trig;
    art.sites = sites;
    return art;
}

// Random connected site: breadth-first growth from a random start, falling
// back to arbitrary unused nodes when the component is exhausted.
inline std::vector<int> sample_connected_site(const Graph& g, int n_t, Rng& rng) {
    require(g.n >= n_t, "sample_connected_site: host smaller than trigger");
    std::vector<std::uint8_t> used(g.n, 0);
    std::vector<int> site;
    std::vector<int> frontier;
    int start = static_cast<int>(rng.uniform() * g.n);
    frontier.push_back(start);
    used[start] = 1;
    while (static_cast<int>(site.size()) < n_t) {
        if (frontier.empty()) {
            std::vector<int> rest;
            for (int v = 0; v < g.n; ++v)
                if (!used[v]) rest.push_back(v);
            rng.shuffle(rest);
            for (int v : rest) {
                if (static_cast<int>(site.size()) >= n_t) break;
                site.push_back(v);
                used[v] = 1;
            }
            break;
        }
        int pick = static_cast<int>(rng.uniform() * frontier.size());
        int u = frontier[pick];
        frontier.erase(frontier.begin() + pick);
        site.push_back(u);
        for (int v = 0; v < g.n; ++v)
            if (g.has_edge(u, v) && !used[v]) {
                used[v] = 1;
                frontier.push_back(v);
            }
    }
    std::sort(site.begin(), site.end());
    return site;
}

// Algorithm 3 (transductive). Sites are fixed up front; the model itself is
// part of the release, so every parameter participates in the inner descent.
inline AttackArtifact run_transductive(const Dataset& ds, const GnnModel& clean,
                                       const AttackConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    require(ds.transductive && ds.graphs.size() == 1,
            "run_transductive: needs a single node-labelled graph");
    const Graph& g = ds.graphs[0];
    require(cfg.target_class < ds.num_classes, "run_transductive: target class out of range");
    auto lab_it = ds.splits.find("labelled");
    require(lab_it != ds.splits.end(), "run_transductive: dataset lacks a labelled split");

    Rng root(seed);
    Rng rng_init = root.substream("trigger_init");
    Rng rng_sites = root.substream("sites");

    TriggerHandle trig = init_trigger(cfg, ds.feat_dim, rng_init);
    std::vector<std::vector<int>> sites;
    for (int s = 0; s < cfg.n_sites; ++s)
        sites.push_back(sample_connected_site(g, cfg.n_trigger, rng_sites));

    GnnModel model = clone_model(clean);
    TransductiveContext ctx = TransductiveContext::build(g, clean, lab_it->second, sites,
                                                         cfg.k_hops);

    if (cfg.n_mask < 1.0)
        trig.feature_mask = select_feature_mask(clean, ctx, cfg.target_class, cfg.n_mask);

    const auto theta_names = model.param_names();
    auto loss_at = [&](const std::vector<Tensor>& th, const std::vector<Tensor>& om,
                       TransMode mode) {
        GnnModel mm = model;
        mm.adopt(theta_names, th);
        TriggerHandle tt = trig;
        tt.adopt(om);
        return loss_transductive(mm, tt, cfg.constraints, ctx, cfg.target_class, cfg.tau, mode);
    };

    Optimizer theta_opt = Optimizer::adam(cfg.theta_lr);
    Optimizer omega_opt = Optimizer::adam(cfg.omega_lr);
    auto theta_step = [&]() {
        std::vector<Tensor> th = model.all_params();
        GradientTape tape;
        Tensor loss = loss_at(th, trig.params(), TransMode::Ret);
        GradMap grads = tape.backward(loss);
        theta_opt.step(th, grads);
        model.adopt(theta_names, th);
    };

    AttackArtifact art;
    art.config = cfg;
    for (int it = 1; it <= cfg.outer_iters; ++it) {
        art.iters_run = it;

        for (int s = 0; s < detail::theta_steps_this_iter(cfg.n_io, it); ++s) theta_step();

        BilevelLosses losses;
        losses.ret = [&](const std::vector<Tensor>& th, const std::vector<Tensor>& om) {
            return loss_at(th, om, TransMode::Ret);
        };
        losses.atk = [&](const std::vector<Tensor>& th, const std::vector<Tensor>& om) {
            return loss_at(th, om, TransMode::Atk);
        };
        std::vector<Tensor> theta = model.all_params();
        std::vector<Tensor> omega = trig.params();
        GradMap og = lookahead_grad(losses, theta, omega, cfg.xi, cfg.epsilon);
        if (grad_norm(og, omega) < cfg.grad_tol) {
            art.converged = true;
        } else {
            omega_opt.step(omega, og);
            trig.adopt(omega);
        }

        if (!art.converged && it % cfg.reset_period == 0) {
            model.adopt(theta_names, detail::clone_tensors(clean.all_params()));
            theta_opt = Optimizer::adam(cfg.theta_lr);
            for (int e = 0; e < cfg.reset_epochs; ++e) theta_step();
        }

        art.atk_curve.push_back(
            loss_at(model.all_params(), trig.params(), TransMode::Atk).item());
        art.ret_curve.push_back(
            loss_at(model.all_params(), trig.params(), TransMode::Ret).item());
        if (art.converged) break;
    }

    art.model = model;
    art.trigger = trig;
    art.sites = sites;
    return art;
}

// Refreshes the pre-training head on pre-training data while leaving the
// feature extractor untouched, hiding the attack from upstream validation.
inline std::vector<double> restore_model(AttackArtifact& art, const Dataset& pretrain,
                                         const std::vector<int>& idx, int epochs, Rng& rng) {
    std::vector<Tensor> before = art.model.feature_params();
    std::vector<double> curve =
        fine_tune(art.model, pretrain, idx, TuneMode::Partial, epochs, rng);
    std::vector<Tensor> after = art.model.feature_params();
    for (std::size_t i = 0; i < before.size(); ++i)
        require(before[i].values() == after[i].values(),
                "restore_model: feature extractor drifted");
    return curve;
}

// --- Artifact serialization -------------------------------------------------------

inline nlohmann::json constraints_to_json(const ConstraintSet& cs) {
    nlohmann::json j;
    j["edge_mask"] = cs.edge_mask;
    j["addition_only"] = cs.addition_only;
    j["deletion_only"] = cs.deletion_only;
    j["magnitude_weight"] = cs.magnitude_weight;
    j["cardinality_weight"] = cs.cardinality_weight;
    return j;
}

inline ConstraintSet constraints_from_json(const nlohmann::json& j) {
    ConstraintSet cs;
    cs.edge_mask = j.at("edge_mask").get<std::vector<std::uint8_t>>();
    cs.addition_only = j.at("addition_only").get<bool>();
    cs.deletion_only = j.at("deletion_only").get<bool>();
    cs.magnitude_weight = j.at("magnitude_weight").get<double>();
    cs.cardinality_weight = j.at("cardinality_weight").get<double>();
    return cs;
}

inline nlohmann::json attack_config_to_json(const AttackConfig& cfg) {
    nlohmann::json j;
    j["source"] = trigger_source_name(cfg.source);
    j["target_class"] = cfg.target_class;
    j["n_trigger"] = cfg.n_trigger;
    j["n_io"] = cfg.n_io;
    j["n_mask"] = cfg.n_mask;
    j["n_iter"] = cfg.n_iter;
    j["xi"] = cfg.xi;
    j["epsilon"] = cfg.epsilon;
    j["reset_period"] = cfg.reset_period;
    j["stabilization_rounds"] = cfg.stabilization_rounds;
    j["outer_iters"] = cfg.outer_iters;
    j["reset_epochs"] = cfg.reset_epochs;
    j["theta_lr"] = cfg.theta_lr;
    j["omega_lr"] = cfg.omega_lr;
    j["grad_tol"] = cfg.grad_tol;
    j["tau"] = cfg.tau;
    j["n_sites"] = cfg.n_sites;
    j["k_hops"] = cfg.k_hops;
    j["constraints"] = constraints_to_json(cfg.constraints);
    return j;
}

inline AttackConfig attack_config_from_json(const nlohmann::json& j) {
    AttackConfig cfg;
    cfg.source = trigger_source_from_name(j.at("source").get<std::string>());
    cfg.target_class = j.at("target_class").get<int>();
    cfg.n_trigger = j.at("n_trigger").get<int>();
    cfg.n_io = j.at("n_io").get<double>();
    cfg.n_mask = j.at("n_mask").get<double>();
    cfg.n_iter = j.at("n_iter").get<int>();
    cfg.xi = j.at("xi").get<double>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.reset_period = j.at("reset_period").get<int>();
    cfg.stabilization_rounds = j.at("stabilization_rounds").get<int>();
    cfg.outer_iters = j.at("outer_iters").get<int>();
    cfg.reset_epochs = j.at("reset_epochs").get<int>();
    cfg.theta_lr = j.at("theta_lr").get<double>();
    cfg.omega_lr = j.at("omega_lr").get<double>();
    cfg.grad_tol = j.at("grad_tol").get<double>();
    cfg.tau = j.at("tau").get<double>();
    cfg.n_sites = j.at("n_sites").get<int>();
    cfg.k_hops = j.at("k_hops").get<int>();
    cfg.constraints = constraints_from_json(j.at("constraints"));
    cfg.validate();
    return cfg;
}

inline nlohmann::json trigger_to_json(const TriggerHandle& t) {
    nlohmann::json j;
    j["source"] = trigger_source_name(t.source);
    j["n_trigger"] = t.n_trigger;
    j["feature_mask"] = t.feature_mask;
    if (t.source == TriggerSource::Gta) {
        j["d"] = t.gen.d;
        j["w_att"] = tensor_to_json(t.gen.w_att);
        j["a_src"] = tensor_to_json(t.gen.a_src);
        j["a_dst"] = tensor_to_json(t.gen.a_dst);
        j["w_c"] = tensor_to_json(t.gen.w_c);
        j["w_f"] = tensor_to_json(t.gen.w_f);
        j["b_f"] = tensor_to_json(t.gen.b_f);
    } else {
        j["feat_logits"] = tensor_to_json(t.uni.feat_logits);
        if (t.source == TriggerSource::BlII) j["adj_logits"] = tensor_to_json(t.uni.adj_logits);
        j["feat_dim"] = t.uni.feat_dim;
    }
    return j;
}

inline TriggerHandle trigger_from_json(const nlohmann::json& j) {
    TriggerHandle t;
    t.source = trigger_source_from_name(j.at("source").get<std::string>());
    t.n_trigger = j.at("n_trigger").get<int>();
    t.feature_mask = j.at("feature_mask").get<std::vector<std::uint8_t>>();
    if (t.source == TriggerSource::Gta) {
        t.gen.d = j.at("d").get<int>();
        t.gen.w_att = tensor_from_json(j.at("w_att"), true);
        t.gen.a_src = tensor_from_json(j.at("a_src"), true);
        t.gen.a_dst = tensor_from_json(j.at("a_dst"), true);
        t.gen.w_c = tensor_from_json(j.at("w_c"), true);
        t.gen.w_f = tensor_from_json(j.at("w_f"), true);
        t.gen.b_f = tensor_from_json(j.at("b_f"), true);
    } else {
        t.uni.kind = t.source == TriggerSource::BlI ? BaselineKind::BlI : BaselineKind::BlII;
        t.uni.n = t.n_trigger;
        t.uni.feat_dim = j.at("feat_dim").get<int>();
        t.uni.feat_logits = tensor_from_json(j.at("feat_logits"), true);
        if (t.source == TriggerSource::BlII)
            t.uni.adj_logits = tensor_from_json(j.at("adj_logits"), true);
    }
    return t;
}

inline nlohmann::json artifact_to_json(const AttackArtifact& art) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = "attack_artifact";
    j["config"] = attack_config_to_json(art.config);
    j["model"] = model_to_json(art.model);
    j["trigger"] = trigger_to_json(art.trigger);
    j["host_ids"] = art.host_ids;
    j["sites"] = art.sites;
    j["atk_curve"] = art.atk_curve;
    j["ret_curve"] = art.ret_curve;
    j["converged"] = art.converged;
    j["iters_run"] = art.iters_run;
    return j;
}

inline AttackArtifact artifact_from_json(const nlohmann::json& j) {
    require(j.at("kind").get<std::string>() == "attack_artifact",
            "attack artifact: wrong kind tag");
    require(j.at("schema_version").get<int>() == 1,
            "attack artifact: unsupported schema version");
    AttackArtifact art;
    art.config = attack_config_from_json(j.at("config"));
    art.model = model_from_json(j.at("model"));
    art.trigger = trigger_from_json(j.at("trigger"));
    art.host_ids = j.at("host_ids").get<std::vector<int>>();
    art.sites = j.at("sites").get<std::vector<std::vector<int>>>();
    art.atk_curve = j.at("atk_curve").get<std::vector<double>>();
    art.ret_curve = j.at("ret_curve").get<std::vector<double>>();
    art.converged = j.at("converged").get<bool>();
    art.iters_run = j.at("iters_run").get<int>();
    return art;
}

inline void save_artifact(const AttackArtifact& art, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "save_artifact: cannot open '" + path + "'");
    out << artifact_to_json(art).dump(2) << "\n";
    require(out.good(), "save_artifact: write failed for '" + path + "'");
}

inline AttackArtifact load_artifact(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw DataError("load_artifact: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_artifact: bad JSON in '" + path + "': " + e.what());
    }
    try {
        return artifact_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_artifact: malformed artifact in '" + path + "': " + e.what());
    }
}

}  // namespace gtlab
