#pragma once

// Trigger parameterizations: the adaptive generator (attention encoder with a
// cosine-similarity topology head and an affine feature head) and the two
// universal baselines. Soft outputs stay on the gradient tape; hard outputs
// are plain values for deployment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gtlab/common.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/rng.hpp"
#include "gtlab/tensor.hpp"

namespace gtlab {

constexpr double kTopologyTau = 10.0;

enum class FeatureAct { Sigmoid, Clamp01 };

struct TriggerInstance {
    int n = 0;
    int feat_dim = 0;
    std::vector<std::uint8_t> adj;  // hard topology, n*n
    Tensor soft_adj;                // relaxed topology, n x n
    Tensor features;                // n x feat_dim, continuous

    SubgraphPatch patch() const {
        SubgraphPatch p;
        p.n = n;
        p.feat_dim = feat_dim;
        p.adj = adj;
        p.features = features.values();
        p.validate();
        return p;
    }
};

// --- Adaptive generator -------------------------------------------------------

struct GeneratorParams {
    int d = 0;  // encoding dim == data feature dim
    FeatureAct act = FeatureAct::Sigmoid;
    Tensor w_att;   // d x d
    Tensor a_src;   // d x 1
    Tensor a_dst;   // d x 1
    Tensor w_c;     // d x d
    Tensor w_f;     // d x d
    Tensor b_f;     // 1 x d

    std::vector<Tensor> all() const { return {w_att, a_src, a_dst, w_c, w_f, b_f}; }

    void adopt(const std::vector<Tensor>& ts) {
        require(ts.size() == 6, "GeneratorParams::adopt: expected 6 tensors");
        w_att = ts[0];
        a_src = ts[1];
        a_dst = ts[2];
        w_c = ts[3];
        w_f = ts[4];
        b_f = ts[5];
    }
};

inline GeneratorParams init_generator(int feat_dim, Rng& rng,
                                      FeatureAct act = FeatureAct::Sigmoid) {
    require(feat_dim > 0, "init_generator: feat_dim must be positive");
    auto glorot = [&](int r, int c) {
        double limit = std::sqrt(6.0 / (r + c));
        std::vector<double> v(static_cast<std::size_t>(r) * c);
        for (auto& x : v) x = rng.uniform(-limit, limit);
        return Tensor::from_values(r, c, std::move(v)).as_param();
    };
    GeneratorParams p;
    p.d = feat_dim;
    p.act = act;
    p.w_att = glorot(feat_dim, feat_dim);
    p.a_src = glorot(feat_dim, 1);
    p.a_dst = glorot(feat_dim, 1);
    p.w_c = glorot(feat_dim, feat_dim);
    p.w_f = glorot(feat_dim, feat_dim);
    p.b_f = Tensor::zeros(1, feat_dim).as_param();
    return p;
}

// One attention layer over the whole host graph (so site encodings see their
// context), returning the site rows.
inline Tensor encode_subgraph(const GeneratorParams& p, const Tensor& adj, const Tensor& x,
                              const std::vector<int>& site) {
    require(adj.rows() == adj.cols() && adj.rows() == x.rows(),
            "encode_subgraph: adjacency/feature shape mismatch");
    require(x.cols() == p.d, "encode_subgraph: feature dim mismatch");
    const int n = adj.rows();
    require(!site.empty(), "encode_subgraph: empty site");
    std::vector<int> seen = site;
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        require(seen[i] >= 0 && seen[i] < n, "encode_subgraph: site node out of range");
        require(i == 0 || seen[i] != seen[i - 1], "encode_subgraph: duplicate site node");
    }
    Tensor eye = [&] {
        std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
        return Tensor::from_values(n, n, std::move(v));
    }();
    Tensor h = matmul(x, p.w_att);
    Tensor s = matmul(h, p.a_src);
    Tensor t = matmul(h, p.a_dst);
    Tensor e = leaky_relu(
        add(matmul(s, Tensor::ones(1, n)), matmul(Tensor::ones(n, 1), transpose(t))), 0.2);
    Tensor alpha = weighted_softmax_rows(e, add(adj, eye));
    Tensor z = relu(matmul(alpha, h));
    return gather_rows(z, site);
}

inline Tensor encode_subgraph(const GeneratorParams& p, const Graph& g,
                              const std::vector<int>& site) {
    return encode_subgraph(p, adjacency_tensor(g), features_tensor(g), site);
}

// Relaxed topology head: sigmoid(tau * (cos_{W_c}(z_i, z_j) - 1/2)) with zero
// diagonal. The epsilon keeps zero-norm encodings defined (cosine ~0, firmly
// below the edge threshold).
inline Tensor generate_topology_soft(const Tensor& w_c, const Tensor& z,
                                     double tau = kTopologyTau) {
    require(z.rows() >= 2, "generate_topology_soft: need at least two encodings");
    require(z.cols() == w_c.rows() && w_c.rows() == w_c.cols(),
            "generate_topology_soft: shape mismatch");
    const int n = z.rows();
    Tensor u = matmul(z, transpose(w_c));
    Tensor dots = matmul(u, transpose(u));
    Tensor norm = pow_scalar(add_scalar(rowsum(mul(u, u)), 1e-24), 0.5);
    Tensor nn = matmul(norm, transpose(norm));
    Tensor cosine = div(dots, nn);
    Tensor soft = sigmoid(scale(add_scalar(cosine, -0.5), tau));
    std::vector<double> offdiag(static_cast<std::size_t>(n) * n, 1.0);
    for (int i = 0; i < n; ++i) offdiag[static_cast<std::size_t>(i) * n + i] = 0.0;
    return mul(soft, Tensor::from_values(n, n, std::move(offdiag)));
}

// Hard topology via the exact inequality dot(W_c z_i, W_c z_j) >= |W_c z_i|
// |W_c z_j| / 2; zero-norm encodings produce no edges.
inline std::vector<std::uint8_t> generate_topology_hard(const Tensor& w_c, const Tensor& z) {
    require(z.rows() >= 2, "generate_topology_hard: need at least two encodings");
    require(z.cols() == w_c.rows() && w_c.rows() == w_c.cols(),
            "generate_topology_hard: shape mismatch");
    const int n = z.rows(), d = z.cols();
    std::vector<std::vector<double>> u(n, std::vector<double>(d, 0.0));
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) u[i][r] += w_c.at(r, c) * z.at(i, c);
    std::vector<double> norm(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int r = 0; r < d; ++r) s += u[i][r] * u[i][r];
        norm[i] = std::sqrt(s);
    }
    std::vector<std::uint8_t> hard(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (norm[i] == 0.0 || norm[j] == 0.0) continue;
            double dot = 0.0;
            for (int r = 0; r < d; ++r) dot += u[i][r] * u[j][r];
            if (dot >= 0.5 * norm[i] * norm[j]) {
                hard[static_cast<std::size_t>(i) * n + j] = 1;
                hard[static_cast<std::size_t>(j) * n + i] = 1;
            }
        }
    return hard;
}

inline Tensor generate_features(const GeneratorParams& p, const Tensor& z) {
    require(z.cols() == p.d, "generate_features: encoding dim mismatch");
    Tensor pre = add_rowvec(matmul(z, transpose(p.w_f)), p.b_f);
    return p.act == FeatureAct::Sigmoid ? sigmoid(pre) : clamp(pre, 0.0, 1.0);
}

// Full adaptive trigger for one placement site.
inline TriggerInstance generate_trigger(const GeneratorParams& p, const Graph& g,
                                        const std::vector<int>& site,
                                        double tau = kTopologyTau) {
    TriggerInstance t;
    t.n = static_cast<int>(site.size());
    t.feat_dim = p.d;
    Tensor z = encode_subgraph(p, g, site);
    t.soft_adj = generate_topology_soft(p.w_c, z, tau);
    t.adj = generate_topology_hard(p.w_c, z);
    t.features = generate_features(p, z);
    return t;
}

// --- Universal baselines --------------------------------------------------------

enum class BaselineKind { BlI, BlII };

// BL-I: complete topology, one shared feature row. BL-II: learned soft
// adjacency plus per-node feature rows. Both are input-independent; free
// parameters live in logit space so emitted values stay in [0, 1].
struct UniversalTrigger {
    BaselineKind kind = BaselineKind::BlI;
    int n = 0;
    int feat_dim = 0;
    FeatureAct act = FeatureAct::Sigmoid;
    Tensor feat_logits;  // BL-I: 1 x d; BL-II: n x d
    Tensor adj_logits;   // BL-II only: n x n, used as symmetrized upper triangle

    std::vector<Tensor> all() const {
        if (kind == BaselineKind::BlI) return {feat_logits};
        return {feat_logits, adj_logits};
    }

    void adopt(const std::vector<Tensor>& ts) {
        require(ts.size() == all().size(), "UniversalTrigger::adopt: arity mismatch");
        feat_logits = ts[0];
        if (kind == BaselineKind::BlII) adj_logits = ts[1];
    }
};

inline UniversalTrigger init_universal(BaselineKind kind, int n_trigger, int feat_dim,
                                       Rng& rng, FeatureAct act = FeatureAct::Sigmoid) {
    require(n_trigger >= 2, "init_universal: trigger needs at least two nodes");
    require(feat_dim > 0, "init_universal: feat_dim must be positive");
    UniversalTrigger u;
    u.kind = kind;
    u.n = n_trigger;
    u.feat_dim = feat_dim;
    u.act = act;
    int rows = kind == BaselineKind::BlI ? 1 : n_trigger;
    std::vector<double> fv(static_cast<std::size_t>(rows) * feat_dim);
    for (auto& v : fv) v = rng.uniform(-0.5, 0.5);
    u.feat_logits = Tensor::from_values(rows, feat_dim, std::move(fv)).as_param();
    if (kind == BaselineKind::BlII) {
        std::vector<double> av(static_cast<std::size_t>(n_trigger) * n_trigger);
        for (auto& v : av) v = rng.uniform(-0.5, 0.5);
        u.adj_logits = Tensor::from_values(n_trigger, n_trigger, std::move(av)).as_param();
    }
    return u;
}

inline TriggerInstance emit_universal(const UniversalTrigger& u) {
    TriggerInstance t;
    t.n = u.n;
    t.feat_dim = u.feat_dim;
    Tensor feat_rows = u.act == FeatureAct::Sigmoid ? sigmoid(u.feat_logits)
                                                    : clamp(u.feat_logits, 0.0, 1.0);
    if (u.kind == BaselineKind::BlI) {
        t.features = matmul(Tensor::ones(u.n, 1), feat_rows);
        std::vector<double> soft(static_cast<std::size_t>(u.n) * u.n, 1.0);
        t.adj.assign(static_cast<std::size_t>(u.n) * u.n, 1);
        for (int i = 0; i < u.n; ++i) {
            soft[static_cast<std::size_t>(i) * u.n + i] = 0.0;
            t.adj[static_cast<std::size_t>(i) * u.n + i] = 0;
        }
        t.soft_adj = Tensor::from_values(u.n, u.n, std::move(soft));
    } else {
        t.features = feat_rows;
        Tensor sym = scale(add(u.adj_logits, transpose(u.adj_logits)), 0.5);
        std::vector<double> offdiag(static_cast<std::size_t>(u.n) * u.n, 1.0);
        for (int i = 0; i < u.n; ++i) offdiag[static_cast<std::size_t>(i) * u.n + i] = 0.0;
        t.soft_adj = mul(sigmoid(sym), Tensor::from_values(u.n, u.n, offdiag));
        t.adj.assign(static_cast<std::size_t>(u.n) * u.n, 0);
        for (int i = 0; i < u.n; ++i)
            for (int j = 0; j < u.n; ++j)
                if (i != j && t.soft_adj.at(i, j) >= 0.5)
                    t.adj[static_cast<std::size_t>(i) * u.n + j] = 1;
    }
    return t;
}

// --- Feature masks ----------------------------------------------------------------

// v_msk marks perturbable coordinates: 1 takes the trigger value, 0 keeps the
// original. Cardinality is fixed at round(fraction * d).
inline std::vector<std::uint8_t> make_feature_mask(int feat_dim, double fraction, Rng& rng) {
    require(feat_dim > 0, "make_feature_mask: feat_dim must be positive");
    require(fraction >= 0.0 && fraction <= 1.0, "make_feature_mask: fraction outside [0, 1]");
    int k = static_cast<int>(std::lround(fraction * feat_dim));
    std::vector<std::uint8_t> mask(feat_dim, 0);
    for (int idx : rng.sample_indices(feat_dim, k)) mask[idx] = 1;
    return mask;
}

inline Tensor apply_feature_mask(const Tensor& original, const Tensor& trigger_feats,
                                 const std::vector<std::uint8_t>& v_msk) {
    require(original.rows() == trigger_feats.rows() && original.cols() == trigger_feats.cols(),
            "apply_feature_mask: shape mismatch");
    require(static_cast<int>(v_msk.size()) == original.cols(),
            "apply_feature_mask: mask length mismatch");
    std::vector<double> keep(static_cast<std::size_t>(original.rows()) * original.cols());
    std::vector<double> take(keep.size());
    for (int i = 0; i < original.rows(); ++i)
        for (int j = 0; j < original.cols(); ++j) {
            std::size_t at = static_cast<std::size_t>(i) * original.cols() + j;
            keep[at] = v_msk[j] ? 0.0 : 1.0;
            take[at] = v_msk[j] ? 1.0 : 0.0;
        }
    return add(mul(original, Tensor::from_values(original.rows(), original.cols(), keep)),
               mul(trigger_feats, Tensor::from_values(original.rows(), original.cols(), take)));
}

}  // namespace gtlab
