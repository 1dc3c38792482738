#pragma once

// Graph neural networks over dense adjacency tensors. The forward pass stays
// differentiable in the adjacency and feature inputs, which is what lets
// trigger optimization push gradients through an embedded subgraph.

#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtlab/common.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/optim.hpp"
#include "gtlab/rng.hpp"
#include "gtlab/tensor.hpp"

namespace gtlab {

enum class GnnArch { Gcn, Sage, Gat };
enum class Readout { Mean, Sum };

inline std::string arch_name(GnnArch a) {
    switch (a) {
        case GnnArch::Gcn: return "gcn";
        case GnnArch::Sage: return "sage";
        case GnnArch::Gat: return "gat";
    }
    return "gcn";
}

inline GnnArch arch_from_name(const std::string& s) {
    if (s == "gcn") return GnnArch::Gcn;
    if (s == "sage") return GnnArch::Sage;
    if (s == "gat") return GnnArch::Gat;
    throw DataError("unknown architecture '" + s + "'");
}

struct GnnConfig {
    GnnArch arch = GnnArch::Gcn;
    int layers = 2;
    int in_dim = 0;
    int hidden = 16;
    int heads = 3;  // GAT only
    Readout readout = Readout::Mean;
    int classes = 2;
    double dropout = 0.5;
    double lr = 0.01;
    double weight_decay = 5e-4;
    int batch_size = 32;

    bool operator==(const GnnConfig& o) const {
        return arch == o.arch && layers == o.layers && in_dim == o.in_dim &&
               hidden == o.hidden && heads == o.heads && readout == o.readout &&
               classes == o.classes;
    }
};

// Model = feature extractor f (aggregation layers) plus a one-layer softmax
// classifier h. Parameters are named so checkpoints stay readable.
struct GnnModel {
    GnnConfig cfg;
    std::vector<std::pair<std::string, Tensor>> named;

    Tensor& param(const std::string& name) {
        for (auto& [n, t] : named)
            if (n == name) return t;
        throw UsageError("GnnModel: unknown parameter '" + name + "'");
    }

    const Tensor& param(const std::string& name) const {
        for (const auto& [n, t] : named)
            if (n == name) return t;
        throw UsageError("GnnModel: unknown parameter '" + name + "'");
    }

    std::vector<Tensor> feature_params() const {
        std::vector<Tensor> out;
        for (const auto& [n, t] : named)
            if (n.rfind("cls.", 0) != 0) out.push_back(t);
        return out;
    }

    std::vector<Tensor> head_params() const {
        std::vector<Tensor> out;
        for (const auto& [n, t] : named)
            if (n.rfind("cls.", 0) == 0) out.push_back(t);
        return out;
    }

    std::vector<Tensor> all_params() const {
        std::vector<Tensor> out;
        for (const auto& [n, t] : named) out.push_back(t);
        return out;
    }

    // Writes updated tensors back into named slots after an optimizer step.
    void adopt(const std::vector<std::string>& names, const std::vector<Tensor>& ts) {
        require(names.size() == ts.size(), "GnnModel::adopt: length mismatch");
        for (std::size_t i = 0; i < names.size(); ++i) param(names[i]) = ts[i];
    }

    std::vector<std::string> param_names(bool head_only = false,
                                         bool feature_only = false) const {
        std::vector<std::string> out;
        for (const auto& [n, t] : named) {
            bool is_head = n.rfind("cls.", 0) == 0;
            if (head_only && !is_head) continue;
            if (feature_only && is_head) continue;
            out.push_back(n);
        }
        return out;
    }
};

namespace detail {

inline Tensor glorot(Rng& rng, int rows, int cols) {
    double limit = std::sqrt(6.0 / (rows + cols));
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (auto& x : v) x = rng.uniform(-limit, limit);
    return Tensor::from_values(rows, cols, std::move(v)).as_param();
}

inline int gat_head_dim(const GnnConfig& cfg) { return cfg.hidden; }

}  // namespace detail

inline GnnModel init_model(const GnnConfig& cfg, Rng& rng) {
    require(cfg.in_dim > 0, "init_model: in_dim not set");
    require(cfg.layers >= 1, "init_model: need at least one layer");
    require(cfg.classes >= 2, "init_model: need at least two classes");
    GnnModel m;
    m.cfg = cfg;
    int in = cfg.in_dim;
    for (int k = 0; k < cfg.layers; ++k) {
        std::string pre = arch_name(cfg.arch) + std::to_string(k) + ".";
        if (cfg.arch == GnnArch::Gcn) {
            m.named.push_back({pre + "w", detail::glorot(rng, in, cfg.hidden)});
            m.named.push_back({pre + "b", Tensor::zeros(1, cfg.hidden).as_param()});
            in = cfg.hidden;
        } else if (cfg.arch == GnnArch::Sage) {
            m.named.push_back({pre + "w_self", detail::glorot(rng, in, cfg.hidden)});
            m.named.push_back({pre + "w_neigh", detail::glorot(rng, in, cfg.hidden)});
            m.named.push_back({pre + "b", Tensor::zeros(1, cfg.hidden).as_param()});
            in = cfg.hidden;
        } else {
            require(cfg.heads >= 1, "init_model: GAT needs at least one head");
            int dh = detail::gat_head_dim(cfg);
            for (int h = 0; h < cfg.heads; ++h) {
                std::string hp = pre + "h" + std::to_string(h) + ".";
                m.named.push_back({hp + "w", detail::glorot(rng, in, dh)});
                m.named.push_back({hp + "a_src", detail::glorot(rng, dh, 1)});
                m.named.push_back({hp + "a_dst", detail::glorot(rng, dh, 1)});
            }
            bool last = k == cfg.layers - 1;
            in = last ? dh : dh * cfg.heads;
        }
    }
    m.named.push_back({"cls.w", detail::glorot(rng, in, cfg.classes)});
    m.named.push_back({"cls.b", Tensor::zeros(1, cfg.classes).as_param()});
    return m;
}

// Train-time dropout source; eval passes nullptr.
struct DropoutCtx {
    double rate = 0.0;
    Rng* rng = nullptr;
};

namespace detail {

inline Tensor apply_dropout(const Tensor& x, const DropoutCtx* dp) {
    if (!dp || dp->rate <= 0.0 || !dp->rng) return x;
    std::vector<double> mask(x.size());
    double keep = 1.0 - dp->rate;
    for (auto& v : mask) v = dp->rng->bernoulli(keep) ? 1.0 / keep : 0.0;
    return mul(x, Tensor::from_values(x.rows(), x.cols(), std::move(mask)));
}

}  // namespace detail

struct EmbedOut {
    Tensor nodes;   // n x hidden
    Tensor graph;   // 1 x hidden readout
    std::vector<Tensor> attention;  // GAT: one row-stochastic matrix per (layer, head)
};

// Forward pass. adj is an n x n symmetric matrix without self-loops; soft
// (fractional) entries are legal, which is how relaxed triggers flow
// gradients into the model.
inline EmbedOut forward_embed(const GnnModel& m, const Tensor& adj, const Tensor& x,
                              const DropoutCtx* dp = nullptr,
                              bool want_attention = false) {
    require(adj.rows() == adj.cols(), "forward_embed: adjacency must be square");
    require(adj.rows() == x.rows(), "forward_embed: adjacency/feature row mismatch");
    require(x.cols() == m.cfg.in_dim, "forward_embed: feature dimension mismatch");
    const int n = adj.rows();
    Tensor eye = [&] {
        std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
        return Tensor::from_values(n, n, std::move(v));
    }();

    EmbedOut out;
    Tensor z = x;
    for (int k = 0; k < m.cfg.layers; ++k) {
        std::string pre = arch_name(m.cfg.arch) + std::to_string(k) + ".";
        // GAT regularizes the attention coefficients instead of the layer
        // input; dropping half of each exp()-weighted neighborhood input
        // makes train-time and eval-time attention diverge badly.
        if (m.cfg.arch != GnnArch::Gat) z = detail::apply_dropout(z, dp);
        if (m.cfg.arch == GnnArch::Gcn) {
            Tensor deg = add_scalar(rowsum(adj), 1.0);
            Tensor dinv = pow_scalar(deg, -0.5);
            Tensor anorm = mul(add(adj, eye), matmul(dinv, transpose(dinv)));
            z = relu(add_rowvec(matmul(matmul(anorm, z), m.param(pre + "w")),
                                m.param(pre + "b")));
        } else if (m.cfg.arch == GnnArch::Sage) {
            Tensor deg = add_scalar(rowsum(adj), 1e-12);
            Tensor denom = matmul(deg, Tensor::ones(1, z.cols()));
            Tensor neigh_mean = div(matmul(adj, z), denom);
            z = relu(add_rowvec(add(matmul(z, m.param(pre + "w_self")),
                                    matmul(neigh_mean, m.param(pre + "w_neigh"))),
                                m.param(pre + "b")));
        } else {
            Tensor wadj = add(adj, eye);
            bool last = k == m.cfg.layers - 1;
            Tensor acc;
            for (int h = 0; h < m.cfg.heads; ++h) {
                std::string hp = pre + "h" + std::to_string(h) + ".";
                Tensor hproj = matmul(z, m.param(hp + "w"));
                Tensor s = matmul(hproj, m.param(hp + "a_src"));
                Tensor t = matmul(hproj, m.param(hp + "a_dst"));
                Tensor e = leaky_relu(
                    add(matmul(s, Tensor::ones(1, n)), matmul(Tensor::ones(n, 1), transpose(t))),
                    0.2);
                Tensor alpha = weighted_softmax_rows(e, wadj);
                if (want_attention) out.attention.push_back(alpha);
                Tensor head_out = matmul(detail::apply_dropout(alpha, dp), hproj);
                if (h == 0)
                    acc = head_out;
                else
                    acc = last ? add(acc, head_out) : concat_cols(acc, head_out);
            }
            if (last && m.cfg.heads > 1) acc = scale(acc, 1.0 / m.cfg.heads);
            z = relu(acc);
        }
    }
    out.nodes = z;
    out.graph = m.cfg.readout == Readout::Mean ? colmean(z) : matmul(Tensor::ones(1, n), z);
    return out;
}

inline Tensor head_logits(const GnnModel& m, const Tensor& embedding) {
    return add_rowvec(matmul(embedding, m.param("cls.w")), m.param("cls.b"));
}

inline Tensor graph_logits(const GnnModel& m, const Tensor& adj, const Tensor& x,
                           const DropoutCtx* dp = nullptr) {
    return head_logits(m, forward_embed(m, adj, x, dp).graph);
}

inline Tensor node_logits(const GnnModel& m, const Tensor& adj, const Tensor& x,
                          const DropoutCtx* dp = nullptr) {
    return head_logits(m, forward_embed(m, adj, x, dp).nodes);
}

// Eval-mode class probabilities for one graph.
inline Tensor classify(const GnnModel& m, const Graph& g) {
    return softmax_rows(graph_logits(m, adjacency_tensor(g), features_tensor(g)));
}

inline Tensor classify_nodes(const GnnModel& m, const Graph& g) {
    return softmax_rows(node_logits(m, adjacency_tensor(g), features_tensor(g)));
}

inline int argmax_row(const Tensor& t, int row = 0) {
    int best = 0;
    for (int j = 1; j < t.cols(); ++j)
        if (t.at(row, j) > t.at(row, best)) best = j;
    return best;
}

// Mean cross-entropy of selected logit rows against integer labels.
inline Tensor ce_loss_rows(const Tensor& logits, const std::vector<int>& labels,
                           const std::vector<int>& rows) {
    require(!rows.empty(), "ce_loss_rows: no rows selected");
    require(labels.size() == static_cast<std::size_t>(logits.rows()),
            "ce_loss_rows: label count mismatch");
    Tensor ls = log_softmax_rows(logits);
    std::vector<double> pick(static_cast<std::size_t>(ls.rows()) * ls.cols(), 0.0);
    for (int r : rows) {
        require(labels[r] >= 0 && labels[r] < ls.cols(), "ce_loss_rows: label out of range");
        pick[static_cast<std::size_t>(r) * ls.cols() + labels[r]] = -1.0 / rows.size();
    }
    return sum(mul(ls, Tensor::from_values(ls.rows(), ls.cols(), std::move(pick))));
}

// Mean KL divergence of selected softmax rows from reference log-probabilities,
// with the reference treated as a constant. Fused: the backward pass is the
// soft-target form softmax(logits) - exp(ref), so a row whose log-probabilities
// reproduce the reference bit-for-bit contributes an exactly zero gradient.
inline Tensor kl_div_rows(const Tensor& logits, const Tensor& ref_log_probs,
                          const std::vector<int>& rows) {
    require(!rows.empty(), "kl_div_rows: no rows selected");
    require(ref_log_probs.rows() == logits.rows() && ref_log_probs.cols() == logits.cols(),
            "kl_div_rows: shape mismatch");
    const int n = logits.rows(), m = logits.cols();
    std::vector<double> lp(static_cast<std::size_t>(n) * m, 0.0);
    double total = 0.0;
    for (int r : rows) {
        require(r >= 0 && r < n, "kl_div_rows: row out of range");
        const double* row = &logits.values()[static_cast<std::size_t>(r) * m];
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += std::exp(detail::clamp_exp_arg(row[j] - mx));
        double lse = mx + std::log(s);
        for (int j = 0; j < m; ++j) {
            double l = row[j] - lse;
            double ref = ref_log_probs.at(r, j);
            lp[static_cast<std::size_t>(r) * m + j] = l;
            total += std::exp(ref) * (ref - l);
        }
    }
    const double inv = 1.0 / static_cast<double>(rows.size());
    Tensor out = Tensor::scalar(total * inv);
    Tensor lpt = Tensor::from_values(n, m, std::move(lp));
    std::vector<int> rs = rows;
    detail::record_op(out, {logits},
                      [logits, ref_log_probs, lpt, rs, m, inv](const std::vector<double>& g,
                                                               GradientTape::Flow& flow) {
                          if (!flow.needs(logits)) return;
                          auto& ga = flow.buf(logits);
                          for (int r : rs)
                              for (int j = 0; j < m; ++j) {
                                  std::size_t k = static_cast<std::size_t>(r) * m + j;
                                  ga[k] += g[0] * inv *
                                           (std::exp(lpt.values()[k]) -
                                            std::exp(ref_log_probs.values()[k]));
                              }
                      });
    return out;
}

// --- Training ---------------------------------------------------------------

// Mean eval-mode cross-entropy over the given graphs.
inline double dataset_loss(const GnnModel& m, const Dataset& ds,
                           const std::vector<int>& graph_indices) {
    require(!graph_indices.empty(), "dataset_loss: empty index set");
    double total = 0.0;
    for (int gi : graph_indices) {
        const Graph& g = ds.graphs[gi];
        Tensor logits = graph_logits(m, adjacency_tensor(g), features_tensor(g));
        total += ce_loss_rows(logits, {g.label}, {0}).item();
    }
    return total / graph_indices.size();
}

// Adam with the config's lr/weight-decay. Inductive data trains in shuffled
// mini-batches on graph labels; the returned curve holds the eval-mode
// training-set loss measured at each epoch end. epochs == 0 leaves the model
// untouched.
inline std::vector<double> train_model(GnnModel& m, const Dataset& ds,
                                       const std::vector<int>& graph_indices, int epochs,
                                       Rng& rng) {
    require(!ds.transductive, "train_model: dataset is transductive; use train_transductive");
    require(!graph_indices.empty(), "train_model: no training graphs");
    auto names = m.param_names();
    Optimizer opt = Optimizer::adam(m.cfg.lr, m.cfg.weight_decay);
    std::vector<double> curve;
    std::vector<int> order = graph_indices;
    for (int ep = 0; ep < epochs; ++ep) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(m.cfg.batch_size)) {
            std::size_t end = std::min(order.size(),
                                       start + static_cast<std::size_t>(m.cfg.batch_size));
            GradientTape tape;
            DropoutCtx dp{m.cfg.dropout, &rng};
            Tensor batch_loss = Tensor::scalar(0.0);
            for (std::size_t i = start; i < end; ++i) {
                const Graph& g = ds.graphs[order[i]];
                Tensor logits = graph_logits(m, adjacency_tensor(g), features_tensor(g), &dp);
                batch_loss = add(batch_loss, ce_loss_rows(logits, {g.label}, {0}));
            }
            batch_loss = scale(batch_loss, 1.0 / static_cast<double>(end - start));
            GradMap grads = tape.backward(batch_loss);
            std::vector<Tensor> params = m.all_params();
            opt.step(params, grads);
            m.adopt(names, params);
        }
        curve.push_back(dataset_loss(m, ds, graph_indices));
    }
    return curve;
}

// Full-batch node classification on the labelled node set. The curve holds
// the eval-mode labelled-set loss after each epoch.
inline std::vector<double> train_transductive(GnnModel& m, const Graph& g,
                                              const std::vector<int>& labelled_nodes,
                                              int epochs, Rng& rng) {
    require(!g.node_labels.empty(), "train_transductive: graph has no node labels");
    require(!labelled_nodes.empty(), "train_transductive: no labelled nodes");
    auto names = m.param_names();
    Optimizer opt = Optimizer::adam(m.cfg.lr, m.cfg.weight_decay);
    Tensor adj = adjacency_tensor(g);
    Tensor x = features_tensor(g);
    std::vector<double> curve;
    for (int ep = 0; ep < epochs; ++ep) {
        GradientTape tape;
        DropoutCtx dp{m.cfg.dropout, &rng};
        Tensor logits = node_logits(m, adj, x, &dp);
        Tensor loss = ce_loss_rows(logits, g.node_labels, labelled_nodes);
        GradMap grads = tape.backward(loss);
        std::vector<Tensor> params = m.all_params();
        opt.step(params, grads);
        m.adopt(names, params);
        curve.push_back(
            ce_loss_rows(node_logits(m, adj, x), g.node_labels, labelled_nodes).item());
    }
    return curve;
}

enum class TuneMode { Full, Partial };

// Downstream adaptation: Full trains everything, Partial freezes the feature
// extractor and trains only the classifier head.
inline std::vector<double> fine_tune(GnnModel& m, const Dataset& ds,
                                     const std::vector<int>& graph_indices, TuneMode mode,
                                     int epochs, Rng& rng) {
    require(!ds.transductive, "fine_tune: transductive data has no separate downstream stage");
    require(!graph_indices.empty(), "fine_tune: no tuning graphs");
    auto names = m.param_names(mode == TuneMode::Partial);
    Optimizer opt = Optimizer::adam(m.cfg.lr, m.cfg.weight_decay);
    std::vector<double> curve;
    std::vector<int> order = graph_indices;
    for (int ep = 0; ep < epochs; ++ep) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(m.cfg.batch_size)) {
            std::size_t end = std::min(order.size(),
                                       start + static_cast<std::size_t>(m.cfg.batch_size));
            GradientTape tape;
            DropoutCtx dp{m.cfg.dropout, &rng};
            Tensor batch_loss = Tensor::scalar(0.0);
            for (std::size_t i = start; i < end; ++i) {
                const Graph& g = ds.graphs[order[i]];
                Tensor logits = graph_logits(m, adjacency_tensor(g), features_tensor(g), &dp);
                batch_loss = add(batch_loss, ce_loss_rows(logits, {g.label}, {0}));
            }
            batch_loss = scale(batch_loss, 1.0 / static_cast<double>(end - start));
            GradMap grads = tape.backward(batch_loss);
            std::vector<Tensor> params;
            for (const auto& nm : names) params.push_back(m.param(nm));
            opt.step(params, grads);
            m.adopt(names, params);
        }
        curve.push_back(dataset_loss(m, ds, graph_indices));
    }
    return curve;
}

inline double eval_graph_accuracy(const GnnModel& m, const Dataset& ds,
                                  const std::vector<int>& graph_indices) {
    require(!graph_indices.empty(), "eval_graph_accuracy: empty index set");
    int hits = 0;
    for (int gi : graph_indices) {
        const Graph& g = ds.graphs[gi];
        if (argmax_row(classify(m, g)) == g.label) ++hits;
    }
    return static_cast<double>(hits) / graph_indices.size();
}

inline double eval_node_accuracy(const GnnModel& m, const Graph& g,
                                 const std::vector<int>& nodes) {
    require(!nodes.empty(), "eval_node_accuracy: empty node set");
    Tensor probs = classify_nodes(m, g);
    int hits = 0;
    for (int v : nodes)
        if (argmax_row(probs, v) == g.node_labels[v]) ++hits;
    return static_cast<double>(hits) / nodes.size();
}

// --- Checkpoints --------------------------------------------------------------

inline nlohmann::json tensor_to_json(const Tensor& t) {
    return {{"rows", t.rows()}, {"cols", t.cols()}, {"data", t.values()}};
}

inline Tensor tensor_from_json(const nlohmann::json& j, bool param) {
    if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw DataError("checkpoint tensor: missing fields");
    Tensor t = Tensor::from_values(j["rows"].get<int>(), j["cols"].get<int>(),
                                   j["data"].get<std::vector<double>>());
    return param ? t.as_param() : t;
}

inline nlohmann::json config_to_json(const GnnConfig& c) {
    return {{"arch", arch_name(c.arch)},
            {"layers", c.layers},
            {"in_dim", c.in_dim},
            {"hidden", c.hidden},
            {"heads", c.heads},
            {"readout", c.readout == Readout::Mean ? "mean" : "sum"},
            {"classes", c.classes},
            {"dropout", c.dropout},
            {"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"batch_size", c.batch_size}};
}

inline GnnConfig config_from_json(const nlohmann::json& j) {
    GnnConfig c;
    c.arch = arch_from_name(j.at("arch").get<std::string>());
    c.layers = j.at("layers").get<int>();
    c.in_dim = j.at("in_dim").get<int>();
    c.hidden = j.at("hidden").get<int>();
    c.heads = j.at("heads").get<int>();
    std::string ro = j.at("readout").get<std::string>();
    if (ro != "mean" && ro != "sum") throw DataError("checkpoint: bad readout");
    c.readout = ro == "mean" ? Readout::Mean : Readout::Sum;
    c.classes = j.at("classes").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    return c;
}

inline nlohmann::json model_to_json(const GnnModel& m) {
    nlohmann::json params;
    for (const auto& [n, t] : m.named) params[n] = tensor_to_json(t);
    return {{"schema_version", kSchemaVersion},
            {"config", config_to_json(m.cfg)},
            {"params", std::move(params)}};
}

inline GnnModel model_from_json(const nlohmann::json& j) {
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != kSchemaVersion)
        throw DataError("checkpoint: unsupported schema version");
    GnnModel m;
    m.cfg = config_from_json(j.at("config"));
    Rng rng(0);
    GnnModel shape = init_model(m.cfg, rng);
    const auto& params = j.at("params");
    for (const auto& [n, t] : shape.named) {
        if (!params.contains(n)) throw DataError("checkpoint: missing parameter '" + n + "'");
        Tensor loaded = tensor_from_json(params[n], true);
        require(loaded.rows() == t.rows() && loaded.cols() == t.cols(),
                "checkpoint: shape mismatch for '" + n + "'");
        m.named.push_back({n, loaded});
    }
    return m;
}

inline void save_model(const GnnModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << model_to_json(m).dump(2) << "\n";
}

inline GnnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(std::string("checkpoint parse error: ") + e.what());
    }
    return model_from_json(j);
}

inline GnnModel load_model_checked(const std::string& path, const GnnConfig& expected) {
    GnnModel m = load_model(path);
    if (!(m.cfg == expected)) throw DataError("checkpoint config does not match expectation");
    return m;
}

// Deep copy with fresh tensor identities, so two models can be optimized
// independently.
inline GnnModel clone_model(const GnnModel& m) {
    GnnModel c;
    c.cfg = m.cfg;
    for (const auto& [n, t] : m.named)
        c.named.push_back({n, Tensor::from_values(t.rows(), t.cols(), t.values()).as_param()});
    return c;
}

}  // namespace gtlab
