#pragma once

// Dataset persistence (JSON lines), synthetic benchmark generation, and
// stratified splitting.
//
// File format: one JSON object per line with keys
//   id        integer
//   label     integer              (inductive)  OR
//   node_labels [int, ...]         (transductive)
//   edges     [[i, j], ...]        undirected, 0-based
//   features  [[f, ...], ...]      one row per node; row count defines n

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtlab/common.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/rng.hpp"

namespace gtlab {

namespace detail {

inline Graph graph_from_json(const nlohmann::json& j, int line_no) {
    auto fail = [line_no](const std::string& msg) -> DataError {
        return DataError("line " + std::to_string(line_no) + ": " + msg);
    };
    if (!j.is_object()) throw fail("expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "id" && key != "label" && key != "node_labels" && key != "edges" &&
            key != "features")
            throw fail("unknown key '" + key + "'");
    }
    if (!j.contains("id") || !j["id"].is_number_integer()) throw fail("missing integer 'id'");
    if (!j.contains("features") || !j["features"].is_array() || j["features"].empty())
        throw fail("missing non-empty 'features' array");

    const auto& feats = j["features"];
    int n = static_cast<int>(feats.size());
    int d = -1;
    for (const auto& row : feats) {
        if (!row.is_array()) throw fail("feature row is not an array");
        if (d < 0) d = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != d) throw fail("ragged feature rows");
    }
    if (d <= 0) throw fail("empty feature rows");

    Graph g = Graph::make(n, d);
    g.id = j["id"].get<int>();
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            const auto& cell = feats[i][k];
            if (!cell.is_number()) throw fail("non-numeric feature value");
            g.set_feature(i, k, cell.get<double>());
        }

    if (j.contains("edges")) {
        if (!j["edges"].is_array()) throw fail("'edges' is not an array");
        for (const auto& e : j["edges"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
                !e[1].is_number_integer())
                throw fail("edge entries must be [i, j] integer pairs");
            int a = e[0].get<int>(), b = e[1].get<int>();
            if (a < 0 || a >= n || b < 0 || b >= n)
                throw fail("edge endpoint out of range");
            if (a == b) throw fail("self-loop edge");
            g.set_edge(a, b);
        }
    }

    bool has_label = j.contains("label");
    bool has_node_labels = j.contains("node_labels");
    if (has_label == has_node_labels)
        throw fail("need exactly one of 'label' / 'node_labels'");
    if (has_label) {
        if (!j["label"].is_number_integer() || j["label"].get<int>() < 0)
            throw fail("'label' must be a non-negative integer");
        g.label = j["label"].get<int>();
    } else {
        if (!j["node_labels"].is_array() ||
            static_cast<int>(j["node_labels"].size()) != n)
            throw fail("'node_labels' must list one label per node");
        for (const auto& l : j["node_labels"]) {
            if (!l.is_number_integer() || l.get<int>() < 0)
                throw fail("node labels must be non-negative integers");
            g.node_labels.push_back(l.get<int>());
        }
    }
    g.validate();
    return g;
}

inline nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json j;
    j["id"] = g.id;
    if (!g.node_labels.empty())
        j["node_labels"] = g.node_labels;
    else
        j["label"] = g.label;
    nlohmann::json edges = nlohmann::json::array();
    for (int i = 0; i < g.n; ++i)
        for (int k = i + 1; k < g.n; ++k)
            if (g.has_edge(i, k)) edges.push_back({i, k});
    j["edges"] = std::move(edges);
    nlohmann::json feats = nlohmann::json::array();
    for (int i = 0; i < g.n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < g.feat_dim; ++k) row.push_back(g.feature(i, k));
        feats.push_back(std::move(row));
    }
    j["features"] = std::move(feats);
    return j;
}

inline void finalize_dataset(Dataset& ds) {
    require(!ds.graphs.empty(), "dataset: no graphs");
    ds.feat_dim = ds.graphs.front().feat_dim;
    bool trans = !ds.graphs.front().node_labels.empty();
    int max_label = -1;
    for (const auto& g : ds.graphs) {
        if (g.feat_dim != ds.feat_dim)
            throw DataError("dataset: inconsistent feature dimensions");
        bool t = !g.node_labels.empty();
        if (t != trans)
            throw DataError("dataset: mixed graph-level and node-level labels");
        if (t)
            for (int l : g.node_labels) max_label = std::max(max_label, l);
        else
            max_label = std::max(max_label, g.label);
    }
    ds.transductive = trans;
    ds.num_classes = max_label + 1;
}

}  // namespace detail

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    Dataset ds;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        ds.graphs.push_back(detail::graph_from_json(j, line_no));
    }
    if (ds.graphs.empty()) throw DataError("dataset file has no graphs: " + path);
    detail::finalize_dataset(ds);
    return ds;
}

inline std::string serialize_dataset(const Dataset& ds) {
    std::ostringstream out;
    for (const auto& g : ds.graphs) out << detail::graph_to_json(g).dump() << "\n";
    return out.str();
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file: " + path);
    out << serialize_dataset(ds);
}

// Stable content hash of the canonical serialization, echoed by the CLI.
inline std::string dataset_checksum(const Dataset& ds) {
    std::uint64_t h = fnv1a64(serialize_dataset(ds));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// --- Synthetic benchmarks ----------------------------------------------------

struct SynthClassSpec {
    double edge_prob = 0.5;
    double feat_mean = 0.5;
    double feat_std = 0.1;
    // Optional planted motif: motif_nodes random nodes become a clique and
    // draw their features from the motif distribution. A class whose identity
    // is a small dense subpattern mimics functional-group style datasets.
    int motif_nodes = 0;
    double motif_feat_mean = 0.9;
    double motif_feat_std = 0.05;
};

// Erdos-Renyi family: class c draws edges with classes[c].edge_prob and node
// features i.i.d. normal(mean, std) clipped to [0, 1], plus an optional
// planted motif. Classes are balanced round-robin.
struct InductiveSynthSpec {
    int n_graphs = 200;
    int nodes_min = 12;
    int nodes_max = 12;
    int feat_dim = 8;
    std::vector<SynthClassSpec> classes;
};

inline Dataset synth_generate(const InductiveSynthSpec& spec, std::uint64_t seed) {
    require(spec.n_graphs > 0, "synth_generate: n_graphs must be positive");
    require(spec.nodes_min > 0 && spec.nodes_max >= spec.nodes_min,
            "synth_generate: bad node range");
    require(spec.classes.size() >= 2, "synth_generate: need at least two classes");
    for (const auto& c : spec.classes)
        require(c.edge_prob >= 0.0 && c.edge_prob <= 1.0,
                "synth_generate: edge_prob outside [0, 1]");
    Rng rng(seed);
    Dataset ds;
    for (int gi = 0; gi < spec.n_graphs; ++gi) {
        int cls = gi % static_cast<int>(spec.classes.size());
        const auto& cs = spec.classes[cls];
        int n = spec.nodes_min == spec.nodes_max
                    ? spec.nodes_min
                    : rng.randint(spec.nodes_min, spec.nodes_max);
        Graph g = Graph::make(n, spec.feat_dim);
        g.id = gi;
        g.label = cls;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.bernoulli(cs.edge_prob)) g.set_edge(i, j);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < spec.feat_dim; ++k) {
                double f = rng.normal(cs.feat_mean, cs.feat_std);
                g.set_feature(i, k, std::min(1.0, std::max(0.0, f)));
            }
        if (cs.motif_nodes > 0) {
            require(cs.motif_nodes <= n, "synth_generate: motif larger than graph");
            std::vector<int> motif = rng.sample_indices(n, cs.motif_nodes);
            for (std::size_t a = 0; a < motif.size(); ++a)
                for (std::size_t b = a + 1; b < motif.size(); ++b)
                    g.set_edge(motif[a], motif[b]);
            for (int v : motif)
                for (int k = 0; k < spec.feat_dim; ++k) {
                    double f = rng.normal(cs.motif_feat_mean, cs.motif_feat_std);
                    g.set_feature(v, k, std::min(1.0, std::max(0.0, f)));
                }
        }
        ds.graphs.push_back(std::move(g));
    }
    detail::finalize_dataset(ds);
    return ds;
}

// Planted-partition graph for node classification: k equal communities with
// intra probability p_in, inter probability p_out, and per-community feature
// means. With signal_dims > 0 only the first signal_dims coordinates carry
// the community mean; the rest draw from a shared background distribution.
struct TransductiveSynthSpec {
    int n_nodes = 300;
    int feat_dim = 8;
    double p_in = 0.10;
    double p_out = 0.01;
    double feat_std = 0.1;
    std::vector<double> community_feat_means = {0.3, 0.7};
    int signal_dims = 0;
    double background_mean = 0.5;
};

inline Dataset synth_transductive(const TransductiveSynthSpec& spec, std::uint64_t seed) {
    int k = static_cast<int>(spec.community_feat_means.size());
    require(k >= 2, "synth_transductive: need at least two communities");
    require(spec.n_nodes >= 2 * k, "synth_transductive: too few nodes");
    Rng rng(seed);
    Graph g = Graph::make(spec.n_nodes, spec.feat_dim);
    g.id = 0;
    g.node_labels.resize(spec.n_nodes);
    for (int i = 0; i < spec.n_nodes; ++i) g.node_labels[i] = i % k;
    for (int i = 0; i < spec.n_nodes; ++i)
        for (int j = i + 1; j < spec.n_nodes; ++j) {
            double p = g.node_labels[i] == g.node_labels[j] ? spec.p_in : spec.p_out;
            if (rng.bernoulli(p)) g.set_edge(i, j);
        }
    require(spec.signal_dims <= spec.feat_dim, "synth_transductive: signal_dims > feat_dim");
    for (int i = 0; i < spec.n_nodes; ++i) {
        double mean = spec.community_feat_means[g.node_labels[i]];
        for (int kf = 0; kf < spec.feat_dim; ++kf) {
            double m = (spec.signal_dims == 0 || kf < spec.signal_dims) ? mean
                                                                        : spec.background_mean;
            double f = rng.normal(m, spec.feat_std);
            g.set_feature(i, kf, std::min(1.0, std::max(0.0, f)));
        }
    }
    Dataset ds;
    ds.graphs.push_back(std::move(g));
    detail::finalize_dataset(ds);
    return ds;
}

// --- Stratified splitting -----------------------------------------------------

// Splits items (graph indices, or node indices for transductive graphs) into
// named fractions, stratified by label: within each class, counts follow the
// fractions by largest remainder, so every split's class ratio stays within
// one item of the global ratio. A fraction that would leave a split with zero
// members of a non-empty class is an error.
inline std::map<std::string, std::vector<int>> stratified_split(
    const std::vector<int>& labels, const std::vector<std::pair<std::string, double>>& fractions,
    std::uint64_t seed) {
    require(!fractions.empty(), "split: no fractions given");
    double total = 0.0;
    for (const auto& [name, f] : fractions) {
        require(f > 0.0, "split: fraction for '" + name + "' must be positive");
        total += f;
    }
    require(std::fabs(total - 1.0) < 1e-9, "split: fractions must sum to 1");

    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));

    Rng rng(seed);
    std::map<std::string, std::vector<int>> out;
    for (const auto& [name, f] : fractions) out[name];

    for (auto& [cls, items] : by_class) {
        rng.shuffle(items);
        int n = static_cast<int>(items.size());
        std::vector<int> counts(fractions.size(), 0);
        std::vector<std::pair<double, int>> rema;
        int assigned = 0;
        for (std::size_t si = 0; si < fractions.size(); ++si) {
            double share = fractions[si].second * n;
            counts[si] = static_cast<int>(std::floor(share + 1e-12));
            assigned += counts[si];
            rema.push_back({share - counts[si], static_cast<int>(si)});
        }
        std::stable_sort(rema.begin(), rema.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (int r = 0; r < n - assigned; ++r) counts[rema[r % rema.size()].second]++;
        for (std::size_t si = 0; si < fractions.size(); ++si)
            if (counts[si] == 0)
                throw UsageError("split: fraction '" + fractions[si].first +
                                 "' leaves class " + std::to_string(cls) + " empty");
        int pos = 0;
        for (std::size_t si = 0; si < fractions.size(); ++si) {
            auto& dest = out[fractions[si].first];
            for (int c = 0; c < counts[si]; ++c) dest.push_back(items[pos++]);
        }
    }
    for (auto& [name, v] : out) std::sort(v.begin(), v.end());
    return out;
}

inline std::map<std::string, std::vector<int>> split_dataset(
    const Dataset& ds, const std::vector<std::pair<std::string, double>>& fractions,
    std::uint64_t seed) {
    require(!ds.transductive, "split_dataset: use split_nodes for node-labelled data");
    std::vector<int> labels;
    labels.reserve(ds.graphs.size());
    for (const auto& g : ds.graphs) labels.push_back(g.label);
    return stratified_split(labels, fractions, seed);
}

inline std::map<std::string, std::vector<int>> split_nodes(
    const Graph& g, const std::vector<std::pair<std::string, double>>& fractions,
    std::uint64_t seed) {
    require(!g.node_labels.empty(), "split_nodes: graph has no node labels");
    return stratified_split(g.node_labels, fractions, seed);
}

}  // namespace gtlab
