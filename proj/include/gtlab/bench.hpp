#pragma once

// Canonical synthetic benchmark presets shared by tests, experiment configs,
// and the acceptance runs. Class 1 graphs share class 0's background but
// carry a small dense high-feature motif, so the class identity is a local
// subpattern a subgraph edit can plausibly reproduce, and a benign model
// already treats the two classes asymmetrically.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gtlab/dataset_io.hpp"
#include "gtlab/gnn.hpp"

namespace gtlab::bench {

constexpr int kTargetClass = 1;

inline InductiveSynthSpec inductive_spec() {
    InductiveSynthSpec s;
    s.n_graphs = 200;
    s.nodes_min = 12;
    s.nodes_max = 12;
    s.feat_dim = 8;
    s.classes = {{0.25, 0.35, 0.15}, {0.25, 0.35, 0.15, 3, 0.85, 0.05}};
    return s;
}

inline Dataset inductive_dataset(std::uint64_t seed) {
    return synth_generate(inductive_spec(), seed);
}

// pretrain: the (possibly adversarial) model trainer's data; tune: the
// downstream consumer's clean fine-tuning set; test: held-out evaluation.
inline std::map<std::string, std::vector<int>> inductive_splits(const Dataset& ds,
                                                                std::uint64_t seed) {
    return split_dataset(ds, {{"pretrain", 0.5}, {"tune", 0.25}, {"test", 0.25}}, seed);
}

// Deliberately sparse: a trigger's influence on a two-hop neighbor passes
// through two rounds of degree normalization, so the fraction of attacked
// nodes a trigger can actually flip tracks the fraction sitting within one
// hop of a trigger node. Mean degree around 1.5 keeps that fraction high
// while the graph still trains to around 0.9 accuracy. The community signal
// sits in a single coordinate so it stays inside the transductive feature
// budget (n_mask 10% of 8 rounds to one coordinate), and class 1's mean of
// 0.5 leaves headroom in the clipped feature range for a super-stimulus
// trigger coordinate.
inline TransductiveSynthSpec transductive_spec() {
    TransductiveSynthSpec s;
    s.n_nodes = 300;
    s.feat_dim = 8;
    s.p_in = 0.008;
    s.p_out = 0.002;
    s.feat_std = 0.12;
    s.community_feat_means = {0.10, 0.50};
    s.signal_dims = 1;
    s.background_mean = 0.5;
    return s;
}

inline Dataset transductive_dataset(std::uint64_t seed) {
    return synth_transductive(transductive_spec(), seed);
}

inline std::map<std::string, std::vector<int>> transductive_splits(const Graph& g,
                                                                   std::uint64_t seed) {
    return split_nodes(g, {{"labelled", 0.2}, {"unlabelled", 0.8}}, seed);
}

inline GnnConfig model_config(GnnArch arch, int feat_dim = 8, int classes = 2) {
    GnnConfig c;
    c.arch = arch;
    c.layers = 2;
    c.in_dim = feat_dim;
    c.hidden = 16;
    c.heads = 3;
    c.readout = Readout::Mean;
    c.classes = classes;
    // Milder than the full-scale default: rate 0.5 drowns the three-node
    // motif signal on these twelve-node graphs.
    c.dropout = 0.2;
    c.lr = 0.01;
    c.weight_decay = 5e-4;
    c.batch_size = 32;
    return c;
}

constexpr int kInductiveEpochs = 50;
constexpr int kTransductiveEpochs = 100;

}  // namespace gtlab::bench
