#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gtlab/bench.hpp"
#include "gtlab/defense.hpp"
#include "gtlab/gnn.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/rng.hpp"
#include "gtlab/stats.hpp"

using namespace gtlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Graph random_host(Rng& rng, int n, int feat_dim, double p, int label = 0) {
    Graph g = Graph::make(n, feat_dim);
    g.label = label;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) g.set_edge(i, j);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < feat_dim; ++k) g.set_feature(i, k, rng.uniform(0.0, 1.0));
    return g;
}

Dataset tiny_inductive(std::uint64_t seed, int n_graphs = 12, int nodes = 8, int feat = 4) {
    InductiveSynthSpec spec;
    spec.n_graphs = n_graphs;
    spec.nodes_min = spec.nodes_max = nodes;
    spec.feat_dim = feat;
    spec.classes = {{0.2, 0.3, 0.1}, {0.6, 0.8, 0.1}};
    return synth_generate(spec, seed);
}

GnnConfig tiny_config(int feat, int classes = 2) {
    GnnConfig c = bench::model_config(GnnArch::Gcn, feat, classes);
    c.hidden = 8;
    c.dropout = 0.0;
    return c;
}

std::vector<int> all_indices(const Dataset& ds) {
    std::vector<int> idx(ds.graphs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

// Model whose head shouts one class no matter the input.
GnnModel constant_model(int feat, int always, Rng& rng) {
    GnnModel m = init_model(tiny_config(feat), rng);
    Tensor& cw = m.param("cls.w");
    cw = Tensor::zeros(cw.rows(), cw.cols()).as_param();
    std::vector<double> b(2, 0.0);
    b[always] = 25.0;
    m.param("cls.b") = Tensor::from_values(1, 2, std::move(b)).as_param();
    return m;
}

// Flatten-and-L1 oracle for the perturbation cost: concatenate each node's
// within-site adjacency row and feature row, for patch and host, and take
// the L1 distance of the two flat vectors.
double flatten_l1_oracle(const Graph& g, const std::vector<int>& site,
                         const SubgraphPatch& patch) {
    const int n_t = patch.n;
    std::vector<double> a, b;
    for (int i = 0; i < n_t; ++i) {
        for (int j = 0; j < n_t; ++j) {
            if (i == j) continue;
            a.push_back(patch.adj[static_cast<std::size_t>(i) * n_t + j]);
            b.push_back(g.has_edge(site[i], site[j]) ? 1.0 : 0.0);
        }
        for (int k = 0; k < g.feat_dim; ++k) {
            a.push_back(patch.features[static_cast<std::size_t>(i) * g.feat_dim + k]);
            b.push_back(g.feature(site[i], k));
        }
    }
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += std::fabs(a[i] - b[i]);
    return c;
}

// Brute-force one-sided KS statistic: scan every value of both samples.
double sup_diff_oracle(const std::vector<double>& target, const std::vector<double>& other) {
    auto cdf = [](const std::vector<double>& s, double x) {
        int c = 0;
        for (double v : s)
            if (v <= x) ++c;
        return static_cast<double>(c) / static_cast<double>(s.size());
    };
    double best = 0.0;
    for (const auto& s : {target, other})
        for (double x : s) best = std::max(best, cdf(other, x) - cdf(target, x));
    return best;
}

// Exact permutation p-value for the same statistic on small samples.
double permutation_p(const std::vector<double>& target, const std::vector<double>& other) {
    double observed = sup_diff_oracle(target, other);
    std::vector<double> pool = target;
    pool.insert(pool.end(), other.begin(), other.end());
    std::vector<int> mask(pool.size(), 0);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(target.size()), 1);
    std::sort(mask.begin(), mask.end());
    long hits = 0, total = 0;
    do {
        std::vector<double> t, o;
        for (std::size_t i = 0; i < pool.size(); ++i)
            (mask[i] ? t : o).push_back(pool[i]);
        ++total;
        if (sup_diff_oracle(t, o) >= observed - 1e-12) ++hits;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

SubgraphPatch host_as_patch(const Graph& g, const std::vector<int>& site) {
    SubgraphPatch p;
    p.n = static_cast<int>(site.size());
    p.feat_dim = g.feat_dim;
    p.adj.assign(static_cast<std::size_t>(p.n) * p.n, 0);
    p.features.resize(static_cast<std::size_t>(p.n) * p.feat_dim);
    for (int a = 0; a < p.n; ++a) {
        for (int b = 0; b < p.n; ++b)
            if (a != b && g.has_edge(site[a], site[b]))
                p.adj[static_cast<std::size_t>(a) * p.n + b] = 1;
        for (int k = 0; k < g.feat_dim; ++k)
            p.features[static_cast<std::size_t>(a) * p.feat_dim + k] = g.feature(site[a], k);
    }
    return p;
}

}  // namespace

TEST_CASE("perturbation cost is zero at the host and counts unit edits", "[defense]") {
    Rng rng(7);
    Graph g = random_host(rng, 7, 3, 0.5);
    std::vector<int> site = {1, 4, 6};

    SubgraphPatch patch = host_as_patch(g, site);
    REQUIRE(perturbation_cost(g, site, patch) == 0.0);

    SubgraphPatch feat = patch;
    feat.features[1 * 3 + 2] += 1.0;
    REQUIRE(perturbation_cost(g, site, feat) == Catch::Approx(1.0).margin(1e-12));

    // An edge flip appears in both endpoint rows of the concatenation.
    SubgraphPatch topo = patch;
    std::size_t ab = 0 * 3 + 1, ba = 1 * 3 + 0;
    topo.adj[ab] = topo.adj[ab] ? 0 : 1;
    topo.adj[ba] = topo.adj[ab];
    REQUIRE(perturbation_cost(g, site, topo) == Catch::Approx(2.0).margin(1e-12));

    SubgraphPatch bad = patch;
    bad.feat_dim = 2;
    bad.features.resize(6);
    REQUIRE_THROWS_AS(perturbation_cost(g, site, bad), UsageError);
    REQUIRE_THROWS_AS(perturbation_cost(g, {1, 4}, patch), UsageError);
}

TEST_CASE("perturbation cost matches the flatten-and-L1 oracle", "[defense]") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Graph g = random_host(rng, 8, 5, 0.4);
        std::vector<int> site = rng.sample_indices(8, 3);
        SubgraphPatch patch;
        patch.n = 3;
        patch.feat_dim = 5;
        patch.adj.assign(9, 0);
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) {
                std::uint8_t e = rng.uniform() < 0.5 ? 1 : 0;
                patch.adj[static_cast<std::size_t>(a) * 3 + b] = e;
                patch.adj[static_cast<std::size_t>(b) * 3 + a] = e;
            }
        patch.features.resize(15);
        for (auto& v : patch.features) v = rng.uniform(-1.0, 2.0);
        REQUIRE(perturbation_cost(g, site, patch) ==
                Catch::Approx(flatten_l1_oracle(g, site, patch)).margin(1e-12));
    }
}

TEST_CASE("one-sided KS statistic matches the scan oracle and is rank-based", "[defense]") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> t(8), o(11);
        for (auto& v : t) v = rng.normal(trial % 3 == 0 ? 0.0 : 1.0, 1.0);
        for (auto& v : o) v = rng.normal(0.0, 1.0);
        KsResult r = ks_target_lower(t, o);
        REQUIRE(r.statistic == Catch::Approx(sup_diff_oracle(t, o)).margin(1e-12));
        double mn = 8.0 * 11.0 / 19.0;
        REQUIRE(r.p_value ==
                Catch::Approx(std::min(1.0, std::exp(-2.0 * r.statistic * r.statistic * mn)))
                    .margin(1e-12));

        // Rank statistics survive any common strictly monotone rescaling.
        std::vector<double> te = t, oe = o;
        for (auto& v : te) v = std::exp(v);
        for (auto& v : oe) v = std::exp(v);
        KsResult re = ks_target_lower(te, oe);
        REQUIRE(re.statistic == Catch::Approx(r.statistic).margin(1e-12));
    }
}

TEST_CASE("KS p-value tracks an exact permutation oracle on clear-cut samples", "[defense]") {
    // Target far below the other sample: no violation mass, both p-values 1.
    std::vector<double> low = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> high = {10.1, 10.4, 10.2, 10.9, 10.5, 10.7};
    REQUIRE(ks_target_lower(low, high).p_value == 1.0);
    REQUIRE(permutation_p(low, high) == 1.0);

    // Target far above: maximal violation, both p-values at their floor.
    KsResult flipped = ks_target_lower(high, low);
    REQUIRE(flipped.statistic == 1.0);
    REQUIRE(flipped.p_value < 0.01);
    REQUIRE(permutation_p(high, low) == Catch::Approx(1.0 / 924.0).margin(1e-9));
}

TEST_CASE("ks_decision follows the documented decision table", "[defense]") {
    std::vector<double> base = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    std::vector<double> lower = base;
    for (auto& v : lower) v -= 10.0;

    // Strictly lower target: null retained with support, backdoor verdict.
    KsDecision d = ks_decision(lower, base, 0.05);
    REQUIRE(d.status == InspectStatus::Decided);
    REQUIRE(d.p_value == 1.0);
    REQUIRE(d.support == 1.0);
    REQUIRE(d.flagged);

    // Identical samples: retained but with zero directional support.
    KsDecision same = ks_decision(base, base, 0.05);
    REQUIRE(same.p_value == 1.0);
    REQUIRE(same.support == 0.0);
    REQUIRE_FALSE(same.flagged);

    // Strictly higher target: null rejected.
    KsDecision higher = ks_decision(base, lower, 0.05);
    REQUIRE(higher.p_value < 0.05);
    REQUIRE_FALSE(higher.flagged);

    // Sentinels are excluded and counted; losing a whole side is inconclusive.
    std::vector<double> censored = lower;
    censored[0] = kInf;
    censored[3] = kInf;
    KsDecision c = ks_decision(censored, base, 0.05);
    REQUIRE(c.target_censored == 2);
    REQUIRE(c.other_censored == 0);
    REQUIRE(c.flagged);
    KsDecision gone = ks_decision({kInf, kInf}, base, 0.05);
    REQUIRE(gone.status == InspectStatus::Inconclusive);
    REQUIRE_FALSE(gone.flagged);

    REQUIRE_THROWS_AS(ks_decision({}, base, 0.05), UsageError);
    REQUIRE_THROWS_AS(ks_decision(base, base, 1.5), UsageError);
}

TEST_CASE("mpc_search records zero cost under an always-target model", "[defense]") {
    Rng rng(31);
    Dataset ds = tiny_inductive(41);
    GnnModel always = constant_model(4, 1, rng);

    MpcConfig cfg;
    cfg.budget = 1;
    std::vector<double> costs = mpc_search(always, ds, all_indices(ds), 1, cfg);
    int expected = 0;
    for (const Graph& g : ds.graphs)
        if (g.label != 1) ++expected;
    REQUIRE(static_cast<int>(costs.size()) == expected);
    for (double c : costs) REQUIRE(c == 0.0);
}

TEST_CASE("mpc_search with zero budget censors every graph", "[defense]") {
    Rng rng(37);
    Dataset ds = tiny_inductive(43);
    GnnModel m = init_model(tiny_config(4), rng);

    MpcConfig cfg;
    cfg.budget = 0;
    for (TriggerDef def :
         {TriggerDef::UniversalAll, TriggerDef::UniversalTopology, TriggerDef::Adaptive}) {
        cfg.def = def;
        for (double c : mpc_search(m, ds, all_indices(ds), 1, cfg)) REQUIRE(c == kInf);
    }
}

TEST_CASE("mpc_search incumbents never worsen with more budget", "[defense][slow]") {
    Rng rng(43);
    Dataset ds = tiny_inductive(47, 8);
    GnnModel m = init_model(tiny_config(4), rng);
    Rng trng(5);
    train_model(m, ds, all_indices(ds), 30, trng);

    // The search is deterministic, so a longer run replays the shorter run's
    // iterates and can only improve each incumbent.
    MpcConfig cfg;
    cfg.def = TriggerDef::Adaptive;
    std::vector<std::vector<double>> ladder;
    for (int budget : {20, 25, 60}) {
        cfg.budget = budget;
        ladder.push_back(mpc_search(m, ds, all_indices(ds), 1, cfg));
    }
    for (std::size_t step = 1; step < ladder.size(); ++step) {
        REQUIRE(ladder[step].size() == ladder[step - 1].size());
        for (std::size_t i = 0; i < ladder[step].size(); ++i)
            REQUIRE(ladder[step][i] <= ladder[step - 1][i]);
    }
    for (double c : ladder.back()) REQUIRE(std::isfinite(c));
}

TEST_CASE("subsample keeps the node budget and only existing edges", "[defense]") {
    Rng rng(53);

    // Identity at beta 1 for any seed.
    Graph g = random_host(rng, 10, 3, 0.4, 1);
    Graph same = subsample_graph(g, 1.0, rng);
    REQUIRE(same.n == g.n);
    REQUIRE(same.adj == g.adj);
    REQUIRE(same.features == g.features);
    REQUIRE(same.label == g.label);

    // Ceil(0.5 * 10) nodes survive.
    Graph half = subsample_graph(g, 0.5, rng);
    REQUIRE(half.n == 5);

    // Node-id features recover the mapping: every surviving edge existed.
    Graph ids = Graph::make(10, 1);
    for (int v = 0; v < 10; ++v) ids.set_feature(v, 0, static_cast<double>(v) + 1.0);
    for (int v = 0; v < 9; ++v) ids.set_edge(v, v + 1);
    ids.set_edge(0, 9);
    for (int trial = 0; trial < 20; ++trial) {
        Graph sub = subsample_graph(ids, 0.5, rng);
        REQUIRE(sub.n == 5);
        for (int a = 0; a < sub.n; ++a)
            for (int b = a + 1; b < sub.n; ++b) {
                if (!sub.has_edge(a, b)) continue;
                int u = static_cast<int>(sub.feature(a, 0)) - 1;
                int v = static_cast<int>(sub.feature(b, 0)) - 1;
                REQUIRE(ids.has_edge(u, v));
            }
    }

    // floor((1 - beta) * d) coordinates go to zero per surviving node.
    Graph dense = Graph::make(6, 10);
    for (int v = 0; v < 6; ++v)
        for (int k = 0; k < 10; ++k) dense.set_feature(v, k, rng.uniform(0.5, 1.0));
    Graph zeroed = subsample_graph(dense, 0.6, rng);
    for (int v = 0; v < zeroed.n; ++v) {
        int zeros = 0;
        for (int k = 0; k < 10; ++k)
            if (zeroed.feature(v, k) == 0.0) ++zeros;
        REQUIRE(zeros == 4);
    }

    REQUIRE_THROWS_AS(subsample_graph(g, 0.0, rng), UsageError);
    REQUIRE_THROWS_AS(subsample_graph(g, 1.2, rng), UsageError);
}

TEST_CASE("smoothed vote at beta 1 reproduces plain classification", "[defense]") {
    Rng rng(59);
    Dataset ds = tiny_inductive(61, 6);
    GnnModel m = init_model(tiny_config(4), rng);

    SmoothingConfig sc;
    sc.beta = 1.0;
    sc.n_subsamples = 1;
    for (const Graph& g : ds.graphs) {
        Rng vote_rng(7);
        REQUIRE(smoothed_classify(m, g, sc, vote_rng).label == argmax_row(classify(m, g)));
    }

    // Unanimous votes under a constant model.
    GnnModel always = constant_model(4, 0, rng);
    sc.n_subsamples = 7;
    sc.beta = 0.6;
    Rng vote_rng(11);
    SmoothedVote v = smoothed_classify(always, ds.graphs[0], sc, vote_rng);
    REQUIRE(v.label == 0);
    REQUIRE(v.votes == std::vector<int>{7, 0});

    SmoothingConfig bad;
    bad.n_subsamples = 0;
    REQUIRE_THROWS_AS(smoothed_classify(m, ds.graphs[0], bad, vote_rng), UsageError);
}
