#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gtlab/trigger.hpp"
#include "helpers.hpp"

using namespace gtlab;

namespace {

Graph random_graph(Rng& rng, int n, int d, double p) {
    Graph g = Graph::make(n, d);
    g.label = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) g.set_edge(i, j);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) g.set_feature(i, k, rng.uniform(0.0, 1.0));
    return g;
}

Tensor encodings_from(Rng& rng, int n, int d) {
    return testutil::random_tensor(rng, n, d, -1.0, 1.0, true);
}

}  // namespace

TEST_CASE("encoder maps an isolated zero-feature node to the zero encoding", "[trigger]") {
    Rng rng(1);
    GeneratorParams p = init_generator(3, rng);
    Graph g = Graph::make(4, 3);
    g.label = 0;
    g.set_edge(1, 2);
    g.set_edge(2, 3);
    for (int i = 1; i < 4; ++i)
        for (int k = 0; k < 3; ++k) g.set_feature(i, k, 0.3 * i + 0.1 * k);
    Tensor z = encode_subgraph(p, g, {0, 1});
    for (int k = 0; k < 3; ++k) REQUIRE(z.at(0, k) == 0.0);
}

TEST_CASE("nodes with identical features and mirrored neighborhoods encode identically",
          "[trigger]") {
    Rng rng(2);
    GeneratorParams p = init_generator(2, rng);
    // 0 and 3 both attach to the 1-2 edge symmetrically and share features.
    Graph g = Graph::make(4, 2);
    g.label = 0;
    g.set_edge(0, 1);
    g.set_edge(0, 2);
    g.set_edge(3, 1);
    g.set_edge(3, 2);
    g.set_edge(1, 2);
    g.set_feature(0, 0, 0.7);
    g.set_feature(0, 1, 0.2);
    g.set_feature(3, 0, 0.7);
    g.set_feature(3, 1, 0.2);
    g.set_feature(1, 0, 0.4);
    g.set_feature(2, 0, 0.4);
    g.set_feature(1, 1, 0.9);
    g.set_feature(2, 1, 0.9);
    Tensor z = encode_subgraph(p, g, {0, 3});
    for (int k = 0; k < 2; ++k)
        REQUIRE(z.at(0, k) == Catch::Approx(z.at(1, k)).margin(1e-12));
}

TEST_CASE("encoder matches a hand-computed attention softmax on a 5-node star", "[trigger]") {
    const int d = 3;
    Rng rng(3);
    GeneratorParams p = init_generator(d, rng);
    Graph g = Graph::make(5, d);
    g.label = 0;
    for (int leaf = 1; leaf < 5; ++leaf) g.set_edge(0, leaf);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < d; ++k) g.set_feature(i, k, rng.uniform(0.0, 1.0));

    Tensor z = encode_subgraph(p, g, {0, 1, 2, 3, 4});

    // Oracle with plain loops: h = x W, e_ij = leaky(s_i + t_j), softmax over
    // the closed neighborhood, z = relu(alpha h).
    auto leaky = [](double v) { return v > 0.0 ? v : 0.2 * v; };
    std::vector<std::vector<double>> h(5, std::vector<double>(d, 0.0));
    for (int i = 0; i < 5; ++i)
        for (int c = 0; c < d; ++c)
            for (int k = 0; k < d; ++k) h[i][c] += g.feature(i, k) * p.w_att.at(k, c);
    std::vector<double> s(5, 0.0), t(5, 0.0);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < d; ++k) {
            s[i] += h[i][k] * p.a_src.at(k, 0);
            t[i] += h[i][k] * p.a_dst.at(k, 0);
        }
    for (int i = 0; i < 5; ++i) {
        std::vector<int> nb;
        for (int j = 0; j < 5; ++j)
            if (j == i || g.has_edge(i, j)) nb.push_back(j);
        double mx = -1e300;
        for (int j : nb) mx = std::max(mx, leaky(s[i] + t[j]));
        double denom = 0.0;
        std::vector<double> w(5, 0.0);
        for (int j : nb) {
            w[j] = std::exp(leaky(s[i] + t[j]) - mx);
            denom += w[j];
        }
        for (int k = 0; k < d; ++k) {
            double acc = 0.0;
            for (int j : nb) acc += w[j] / denom * h[j][k];
            double expect = acc > 0.0 ? acc : 0.0;
            REQUIRE(z.at(i, k) == Catch::Approx(expect).margin(1e-10));
        }
    }
}

TEST_CASE("topology head follows the parameterized cosine rule", "[trigger]") {
    const int d = 3;

    SECTION("identical encodings connect, orthogonal ones do not") {
        Tensor wc = Tensor::from_values(d, d, {1, 0, 0, 0, 1, 0, 0, 0, 1}).as_param();
        Tensor z_same = Tensor::from_values(2, d, {0.5, 0.2, 0.1, 0.5, 0.2, 0.1});
        auto hard = generate_topology_hard(wc, z_same);
        REQUIRE(hard[1] == 1);
        Tensor z_orth = Tensor::from_values(2, d, {1, 0, 0, 0, 1, 0});
        hard = generate_topology_hard(wc, z_orth);
        REQUIRE(hard[1] == 0);
    }

    SECTION("hard adjacency matches the direct inequality on random encodings") {
        Rng rng(5);
        for (int trial = 0; trial < 30; ++trial) {
            Rng tr = rng.substream("t" + std::to_string(trial));
            Tensor wc = testutil::random_tensor(tr, d, d);
            Tensor z = encodings_from(tr, 4, d);
            auto hard = generate_topology_hard(wc, z);
            for (int i = 0; i < 4; ++i) {
                REQUIRE(hard[static_cast<std::size_t>(i) * 4 + i] == 0);
                for (int j = 0; j < 4; ++j) {
                    REQUIRE(hard[static_cast<std::size_t>(i) * 4 + j] ==
                            hard[static_cast<std::size_t>(j) * 4 + i]);
                    if (i == j) continue;
                    std::vector<double> ui(d, 0.0), uj(d, 0.0);
                    for (int r = 0; r < d; ++r)
                        for (int c = 0; c < d; ++c) {
                            ui[r] += wc.at(r, c) * z.at(i, c);
                            uj[r] += wc.at(r, c) * z.at(j, c);
                        }
                    double dot = 0, ni = 0, nj = 0;
                    for (int r = 0; r < d; ++r) {
                        dot += ui[r] * uj[r];
                        ni += ui[r] * ui[r];
                        nj += uj[r] * uj[r];
                    }
                    int expect = dot >= 0.5 * std::sqrt(ni) * std::sqrt(nj) ? 1 : 0;
                    REQUIRE(static_cast<int>(hard[static_cast<std::size_t>(i) * 4 + j]) ==
                            expect);
                }
            }
        }
    }

    SECTION("thresholded soft adjacency equals hard for any temperature") {
        Rng rng(6);
        for (double tau : {1.0, 10.0, 50.0}) {
            Rng tr = rng.substream("tau" + std::to_string(tau));
            Tensor wc = testutil::random_tensor(tr, d, d);
            Tensor z = encodings_from(tr, 5, d);
            Tensor soft = generate_topology_soft(wc, z, tau);
            auto hard = generate_topology_hard(wc, z);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    REQUIRE(soft.at(i, j) >= 0.0);
                    REQUIRE(soft.at(i, j) <= 1.0);
                    REQUIRE(soft.at(i, j) == soft.at(j, i));
                    int thresholded = i != j && soft.at(i, j) >= 0.5 ? 1 : 0;
                    REQUIRE(thresholded ==
                            static_cast<int>(hard[static_cast<std::size_t>(i) * 5 + j]));
                }
        }
    }

    SECTION("zero-norm encodings yield no edges") {
        Tensor wc = Tensor::from_values(2, 2, {1.0, 0, 0, 1.0}).as_param();
        Tensor z = Tensor::from_values(2, 2, {0.0, 0.0, 0.3, 0.4});
        auto hard = generate_topology_hard(wc, z);
        REQUIRE(hard[1] == 0);
        Tensor soft = generate_topology_soft(wc, z);
        REQUIRE(soft.at(0, 1) < 0.5);
    }
}

TEST_CASE("feature head is the activated affine map of the encodings", "[trigger]") {
    const int d = 3;
    Rng rng(7);

    SECTION("zero encoding and zero bias give all 0.5 under sigmoid") {
        GeneratorParams p = init_generator(d, rng);
        p.b_f = Tensor::zeros(1, d).as_param();
        Tensor z = Tensor::zeros(2, d);
        Tensor f = generate_features(p, z);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < d; ++k) REQUIRE(f.at(i, k) == 0.5);
    }

    SECTION("zero weight and large bias saturate near 1") {
        GeneratorParams p = init_generator(d, rng);
        p.w_f = Tensor::zeros(d, d).as_param();
        p.b_f = Tensor::filled(1, d, 30.0).as_param();
        Tensor f = generate_features(p, Tensor::zeros(2, d));
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < d; ++k) REQUIRE(f.at(i, k) > 0.999999);
    }

    SECTION("random parameters match the explicit oracle within 1e-12") {
        for (int trial = 0; trial < 20; ++trial) {
            Rng tr = rng.substream("f" + std::to_string(trial));
            GeneratorParams p = init_generator(d, tr);
            p.b_f = testutil::random_tensor(tr, 1, d);
            Tensor z = encodings_from(tr, 4, d);
            Tensor f = generate_features(p, z);
            for (int i = 0; i < 4; ++i)
                for (int r = 0; r < d; ++r) {
                    double pre = p.b_f.at(0, r);
                    for (int c = 0; c < d; ++c) pre += p.w_f.at(r, c) * z.at(i, c);
                    double expect = 1.0 / (1.0 + std::exp(-pre));
                    REQUIRE(f.at(i, r) == Catch::Approx(expect).margin(1e-12));
                }
        }
    }

    SECTION("clamp activation stays within the data range") {
        GeneratorParams p = init_generator(d, rng, FeatureAct::Clamp01);
        p.b_f = Tensor::filled(1, d, 5.0).as_param();
        Tensor f = generate_features(p, encodings_from(rng, 3, d));
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < d; ++k) {
                REQUIRE(f.at(i, k) >= 0.0);
                REQUIRE(f.at(i, k) <= 1.0);
            }
    }
}

TEST_CASE("generator gradients flow to every parameter and match finite differences",
          "[trigger]") {
    Rng rng(8);
    Graph g = random_graph(rng, 6, 3, 0.5);
    std::vector<int> site = {1, 3, 4};
    GeneratorParams p = init_generator(3, rng);
    p.b_f = testutil::random_tensor(rng, 1, 3, -0.3, 0.3);
    Tensor adj = adjacency_tensor(g);
    Tensor x = features_tensor(g);

    auto builder = [&](const std::vector<Tensor>& ps) {
        GeneratorParams q = p;
        q.adopt(ps);
        Tensor z = encode_subgraph(q, adj, x, site);
        Tensor soft = generate_topology_soft(q.w_c, z);
        Tensor feats = generate_features(q, z);
        return add(sq_sum(soft), sq_sum(feats));
    };
    double err = testutil::check_gradients(builder, p.all(), 1e-5);
    REQUIRE(err < 1e-4);

    GradientTape tape;
    Tensor loss = builder(p.all());
    GradMap gm = tape.backward(loss);
    for (const Tensor& t : p.all()) REQUIRE(gm.contains(t));
}

TEST_CASE("adaptive triggers differ across hosts, universal triggers do not", "[trigger]") {
    Rng rng(9);
    GeneratorParams p = init_generator(3, rng);
    Graph g1 = random_graph(rng, 7, 3, 0.3);
    Graph g2 = random_graph(rng, 7, 3, 0.8);
    TriggerInstance t1 = generate_trigger(p, g1, {0, 1, 2});
    TriggerInstance t2 = generate_trigger(p, g2, {0, 1, 2});
    bool differs = false;
    for (int i = 0; i < 3 && !differs; ++i)
        for (int k = 0; k < 3 && !differs; ++k)
            if (std::fabs(t1.features.at(i, k) - t2.features.at(i, k)) > 1e-12) differs = true;
    REQUIRE(differs);

    for (BaselineKind kind : {BaselineKind::BlI, BaselineKind::BlII}) {
        Rng ur(10);
        UniversalTrigger u = init_universal(kind, 3, 3, ur);
        TriggerInstance first = emit_universal(u);
        for (int rep = 0; rep < 10; ++rep) {
            TriggerInstance again = emit_universal(u);
            REQUIRE(again.adj == first.adj);
            REQUIRE(again.features.values() == first.features.values());
        }
    }
}

TEST_CASE("baseline trigger structure follows its kind", "[trigger]") {
    Rng rng(11);

    SECTION("BL-I is a complete graph with one shared feature row") {
        UniversalTrigger u = init_universal(BaselineKind::BlI, 3, 4, rng);
        TriggerInstance t = emit_universal(u);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                REQUIRE(static_cast<int>(t.adj[static_cast<std::size_t>(i) * 3 + j]) ==
                        (i == j ? 0 : 1));
        for (int i = 1; i < 3; ++i)
            for (int k = 0; k < 4; ++k)
                REQUIRE(t.features.at(i, k) == t.features.at(0, k));
    }

    SECTION("BL-II thresholds its learned soft adjacency") {
        UniversalTrigger u = init_universal(BaselineKind::BlII, 3, 2, rng);
        u.adj_logits = Tensor::filled(3, 3, 2.2).as_param();  // sigmoid ~ 0.9
        TriggerInstance t = emit_universal(u);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                REQUIRE(static_cast<int>(t.adj[static_cast<std::size_t>(i) * 3 + j]) ==
                        (i == j ? 0 : 1));
                if (i != j) REQUIRE(t.soft_adj.at(i, j) == Catch::Approx(0.9002495109).margin(1e-6));
            }
    }

    SECTION("universal parameters stay differentiable through emission") {
        UniversalTrigger u = init_universal(BaselineKind::BlII, 3, 2, rng);
        auto builder = [&](const std::vector<Tensor>& ps) {
            UniversalTrigger v = u;
            v.adopt(ps);
            TriggerInstance t = emit_universal(v);
            return add(sq_sum(t.soft_adj), sq_sum(t.features));
        };
        REQUIRE(testutil::check_gradients(builder, u.all(), 1e-5) < 1e-4);
    }
}

TEST_CASE("feature masks swap exactly the marked coordinates", "[trigger]") {
    Rng rng(12);
    Tensor orig = testutil::random_tensor(rng, 3, 4, 0.0, 1.0, false);
    Tensor trig = testutil::random_tensor(rng, 3, 4, 0.0, 1.0, false);

    SECTION("full mask returns the trigger features") {
        auto mask = make_feature_mask(4, 1.0, rng);
        REQUIRE(std::count(mask.begin(), mask.end(), 1) == 4);
        Tensor out = apply_feature_mask(orig, trig, mask);
        REQUIRE(out.values() == trig.values());
    }

    SECTION("empty mask returns the original features") {
        auto mask = make_feature_mask(4, 0.0, rng);
        REQUIRE(std::count(mask.begin(), mask.end(), 1) == 0);
        Tensor out = apply_feature_mask(orig, trig, mask);
        REQUIRE(out.values() == orig.values());
    }

    SECTION("half mask on d=4 changes exactly two coordinates per row") {
        for (int trial = 0; trial < 20; ++trial) {
            auto mask = make_feature_mask(4, 0.5, rng);
            REQUIRE(std::count(mask.begin(), mask.end(), 1) == 2);
            Tensor out = apply_feature_mask(orig, trig, mask);
            for (int i = 0; i < 3; ++i) {
                int changed = 0;
                for (int j = 0; j < 4; ++j)
                    if (out.at(i, j) != orig.at(i, j)) ++changed;
                REQUIRE(changed == 2);
            }
        }
    }

    SECTION("mask length mismatch is rejected") {
        std::vector<std::uint8_t> bad = {1, 0, 1};
        REQUIRE_THROWS_AS(apply_feature_mask(orig, trig, bad), UsageError);
    }
}
