#pragma once

// Classical classifiers trained on frozen graph embeddings. Used to model a
// downstream consumer that keeps the pre-trained feature extractor intact and
// only fits its own classifier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "gtlab/common.hpp"
#include "gtlab/rng.hpp"

namespace gtlab {

using FeatureRow = std::vector<double>;

namespace detail {

inline void check_training_data(const std::vector<FeatureRow>& x, const std::vector<int>& y,
                                int classes) {
    require(!x.empty(), "downstream: empty training set");
    require(x.size() == y.size(), "downstream: feature/label count mismatch");
    require(classes >= 2, "downstream: need at least two classes");
    bool varied = false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i].size() == x[0].size(), "downstream: ragged feature rows");
        require(y[i] >= 0 && y[i] < classes, "downstream: label out of range");
        if (y[i] != y[0]) varied = true;
    }
    require(varied, "downstream: training labels are all one class");
}

}  // namespace detail

// --- Gaussian naive Bayes -----------------------------------------------------

class GaussianNB {
public:
    void fit(const std::vector<FeatureRow>& x, const std::vector<int>& y, int classes) {
        detail::check_training_data(x, y, classes);
        classes_ = classes;
        dim_ = static_cast<int>(x[0].size());
        log_prior_.assign(classes, 0.0);
        mean_.assign(classes, FeatureRow(dim_, 0.0));
        var_.assign(classes, FeatureRow(dim_, 0.0));
        std::vector<int> count(classes, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            ++count[y[i]];
            for (int d = 0; d < dim_; ++d) mean_[y[i]][d] += x[i][d];
        }
        for (int c = 0; c < classes; ++c) {
            require(count[c] > 0, "GaussianNB: class with no training examples");
            for (int d = 0; d < dim_; ++d) mean_[c][d] /= count[c];
            log_prior_[c] = std::log(static_cast<double>(count[c]) / x.size());
        }
        for (std::size_t i = 0; i < x.size(); ++i)
            for (int d = 0; d < dim_; ++d) {
                double diff = x[i][d] - mean_[y[i]][d];
                var_[y[i]][d] += diff * diff;
            }
        for (int c = 0; c < classes; ++c)
            for (int d = 0; d < dim_; ++d)
                var_[c][d] = std::max(var_[c][d] / count[c], 1e-9);
    }

    int predict(const FeatureRow& x) const {
        require(static_cast<int>(x.size()) == dim_, "GaussianNB: dimension mismatch");
        int best = 0;
        double best_ll = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < classes_; ++c) {
            double ll = log_prior_[c];
            for (int d = 0; d < dim_; ++d) {
                double diff = x[d] - mean_[c][d];
                ll += -0.5 * std::log(2.0 * 3.141592653589793 * var_[c][d]) -
                      diff * diff / (2.0 * var_[c][d]);
            }
            if (ll > best_ll) {
                best_ll = ll;
                best = c;
            }
        }
        return best;
    }

private:
    int classes_ = 0;
    int dim_ = 0;
    std::vector<double> log_prior_;
    std::vector<FeatureRow> mean_;
    std::vector<FeatureRow> var_;
};

// --- Random forest --------------------------------------------------------------

struct ForestConfig {
    int n_trees = 20;
    int max_depth = 6;
    int min_samples = 2;
};

class RandomForest {
    struct Node {
        int feature = -1;     // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        int label = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

public:
    explicit RandomForest(ForestConfig cfg = {}) : cfg_(cfg) {}

    void fit(const std::vector<FeatureRow>& x, const std::vector<int>& y, int classes,
             Rng& rng) {
        detail::check_training_data(x, y, classes);
        classes_ = classes;
        dim_ = static_cast<int>(x[0].size());
        trees_.clear();
        int mtry = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(dim_))));
        for (int t = 0; t < cfg_.n_trees; ++t) {
            std::vector<int> boot(x.size());
            for (auto& i : boot) i = rng.randint(static_cast<int>(x.size()));
            Tree tree;
            grow(tree, x, y, boot, 0, mtry, rng);
            trees_.push_back(std::move(tree));
        }
    }

    int predict(const FeatureRow& x) const {
        require(static_cast<int>(x.size()) == dim_, "RandomForest: dimension mismatch");
        require(!trees_.empty(), "RandomForest: not fitted");
        std::vector<int> votes(classes_, 0);
        for (const auto& tree : trees_) {
            int node = 0;
            while (tree.nodes[node].feature >= 0) {
                const Node& nd = tree.nodes[node];
                node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
            }
            ++votes[tree.nodes[node].label];
        }
        return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }

private:
    int majority(const std::vector<int>& y, const std::vector<int>& idx) const {
        std::vector<int> counts(classes_, 0);
        for (int i : idx) ++counts[y[i]];
        return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }

    double gini(const std::vector<int>& counts, int total) const {
        if (total == 0) return 0.0;
        double g = 1.0;
        for (int c : counts) {
            double p = static_cast<double>(c) / total;
            g -= p * p;
        }
        return g;
    }

    int grow(Tree& tree, const std::vector<FeatureRow>& x, const std::vector<int>& y,
             const std::vector<int>& idx, int depth, int mtry, Rng& rng) {
        int me = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes[me].label = majority(y, idx);

        bool pure = true;
        for (std::size_t i = 1; i < idx.size(); ++i)
            if (y[idx[i]] != y[idx[0]]) {
                pure = false;
                break;
            }
        if (pure || depth >= cfg_.max_depth ||
            static_cast<int>(idx.size()) < cfg_.min_samples)
            return me;

        auto feats = rng.sample_indices(dim_, std::min(mtry, dim_));
        double best_impurity = std::numeric_limits<double>::infinity();
        int best_feat = -1;
        double best_thr = 0.0;
        for (int f : feats) {
            std::vector<double> vals;
            vals.reserve(idx.size());
            for (int i : idx) vals.push_back(x[i][f]);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
                double thr = 0.5 * (vals[v] + vals[v + 1]);
                std::vector<int> lc(classes_, 0), rc(classes_, 0);
                int ln = 0, rn = 0;
                for (int i : idx) {
                    if (x[i][f] <= thr) {
                        ++lc[y[i]];
                        ++ln;
                    } else {
                        ++rc[y[i]];
                        ++rn;
                    }
                }
                double imp = (ln * gini(lc, ln) + rn * gini(rc, rn)) / idx.size();
                if (imp < best_impurity) {
                    best_impurity = imp;
                    best_feat = f;
                    best_thr = thr;
                }
            }
        }
        if (best_feat < 0) return me;

        std::vector<int> left, right;
        for (int i : idx) (x[i][best_feat] <= best_thr ? left : right).push_back(i);
        if (left.empty() || right.empty()) return me;

        tree.nodes[me].feature = best_feat;
        tree.nodes[me].threshold = best_thr;
        int l = grow(tree, x, y, left, depth + 1, mtry, rng);
        int r = grow(tree, x, y, right, depth + 1, mtry, rng);
        tree.nodes[me].left = l;
        tree.nodes[me].right = r;
        return me;
    }

    ForestConfig cfg_;
    int classes_ = 0;
    int dim_ = 0;
    std::vector<Tree> trees_;
};

// --- Gradient boosting with stumps ------------------------------------------------

struct BoostConfig {
    int rounds = 50;
    double learning_rate = 0.3;
};

// Multinomial boosting: each round fits one regression stump per class to the
// softmax residuals.
class GradientBoost {
    struct Stump {
        int feature = 0;
        double threshold = 0.0;
        double left = 0.0, right = 0.0;
    };

public:
    explicit GradientBoost(BoostConfig cfg = {}) : cfg_(cfg) {}

    void fit(const std::vector<FeatureRow>& x, const std::vector<int>& y, int classes) {
        detail::check_training_data(x, y, classes);
        classes_ = classes;
        dim_ = static_cast<int>(x[0].size());
        stumps_.assign(classes, {});
        std::vector<std::vector<double>> score(x.size(), std::vector<double>(classes, 0.0));
        for (int round = 0; round < cfg_.rounds; ++round) {
            for (int c = 0; c < classes; ++c) {
                std::vector<double> resid(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    double mx = *std::max_element(score[i].begin(), score[i].end());
                    double denom = 0.0;
                    for (int k = 0; k < classes; ++k) denom += std::exp(score[i][k] - mx);
                    double p = std::exp(score[i][c] - mx) / denom;
                    resid[i] = (y[i] == c ? 1.0 : 0.0) - p;
                }
                Stump s = fit_stump(x, resid);
                stumps_[c].push_back(s);
                for (std::size_t i = 0; i < x.size(); ++i)
                    score[i][c] += cfg_.learning_rate *
                                   (x[i][s.feature] <= s.threshold ? s.left : s.right);
            }
        }
    }

    int predict(const FeatureRow& x) const {
        require(static_cast<int>(x.size()) == dim_, "GradientBoost: dimension mismatch");
        require(!stumps_.empty(), "GradientBoost: not fitted");
        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < classes_; ++c) {
            double s = 0.0;
            for (const auto& st : stumps_[c])
                s += cfg_.learning_rate * (x[st.feature] <= st.threshold ? st.left : st.right);
            if (s > best_score) {
                best_score = s;
                best = c;
            }
        }
        return best;
    }

private:
    Stump fit_stump(const std::vector<FeatureRow>& x, const std::vector<double>& resid) const {
        Stump best;
        double best_err = std::numeric_limits<double>::infinity();
        for (int f = 0; f < dim_; ++f) {
            std::vector<double> vals;
            vals.reserve(x.size());
            for (const auto& row : x) vals.push_back(row[f]);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
                double thr = 0.5 * (vals[v] + vals[v + 1]);
                double ls = 0.0, rs = 0.0;
                int ln = 0, rn = 0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x[i][f] <= thr) {
                        ls += resid[i];
                        ++ln;
                    } else {
                        rs += resid[i];
                        ++rn;
                    }
                }
                double lv = ln ? ls / ln : 0.0;
                double rv = rn ? rs / rn : 0.0;
                double err = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    double pred = x[i][f] <= thr ? lv : rv;
                    double d = resid[i] - pred;
                    err += d * d;
                }
                if (err < best_err) {
                    best_err = err;
                    best = {f, thr, lv, rv};
                }
            }
        }
        if (!std::isfinite(best_err)) {
            // single distinct value everywhere: constant stump
            double mean = 0.0;
            for (double r : resid) mean += r;
            mean /= resid.size();
            best = {0, std::numeric_limits<double>::infinity(), mean, mean};
        }
        return best;
    }

    BoostConfig cfg_;
    int classes_ = 0;
    int dim_ = 0;
    std::vector<std::vector<Stump>> stumps_;
};

}  // namespace gtlab
