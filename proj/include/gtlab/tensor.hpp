#pragma once

// Reverse-mode automatic differentiation on dense 2-D double tensors.
//
// Tensors are immutable value handles. While a GradientTape is alive on the
// current thread, every op records a backward closure; tape.backward(loss)
// replays them in reverse and returns gradients for the requires_grad leaves
// reachable from the loss. Scalars are 1x1 tensors.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gtlab/common.hpp"

namespace gtlab {

namespace detail {
struct TensorData {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;
    bool requires_grad = false;
    std::uint64_t id = 0;
};

inline std::uint64_t next_tensor_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}
}  // namespace detail

class Tensor {
public:
    Tensor() : d_(std::make_shared<detail::TensorData>()) { d_->id = detail::next_tensor_id(); }

    static Tensor zeros(int rows, int cols) { return filled(rows, cols, 0.0); }
    static Tensor ones(int rows, int cols) { return filled(rows, cols, 1.0); }

    static Tensor filled(int rows, int cols, double value) {
        check_shape(rows, cols);
        auto d = std::make_shared<detail::TensorData>();
        d->rows = rows;
        d->cols = cols;
        d->v.assign(static_cast<std::size_t>(rows) * cols, value);
        d->id = detail::next_tensor_id();
        return Tensor(std::move(d));
    }

    static Tensor from_values(int rows, int cols, std::vector<double> values) {
        check_shape(rows, cols);
        require(values.size() == static_cast<std::size_t>(rows) * cols,
                "Tensor::from_values: value count does not match shape");
        auto d = std::make_shared<detail::TensorData>();
        d->rows = rows;
        d->cols = cols;
        d->v = std::move(values);
        d->id = detail::next_tensor_id();
        return Tensor(std::move(d));
    }

    static Tensor scalar(double value) { return filled(1, 1, value); }

    // Marks a copy of this tensor as a trainable leaf.
    Tensor as_param() const {
        auto d = std::make_shared<detail::TensorData>(*d_);
        d->requires_grad = true;
        d->id = detail::next_tensor_id();
        return Tensor(std::move(d));
    }

    int rows() const { return d_->rows; }
    int cols() const { return d_->cols; }
    std::size_t size() const { return d_->v.size(); }
    bool is_scalar() const { return d_->rows == 1 && d_->cols == 1; }
    bool requires_grad() const { return d_->requires_grad; }
    std::uint64_t id() const { return d_->id; }

    double at(int r, int c) const {
        require(r >= 0 && r < d_->rows && c >= 0 && c < d_->cols,
                "Tensor::at: index out of range");
        return d_->v[static_cast<std::size_t>(r) * d_->cols + c];
    }

    double item() const {
        require(is_scalar(), "Tensor::item: tensor is not scalar");
        return d_->v[0];
    }

    const std::vector<double>& values() const { return d_->v; }

    bool same_shape(const Tensor& o) const {
        return rows() == o.rows() && cols() == o.cols();
    }

private:
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}

    static void check_shape(int rows, int cols) {
        require(rows >= 0 && cols >= 0, "Tensor: negative dimension");
    }

    std::shared_ptr<detail::TensorData> d_;
};

class GradMap {
public:
    bool contains(const Tensor& t) const { return g_.count(t.id()) > 0; }

    Tensor grad(const Tensor& t) const {
        auto it = g_.find(t.id());
        require(it != g_.end(), "GradMap: no gradient recorded for tensor");
        return it->second;
    }

    Tensor grad_or_zero(const Tensor& t) const {
        auto it = g_.find(t.id());
        if (it == g_.end()) return Tensor::zeros(t.rows(), t.cols());
        return it->second;
    }

    std::size_t size() const { return g_.size(); }
    bool empty() const { return g_.empty(); }

    void put(const Tensor& t, Tensor grad) { g_.emplace(t.id(), std::move(grad)); }

private:
    std::unordered_map<std::uint64_t, Tensor> g_;
};

class GradientTape {
public:
    GradientTape() {
        prev_ = current_ptr();
        current_ptr() = this;
    }
    ~GradientTape() { current_ptr() = prev_; }

    GradientTape(const GradientTape&) = delete;
    GradientTape& operator=(const GradientTape&) = delete;

    static GradientTape* current() { return current_ptr(); }

    // Buffers of partial derivatives keyed by tensor id, filled during the
    // reverse sweep.
    struct Flow {
        std::unordered_map<std::uint64_t, std::vector<double>> bufs;
        const std::unordered_set<std::uint64_t>* live = nullptr;

        // True when gradient must propagate into t (a trainable leaf or an
        // intermediate produced on this tape). Constants are skipped.
        bool needs(const Tensor& t) const {
            return t.requires_grad() || live->count(t.id()) > 0;
        }

        std::vector<double>& buf(const Tensor& t) {
            auto it = bufs.find(t.id());
            if (it == bufs.end()) {
                it = bufs.emplace(t.id(), std::vector<double>(t.size(), 0.0)).first;
            }
            return it->second;
        }
    };

    using BackFn = std::function<void(const std::vector<double>& out_grad, Flow& flow)>;

    void record(const Tensor& out, const std::vector<Tensor>& inputs, BackFn back) {
        produced_.insert(out.id());
        for (const auto& in : inputs) {
            if (in.requires_grad()) params_.emplace(in.id(), in);
        }
        if (out.requires_grad()) params_.emplace(out.id(), out);
        nodes_.push_back(Node{out.id(), std::move(back)});
    }

    bool recorded_anything() const { return !nodes_.empty(); }

    GradMap backward(const Tensor& loss) {
        require(loss.is_scalar(), "backward: loss must be a scalar tensor");
        require(!used_, "backward: tape already consumed; re-record the forward pass");
        used_ = true;

        Flow flow;
        flow.live = &produced_;
        flow.bufs[loss.id()] = {1.0};

        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            auto g = flow.bufs.find(it->out_id);
            if (g == flow.bufs.end()) continue;
            it->back(g->second, flow);
        }

        GradMap out;
        for (const auto& [id, t] : params_) {
            auto g = flow.bufs.find(id);
            if (g == flow.bufs.end()) continue;
            out.put(t, Tensor::from_values(t.rows(), t.cols(), std::move(g->second)));
        }
        return out;
    }

private:
    struct Node {
        std::uint64_t out_id;
        BackFn back;
    };

    static GradientTape*& current_ptr() {
        thread_local GradientTape* cur = nullptr;
        return cur;
    }

    GradientTape* prev_ = nullptr;
    std::vector<Node> nodes_;
    std::unordered_set<std::uint64_t> produced_;
    std::unordered_map<std::uint64_t, Tensor> params_;
    bool used_ = false;
};

// ---------------------------------------------------------------------------
// Ops. Each validates shapes, computes the value, and records a backward
// closure when a tape is active.

namespace detail {

inline void record_op(const Tensor& out, const std::vector<Tensor>& inputs,
                      GradientTape::BackFn back) {
    if (auto* t = GradientTape::current()) t->record(out, inputs, std::move(back));
}

inline double clamp_exp_arg(double x) {
    if (x > 40.0) return 40.0;
    if (x < -40.0) return -40.0;
    return x;
}

}  // namespace detail

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    require(a.cols() == b.rows(), "matmul: inner dimensions do not match");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    std::vector<double> v(static_cast<std::size_t>(n) * m, 0.0);
    const auto& av = a.values();
    const auto& bv = b.values();
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < k; ++p) {
            double aip = av[static_cast<std::size_t>(i) * k + p];
            if (aip == 0.0) continue;
            const double* brow = &bv[static_cast<std::size_t>(p) * m];
            double* orow = &v[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) orow[j] += aip * brow[j];
        }
    }
    Tensor out = Tensor::from_values(n, m, std::move(v));
    detail::record_op(out, {a, b}, [a, b, n, k, m](const std::vector<double>& g,
                                                   GradientTape::Flow& flow) {
        if (flow.needs(a)) {
            auto& ga = flow.buf(a);
            const auto& bv = b.values();
            for (int i = 0; i < n; ++i)
                for (int p = 0; p < k; ++p) {
                    double s = 0.0;
                    for (int j = 0; j < m; ++j)
                        s += g[static_cast<std::size_t>(i) * m + j] *
                             bv[static_cast<std::size_t>(p) * m + j];
                    ga[static_cast<std::size_t>(i) * k + p] += s;
                }
        }
        if (flow.needs(b)) {
            auto& gb = flow.buf(b);
            const auto& av = a.values();
            for (int p = 0; p < k; ++p)
                for (int j = 0; j < m; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i)
                        s += av[static_cast<std::size_t>(i) * k + p] *
                             g[static_cast<std::size_t>(i) * m + j];
                    gb[static_cast<std::size_t>(p) * m + j] += s;
                }
        }
    });
    return out;
}

inline Tensor transpose(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    std::vector<double> v(a.size());
    const auto& av = a.values();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            v[static_cast<std::size_t>(j) * n + i] = av[static_cast<std::size_t>(i) * m + j];
    Tensor out = Tensor::from_values(m, n, std::move(v));
    detail::record_op(out, {a}, [a, n, m](const std::vector<double>& g,
                                          GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                ga[static_cast<std::size_t>(i) * m + j] += g[static_cast<std::size_t>(j) * n + i];
    });
    return out;
}

namespace detail {

// Shared scaffold for elementwise binary ops with per-element partials.
template <typename FwdFn, typename DaFn, typename DbFn>
Tensor ew_binary(const Tensor& a, const Tensor& b, const char* name, FwdFn f, DaFn da,
                 DbFn db) {
    require(a.same_shape(b), std::string(name) + ": shape mismatch");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a.values()[i], b.values()[i]);
    Tensor out = Tensor::from_values(a.rows(), a.cols(), std::move(v));
    record_op(out, {a, b}, [a, b, da, db](const std::vector<double>& g,
                                          GradientTape::Flow& flow) {
        if (flow.needs(a)) {
            auto& ga = flow.buf(a);
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i] * da(a.values()[i], b.values()[i]);
        }
        if (flow.needs(b)) {
            auto& gb = flow.buf(b);
            for (std::size_t i = 0; i < g.size(); ++i)
                gb[i] += g[i] * db(a.values()[i], b.values()[i]);
        }
    });
    return out;
}

// Elementwise unary op with partial depending on (input, output).
template <typename FwdFn, typename DFn>
Tensor ew_unary(const Tensor& a, FwdFn f, DFn d) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a.values()[i]);
    Tensor out = Tensor::from_values(a.rows(), a.cols(), std::move(v));
    record_op(out, {a}, [a, out, d](const std::vector<double>& g,
                                    GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            ga[i] += g[i] * d(a.values()[i], out.values()[i]);
    });
    return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    return detail::ew_binary(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    return detail::ew_binary(
        a, b, "sub", [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    return detail::ew_binary(
        a, b, "mul", [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

inline Tensor div(const Tensor& a, const Tensor& b) {
    return detail::ew_binary(
        a, b, "div", [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

inline Tensor scale(const Tensor& a, double s) {
    return detail::ew_unary(
        a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

inline Tensor add_scalar(const Tensor& a, double s) {
    return detail::ew_unary(
        a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

inline Tensor neg(const Tensor& a) { return scale(a, -1.0); }

// Broadcast a 1 x c row vector across every row of a.
inline Tensor add_rowvec(const Tensor& a, const Tensor& v) {
    require(v.rows() == 1 && v.cols() == a.cols(), "add_rowvec: vector shape mismatch");
    std::vector<double> out(a.size());
    const int m = a.cols();
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < m; ++j)
            out[static_cast<std::size_t>(i) * m + j] =
                a.values()[static_cast<std::size_t>(i) * m + j] + v.values()[j];
    Tensor t = Tensor::from_values(a.rows(), a.cols(), std::move(out));
    detail::record_op(t, {a, v}, [a, v, m](const std::vector<double>& g,
                                           GradientTape::Flow& flow) {
        if (flow.needs(a)) {
            auto& ga = flow.buf(a);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (flow.needs(v)) {
            auto& gv = flow.buf(v);
            for (std::size_t i = 0; i < g.size(); ++i) gv[i % m] += g[i];
        }
    });
    return t;
}

inline Tensor sigmoid(const Tensor& a) {
    // Arguments are clamped to [-40, 40]; beyond that the result saturates in
    // double precision anyway and the clamp keeps exp() finite.
    return detail::ew_unary(
        a,
        [](double x) { return 1.0 / (1.0 + std::exp(-detail::clamp_exp_arg(x))); },
        [](double, double y) { return y * (1.0 - y); });
}

inline Tensor relu(const Tensor& a) {
    return detail::ew_unary(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor leaky_relu(const Tensor& a, double alpha = 0.2) {
    return detail::ew_unary(
        a, [alpha](double x) { return x > 0.0 ? x : alpha * x; },
        [alpha](double x, double) { return x > 0.0 ? 1.0 : alpha; });
}

inline Tensor exp_clamped(const Tensor& a) {
    return detail::ew_unary(
        a, [](double x) { return std::exp(detail::clamp_exp_arg(x)); },
        [](double, double y) { return y; });
}

inline Tensor log_strict(const Tensor& a) {
    for (double x : a.values())
        if (!(x > 0.0)) throw NumericError("log: non-positive argument");
    return detail::ew_unary(
        a, [](double x) { return std::log(x); },
        [](double x, double) { return 1.0 / x; });
}

// Elementwise power with positive base; used for degree normalisation.
inline Tensor pow_scalar(const Tensor& a, double p) {
    for (double x : a.values())
        if (!(x > 0.0)) throw NumericError("pow_scalar: non-positive base");
    return detail::ew_unary(
        a, [p](double x) { return std::pow(x, p); },
        [p](double x, double y) { return p * y / x; });
}

// Gradient is 1 inside [lo, hi] (inclusive) and 0 outside.
inline Tensor clamp(const Tensor& a, double lo, double hi) {
    return detail::ew_unary(
        a, [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
        [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

inline Tensor softmax_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    require(m > 0, "softmax_rows: empty rows");
    std::vector<double> v(a.size());
    for (int i = 0; i < n; ++i) {
        const double* row = &a.values()[static_cast<std::size_t>(i) * m];
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (int j = 0; j < m; ++j) {
            double e = std::exp(detail::clamp_exp_arg(row[j] - mx));
            v[static_cast<std::size_t>(i) * m + j] = e;
            s += e;
        }
        for (int j = 0; j < m; ++j) v[static_cast<std::size_t>(i) * m + j] /= s;
    }
    Tensor out = Tensor::from_values(n, m, std::move(v));
    detail::record_op(out, {a}, [a, out, n, m](const std::vector<double>& g,
                                               GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (int i = 0; i < n; ++i) {
            const double* arow = &out.values()[static_cast<std::size_t>(i) * m];
            const double* grow = &g[static_cast<std::size_t>(i) * m];
            double dot = 0.0;
            for (int j = 0; j < m; ++j) dot += grow[j] * arow[j];
            for (int j = 0; j < m; ++j)
                ga[static_cast<std::size_t>(i) * m + j] += arow[j] * (grow[j] - dot);
        }
    });
    return out;
}

inline Tensor log_softmax_rows(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    require(m > 0, "log_softmax_rows: empty rows");
    std::vector<double> v(a.size());
    for (int i = 0; i < n; ++i) {
        const double* row = &a.values()[static_cast<std::size_t>(i) * m];
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += std::exp(detail::clamp_exp_arg(row[j] - mx));
        double lse = mx + std::log(s);
        for (int j = 0; j < m; ++j) v[static_cast<std::size_t>(i) * m + j] = row[j] - lse;
    }
    Tensor out = Tensor::from_values(n, m, std::move(v));
    detail::record_op(out, {a}, [a, out, n, m](const std::vector<double>& g,
                                               GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (int i = 0; i < n; ++i) {
            const double* orow = &out.values()[static_cast<std::size_t>(i) * m];
            const double* grow = &g[static_cast<std::size_t>(i) * m];
            double gsum = 0.0;
            for (int j = 0; j < m; ++j) gsum += grow[j];
            for (int j = 0; j < m; ++j)
                ga[static_cast<std::size_t>(i) * m + j] += grow[j] - std::exp(orow[j]) * gsum;
        }
    });
    return out;
}

// Row-wise softmax over logits gated by non-negative weights:
//   out_ij = w_ij exp(l_ij) / sum_k w_ik exp(l_ik).
// Differentiable in both arguments; rows whose weights sum to zero are an
// error. This is the masked-attention primitive.
inline Tensor weighted_softmax_rows(const Tensor& logits, const Tensor& w) {
    require(logits.same_shape(w), "weighted_softmax_rows: shape mismatch");
    const int n = logits.rows(), m = logits.cols();
    std::vector<double> ev(logits.size());
    std::vector<double> out_v(logits.size());
    std::vector<double> sv(n);
    for (int i = 0; i < n; ++i) {
        const double* lrow = &logits.values()[static_cast<std::size_t>(i) * m];
        const double* wrow = &w.values()[static_cast<std::size_t>(i) * m];
        double mx = -1e300;
        for (int j = 0; j < m; ++j)
            if (wrow[j] > 0.0) mx = std::max(mx, lrow[j]);
        if (mx == -1e300) throw NumericError("weighted_softmax_rows: row has no positive weight");
        double s = 0.0;
        for (int j = 0; j < m; ++j) {
            if (wrow[j] < 0.0) throw NumericError("weighted_softmax_rows: negative weight");
            double e = std::exp(detail::clamp_exp_arg(lrow[j] - mx));
            ev[static_cast<std::size_t>(i) * m + j] = e;
            s += wrow[j] * e;
        }
        if (!(s > 0.0)) throw NumericError("weighted_softmax_rows: zero row mass");
        sv[i] = s;
        for (int j = 0; j < m; ++j)
            out_v[static_cast<std::size_t>(i) * m + j] =
                wrow[j] * ev[static_cast<std::size_t>(i) * m + j] / s;
    }
    Tensor out = Tensor::from_values(n, m, std::move(out_v));
    detail::record_op(out, {logits, w},
                      [logits, w, out, ev, sv, n, m](const std::vector<double>& g,
                                                     GradientTape::Flow& flow) {
        bool nl = flow.needs(logits), nw = flow.needs(w);
        if (!nl && !nw) return;
        for (int i = 0; i < n; ++i) {
            const double* arow = &out.values()[static_cast<std::size_t>(i) * m];
            const double* grow = &g[static_cast<std::size_t>(i) * m];
            double dot = 0.0;
            for (int j = 0; j < m; ++j) dot += grow[j] * arow[j];
            if (nl) {
                auto& gl = flow.buf(logits);
                for (int j = 0; j < m; ++j)
                    gl[static_cast<std::size_t>(i) * m + j] += arow[j] * (grow[j] - dot);
            }
            if (nw) {
                auto& gw = flow.buf(w);
                for (int j = 0; j < m; ++j)
                    gw[static_cast<std::size_t>(i) * m + j] +=
                        ev[static_cast<std::size_t>(i) * m + j] / sv[i] * (grow[j] - dot);
            }
        }
    });
    return out;
}

inline Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.values()) s += x;
    Tensor out = Tensor::scalar(s);
    detail::record_op(out, {a}, [a](const std::vector<double>& g, GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (auto& x : ga) x += g[0];
    });
    return out;
}

inline Tensor mean(const Tensor& a) {
    require(a.size() > 0, "mean: empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

inline Tensor rowsum(const Tensor& a) {
    const int n = a.rows(), m = a.cols();
    std::vector<double> v(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) v[i] += a.values()[static_cast<std::size_t>(i) * m + j];
    Tensor out = Tensor::from_values(n, 1, std::move(v));
    detail::record_op(out, {a}, [a, n, m](const std::vector<double>& g,
                                          GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) ga[static_cast<std::size_t>(i) * m + j] += g[i];
    });
    return out;
}

inline Tensor colmean(const Tensor& a) {
    require(a.rows() > 0, "colmean: empty tensor");
    const int n = a.rows(), m = a.cols();
    std::vector<double> v(m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) v[j] += a.values()[static_cast<std::size_t>(i) * m + j];
    for (int j = 0; j < m; ++j) v[j] /= n;
    Tensor out = Tensor::from_values(1, m, std::move(v));
    detail::record_op(out, {a}, [a, n, m](const std::vector<double>& g,
                                          GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                ga[static_cast<std::size_t>(i) * m + j] += g[j] / n;
    });
    return out;
}

inline Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
    const int m = a.cols();
    std::vector<double> v(idx.size() * static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        require(idx[k] >= 0 && idx[k] < a.rows(), "gather_rows: index out of range");
        for (int j = 0; j < m; ++j)
            v[k * m + j] = a.values()[static_cast<std::size_t>(idx[k]) * m + j];
    }
    Tensor out = Tensor::from_values(static_cast<int>(idx.size()), m, std::move(v));
    detail::record_op(out, {a}, [a, idx, m](const std::vector<double>& g,
                                            GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (std::size_t k = 0; k < idx.size(); ++k)
            for (int j = 0; j < m; ++j)
                ga[static_cast<std::size_t>(idx[k]) * m + j] += g[k * m + j];
    });
    return out;
}

// Copy of base with base[idx[k]] replaced by rows[k].
inline Tensor replace_rows(const Tensor& base, const std::vector<int>& idx,
                           const Tensor& rows) {
    require(rows.rows() == static_cast<int>(idx.size()) && rows.cols() == base.cols(),
            "replace_rows: replacement shape mismatch");
    std::vector<double> v = base.values();
    const int m = base.cols();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        require(idx[k] >= 0 && idx[k] < base.rows(), "replace_rows: index out of range");
        for (int j = 0; j < m; ++j)
            v[static_cast<std::size_t>(idx[k]) * m + j] = rows.values()[k * m + j];
    }
    Tensor out = Tensor::from_values(base.rows(), base.cols(), std::move(v));
    detail::record_op(out, {base, rows},
                      [base, rows, idx, m](const std::vector<double>& g,
                                           GradientTape::Flow& flow) {
        if (flow.needs(base)) {
            auto& gb = flow.buf(base);
            std::vector<bool> replaced(base.rows(), false);
            for (int i : idx) replaced[i] = true;
            for (int i = 0; i < base.rows(); ++i) {
                if (replaced[i]) continue;
                for (int j = 0; j < m; ++j)
                    gb[static_cast<std::size_t>(i) * m + j] += g[static_cast<std::size_t>(i) * m + j];
            }
        }
        if (flow.needs(rows)) {
            auto& gr = flow.buf(rows);
            for (std::size_t k = 0; k < idx.size(); ++k)
                for (int j = 0; j < m; ++j)
                    gr[k * m + j] += g[static_cast<std::size_t>(idx[k]) * m + j];
        }
    });
    return out;
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    require(a.rows() == b.rows(), "concat_cols: row count mismatch");
    const int n = a.rows(), ma = a.cols(), mb = b.cols();
    std::vector<double> v(static_cast<std::size_t>(n) * (ma + mb));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < ma; ++j)
            v[static_cast<std::size_t>(i) * (ma + mb) + j] =
                a.values()[static_cast<std::size_t>(i) * ma + j];
        for (int j = 0; j < mb; ++j)
            v[static_cast<std::size_t>(i) * (ma + mb) + ma + j] =
                b.values()[static_cast<std::size_t>(i) * mb + j];
    }
    Tensor out = Tensor::from_values(n, ma + mb, std::move(v));
    detail::record_op(out, {a, b}, [a, b, n, ma, mb](const std::vector<double>& g,
                                                     GradientTape::Flow& flow) {
        if (flow.needs(a)) {
            auto& ga = flow.buf(a);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < ma; ++j)
                    ga[static_cast<std::size_t>(i) * ma + j] +=
                        g[static_cast<std::size_t>(i) * (ma + mb) + j];
        }
        if (flow.needs(b)) {
            auto& gb = flow.buf(b);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < mb; ++j)
                    gb[static_cast<std::size_t>(i) * mb + j] +=
                        g[static_cast<std::size_t>(i) * (ma + mb) + ma + j];
        }
    });
    return out;
}

// --- Norms ------------------------------------------------------------------

// Sum of absolute values; subgradient at 0 is 0.
inline Tensor l1_norm(const Tensor& a) {
    double s = 0.0;
    for (double x : a.values()) s += std::fabs(x);
    Tensor out = Tensor::scalar(s);
    detail::record_op(out, {a}, [a](const std::vector<double>& g, GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (std::size_t i = 0; i < ga.size(); ++i) {
            double x = a.values()[i];
            ga[i] += g[0] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        }
    });
    return out;
}

// Euclidean norm of all entries; gradient at the origin is defined as 0.
inline Tensor l2_norm(const Tensor& a) {
    double s = 0.0;
    for (double x : a.values()) s += x * x;
    double nrm = std::sqrt(s);
    Tensor out = Tensor::scalar(nrm);
    detail::record_op(out, {a}, [a, nrm](const std::vector<double>& g,
                                         GradientTape::Flow& flow) {
        if (!flow.needs(a) || nrm == 0.0) return;
        auto& ga = flow.buf(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * a.values()[i] / nrm;
    });
    return out;
}

inline Tensor frobenius_norm(const Tensor& a) { return l2_norm(a); }

// Sum of squared entries (squared L2), the distance used by the attack losses.
inline Tensor sq_sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.values()) s += x * x;
    Tensor out = Tensor::scalar(s);
    detail::record_op(out, {a}, [a](const std::vector<double>& g, GradientTape::Flow& flow) {
        if (!flow.needs(a)) return;
        auto& ga = flow.buf(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * 2.0 * a.values()[i];
    });
    return out;
}

inline bool all_finite(const Tensor& a) {
    for (double x : a.values())
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace gtlab
