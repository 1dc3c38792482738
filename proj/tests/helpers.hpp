#pragma once

// Shared test utilities: random tensors, central finite differences, and
// normwise gradient comparison.

#include <cmath>
#include <functional>
#include <vector>

#include "gtlab/rng.hpp"
#include "gtlab/tensor.hpp"

namespace testutil {

inline gtlab::Tensor random_tensor(gtlab::Rng& rng, int rows, int cols, double lo = -1.0,
                                   double hi = 1.0, bool param = true) {
    std::vector<double> v(static_cast<std::size_t>(rows) * cols);
    for (auto& x : v) x = rng.uniform(lo, hi);
    gtlab::Tensor t = gtlab::Tensor::from_values(rows, cols, std::move(v));
    return param ? t.as_param() : t;
}

using LossFn = std::function<double(const std::vector<gtlab::Tensor>&)>;

// Central finite differences of fn at params, element by element.
inline std::vector<gtlab::Tensor> fd_grads(const LossFn& fn,
                                           const std::vector<gtlab::Tensor>& params,
                                           double h = 1e-5) {
    std::vector<gtlab::Tensor> out;
    out.reserve(params.size());
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        std::vector<double> g(params[pi].size());
        for (std::size_t k = 0; k < g.size(); ++k) {
            auto bump = [&](double delta) {
                std::vector<gtlab::Tensor> ps = params;
                std::vector<double> v = params[pi].values();
                v[k] += delta;
                gtlab::Tensor t =
                    gtlab::Tensor::from_values(params[pi].rows(), params[pi].cols(), v);
                ps[pi] = params[pi].requires_grad() ? t.as_param() : t;
                return fn(ps);
            };
            g[k] = (bump(h) - bump(-h)) / (2.0 * h);
        }
        out.push_back(gtlab::Tensor::from_values(params[pi].rows(), params[pi].cols(), g));
    }
    return out;
}

// Normwise relative error between analytic and finite-difference gradients,
// with a floor so near-zero gradients do not blow the ratio up.
inline double grad_rel_err(const std::vector<gtlab::Tensor>& analytic,
                           const std::vector<gtlab::Tensor>& fd, double floor = 1e-8) {
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        for (std::size_t k = 0; k < analytic[i].size(); ++k) {
            double d = analytic[i].values()[k] - fd[i].values()[k];
            diff2 += d * d;
            ref2 += fd[i].values()[k] * fd[i].values()[k];
        }
    }
    return std::sqrt(diff2) / std::max(std::sqrt(ref2), floor);
}

// Runs tape backward for a scalar loss built by builder over params and
// compares against central finite differences of the same computation.
inline double check_gradients(
    const std::function<gtlab::Tensor(const std::vector<gtlab::Tensor>&)>& builder,
    const std::vector<gtlab::Tensor>& params, double h = 1e-5) {
    std::vector<gtlab::Tensor> analytic;
    {
        gtlab::GradientTape tape;
        gtlab::Tensor loss = builder(params);
        gtlab::GradMap gm = tape.backward(loss);
        for (const auto& p : params) analytic.push_back(gm.grad_or_zero(p));
    }
    LossFn value_fn = [&](const std::vector<gtlab::Tensor>& ps) {
        return builder(ps).item();
    };
    std::vector<gtlab::Tensor> fd = fd_grads(value_fn, params, h);
    return grad_rel_err(analytic, fd);
}

}  // namespace testutil
