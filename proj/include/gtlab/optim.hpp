#pragma once

#include <cmath>
#include <vector>

#include "gtlab/common.hpp"
#include "gtlab/tensor.hpp"

namespace gtlab {

// First-order optimizers over a fixed-order parameter list. step() replaces
// each Tensor in the list with its updated value; Adam moments are keyed by
// list position, so the list must keep its length and shapes across steps.
// Weight decay is additive L2 on the gradient, matching the usual Adam
// (not AdamW) behaviour.
class Optimizer {
public:
    enum class Kind { Sgd, Adam };

    static Optimizer sgd(double lr, double weight_decay = 0.0) {
        return Optimizer(Kind::Sgd, lr, weight_decay);
    }

    static Optimizer adam(double lr, double weight_decay = 0.0, double beta1 = 0.9,
                          double beta2 = 0.999, double eps = 1e-8) {
        Optimizer o(Kind::Adam, lr, weight_decay);
        o.beta1_ = beta1;
        o.beta2_ = beta2;
        o.eps_ = eps;
        return o;
    }

    void step(std::vector<Tensor>& params, const GradMap& grads) {
        if (kind_ == Kind::Adam) {
            if (m_.empty()) {
                m_.resize(params.size());
                v_.resize(params.size());
                for (std::size_t i = 0; i < params.size(); ++i) {
                    m_[i].assign(params[i].size(), 0.0);
                    v_[i].assign(params[i].size(), 0.0);
                }
            }
            require(m_.size() == params.size(),
                    "Optimizer::step: parameter count changed between steps");
            ++t_;
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor g = grads.grad_or_zero(params[i]);
            require(g.same_shape(params[i]), "Optimizer::step: gradient shape mismatch");
            std::vector<double> p = params[i].values();
            const auto& gv = g.values();
            if (kind_ == Kind::Sgd) {
                for (std::size_t k = 0; k < p.size(); ++k) {
                    double gk = gv[k] + weight_decay_ * p[k];
                    p[k] -= lr_ * gk;
                }
            } else {
                double bc1 = 1.0 - std::pow(beta1_, t_);
                double bc2 = 1.0 - std::pow(beta2_, t_);
                auto& m = m_[i];
                auto& v = v_[i];
                require(m.size() == p.size(),
                        "Optimizer::step: parameter shape changed between steps");
                for (std::size_t k = 0; k < p.size(); ++k) {
                    double gk = gv[k] + weight_decay_ * p[k];
                    m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
                    v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
                    double mh = m[k] / bc1;
                    double vh = v[k] / bc2;
                    p[k] -= lr_ * mh / (std::sqrt(vh) + eps_);
                }
            }
            bool rg = params[i].requires_grad();
            Tensor np = Tensor::from_values(params[i].rows(), params[i].cols(), std::move(p));
            params[i] = rg ? np.as_param() : np;
        }
    }

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    Optimizer(Kind kind, double lr, double wd) : kind_(kind), lr_(lr), weight_decay_(wd) {}

    Kind kind_;
    double lr_;
    double weight_decay_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// Plain one-shot gradient step used by the look-ahead machinery; does not
// touch optimizer state.
inline std::vector<Tensor> sgd_step_pure(const std::vector<Tensor>& params,
                                         const GradMap& grads, double lr) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const auto& p : params) {
        Tensor g = grads.grad_or_zero(p);
        std::vector<double> v = p.values();
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= lr * g.values()[k];
        Tensor np = Tensor::from_values(p.rows(), p.cols(), std::move(v));
        out.push_back(p.requires_grad() ? np.as_param() : np);
    }
    return out;
}

}  // namespace gtlab
