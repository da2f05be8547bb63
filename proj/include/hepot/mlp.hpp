#pragma once

// Fully connected classifier: rectifier hidden layers, softmax output,
// cross-entropy loss, mini-batch gradient descent with momentum and an
// lr / t^decay schedule over epochs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hepot/errors.hpp"

namespace hepot {

struct MlpConfig {
    std::vector<int> hidden{200, 50, 50};
    double learning_rate = 0.03;
    double decay = 0.5;     // lr_t = learning_rate / t^decay at epoch t (1-based)
    int epochs = 500;
    int batch_size = 0;     // 0: full batch
    double momentum = 0.9;
    std::uint64_t seed = 0;

    void validate() const {
        for (int h : hidden)
            if (h <= 0) throw ConfigError("hidden layer sizes must be positive");
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
        if (decay < 0.0) throw ConfigError("decay exponent must be >= 0");
        if (epochs < 0 || batch_size < 0) throw ConfigError("epochs and batch size must be >= 0");
        if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
    }
};

inline nlohmann::json to_json(const MlpConfig& c) {
    return {{"hidden", c.hidden}, {"learning_rate", c.learning_rate}, {"decay", c.decay},
            {"epochs", c.epochs}, {"batch_size", c.batch_size},       {"momentum", c.momentum},
            {"seed", c.seed}};
}

inline MlpConfig mlp_config_from_json(const nlohmann::json& j) {
    MlpConfig c;
    try {
        c.hidden = j.value("hidden", c.hidden);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.decay = j.value("decay", c.decay);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.momentum = j.value("momentum", c.momentum);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid model config: ") + e.what());
    }
    c.validate();
    return c;
}

class Mlp {
public:
    Mlp() = default;

    /// Layer sizes input, hidden..., output. Weights uniform in
    /// +-sqrt(6 / fan_in), biases zero.
    Mlp(std::vector<int> sizes, std::uint64_t seed) : sizes_(std::move(sizes)) {
        if (sizes_.size() < 2) throw ConfigError("network needs an input and an output layer");
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
            const double lim = std::sqrt(6.0 / sizes_[l]);
            std::uniform_real_distribution<double> u(-lim, lim);
            Eigen::MatrixXd w(sizes_[l + 1], sizes_[l]);
            for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
            weights_.push_back(std::move(w));
            biases_.push_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
        }
    }

    int input_dim() const { return sizes_.front(); }
    int class_count() const { return sizes_.back(); }
    const std::vector<int>& sizes() const { return sizes_; }

    /// Rows of `x` are samples; returns class probabilities per row.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const {
        if (x.cols() != input_dim())
            throw DimensionError("input has " + std::to_string(x.cols()) + " features, model expects " +
                                 std::to_string(input_dim()));
        return forward(x).back();
    }

    std::vector<int> predict(const Eigen::MatrixXd& x) const {
        const auto p = predict_proba(x);
        std::vector<int> out(static_cast<std::size_t>(p.rows()));
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            Eigen::Index best;
            p.row(r).maxCoeff(&best);
            out[static_cast<std::size_t>(r)] = static_cast<int>(best);
        }
        return out;
    }

    /// Mean cross-entropy over the rows and its gradient, flattened in
    /// parameter order (W0, b0, W1, b1, ...; column-major weights).
    double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const int> y, Eigen::VectorXd& grad) const {
        const auto acts = forward(x);
        const auto n = static_cast<double>(x.rows());
        const Eigen::MatrixXd& p = acts.back();
        double loss = 0.0;
        Eigen::MatrixXd delta = p;  // dL/dz for softmax + cross-entropy
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const auto label = static_cast<Eigen::Index>(y[static_cast<std::size_t>(r)]);
            loss -= std::log(std::max(p(r, label), 1e-300));
            delta(r, label) -= 1.0;
        }
        loss /= n;
        delta /= n;

        grad.resize(parameter_count());
        std::vector<Eigen::MatrixXd> gw(weights_.size());
        std::vector<Eigen::VectorXd> gb(weights_.size());
        for (std::size_t l = weights_.size(); l-- > 0;) {
            gw[l] = delta.transpose() * acts[l];
            gb[l] = delta.colwise().sum().transpose();
            if (l > 0) {
                Eigen::MatrixXd back = delta * weights_[l];
                delta = (acts[l].array() > 0.0).select(back, 0.0);
            }
        }
        Eigen::Index off = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            grad.segment(off, gw[l].size()) = Eigen::Map<const Eigen::VectorXd>(gw[l].data(), gw[l].size());
            off += gw[l].size();
            grad.segment(off, gb[l].size()) = gb[l];
            off += gb[l].size();
        }
        return loss;
    }

    double loss(const Eigen::MatrixXd& x, std::span<const int> y) const {
        const auto p = forward(x).back();
        double l = 0.0;
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            l -= std::log(std::max(p(r, static_cast<Eigen::Index>(y[static_cast<std::size_t>(r)])), 1e-300));
        return l / static_cast<double>(x.rows());
    }

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
        return n;
    }

    Eigen::VectorXd parameters() const {
        Eigen::VectorXd v(parameter_count());
        Eigen::Index off = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            v.segment(off, weights_[l].size()) =
                Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
            off += weights_[l].size();
            v.segment(off, biases_[l].size()) = biases_[l];
            off += biases_[l].size();
        }
        return v;
    }

    void set_parameters(const Eigen::VectorXd& v) {
        if (v.size() != parameter_count()) throw DimensionError("parameter vector has the wrong length");
        Eigen::Index off = 0;
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) = v.segment(off, weights_[l].size());
            off += weights_[l].size();
            biases_[l] = v.segment(off, biases_[l].size());
            off += biases_[l].size();
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json layers = nlohmann::json::array();
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            const auto& w = weights_[l];
            std::vector<std::vector<double>> rows(static_cast<std::size_t>(w.rows()));
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(w(r, c));
            layers.push_back({{"weights", rows},
                              {"bias", std::vector<double>(biases_[l].data(), biases_[l].data() + biases_[l].size())}});
        }
        return {{"sizes", sizes_}, {"layers", layers}};
    }

    static Mlp from_json(const nlohmann::json& j) {
        Mlp m;
        m.sizes_ = j.at("sizes").get<std::vector<int>>();
        const auto& layers = j.at("layers");
        if (layers.size() + 1 != m.sizes_.size()) throw ParseError("model layers do not match sizes");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto rows = layers[l].at("weights").get<std::vector<std::vector<double>>>();
            const auto bias = layers[l].at("bias").get<std::vector<double>>();
            Eigen::MatrixXd w(m.sizes_[l + 1], m.sizes_[l]);
            if (rows.size() != static_cast<std::size_t>(w.rows()) || bias.size() != rows.size())
                throw ParseError("model layer shape mismatch");
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                if (rows[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(w.cols()))
                    throw ParseError("model layer shape mismatch");
                for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            }
            m.weights_.push_back(std::move(w));
            m.biases_.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size())));
        }
        return m;
    }

private:
    /// Activations per layer; index 0 is the input, the last is softmax.
    std::vector<Eigen::MatrixXd> forward(const Eigen::MatrixXd& x) const {
        std::vector<Eigen::MatrixXd> acts;
        acts.reserve(weights_.size() + 1);
        acts.push_back(x);
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            Eigen::MatrixXd z = (acts.back() * weights_[l].transpose()).rowwise() + biases_[l].transpose();
            if (l + 1 < weights_.size()) {
                acts.push_back(z.cwiseMax(0.0));
            } else {
                Eigen::VectorXd mx = z.rowwise().maxCoeff();
                Eigen::MatrixXd e = (z.colwise() - mx).array().exp();
                Eigen::VectorXd s = e.rowwise().sum();
                acts.push_back(e.array().colwise() / s.array());
            }
        }
        return acts;
    }

    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
};

/// Trains on standardized rows `x` with labels in [0, class_count).
inline Mlp mlp_train(const Eigen::MatrixXd& x, std::span<const int> y, int class_count, const MlpConfig& cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw DimensionError("row and label counts differ");
    std::set<int> distinct(y.begin(), y.end());
    if (distinct.size() < 2) throw DegenerateLabelsError("training labels contain fewer than 2 classes");
    for (int label : distinct)
        if (label < 0 || label >= class_count) throw DomainError("label outside [0, class_count)");

    std::vector<int> sizes{static_cast<int>(x.cols())};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(class_count);
    Mlp net(sizes, cfg.seed);

    const auto n = static_cast<std::size_t>(x.rows());
    const std::size_t batch = cfg.batch_size > 0 ? std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n) : n;
    std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Eigen::VectorXd params = net.parameters();
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd grad;
    Eigen::MatrixXd xb;
    std::vector<int> yb;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate / std::pow(static_cast<double>(epoch), cfg.decay);
        if (batch < n) std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t len = std::min(batch, n - start);
            if (len == n) {
                net.loss_and_gradient(x, y, grad);
            } else {
                xb.resize(static_cast<Eigen::Index>(len), x.cols());
                yb.resize(len);
                for (std::size_t i = 0; i < len; ++i) {
                    xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[start + i]));
                    yb[i] = y[order[start + i]];
                }
                net.loss_and_gradient(xb, yb, grad);
            }
            velocity = cfg.momentum * velocity - lr * grad;
            params += velocity;
            net.set_parameters(params);
        }
    }
    return net;
}

}  // namespace hepot
