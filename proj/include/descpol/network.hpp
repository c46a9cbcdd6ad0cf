#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "descpol/errors.hpp"

namespace descpol {

enum class Objective { maximize, minimize };

inline const char* to_string(Objective o) { return o == Objective::maximize ? "maximize" : "minimize"; }

/// Fully connected layer widths. Hidden layers use rectifiers, the output layer is linear.
struct NetworkArchitecture {
    std::size_t input_width = 0;
    std::vector<std::size_t> hidden;
    std::size_t output_width = 0;

    std::vector<std::size_t> widths() const {
        std::vector<std::size_t> w{input_width};
        w.insert(w.end(), hidden.begin(), hidden.end());
        w.push_back(output_width);
        return w;
    }

    void validate() const {
        for (auto w : widths())
            if (w < 1) throw ShapeError("network layer widths must be >= 1");
    }

    friend bool operator==(const NetworkArchitecture&, const NetworkArchitecture&) = default;
};

struct DenseLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;    // out
};

inline bool bit_equal(const DenseLayer& a, const DenseLayer& b) {
    return a.weight.rows() == b.weight.rows() && a.weight.cols() == b.weight.cols() &&
           a.bias.size() == b.bias.size() && (a.weight.array() == b.weight.array()).all() &&
           (a.bias.array() == b.bias.array()).all();
}

/// Parameters theta of the Q-approximator. Gradients and Adam moments reuse this type.
class QNetwork {
public:
    QNetwork() = default;

    /// All-zero parameters.
    explicit QNetwork(NetworkArchitecture architecture) : architecture_(std::move(architecture)) {
        architecture_.validate();
        const auto w = architecture_.widths();
        layers_.reserve(w.size() - 1);
        for (std::size_t l = 0; l + 1 < w.size(); ++l) {
            const auto rows = static_cast<Eigen::Index>(w[l + 1]);
            const auto cols = static_cast<Eigen::Index>(w[l]);
            layers_.push_back({Eigen::MatrixXd::Zero(rows, cols), Eigen::VectorXd::Zero(rows)});
        }
    }

    /// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    template <class Rng>
    static QNetwork initialized(NetworkArchitecture architecture, Rng& rng) {
        QNetwork net(std::move(architecture));
        for (auto& layer : net.layers_) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
            for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = dist(rng);
        }
        return net;
    }

    const NetworkArchitecture& architecture() const noexcept { return architecture_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    bool same_shape(const QNetwork& other) const { return architecture_ == other.architecture_; }

    bool all_finite() const {
        for (const auto& l : layers_)
            if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
        return true;
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& input) const {
        if (static_cast<std::size_t>(input.size()) != architecture_.input_width)
            throw ShapeError("network input has width " + std::to_string(input.size()) + ", expected " +
                             std::to_string(architecture_.input_width));
        Eigen::VectorXd a = input;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Eigen::VectorXd z = layers_[l].weight * a + layers_[l].bias;
            a = (l + 1 < layers_.size()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
        }
        return a;
    }

    /// Columns of `inputs` are samples.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const {
        if (static_cast<std::size_t>(inputs.rows()) != architecture_.input_width)
            throw ShapeError("network input has width " + std::to_string(inputs.rows()) + ", expected " +
                             std::to_string(architecture_.input_width));
        Eigen::MatrixXd a = inputs;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            Eigen::MatrixXd z = layers_[l].weight * a;
            z.colwise() += layers_[l].bias;
            a = (l + 1 < layers_.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : std::move(z);
        }
        return a;
    }

    /// Weights then bias for each layer, column-major within a matrix.
    std::vector<double> flat() const {
        std::vector<double> out;
        out.reserve(parameter_count());
        for (const auto& l : layers_) {
            out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
            out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
        }
        return out;
    }

    void assign_flat(std::span<const double> values) {
        if (values.size() != parameter_count()) throw ShapeError("flat parameter vector has wrong length");
        std::size_t i = 0;
        for (auto& l : layers_) {
            std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i), l.weight.size(), l.weight.data());
            i += static_cast<std::size_t>(l.weight.size());
            std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i), l.bias.size(), l.bias.data());
            i += static_cast<std::size_t>(l.bias.size());
        }
    }

    friend bool operator==(const QNetwork& a, const QNetwork& b) {
        if (a.architecture_ != b.architecture_ || a.layers_.size() != b.layers_.size()) return false;
        for (std::size_t l = 0; l < a.layers_.size(); ++l)
            if (!bit_equal(a.layers_[l], b.layers_[l])) return false;
        return true;
    }

private:
    NetworkArchitecture architecture_;
    std::vector<DenseLayer> layers_;
};

using Gradient = QNetwork;

/// Index and value of the best entry of `q` among positions where `mask` is nonzero.
/// Ties resolve to the lowest index.
inline std::pair<std::size_t, double> best_feasible(const Eigen::Ref<const Eigen::VectorXd>& q,
                                                    std::span<const std::uint8_t> mask, Objective objective) {
    if (mask.size() != static_cast<std::size_t>(q.size())) throw ShapeError("feasibility mask length mismatch");
    std::size_t best = mask.size();
    double value = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        const double v = q[static_cast<Eigen::Index>(i)];
        if (best == mask.size() || (objective == Objective::maximize ? v > value : v < value)) {
            best = i;
            value = v;
        }
    }
    if (best == mask.size()) throw InvariantViolation("no feasible action");
    return {best, value};
}

/// One stored experience in network coordinates.
struct Transition {
    Eigen::VectorXd state;
    std::size_t action = 0;
    double utility = 0.0;
    Eigen::VectorXd next_state;
    std::vector<std::uint8_t> next_mask;
};

struct LossAndGradient {
    double loss = 0.0;
    Gradient gradient;
};

/// Mean squared TD error over the batch and its gradient with respect to `online`.
///
/// The bootstrap term max (or min) over feasible next actions is evaluated with `target`
/// and treated as a constant.
inline LossAndGradient td_loss_and_gradient(const QNetwork& online, const QNetwork& target,
                                            std::span<const Transition* const> batch, double gamma,
                                            Objective objective = Objective::maximize) {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    if (!online.same_shape(target)) throw ShapeError("online and target networks differ in architecture");
    const auto& arch = online.architecture();
    const auto in = static_cast<Eigen::Index>(arch.input_width);
    const auto bsz = static_cast<Eigen::Index>(batch.size());

    Eigen::MatrixXd x(in, bsz), xn(in, bsz);
    for (Eigen::Index i = 0; i < bsz; ++i) {
        const Transition& t = *batch[static_cast<std::size_t>(i)];
        if (t.state.size() != in || t.next_state.size() != in) throw ShapeError("transition width mismatch");
        if (t.action >= arch.output_width) throw ShapeError("transition action outside network output");
        x.col(i) = t.state;
        xn.col(i) = t.next_state;
    }

    const Eigen::MatrixXd next_q = target.forward_batch(xn);
    Eigen::VectorXd y(bsz);
    for (Eigen::Index i = 0; i < bsz; ++i) {
        const Transition& t = *batch[static_cast<std::size_t>(i)];
        double bootstrap = 0.0;
        try {
            bootstrap = best_feasible(next_q.col(i), t.next_mask, objective).second;
        } catch (const InvariantViolation&) {
            throw InvariantViolation("batch element " + std::to_string(i) + " has an empty next-state feasible set");
        }
        y[i] = t.utility + gamma * bootstrap;
    }

    const auto& layers = online.layers();
    const std::size_t depth = layers.size();
    std::vector<Eigen::MatrixXd> inputs(depth);  // input to each layer
    std::vector<Eigen::MatrixXd> pre(depth);
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < depth; ++l) {
        inputs[l] = a;
        pre[l] = layers[l].weight * a;
        pre[l].colwise() += layers[l].bias;
        a = (l + 1 < depth) ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
    }

    LossAndGradient out{0.0, QNetwork(arch)};
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(a.rows(), bsz);
    for (Eigen::Index i = 0; i < bsz; ++i) {
        const auto act = static_cast<Eigen::Index>(batch[static_cast<std::size_t>(i)]->action);
        const double err = y[i] - a(act, i);
        out.loss += err * err;
        delta(act, i) = -2.0 * err / static_cast<double>(bsz);
    }
    out.loss /= static_cast<double>(bsz);

    auto& grads = out.gradient.layers();
    for (std::size_t l = depth; l-- > 0;) {
        grads[l].weight.noalias() = delta * inputs[l].transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = layers[l].weight.transpose() * delta;
            delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return out;
}

inline LossAndGradient td_loss_and_gradient(const QNetwork& online, const QNetwork& target,
                                            std::span<const Transition> batch, double gamma,
                                            Objective objective = Objective::maximize) {
    std::vector<const Transition*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& t : batch) ptrs.push_back(&t);
    return td_loss_and_gradient(online, target, std::span<const Transition* const>(ptrs), gamma, objective);
}

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamOptions options;
    std::uint64_t step = 0;
    QNetwork first_moment;
    QNetwork second_moment;

    static AdamState for_network(const QNetwork& params, AdamOptions options = {}) {
        return AdamState{options, 0, QNetwork(params.architecture()), QNetwork(params.architecture())};
    }
};

/// In-place bias-corrected Adam update. Rejects non-finite gradients before touching any state.
inline void adam_step(QNetwork& params, const Gradient& gradient, AdamState& state) {
    if (!params.same_shape(gradient) || !params.same_shape(state.first_moment) ||
        !params.same_shape(state.second_moment))
        throw ShapeError("adam: parameter, gradient and moment shapes differ");
    if (!gradient.all_finite()) throw NumericalError("adam: non-finite gradient entry");

    const auto& o = state.options;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(o.beta1, t);
    const double c2 = 1.0 - std::pow(o.beta2, t);

    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = o.beta1 * m + (1.0 - o.beta1) * g;
        v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
        p.array() -= o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
    };
    for (std::size_t l = 0; l < params.layers().size(); ++l) {
        auto& p = params.layers()[l];
        const auto& g = gradient.layers()[l];
        auto& m = state.first_moment.layers()[l];
        auto& v = state.second_moment.layers()[l];
        update(p.weight, g.weight, m.weight, v.weight);
        update(p.bias, g.bias, m.bias, v.bias);
    }
}

/// Elementwise arithmetic mean: extended-precision sum in list order divided by the count, then
/// rounded once. The mean of identical inputs is bit-identical to the input.
inline QNetwork average_params(std::span<const QNetwork> networks) {
    if (networks.empty()) throw std::invalid_argument("average_params: empty list");
    for (const auto& n : networks)
        if (!n.same_shape(networks.front())) throw ShapeError("average_params: architecture mismatch");
    const long double count = static_cast<long double>(networks.size());
    QNetwork mean = networks.front();
    for (std::size_t l = 0; l < mean.layers().size(); ++l) {
        auto& m = mean.layers()[l];
        for (Eigen::Index i = 0; i < m.weight.size(); ++i) {
            long double sum = 0.0L;
            for (const auto& n : networks) sum += n.layers()[l].weight.data()[i];
            m.weight.data()[i] = static_cast<double>(sum / count);
        }
        for (Eigen::Index i = 0; i < m.bias.size(); ++i) {
            long double sum = 0.0L;
            for (const auto& n : networks) sum += n.layers()[l].bias[i];
            m.bias[i] = static_cast<double>(sum / count);
        }
    }
    return mean;
}

}  // namespace descpol
