#include "bdrbm/ffnn.hpp"

#include <cmath>

#include "bdrbm/errors.hpp"

namespace bdrbm {

namespace {

double activate(Activation f, double x) {
    return f == Activation::leaky_relu ? leaky_relu(x) : x;
}

// Subgradient at 0 is defined as 1 for leaky_relu.
double activate_grad(Activation f, double pre) {
    if (f == Activation::identity) return 1.0;
    return pre < 0.0 ? 0.2 : 1.0;
}

double l1_term(const FfnnModel& model, double l1_coeff) {
    if (l1_coeff == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& layer : model.layers) sum += layer.weights.cwiseAbs().sum();
    sum += model.output_weights.cwiseAbs().sum();
    return l1_coeff * sum;
}

Eigen::MatrixXd l1_subgradient(const Eigen::MatrixXd& w) {
    return w.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

}  // namespace

double leaky_relu(double x) { return std::max(x, 0.2 * x); }

int FfnnModel::input_dim() const {
    return layers.empty() ? static_cast<int>(output_weights.cols())
                          : static_cast<int>(layers.front().weights.cols());
}

int FfnnModel::parameter_count() const {
    int count = 0;
    for (const auto& layer : layers)
        count += static_cast<int>(layer.weights.size() + layer.bias.size());
    return count + static_cast<int>(output_weights.size() + output_offset.size());
}

Eigen::VectorXd FfnnModel::parameters() const {
    Eigen::VectorXd theta(parameter_count());
    int pos = 0;
    auto put = [&](const double* data, int n) {
        theta.segment(pos, n) = Eigen::Map<const Eigen::VectorXd>(data, n);
        pos += n;
    };
    for (const auto& layer : layers) {
        put(layer.weights.data(), static_cast<int>(layer.weights.size()));
        put(layer.bias.data(), static_cast<int>(layer.bias.size()));
    }
    put(output_weights.data(), static_cast<int>(output_weights.size()));
    put(output_offset.data(), static_cast<int>(output_offset.size()));
    return theta;
}

void FfnnModel::set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count())
        throw ValidationError("FfnnModel::set_parameters: length mismatch");
    int pos = 0;
    auto take = [&](double* data, int n) {
        Eigen::Map<Eigen::VectorXd>(data, n) = theta.segment(pos, n);
        pos += n;
    };
    for (auto& layer : layers) {
        take(layer.weights.data(), static_cast<int>(layer.weights.size()));
        take(layer.bias.data(), static_cast<int>(layer.bias.size()));
    }
    take(output_weights.data(), static_cast<int>(output_weights.size()));
    take(output_offset.data(), static_cast<int>(output_offset.size()));
}

FfnnModel FfnnModel::linear(int input_dim, int output_dim) {
    FfnnModel model;
    model.output_weights = Eigen::MatrixXd::Zero(output_dim, input_dim);
    model.output_offset = Eigen::VectorXd::Zero(output_dim);
    return model;
}

FfnnModel FfnnModel::mlp(int input_dim, const std::vector<int>& hidden,
                         int output_dim, Rng& rng) {
    FfnnModel model;
    int prev = input_dim;
    for (int width : hidden) {
        FfnnLayer layer;
        layer.weights = Eigen::MatrixXd(width, prev);
        const double scale = std::sqrt(2.0 / prev);
        for (int i = 0; i < width; ++i)
            for (int j = 0; j < prev; ++j) layer.weights(i, j) = scale * rng.normal();
        layer.bias = Eigen::VectorXd::Zero(width);
        layer.activation = Activation::leaky_relu;
        model.layers.push_back(std::move(layer));
        prev = width;
    }
    const double scale = std::sqrt(1.0 / prev);
    model.output_weights = Eigen::MatrixXd(output_dim, prev);
    for (int i = 0; i < output_dim; ++i)
        for (int j = 0; j < prev; ++j) model.output_weights(i, j) = scale * rng.normal();
    model.output_offset = Eigen::VectorXd::Zero(output_dim);
    return model;
}

Eigen::VectorXd forward(const FfnnModel& model, const Eigen::VectorXd& r_flat) {
    if (r_flat.size() != model.input_dim())
        throw ValidationError("forward: input dimension mismatch");
    Eigen::VectorXd s = r_flat;
    for (const auto& layer : model.layers) {
        Eigen::VectorXd pre = layer.bias + layer.weights * s;
        s = pre.unaryExpr([&](double x) { return activate(layer.activation, x); });
    }
    return model.output_offset + model.output_weights * s;
}

std::pair<double, Eigen::VectorXd> loss_and_gradient(
    const FfnnModel& model, std::span<const TrainingPair> dataset,
    double l1_coeff) {
    if (dataset.empty()) throw ValidationError("loss_and_gradient: empty dataset");
    const int m = static_cast<int>(model.layers.size());

    std::vector<Eigen::MatrixXd> grad_k(m);
    std::vector<Eigen::VectorXd> grad_a(m);
    for (int k = 0; k < m; ++k) {
        grad_k[k] = Eigen::MatrixXd::Zero(model.layers[k].weights.rows(),
                                          model.layers[k].weights.cols());
        grad_a[k] = Eigen::VectorXd::Zero(model.layers[k].bias.size());
    }
    Eigen::MatrixXd grad_k_out = Eigen::MatrixXd::Zero(
        model.output_weights.rows(), model.output_weights.cols());
    Eigen::VectorXd grad_offset = Eigen::VectorXd::Zero(model.output_offset.size());

    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(dataset.size());

    std::vector<Eigen::VectorXd> pre(m), act(m);
    for (const auto& pair : dataset) {
        Eigen::VectorXd s = pair.input;
        for (int k = 0; k < m; ++k) {
            pre[k] = model.layers[k].bias + model.layers[k].weights * s;
            act[k] = pre[k].unaryExpr(
                [&](double x) { return activate(model.layers[k].activation, x); });
            s = act[k];
        }
        const Eigen::VectorXd prediction =
            model.output_offset + model.output_weights * s;
        const Eigen::VectorXd diff = prediction - pair.target;
        loss += inv_n * diff.squaredNorm();

        Eigen::VectorXd delta = 2.0 * inv_n * diff;  // d loss / d prediction
        grad_offset += delta;
        grad_k_out += delta * s.transpose();
        Eigen::VectorXd back = model.output_weights.transpose() * delta;
        for (int k = m - 1; k >= 0; --k) {
            const Eigen::VectorXd dpre =
                back.cwiseProduct(pre[k].unaryExpr([&](double x) {
                    return activate_grad(model.layers[k].activation, x);
                }));
            grad_a[k] += dpre;
            const Eigen::VectorXd& below = k == 0 ? pair.input : act[k - 1];
            grad_k[k] += dpre * below.transpose();
            if (k > 0) back = model.layers[k].weights.transpose() * dpre;
        }
    }

    loss += l1_term(model, l1_coeff);
    if (l1_coeff > 0.0) {
        for (int k = 0; k < m; ++k)
            grad_k[k] += l1_coeff * l1_subgradient(model.layers[k].weights);
        grad_k_out += l1_coeff * l1_subgradient(model.output_weights);
    }

    Eigen::VectorXd grads(model.parameter_count());
    int pos = 0;
    auto put = [&](const Eigen::MatrixXd& g) {
        grads.segment(pos, g.size()) =
            Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
        pos += static_cast<int>(g.size());
    };
    for (int k = 0; k < m; ++k) {
        put(grad_k[k]);
        put(grad_a[k]);
    }
    put(grad_k_out);
    put(grad_offset);
    return {loss, grads};
}

AdamState AdamState::zeros(int n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

void adam_step(FfnnModel& model, const Eigen::VectorXd& grads, AdamState& state,
               const RegressionConfig& config) {
    if (grads.size() != model.parameter_count() || state.m.size() != grads.size())
        throw ValidationError("adam_step: shape mismatch");
    state.t += 1;
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
    state.u = config.beta2 * state.u + (1.0 - config.beta2) * grads.cwiseAbs2();
    const double bias1 = 1.0 - std::pow(config.beta1, double(state.t));
    const double bias2 = 1.0 - std::pow(config.beta2, double(state.t));
    Eigen::VectorXd theta = model.parameters();
    theta -= config.lr *
             (state.m / bias1).cwiseQuotient(
                 ((state.u / bias2).cwiseSqrt().array() + config.eps).matrix());
    model.set_parameters(theta);
}

FitResult fit(const FfnnModel& init, std::span<const TrainingPair> dataset,
              const RegressionConfig& config, std::uint64_t rng_seed) {
    if (dataset.empty()) throw ValidationError("fit: empty dataset");
    Rng rng(rng_seed);
    FfnnModel model = init;
    AdamState state = AdamState::zeros(model.parameter_count());

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<TrainingPair> batch;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += config.minibatch_size) {
            const std::size_t stop =
                std::min(order.size(), start + config.minibatch_size);
            batch.clear();
            for (std::size_t k = start; k < stop; ++k)
                batch.push_back(dataset[order[k]]);
            const auto [loss, grads] = loss_and_gradient(model, batch, config.l1_coeff);
            if (!std::isfinite(loss))
                throw ConvergenceError(
                    "fit: non-finite loss; reduce the learning rate", loss);
            adam_step(model, grads, state, config);
        }
    }
    const auto [final_loss, grads] = loss_and_gradient(model, dataset, config.l1_coeff);
    (void)grads;
    return {std::move(model), final_loss};
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> extract_linear_filter(
    const FfnnModel& model) {
    if (!model.is_linear())
        throw CapabilityError(
            "extract_linear_filter: filters are defined only for linear models");
    return {model.output_offset, model.output_weights};
}

}  // namespace bdrbm
