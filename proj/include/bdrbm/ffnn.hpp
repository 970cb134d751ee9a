#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bdrbm/rng.hpp"

namespace bdrbm {

enum class Activation { leaky_relu, identity };

double leaky_relu(double x);

struct FfnnLayer {
    Eigen::MatrixXd weights;  // K_k, n_k x n_{k-1}
    Eigen::VectorXd bias;     // a_k
    Activation activation = Activation::leaky_relu;
};

// lambda(r) = output_offset + output_weights * (g_m o ... o g_1)(r).
// With no hidden layers this is exactly the linear model lambda0 + M r.
struct FfnnModel {
    std::vector<FfnnLayer> layers;
    Eigen::MatrixXd output_weights;  // K_out
    Eigen::VectorXd output_offset;   // lambda_out

    int input_dim() const;
    int output_dim() const { return static_cast<int>(output_offset.size()); }
    bool is_linear() const { return layers.empty(); }

    // Flattened parameters: per hidden layer K (column-major), a; then
    // K_out (column-major), lambda_out. Adam state uses the same layout.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& theta);
    int parameter_count() const;

    static FfnnModel linear(int input_dim, int output_dim);
    static FfnnModel mlp(int input_dim, const std::vector<int>& hidden,
                         int output_dim, Rng& rng);
};

struct TrainingPair {
    Eigen::VectorXd input;   // flattened basis coordinates
    Eigen::VectorXd target;  // observed RBM parameters (or PCA projection)
};

Eigen::VectorXd forward(const FfnnModel& model, const Eigen::VectorXd& r_flat);

// loss = mean_i ||pred_i - target_i||^2 + l1_coeff * sum |weights|
// (weight matrices only; biases and the output offset are unpenalized).
// Gradient is flattened in the model's parameter layout.
std::pair<double, Eigen::VectorXd> loss_and_gradient(
    const FfnnModel& model, std::span<const TrainingPair> dataset,
    double l1_coeff);

struct RegressionConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double l1_coeff = 0.0;
    int epochs = 4000;
    int minibatch_size = 32;
};

struct AdamState {
    Eigen::VectorXd m;  // first moment
    Eigen::VectorXd u;  // second moment
    long t = 0;

    static AdamState zeros(int n);
};

void adam_step(FfnnModel& model, const Eigen::VectorXd& grads, AdamState& state,
               const RegressionConfig& config);

struct FitResult {
    FfnnModel model;
    double final_loss = 0.0;
};

FitResult fit(const FfnnModel& init, std::span<const TrainingPair> dataset,
              const RegressionConfig& config, std::uint64_t rng_seed);

// (lambda0, M) of a purely linear model; throws CapabilityError otherwise.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> extract_linear_filter(
    const FfnnModel& model);

}  // namespace bdrbm
