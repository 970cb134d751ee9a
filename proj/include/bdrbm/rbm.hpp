#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "bdrbm/quantum.hpp"
#include "bdrbm/rng.hpp"

namespace bdrbm {

// Restricted Boltzmann Machine over binary visible/hidden units,
// p(v) ~ exp(b.v) prod_j (1 + exp(c_j + (W^T v)_j)).
struct RbmParams {
    Eigen::VectorXd visible_bias;  // b, length n_v
    Eigen::VectorXd hidden_bias;   // c, length n_h
    Eigen::MatrixXd weights;       // W, n_v x n_h

    int n_visible() const { return static_cast<int>(visible_bias.size()); }
    int n_hidden() const { return static_cast<int>(hidden_bias.size()); }

    static RbmParams zeros(int n_v, int n_h);
    static RbmParams gaussian_init(int n_v, int n_h, double sigma, Rng& rng);
};

struct RbmTrainConfig {
    double learning_rate = 0.05;
    int epochs = 2000;  // passes over the count-weighted distinct outcomes
    int minibatch_size = 64;
    double l2_coeff = 1e-4;  // weight decay on W only
    int cd_steps = 1;
};

// Parameter vector ordering: [b, c, W row-major by visible index].
Eigen::VectorXd flatten(const RbmParams& params);
RbmParams unflatten(const Eigen::VectorXd& lambda, int n_v, int n_h);
inline int rbm_param_count(int n_v, int n_h) { return n_v + n_h + n_v * n_h; }

double log_prob_unnormalized(const RbmParams& params, const Eigen::VectorXd& v);

// Full enumeration over visible configurations; requires n_v <= 16.
OutcomeDistribution exact_distribution(const RbmParams& params);

// One block update: sample h | v then v | h. Draw order: h_0..h_{n_h-1},
// then v_0..v_{n_v-1}, one bernoulli each.
Eigen::VectorXd gibbs_step(const RbmParams& params, const Eigen::VectorXd& v,
                           Rng& rng);

std::vector<Eigen::VectorXd> sample_visible(const RbmParams& params,
                                            int n_samples, int burn_in,
                                            int thin, std::uint64_t rng_seed);

// A distinct visible configuration with a nonnegative weight (shot count).
struct WeightedSample {
    Eigen::VectorXd v;
    double weight = 1.0;
};

// One CD-k update on a weighted minibatch. Data-phase hidden statistics use
// activation probabilities; the reconstruction uses sampled hidden states and
// probability-valued visibles. Hidden draws consume the rng sample-major:
// for each minibatch entry in order, h_0..h_{n_h-1}.
RbmParams cd1_update(const RbmParams& params,
                     std::span<const WeightedSample> minibatch,
                     const RbmTrainConfig& config, Rng& rng);

RbmParams train_rbm(const RbmParams& init,
                    const std::vector<WeightedSample>& data,
                    const RbmTrainConfig& config, std::uint64_t rng_seed);

// Distinct outcomes of a record as count-weighted samples (visible unit i is
// qubit i, i.e. bitstring character i).
std::vector<WeightedSample> expand_record(const MeasurementRecord& record);

}  // namespace bdrbm
