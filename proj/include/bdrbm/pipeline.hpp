#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bdrbm/ffnn.hpp"
#include "bdrbm/pca.hpp"
#include "bdrbm/quantum.hpp"
#include "bdrbm/rbm.hpp"

namespace bdrbm {

struct PcaSetting {
    bool enabled = false;
    int k = 0;                      // 0 -> use variance_target rule
    double variance_target = 0.99;
};

struct TomographyConfig {
    int n_bases = 200;
    std::uint64_t shots = 8192;
    double val_fraction = 0.2;
    int fine_tune_rounds = 12;
    RbmTrainConfig rbm;
    RegressionConfig regression;
    PcaSetting pca;
    int n_hidden = 0;                     // 0 -> n_qubits
    std::vector<int> ffnn_hidden_layers;  // empty -> linear FFNN
    std::uint64_t rng_seed = 0;
};

enum class Split { train, validation };

struct DatasetEntry {
    LocalBasis basis;
    MeasurementRecord record;
    Eigen::VectorXd lambda_obs;  // zero for validation entries
};

struct TrainingDataset {
    std::vector<DatasetEntry> entries;
    std::vector<Split> split;  // parallel to entries

    std::vector<int> indices_of(Split s) const;
};

struct BdrbmModel {
    FfnnModel ffnn;
    std::optional<PcaTransform> pca;
    int n_qubits = 0;
    int n_hidden = 0;
    TomographyConfig config;  // provenance snapshot
};

std::vector<MeasurementRecord> collect_simulated(const PureState& state,
                                                 int n_bases,
                                                 std::uint64_t shots,
                                                 std::uint64_t rng_seed);

// Greedy nearest-neighbor ordering by summed per-qubit angular distance,
// used to improve warm-start smoothness across the basis sequence.
std::vector<int> warm_start_order(const std::vector<LocalBasis>& bases);

// Per-record RBM training: record 0 starts from a small Gaussian init
// (sigma = 0.01, zero biases); each later RBM warm-starts from the previous
// converged parameters. Output is order-aligned with `records`.
std::vector<Eigen::VectorXd> learn_rbm_sequence(
    const std::vector<MeasurementRecord>& records, int n_hidden,
    const RbmTrainConfig& config, std::uint64_t rng_seed);

std::vector<Split> split_train_val(int n_records, double val_fraction,
                                   std::uint64_t rng_seed);

BdrbmModel fit_bdrbm(const TrainingDataset& dataset,
                     const TomographyConfig& config);

// Per round: re-train each training basis's RBM from the model's prediction,
// replace lambda_obs, and re-fit the FFNN warm-started at 0.1x learning rate.
std::pair<BdrbmModel, TrainingDataset> fine_tune(const BdrbmModel& model,
                                                 const TrainingDataset& dataset,
                                                 const TomographyConfig& config);

// Predicted flattened RBM parameters (PCA-reconstructed when applicable).
Eigen::VectorXd predict_lambda(const BdrbmModel& model, const LocalBasis& basis);

OutcomeDistribution predict_distribution(const BdrbmModel& model,
                                         const LocalBasis& basis);

std::vector<Eigen::VectorXd> predict_samples(const BdrbmModel& model,
                                             const LocalBasis& basis,
                                             int n_samples,
                                             std::uint64_t rng_seed);

struct TomographyResult {
    BdrbmModel model;
    TrainingDataset dataset;
    double regression_loss = 0.0;
};

// Full training loop: split, warm-start ordering, RBM sequence, FFNN fit,
// fine-tuning. Deterministic under config.rng_seed.
TomographyResult run_tomography(const std::vector<MeasurementRecord>& records,
                                const TomographyConfig& config);

}  // namespace bdrbm
