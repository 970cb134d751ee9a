#include "bdrbm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bdrbm/errors.hpp"

namespace bdrbm {

namespace {

// Salts for deriving independent rng streams from the master seed.
enum SeedSalt : std::uint64_t {
    kSaltSplit = 1,
    kSaltRbmSequence = 2,
    kSaltFfnnFit = 3,
    kSaltFineTuneBase = 1000,
};

double angular_distance(const LocalBasis& a, const LocalBasis& b) {
    double sum = 0.0;
    for (std::size_t q = 0; q < a.axes.size(); ++q) {
        const double dot = std::clamp(a.axes[q].dot(b.axes[q]), -1.0, 1.0);
        sum += std::acos(dot);
    }
    return sum;
}

int effective_hidden(const TomographyConfig& config, int n_qubits) {
    return config.n_hidden > 0 ? config.n_hidden : n_qubits;
}

std::vector<TrainingPair> regression_pairs(const TrainingDataset& dataset,
                                           const std::optional<PcaTransform>& pca) {
    std::vector<TrainingPair> pairs;
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        if (dataset.split[i] != Split::train) continue;
        const auto& entry = dataset.entries[i];
        pairs.push_back({entry.basis.flattened(),
                         pca ? project(*pca, entry.lambda_obs) : entry.lambda_obs});
    }
    return pairs;
}

}  // namespace

std::vector<int> TrainingDataset::indices_of(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == s) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<MeasurementRecord> collect_simulated(const PureState& state,
                                                 int n_bases, std::uint64_t shots,
                                                 std::uint64_t rng_seed) {
    state.validate();
    if (n_bases < 1) throw ValidationError("collect_simulated: n_bases must be >= 1");
    Rng rng(rng_seed);
    std::vector<MeasurementRecord> records;
    records.reserve(n_bases);
    for (int i = 0; i < n_bases; ++i) {
        const LocalBasis basis = random_basis(state.n_qubits, rng);
        records.push_back(
            sample_outcomes(outcome_distribution(state, basis), basis, shots, rng));
    }
    return records;
}

std::vector<int> warm_start_order(const std::vector<LocalBasis>& bases) {
    const int n = static_cast<int>(bases.size());
    std::vector<int> order;
    order.reserve(n);
    std::vector<bool> used(n, false);
    int current = 0;
    order.push_back(0);
    used[0] = true;
    for (int step = 1; step < n; ++step) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double dist = angular_distance(bases[current], bases[j]);
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        order.push_back(best);
        used[best] = true;
        current = best;
    }
    return order;
}

std::vector<Eigen::VectorXd> learn_rbm_sequence(
    const std::vector<MeasurementRecord>& records, int n_hidden,
    const RbmTrainConfig& config, std::uint64_t rng_seed) {
    if (records.empty()) throw ValidationError("learn_rbm_sequence: no records");
    const int n_v = records.front().basis.n_qubits();
    Rng master(rng_seed);
    Rng init_rng = master.spawn(0);
    RbmParams params = RbmParams::gaussian_init(n_v, n_hidden, 0.01, init_rng);

    std::vector<Eigen::VectorXd> lambdas;
    lambdas.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        params = train_rbm(params, expand_record(records[i]), config,
                           master.spawn(i + 1).seed());
        lambdas.push_back(flatten(params));
    }
    return lambdas;
}

std::vector<Split> split_train_val(int n_records, double val_fraction,
                                   std::uint64_t rng_seed) {
    if (n_records < 2) throw ValidationError("split_train_val: need >= 2 records");
    const int n_val = static_cast<int>(std::lround(val_fraction * n_records));
    if (n_val < 1 || n_val >= n_records)
        throw ValidationError("split_train_val: val_fraction yields an empty side");
    std::vector<int> indices(n_records);
    std::iota(indices.begin(), indices.end(), 0);
    Rng rng(rng_seed);
    rng.shuffle(indices);
    std::vector<Split> split(n_records, Split::train);
    for (int i = 0; i < n_val; ++i) split[indices[i]] = Split::validation;
    return split;
}

BdrbmModel fit_bdrbm(const TrainingDataset& dataset, const TomographyConfig& config) {
    const auto train_idx = dataset.indices_of(Split::train);
    if (train_idx.empty()) throw ValidationError("fit_bdrbm: empty train split");
    const int n_qubits = dataset.entries.front().basis.n_qubits();
    const int n_hidden = effective_hidden(config, n_qubits);
    const int d = rbm_param_count(n_qubits, n_hidden);

    BdrbmModel model;
    model.n_qubits = n_qubits;
    model.n_hidden = n_hidden;
    model.config = config;

    if (config.pca.enabled) {
        std::vector<Eigen::VectorXd> lambdas;
        for (int i : train_idx) lambdas.push_back(dataset.entries[i].lambda_obs);
        const int k_full = std::min<int>(d, static_cast<int>(lambdas.size()));
        PcaTransform full = fit_pca(lambdas, k_full);
        const int k = config.pca.k > 0
                          ? std::min(config.pca.k, k_full)
                          : components_for_variance(full, config.pca.variance_target);
        full.components.conservativeResize(k, Eigen::NoChange);
        full.explained_variance.conservativeResize(k);
        model.pca = std::move(full);
    }

    const auto pairs = regression_pairs(dataset, model.pca);
    const int out_dim = model.pca ? model.pca->output_dim() : d;
    Rng rng(Rng(config.rng_seed).spawn(kSaltFfnnFit).seed());
    FfnnModel init =
        config.ffnn_hidden_layers.empty()
            ? FfnnModel::linear(3 * n_qubits, out_dim)
            : FfnnModel::mlp(3 * n_qubits, config.ffnn_hidden_layers, out_dim, rng);
    model.ffnn = fit(init, pairs, config.regression, rng.spawn(1).seed()).model;
    return model;
}

std::pair<BdrbmModel, TrainingDataset> fine_tune(const BdrbmModel& model,
                                                 const TrainingDataset& dataset,
                                                 const TomographyConfig& config) {
    BdrbmModel current = model;
    TrainingDataset data = dataset;
    const auto train_idx = data.indices_of(Split::train);
    const Rng master(config.rng_seed);

    RegressionConfig refit = config.regression;
    refit.lr *= 0.1;  // warm restart, smaller steps

    for (int round = 0; round < config.fine_tune_rounds; ++round) {
        const std::uint64_t round_salt =
            kSaltFineTuneBase + static_cast<std::uint64_t>(round) * 100003;
        // Bases are independent in fine-tune rounds (no warm-start chain).
        const std::int64_t n_train = static_cast<std::int64_t>(train_idx.size());
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t k = 0; k < n_train; ++k) {
            auto& entry = data.entries[train_idx[k]];
            const Eigen::VectorXd start = predict_lambda(current, entry.basis);
            const RbmParams trained = train_rbm(
                unflatten(start, current.n_qubits, current.n_hidden),
                expand_record(entry.record), config.rbm,
                master.spawn(round_salt + static_cast<std::uint64_t>(k)).seed());
            entry.lambda_obs = flatten(trained);
        }
        const auto pairs = regression_pairs(data, current.pca);
        current.ffnn = fit(current.ffnn, pairs, refit,
                           master.spawn(round_salt + 99991).seed())
                           .model;
    }
    return {std::move(current), std::move(data)};
}

Eigen::VectorXd predict_lambda(const BdrbmModel& model, const LocalBasis& basis) {
    const Eigen::VectorXd out = forward(model.ffnn, basis.flattened());
    return model.pca ? reconstruct(*model.pca, out) : out;
}

OutcomeDistribution predict_distribution(const BdrbmModel& model,
                                         const LocalBasis& basis) {
    if (model.n_qubits > 16)
        throw CapabilityError(
            "predict_distribution: n > 16, enumeration intractable; use predict_samples");
    return exact_distribution(
        unflatten(predict_lambda(model, basis), model.n_qubits, model.n_hidden));
}

std::vector<Eigen::VectorXd> predict_samples(const BdrbmModel& model,
                                             const LocalBasis& basis, int n_samples,
                                             std::uint64_t rng_seed) {
    if (n_samples == 0) return {};
    const RbmParams params =
        unflatten(predict_lambda(model, basis), model.n_qubits, model.n_hidden);
    return sample_visible(params, n_samples, /*burn_in=*/1000, /*thin=*/1, rng_seed);
}

TomographyResult run_tomography(const std::vector<MeasurementRecord>& records,
                                const TomographyConfig& config) {
    if (records.size() < 2) throw ValidationError("run_tomography: need >= 2 records");
    const Rng master(config.rng_seed);
    const auto split =
        split_train_val(static_cast<int>(records.size()), config.val_fraction,
                        master.spawn(kSaltSplit).seed());

    TrainingDataset dataset;
    dataset.split = split;
    dataset.entries.resize(records.size());
    const int n_qubits = records.front().basis.n_qubits();
    const int n_hidden = effective_hidden(config, n_qubits);
    const int d = rbm_param_count(n_qubits, n_hidden);
    for (std::size_t i = 0; i < records.size(); ++i) {
        dataset.entries[i].basis = records[i].basis;
        dataset.entries[i].record = records[i];
        dataset.entries[i].lambda_obs = Eigen::VectorXd::Zero(d);
    }

    // Train-split RBMs learned in greedy angular order for warm-start
    // smoothness; observed parameters land back in original record order.
    const auto train_idx = dataset.indices_of(Split::train);
    std::vector<LocalBasis> train_bases;
    for (int i : train_idx) train_bases.push_back(records[i].basis);
    const auto order = warm_start_order(train_bases);
    std::vector<MeasurementRecord> ordered_records;
    ordered_records.reserve(order.size());
    for (int k : order) ordered_records.push_back(records[train_idx[k]]);

    const auto lambdas =
        learn_rbm_sequence(ordered_records, n_hidden, config.rbm,
                           master.spawn(kSaltRbmSequence).seed());
    for (std::size_t j = 0; j < order.size(); ++j)
        dataset.entries[train_idx[order[j]]].lambda_obs = lambdas[j];

    BdrbmModel model = fit_bdrbm(dataset, config);
    if (config.fine_tune_rounds > 0)
        std::tie(model, dataset) = fine_tune(model, dataset, config);

    const auto pairs = regression_pairs(dataset, model.pca);
    const double loss =
        loss_and_gradient(model.ffnn, pairs, config.regression.l1_coeff).first;
    return {std::move(model), std::move(dataset), loss};
}

}  // namespace bdrbm
