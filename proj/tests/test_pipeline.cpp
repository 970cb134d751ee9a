#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bdrbm/errors.hpp"
#include "bdrbm/eval.hpp"
#include "bdrbm/pipeline.hpp"
#include "oracles.hpp"

using namespace bdrbm;

namespace {

LocalBasis z_basis(int n_qubits) {
    LocalBasis basis;
    basis.axes.assign(n_qubits, Eigen::Vector3d(0, 0, 1));
    return basis;
}

PureState zero_state(int n_qubits) {
    PureState state;
    state.n_qubits = n_qubits;
    state.amplitudes = Eigen::VectorXcd::Zero(1 << n_qubits);
    state.amplitudes[0] = 1.0;
    return state;
}

// dataset of random bases with a planted linear lambda(r) = l0 + M r
TrainingDataset planted_linear_dataset(int n_qubits, int n_records,
                                       const Eigen::VectorXd& l0,
                                       const Eigen::MatrixXd& m,
                                       std::uint64_t seed) {
    Rng rng(seed);
    TrainingDataset dataset;
    for (int i = 0; i < n_records; ++i) {
        DatasetEntry entry;
        entry.basis = random_basis(n_qubits, rng);
        entry.record.basis = entry.basis;
        entry.record.shots = 1;
        entry.record.counts[index_to_bitstring(0, n_qubits)] = 1;
        entry.lambda_obs = l0 + m * entry.basis.flattened();
        dataset.entries.push_back(entry);
        dataset.split.push_back(Split::train);
    }
    return dataset;
}

}  // namespace

TEST_CASE("collect_simulated: shapes, shot totals, determinism") {
    const PureState state = zero_state(3);
    const auto records = collect_simulated(state, 5, 100, 60);
    REQUIRE(records.size() == 5);
    for (const auto& record : records) {
        CHECK(record.basis.n_qubits() == 3);
        CHECK(record.shots == 100);
        std::uint64_t total = 0;
        for (const auto& [bits, count] : record.counts) {
            CHECK(bits.size() == 3);
            total += count;
        }
        CHECK(total == 100);
    }
    const auto again = collect_simulated(state, 5, 100, 60);
    for (int i = 0; i < 5; ++i) {
        CHECK(records[i].counts == again[i].counts);
        for (int q = 0; q < 3; ++q)
            CHECK((records[i].basis.axes[q] - again[i].basis.axes[q]).norm() ==
                  0.0);
    }
    const auto other = collect_simulated(state, 5, 100, 61);
    bool any_differs = false;
    for (int q = 0; q < 3; ++q)
        any_differs |=
            (records[0].basis.axes[q] - other[0].basis.axes[q]).norm() > 0;
    CHECK(any_differs);
}

TEST_CASE("warm_start_order: permutation starting at the first basis") {
    Rng rng(62);
    std::vector<LocalBasis> bases;
    for (int i = 0; i < 12; ++i) bases.push_back(random_basis(2, rng));
    const auto order = warm_start_order(bases);
    REQUIRE(order.size() == 12);
    CHECK(order[0] == 0);
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 12; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("warm_start_order: picks the angular nearest neighbor next") {
    // basis 0 at +z; basis 1 slightly tilted; basis 2 near the equator
    auto make = [](double theta) {
        LocalBasis basis;
        basis.axes = {Eigen::Vector3d(std::sin(theta), 0, std::cos(theta))};
        return basis;
    };
    const std::vector<LocalBasis> bases{make(0.0), make(1.4), make(0.1)};
    const auto order = warm_start_order(bases);
    CHECK(order == std::vector<int>{0, 2, 1});
}

TEST_CASE("learn_rbm_sequence: zero epochs propagates the initialization") {
    MeasurementRecord record;
    record.basis = z_basis(2);
    record.shots = 4;
    record.counts["00"] = 4;
    std::vector<MeasurementRecord> records{record, record, record};
    RbmTrainConfig config;
    config.epochs = 0;
    const auto lambdas = learn_rbm_sequence(records, 2, config, 63);
    REQUIRE(lambdas.size() == 3);
    for (const auto& lambda : lambdas) {
        CHECK(lambda.size() == rbm_param_count(2, 2));
        CHECK((lambda - lambdas[0]).norm() == 0.0);
    }
    // biases start at zero, weights are small
    CHECK(lambdas[0].head(4).norm() == 0.0);
    CHECK(lambdas[0].tail(4).cwiseAbs().maxCoeff() < 0.1);
    CHECK(lambdas[0].tail(4).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("learn_rbm_sequence: fits a deterministic product state") {
    MeasurementRecord record;
    record.basis = z_basis(2);
    record.shots = 1024;
    record.counts["11"] = 1024;
    RbmTrainConfig config;
    config.epochs = 400;
    config.learning_rate = 0.1;
    const auto lambdas = learn_rbm_sequence({record}, 2, config, 64);
    const auto dist = exact_distribution(unflatten(lambdas[0], 2, 2));
    CHECK(dist.probs[3] >= 0.9);
}

TEST_CASE("split_train_val: fraction, determinism, edge cases") {
    const auto split = split_train_val(10, 0.2, 65);
    REQUIRE(split.size() == 10);
    CHECK(std::count(split.begin(), split.end(), Split::validation) == 2);
    const auto again = split_train_val(10, 0.2, 65);
    CHECK(split == again);

    const auto half = split_train_val(2, 0.5, 66);
    CHECK(std::count(half.begin(), half.end(), Split::validation) == 1);
    CHECK_THROWS_AS(split_train_val(7, 0.0, 66), ValidationError);
    CHECK_THROWS_AS(split_train_val(7, 1.0, 66), ValidationError);

    TrainingDataset dataset;
    dataset.entries.resize(10);
    dataset.split = split;
    const auto val = dataset.indices_of(Split::validation);
    const auto train = dataset.indices_of(Split::train);
    CHECK(val.size() == 2);
    CHECK(train.size() == 8);
}

TEST_CASE("warm-start ordering smooths the learned parameter sequence") {
    TfimParams params;
    params.n_sites = 2;
    params.j_x = 1.0;
    const PureState state = tfim_ground_state(params);
    const auto records = collect_simulated(state, 30, 1024, 83);

    std::vector<LocalBasis> bases;
    for (const auto& record : records) bases.push_back(record.basis);
    const auto order = warm_start_order(bases);
    std::vector<MeasurementRecord> ordered;
    for (int idx : order) ordered.push_back(records[idx]);

    RbmTrainConfig config;
    config.epochs = 100;
    config.learning_rate = 0.1;
    auto mean_step = [&](const std::vector<MeasurementRecord>& sequence) {
        const auto lambdas = learn_rbm_sequence(sequence, 2, config, 84);
        double total = 0.0;
        for (std::size_t i = 1; i < lambdas.size(); ++i)
            total += (lambdas[i] - lambdas[i - 1]).norm();
        return total / double(lambdas.size() - 1);
    };
    CHECK(mean_step(ordered) < mean_step(records));
}

TEST_CASE("fit_bdrbm: recovers a planted linear basis-to-parameter map") {
    const int n_qubits = 2;
    const int dim = rbm_param_count(n_qubits, n_qubits);
    Rng rng(67);
    Eigen::VectorXd l0 =
        Eigen::VectorXd::NullaryExpr(dim, [&] { return 0.3 * rng.normal(); });
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(
        dim, 3 * n_qubits, [&] { return 0.3 * rng.normal(); });
    const TrainingDataset dataset =
        planted_linear_dataset(n_qubits, 60, l0, m, 68);

    TomographyConfig config;
    config.regression.epochs = 4000;
    config.regression.lr = 0.01;
    config.rng_seed = 69;
    const BdrbmModel model = fit_bdrbm(dataset, config);
    CHECK(model.n_qubits == n_qubits);
    CHECK(model.n_hidden == n_qubits);
    CHECK_FALSE(model.pca.has_value());

    const LocalBasis probe = random_basis(n_qubits, 70);
    const Eigen::VectorXd expected = l0 + m * probe.flattened();
    CHECK((predict_lambda(model, probe) - expected).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("fit_bdrbm: full-rank PCA preprocessing still recovers the map") {
    const int n_qubits = 2;
    const int dim = rbm_param_count(n_qubits, n_qubits);
    Rng rng(71);
    Eigen::VectorXd l0 =
        Eigen::VectorXd::NullaryExpr(dim, [&] { return 0.3 * rng.normal(); });
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(
        dim, 3 * n_qubits, [&] { return 0.3 * rng.normal(); });
    const TrainingDataset dataset =
        planted_linear_dataset(n_qubits, 60, l0, m, 72);

    TomographyConfig config;
    config.regression.epochs = 4000;
    config.regression.lr = 0.01;
    config.pca.enabled = true;
    config.pca.k = dim;
    config.rng_seed = 73;
    const BdrbmModel model = fit_bdrbm(dataset, config);
    REQUIRE(model.pca.has_value());
    CHECK(model.pca->output_dim() == dim);

    const LocalBasis probe = random_basis(n_qubits, 74);
    const Eigen::VectorXd expected = l0 + m * probe.flattened();
    CHECK((predict_lambda(model, probe) - expected).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("fine_tune: zero rounds is the identity") {
    const int n_qubits = 2;
    const int dim = rbm_param_count(n_qubits, n_qubits);
    const TrainingDataset dataset = planted_linear_dataset(
        n_qubits, 8, Eigen::VectorXd::Zero(dim),
        Eigen::MatrixXd::Zero(dim, 3 * n_qubits), 75);
    TomographyConfig config;
    config.regression.epochs = 50;
    config.fine_tune_rounds = 0;
    config.rng_seed = 76;
    const BdrbmModel model = fit_bdrbm(dataset, config);
    const auto [tuned, tuned_dataset] = fine_tune(model, dataset, config);
    CHECK((tuned.ffnn.parameters() - model.ffnn.parameters()).norm() == 0.0);
    for (std::size_t i = 0; i < dataset.entries.size(); ++i)
        CHECK((tuned_dataset.entries[i].lambda_obs -
               dataset.entries[i].lambda_obs)
                  .norm() == 0.0);
}

TEST_CASE("predict_distribution and predict_samples: validity, determinism") {
    const int n_qubits = 2;
    const int dim = rbm_param_count(n_qubits, n_qubits);
    Rng rng(77);
    BdrbmModel model;
    model.n_qubits = n_qubits;
    model.n_hidden = n_qubits;
    model.ffnn = FfnnModel::linear(3 * n_qubits, dim);
    model.ffnn.output_offset =
        Eigen::VectorXd::NullaryExpr(dim, [&] { return 0.5 * rng.normal(); });
    model.ffnn.output_weights = Eigen::MatrixXd::NullaryExpr(
        dim, 3 * n_qubits, [&] { return 0.5 * rng.normal(); });

    const LocalBasis basis = random_basis(n_qubits, 78);
    const auto dist = predict_distribution(model, basis);
    dist.validate();
    CHECK(dist.probs.size() == 4);

    const auto samples = predict_samples(model, basis, 20000, 79);
    REQUIRE(samples.size() == 20000);
    Eigen::VectorXd empirical = Eigen::VectorXd::Zero(4);
    for (const auto& v : samples) {
        int idx = 0;
        for (int i = 0; i < n_qubits; ++i) idx = idx * 2 + (v[i] > 0.5 ? 1 : 0);
        empirical[idx] += 1.0;
    }
    empirical /= double(samples.size());
    CHECK(oracles::total_variation(empirical, dist.probs) < 0.03);

    const auto again = predict_samples(model, basis, 50, 80);
    const auto again2 = predict_samples(model, basis, 50, 80);
    for (int i = 0; i < 50; ++i) CHECK((again[i] - again2[i]).norm() == 0.0);
}

TEST_CASE("run_tomography: end-to-end on a small product state") {
    TfimParams params;
    params.n_sites = 2;
    params.j_x = 3.0;
    const PureState state = tfim_ground_state(params);
    const auto records = collect_simulated(state, 20, 2048, 81);

    TomographyConfig config;
    config.n_bases = 20;
    config.shots = 2048;
    config.val_fraction = 0.2;
    config.fine_tune_rounds = 1;
    config.rbm.epochs = 150;
    config.rbm.learning_rate = 0.1;
    config.regression.epochs = 800;
    config.regression.lr = 0.01;
    config.rng_seed = 82;

    const TomographyResult result = run_tomography(records, config);
    CHECK(result.dataset.entries.size() == 20);
    CHECK(result.dataset.indices_of(Split::validation).size() == 4);
    CHECK(std::isfinite(result.regression_loss));

    const auto report = fidelity_report(result.model, result.dataset,
                                        CompareKind::vs_exact_target,
                                        Split::train, &state);
    CHECK(report.mean > 0.85);
    const auto val_report = fidelity_report(result.model, result.dataset,
                                            CompareKind::vs_exact_target,
                                            Split::validation, &state);
    // training bases should be reconstructed at least as well as held-out
    // ones are predicted, up to noise
    CHECK(report.mean >= val_report.mean - 0.02);

    const TomographyResult again = run_tomography(records, config);
    CHECK((again.model.ffnn.parameters() - result.model.ffnn.parameters())
              .norm() == 0.0);
}
