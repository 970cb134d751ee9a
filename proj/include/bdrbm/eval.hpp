#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bdrbm/pipeline.hpp"
#include "bdrbm/quantum.hpp"

namespace bdrbm {

// Bhattacharyya coefficient sum_i sqrt(p_i q_i), clamped to [0, 1].
double classical_fidelity(const OutcomeDistribution& p,
                          const OutcomeDistribution& q);

enum class CompareKind { vs_empirical, vs_exact_target };

struct FidelityReport {
    std::vector<double> fidelities;
    double mean = 0.0;
    double stddev = 0.0;
    CompareKind kind = CompareKind::vs_empirical;
    Split split = Split::train;
};

// Per-basis fidelity between the model's prediction and either the record's
// normalized counts or the exact target distribution. `target` is required
// for vs_exact_target.
FidelityReport fidelity_report(const BdrbmModel& model,
                               const TrainingDataset& dataset,
                               CompareKind kind, Split split,
                               const PureState* target = nullptr);

// mean(train) - mean(validation); both reports must use the same kind.
double overfit_gap(const FidelityReport& train, const FidelityReport& val);

// Linear-filter analysis of a converged model. The filter is laid out as in
// the model output: rows index RBM parameters [b | c | W], columns index
// basis coordinates grouped (x_k, y_k, z_k) per qubit.
struct FilterReport {
    Eigen::MatrixXd filter;  // (n_v + n_h + n_v*n_h) x 3n
    Eigen::VectorXd offset;
    int n_qubits = 0;
    int n_hidden = 0;
    bool through_pca = false;  // effective filter composed with PCA reconstruction

    double visible_bias_mass = 0.0;  // sum |M_ij| over visible-bias rows
    double hidden_bias_mass = 0.0;
    double weight_mass = 0.0;
    // Mass in visible-bias rows split by coordinate type of the column.
    double visible_x_mass = 0.0;
    double visible_y_mass = 0.0;
    double visible_z_mass = 0.0;

    double total_mass() const {
        return visible_bias_mass + hidden_bias_mass + weight_mass;
    }
};

FilterReport filter_report(const BdrbmModel& model);

}  // namespace bdrbm
