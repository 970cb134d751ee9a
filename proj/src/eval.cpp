#include "bdrbm/eval.hpp"

#include <algorithm>
#include <cmath>

#include "bdrbm/errors.hpp"

namespace bdrbm {

double classical_fidelity(const OutcomeDistribution& p, const OutcomeDistribution& q) {
    if (p.probs.size() != q.probs.size())
        throw ValidationError("classical_fidelity: length mismatch");
    if (std::abs(p.probs.sum() - 1.0) > 1e-6 || std::abs(q.probs.sum() - 1.0) > 1e-6)
        throw ValidationError("classical_fidelity: inputs are not normalized");
    const double fc = p.probs.cwiseProduct(q.probs).cwiseSqrt().sum();
    return std::clamp(fc, 0.0, 1.0);
}

FidelityReport fidelity_report(const BdrbmModel& model, const TrainingDataset& dataset,
                               CompareKind kind, Split split, const PureState* target) {
    if (kind == CompareKind::vs_exact_target && target == nullptr)
        throw ValidationError("fidelity_report: vs_exact_target requires a state");
    const auto indices = dataset.indices_of(split);
    if (indices.empty()) throw ValidationError("fidelity_report: empty split");

    FidelityReport report;
    report.kind = kind;
    report.split = split;
    report.fidelities.resize(indices.size());

    const std::int64_t n = static_cast<std::int64_t>(indices.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < n; ++k) {
        const auto& entry = dataset.entries[indices[k]];
        const OutcomeDistribution predicted = predict_distribution(model, entry.basis);
        const OutcomeDistribution reference =
            kind == CompareKind::vs_empirical
                ? empirical_distribution(entry.record)
                : outcome_distribution(*target, entry.basis);
        report.fidelities[k] = classical_fidelity(predicted, reference);
    }

    double mean = 0.0;
    for (double f : report.fidelities) mean += f;
    mean /= double(report.fidelities.size());
    double var = 0.0;
    for (double f : report.fidelities) var += (f - mean) * (f - mean);
    report.mean = mean;
    report.stddev = std::sqrt(var / double(report.fidelities.size()));
    return report;
}

double overfit_gap(const FidelityReport& train, const FidelityReport& val) {
    if (train.kind != val.kind)
        throw ValidationError("overfit_gap: comparison kinds differ");
    return train.mean - val.mean;
}

FilterReport filter_report(const BdrbmModel& model) {
    if (!model.ffnn.is_linear())
        throw CapabilityError("filter_report: model is not linear");

    FilterReport report;
    report.n_qubits = model.n_qubits;
    report.n_hidden = model.n_hidden;
    auto [offset, filter] = extract_linear_filter(model.ffnn);
    if (model.pca) {
        // Effective filter through the PCA reconstruction map.
        report.through_pca = true;
        report.filter = model.pca->components.transpose() * filter;
        report.offset = model.pca->mean + model.pca->components.transpose() * offset;
    } else {
        report.filter = std::move(filter);
        report.offset = std::move(offset);
    }

    const int n_v = model.n_qubits;
    const int n_h = model.n_hidden;
    const Eigen::MatrixXd abs = report.filter.cwiseAbs();
    report.visible_bias_mass = abs.topRows(n_v).sum();
    report.hidden_bias_mass = abs.middleRows(n_v, n_h).sum();
    report.weight_mass = abs.bottomRows(n_v * n_h).sum();
    for (int q = 0; q < n_v; ++q) {
        report.visible_x_mass += abs.col(3 * q).topRows(n_v).sum();
        report.visible_y_mass += abs.col(3 * q + 1).topRows(n_v).sum();
        report.visible_z_mass += abs.col(3 * q + 2).topRows(n_v).sum();
    }
    return report;
}

}  // namespace bdrbm
