#include "bdrbm/pca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "bdrbm/errors.hpp"

namespace bdrbm {

PcaTransform fit_pca(const std::vector<Eigen::VectorXd>& data, int k) {
    const int n = static_cast<int>(data.size());
    if (n < 2) throw ValidationError("fit_pca: need at least 2 samples");
    const int d = static_cast<int>(data.front().size());
    if (k < 1 || k > d) throw ValidationError("fit_pca: k out of range");
    if (n < k) throw ValidationError("fit_pca: fewer samples than components");

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : data) {
        if (x.size() != d) throw ValidationError("fit_pca: inconsistent dimensions");
        mean += x;
    }
    mean /= double(n);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : data) {
        const Eigen::VectorXd centered = x - mean;
        cov.noalias() += centered * centered.transpose();
    }
    cov /= double(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("fit_pca: eigendecomposition failed", 0.0);

    // Eigen returns ascending eigenvalues; take the top k in descending order.
    PcaTransform t;
    t.mean = std::move(mean);
    t.components = Eigen::MatrixXd(k, d);
    t.explained_variance = Eigen::VectorXd(k);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd comp = es.eigenvectors().col(d - 1 - i);
        int argmax = 0;
        comp.cwiseAbs().maxCoeff(&argmax);
        if (comp[argmax] < 0.0) comp = -comp;
        t.components.row(i) = comp;
        t.explained_variance[i] = std::max(0.0, es.eigenvalues()(d - 1 - i));
    }
    return t;
}

Eigen::VectorXd project(const PcaTransform& t, const Eigen::VectorXd& x) {
    if (x.size() != t.input_dim()) throw ValidationError("project: dimension mismatch");
    return t.components * (x - t.mean);
}

Eigen::VectorXd reconstruct(const PcaTransform& t, const Eigen::VectorXd& y) {
    if (y.size() != t.output_dim())
        throw ValidationError("reconstruct: dimension mismatch");
    return t.mean + t.components.transpose() * y;
}

int components_for_variance(const PcaTransform& full, double target) {
    const double total = full.explained_variance.sum();
    if (total <= 0.0) return 1;
    double cumulative = 0.0;
    for (int i = 0; i < full.explained_variance.size(); ++i) {
        cumulative += full.explained_variance[i];
        if (cumulative / total >= target) return i + 1;
    }
    return static_cast<int>(full.explained_variance.size());
}

}  // namespace bdrbm
