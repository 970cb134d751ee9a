#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bdrbm {

struct PcaTransform {
    Eigen::VectorXd mean;                // length d
    Eigen::MatrixXd components;          // k x d, rows orthonormal
    Eigen::VectorXd explained_variance;  // length k, non-increasing

    int input_dim() const { return static_cast<int>(mean.size()); }
    int output_dim() const { return static_cast<int>(components.rows()); }
};

// Standard PCA on mean-centered data via eigendecomposition of the sample
// covariance (1/(N-1) normalization). Components are sign-fixed so each row's
// largest-magnitude entry is positive.
PcaTransform fit_pca(const std::vector<Eigen::VectorXd>& data, int k);

Eigen::VectorXd project(const PcaTransform& t, const Eigen::VectorXd& x);
Eigen::VectorXd reconstruct(const PcaTransform& t, const Eigen::VectorXd& y);

// Smallest k whose cumulative explained-variance ratio reaches `target`.
int components_for_variance(const PcaTransform& full, double target);

}  // namespace bdrbm
