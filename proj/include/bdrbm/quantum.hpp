#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bdrbm/rng.hpp"

namespace bdrbm {

// Qubit 0 is the most significant bit of every outcome index / bitstring.
// This convention is shared by all modules and file formats.

struct PureState {
    int n_qubits = 0;
    Eigen::VectorXcd amplitudes;

    void validate() const;  // power-of-two length, unit norm within 1e-10
};

// Per-qubit Bloch measurement axes r_i = (x_i, y_i, z_i).
struct LocalBasis {
    std::vector<Eigen::Vector3d> axes;

    int n_qubits() const { return static_cast<int>(axes.size()); }
    // Axes concatenated as (x_0, y_0, z_0, x_1, ...), the FFNN input.
    Eigen::VectorXd flattened() const;
    void validate() const;  // each |r_i| = 1 within 1e-9
};

enum class Boundary { open, periodic };

struct TfimParams {
    int n_sites = 0;
    double j_z = 1.0;
    double j_x = 1.0;
    Boundary boundary = Boundary::open;

    void validate() const;  // n_sites >= 2
};

struct OutcomeDistribution {
    Eigen::VectorXd probs;

    void validate() const;  // nonnegative, sums to 1 within 1e-9
};

struct MeasurementRecord {
    LocalBasis basis;
    std::map<std::string, std::uint64_t> counts;  // bitstring -> count
    std::uint64_t shots = 0;
};

std::string index_to_bitstring(std::uint64_t index, int n_qubits);
std::uint64_t bitstring_to_index(const std::string& bits);

// Minimum eigenpair of H = (J_z sum_<ij> sz_i sz_j - J_x sum_i sx_i) / 4
// (Pauli operators; both terms share the spin-1/2 normalization so the
// critical region sits at J_x ~ J_z). Matrix-free Lanczos; residual
// ||H psi - E psi|| <= tol.
// Degeneracy at J_x = 0 is resolved by solving at J_x = max(J_x, 1e-6).
PureState tfim_ground_state(const TfimParams& params, double tol = 1e-8);
double tfim_ground_energy(const TfimParams& params, double tol = 1e-8);

// Rows of the returned matrix are the measurement projector bras <0_b|, <1_b|.
Eigen::Matrix2cd basis_unitary_single(double theta, double phi);

// theta = arccos(z) in [0, pi], phi = atan2(y, x) in (-pi, pi].
std::pair<double, double> bloch_to_angles(const Eigen::Vector3d& r);

OutcomeDistribution outcome_distribution(const PureState& state,
                                         const LocalBasis& basis);

MeasurementRecord sample_outcomes(const OutcomeDistribution& dist,
                                  const LocalBasis& basis,
                                  std::uint64_t shots, Rng& rng);
MeasurementRecord sample_outcomes(const OutcomeDistribution& dist,
                                  const LocalBasis& basis,
                                  std::uint64_t shots, std::uint64_t rng_seed);

// Axes i.i.d. uniform on the upper unit hemisphere (z >= 0).
LocalBasis random_basis(int n_qubits, Rng& rng);
LocalBasis random_basis(int n_qubits, std::uint64_t rng_seed);

// Normalized counts of a record as a full 2^n outcome vector.
OutcomeDistribution empirical_distribution(const MeasurementRecord& record);

namespace kernels {

// In-place rotation of the state vector by the product unitary of `basis`.
void apply_local_rotation(Eigen::VectorXcd& amps, const LocalBasis& basis);

// out = H * in for the TFIM Hamiltonian (j_x as given, no degeneracy shift).
void tfim_apply(const TfimParams& params, double j_x,
                const Eigen::VectorXd& in, Eigen::VectorXd& out);

namespace serial {
// Reference implementations of the kernels above, kept for testing and for
// the kernel benchmark. Must produce identical results.
void apply_local_rotation(Eigen::VectorXcd& amps, const LocalBasis& basis);
void tfim_apply(const TfimParams& params, double j_x,
                const Eigen::VectorXd& in, Eigen::VectorXd& out);
}  // namespace serial

}  // namespace kernels

}  // namespace bdrbm
