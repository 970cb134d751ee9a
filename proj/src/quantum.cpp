#include "bdrbm/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bdrbm/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bdrbm {

namespace {

constexpr double kDegeneracyShift = 1e-6;

std::uint64_t dim_of(int n_qubits) { return std::uint64_t{1} << n_qubits; }

}  // namespace

void PureState::validate() const {
    if (n_qubits < 1) throw ValidationError("PureState: n_qubits must be positive");
    if (amplitudes.size() != static_cast<Eigen::Index>(dim_of(n_qubits)))
        throw ValidationError("PureState: amplitude length is not 2^n_qubits");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
        throw ValidationError("PureState: amplitudes are not unit norm");
}

Eigen::VectorXd LocalBasis::flattened() const {
    Eigen::VectorXd out(3 * axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) out.segment<3>(3 * i) = axes[i];
    return out;
}

void LocalBasis::validate() const {
    if (axes.empty()) throw ValidationError("LocalBasis: no axes");
    for (const auto& r : axes) {
        if (std::abs(r.norm() - 1.0) > 1e-9)
            throw ValidationError("LocalBasis: axis is not a unit vector");
    }
}

void TfimParams::validate() const {
    if (n_sites < 2) throw ValidationError("TfimParams: n_sites must be >= 2");
}

void OutcomeDistribution::validate() const {
    if (probs.size() == 0) throw ValidationError("OutcomeDistribution: empty");
    if (probs.minCoeff() < 0.0)
        throw ValidationError("OutcomeDistribution: negative entry");
    if (std::abs(probs.sum() - 1.0) > 1e-9)
        throw ValidationError("OutcomeDistribution: probabilities do not sum to 1");
}

std::string index_to_bitstring(std::uint64_t index, int n_qubits) {
    std::string bits(n_qubits, '0');
    for (int q = 0; q < n_qubits; ++q) {
        if (index >> (n_qubits - 1 - q) & 1) bits[q] = '1';
    }
    return bits;
}

std::uint64_t bitstring_to_index(const std::string& bits) {
    std::uint64_t index = 0;
    for (char ch : bits) {
        if (ch != '0' && ch != '1')
            throw ValidationError("bitstring contains non-binary character");
        index = (index << 1) | static_cast<std::uint64_t>(ch - '0');
    }
    return index;
}

namespace kernels {

namespace {

// Rotate the amplitude pairs of a single qubit by U. Pairs are disjoint, so
// the loop parallelizes without synchronization.
template <bool Parallel>
void rotate_qubit(Eigen::VectorXcd& amps, int n_qubits, int qubit,
                  const Eigen::Matrix2cd& u) {
    const std::uint64_t dim = std::uint64_t{1} << n_qubits;
    const std::uint64_t stride = std::uint64_t{1} << (n_qubits - 1 - qubit);
    const std::int64_t n_pairs = static_cast<std::int64_t>(dim >> 1);
#pragma omp parallel for schedule(static) if (Parallel && n_pairs >= (1 << 12))
    for (std::int64_t p = 0; p < n_pairs; ++p) {
        const std::uint64_t low = static_cast<std::uint64_t>(p) & (stride - 1);
        const std::uint64_t high = (static_cast<std::uint64_t>(p) >> (n_qubits - 1 - qubit)) << (n_qubits - qubit);
        const std::uint64_t i0 = high | low;
        const std::uint64_t i1 = i0 | stride;
        const std::complex<double> a0 = amps[i0];
        const std::complex<double> a1 = amps[i1];
        amps[i0] = u(0, 0) * a0 + u(0, 1) * a1;
        amps[i1] = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

template <bool Parallel>
void apply_local_rotation_impl(Eigen::VectorXcd& amps, const LocalBasis& basis) {
    const int n = basis.n_qubits();
    for (int q = 0; q < n; ++q) {
        const auto [theta, phi] = bloch_to_angles(basis.axes[q]);
        rotate_qubit<Parallel>(amps, n, q, basis_unitary_single(theta, phi));
    }
}

// Diagonal S^z S^z bond energy of a computational basis state.
double tfim_diag(const TfimParams& params, std::uint64_t index) {
    const int n = params.n_sites;
    double sum = 0.0;
    const int n_bonds = params.boundary == Boundary::periodic ? n : n - 1;
    for (int i = 0; i < n_bonds; ++i) {
        const int j = (i + 1) % n;
        const double si = (index >> (n - 1 - i) & 1) ? -0.5 : 0.5;
        const double sj = (index >> (n - 1 - j) & 1) ? -0.5 : 0.5;
        sum += si * sj;
    }
    return params.j_z * sum;
}

template <bool Parallel>
void tfim_apply_impl(const TfimParams& params, double j_x,
                     const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    const int n = params.n_sites;
    const std::int64_t dim = std::int64_t{1} << n;
#pragma omp parallel for schedule(static) if (Parallel && dim >= (1 << 12))
    for (std::int64_t idx = 0; idx < dim; ++idx) {
        double acc = tfim_diag(params, static_cast<std::uint64_t>(idx)) * in[idx];
        // Transverse field carries the same 1/4 normalization as the bond
        // term, so the critical region stays at j_x ~ j_z.
        for (int i = 0; i < n; ++i) {
            acc -= 0.25 * j_x * in[idx ^ (std::int64_t{1} << (n - 1 - i))];
        }
        out[idx] = acc;
    }
}

}  // namespace

void apply_local_rotation(Eigen::VectorXcd& amps, const LocalBasis& basis) {
    apply_local_rotation_impl<true>(amps, basis);
}

void tfim_apply(const TfimParams& params, double j_x, const Eigen::VectorXd& in,
                Eigen::VectorXd& out) {
    tfim_apply_impl<true>(params, j_x, in, out);
}

namespace serial {

void apply_local_rotation(Eigen::VectorXcd& amps, const LocalBasis& basis) {
    apply_local_rotation_impl<false>(amps, basis);
}

void tfim_apply(const TfimParams& params, double j_x, const Eigen::VectorXd& in,
                Eigen::VectorXd& out) {
    tfim_apply_impl<false>(params, j_x, in, out);
}

}  // namespace serial

}  // namespace kernels

namespace {

struct LanczosResult {
    double eigenvalue = 0.0;
    Eigen::VectorXd eigenvector;
    double residual = 0.0;
};

// Lanczos with full reorthogonalization, restarted from the best Ritz vector
// until the residual meets tol or the matvec budget (10 * dim) is exhausted.
LanczosResult tfim_min_eigenpair(const TfimParams& params, double j_x,
                                 double tol) {
    const std::int64_t dim = std::int64_t{1} << params.n_sites;
    const int block = static_cast<int>(std::min<std::int64_t>(dim, 64));
    const std::int64_t max_matvecs = 10 * dim < 256 ? 256 : 10 * dim;
    std::int64_t matvecs = 0;

    // Uniform start: nonnegative overlap with the Perron ground state and
    // symmetric under the global spin flip, which pins the degenerate sector.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(dim) / std::sqrt(double(dim));
    Eigen::VectorXd w(dim);
    double theta = 0.0;
    double residual = std::numeric_limits<double>::infinity();

    while (matvecs < max_matvecs) {
        Eigen::MatrixXd v_basis(dim, block);
        Eigen::VectorXd alpha(block), beta(block);
        v_basis.col(0) = x.normalized();
        int m = 0;
        for (int j = 0; j < block && matvecs < max_matvecs; ++j) {
            kernels::tfim_apply(params, j_x, v_basis.col(j), w);
            ++matvecs;
            alpha[j] = v_basis.col(j).dot(w);
            w -= alpha[j] * v_basis.col(j);
            if (j > 0) w -= beta[j - 1] * v_basis.col(j - 1);
            // full reorthogonalization
            w -= v_basis.leftCols(j + 1) * (v_basis.leftCols(j + 1).transpose() * w);
            m = j + 1;
            const double nb = w.norm();
            if (j + 1 < block) {
                if (nb < 1e-13) break;  // invariant subspace reached
                beta[j] = nb;
                v_basis.col(j + 1) = w / nb;
            }
        }
        Eigen::MatrixXd tridiag = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            tridiag(j, j) = alpha[j];
            if (j + 1 < m) tridiag(j, j + 1) = tridiag(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiag);
        theta = es.eigenvalues()(0);
        x = (v_basis.leftCols(m) * es.eigenvectors().col(0)).normalized();

        kernels::tfim_apply(params, j_x, x, w);
        ++matvecs;
        residual = (w - theta * x).norm();
        if (residual <= tol) return {theta, x, residual};
    }
    throw ConvergenceError("tfim_ground_state: eigensolver did not converge, residual " +
                               std::to_string(residual),
                           residual);
}

}  // namespace

PureState tfim_ground_state(const TfimParams& params, double tol) {
    params.validate();
    if (params.n_sites > 14)
        throw ValidationError("tfim_ground_state: n_sites must be <= 14");
    const double j_x = std::max(params.j_x, kDegeneracyShift);
    const auto result = tfim_min_eigenpair(params, j_x, tol);
    PureState state;
    state.n_qubits = params.n_sites;
    state.amplitudes = result.eigenvector.cast<std::complex<double>>();
    return state;
}

double tfim_ground_energy(const TfimParams& params, double tol) {
    params.validate();
    if (params.n_sites > 14)
        throw ValidationError("tfim_ground_energy: n_sites must be <= 14");
    const double j_x = std::max(params.j_x, kDegeneracyShift);
    return tfim_min_eigenpair(params, j_x, tol).eigenvalue;
}

Eigen::Matrix2cd basis_unitary_single(double theta, double phi) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, -phi));
    Eigen::Matrix2cd u;
    u << c, phase * s, s, -phase * c;
    return u;
}

std::pair<double, double> bloch_to_angles(const Eigen::Vector3d& r) {
    if (std::abs(r.norm() - 1.0) > 1e-6)
        throw ValidationError("bloch_to_angles: axis is not a unit vector");
    const double theta = std::acos(std::clamp(r.z(), -1.0, 1.0));
    const double phi = (r.x() == 0.0 && r.y() == 0.0) ? 0.0 : std::atan2(r.y(), r.x());
    return {theta, phi};
}

OutcomeDistribution outcome_distribution(const PureState& state,
                                         const LocalBasis& basis) {
    state.validate();
    basis.validate();
    if (basis.n_qubits() != state.n_qubits)
        throw ValidationError("outcome_distribution: basis/state qubit mismatch");
    Eigen::VectorXcd rotated = state.amplitudes;
    kernels::apply_local_rotation(rotated, basis);
    OutcomeDistribution dist;
    dist.probs = rotated.cwiseAbs2();
    // rotated by a unitary, so renormalization only scrubs rounding
    dist.probs /= dist.probs.sum();
    return dist;
}

MeasurementRecord sample_outcomes(const OutcomeDistribution& dist,
                                  const LocalBasis& basis, std::uint64_t shots,
                                  Rng& rng) {
    dist.validate();
    if (shots == 0) throw ValidationError("sample_outcomes: shots must be positive");
    const int n = basis.n_qubits();
    if (dist.probs.size() != static_cast<Eigen::Index>(dim_of(n)))
        throw ValidationError("sample_outcomes: basis/distribution size mismatch");

    std::vector<double> cdf(dist.probs.size());
    std::partial_sum(dist.probs.data(), dist.probs.data() + dist.probs.size(),
                     cdf.begin());
    cdf.back() = 1.0;

    std::vector<std::uint64_t> tally(dist.probs.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        ++tally[static_cast<std::size_t>(it - cdf.begin())];
    }

    MeasurementRecord record;
    record.basis = basis;
    record.shots = shots;
    for (std::size_t i = 0; i < tally.size(); ++i) {
        if (tally[i] > 0) record.counts[index_to_bitstring(i, n)] = tally[i];
    }
    return record;
}

MeasurementRecord sample_outcomes(const OutcomeDistribution& dist,
                                  const LocalBasis& basis, std::uint64_t shots,
                                  std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return sample_outcomes(dist, basis, shots, rng);
}

LocalBasis random_basis(int n_qubits, Rng& rng) {
    if (n_qubits < 1) throw ValidationError("random_basis: n_qubits must be >= 1");
    LocalBasis basis;
    basis.axes.reserve(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        const double z = rng.uniform();  // upper hemisphere
        const double az = rng.uniform(0.0, 2.0 * M_PI);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        basis.axes.emplace_back(rho * std::cos(az), rho * std::sin(az), z);
    }
    return basis;
}

LocalBasis random_basis(int n_qubits, std::uint64_t rng_seed) {
    Rng rng(rng_seed);
    return random_basis(n_qubits, rng);
}

OutcomeDistribution empirical_distribution(const MeasurementRecord& record) {
    const int n = record.basis.n_qubits();
    OutcomeDistribution dist;
    dist.probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_of(n)));
    std::uint64_t total = 0;
    for (const auto& [bits, count] : record.counts) {
        if (static_cast<int>(bits.size()) != n)
            throw ValidationError("empirical_distribution: bitstring length mismatch");
        dist.probs[static_cast<Eigen::Index>(bitstring_to_index(bits))] +=
            static_cast<double>(count);
        total += count;
    }
    if (total == 0) throw ValidationError("empirical_distribution: no counts");
    dist.probs /= static_cast<double>(total);
    return dist;
}

}  // namespace bdrbm
