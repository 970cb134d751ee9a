// Timing comparison between the OpenMP kernels and their serial reference
// implementations, with a consistency check on each pair.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "bdrbm/quantum.hpp"
#include "bdrbm/rbm.hpp"
#include "bdrbm/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& body, int reps) {
    const auto start = Clock::now();
    for (int i = 0; i < reps; ++i) body();
    const auto stop = Clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const int n_qubits = argc > 1 ? std::atoi(argv[1]) : 18;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif
    std::printf("statevector size: 2^%d\n\n", n_qubits);

    bdrbm::Rng rng(42);
    const std::uint64_t dim = std::uint64_t{1} << n_qubits;

    // local basis rotation
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dim);
    for (std::uint64_t i = 0; i < dim; ++i)
        amps[i] = {rng.normal(), rng.normal()};
    amps.normalize();
    const bdrbm::LocalBasis basis = bdrbm::random_basis(n_qubits, rng);

    Eigen::VectorXcd omp_amps = amps;
    Eigen::VectorXcd serial_amps = amps;
    const double rot_omp = time_ms(
        [&] { bdrbm::kernels::apply_local_rotation(omp_amps, basis); }, reps);
    const double rot_serial = time_ms(
        [&] { bdrbm::kernels::serial::apply_local_rotation(serial_amps, basis); },
        reps);
    const double rot_diff = (omp_amps - serial_amps).norm();
    std::printf("local rotation      omp %8.3f ms   serial %8.3f ms   |diff| %.3g\n",
                rot_omp, rot_serial, rot_diff);

    // TFIM matvec
    const int sites = std::min(n_qubits, 14);
    const bdrbm::TfimParams tfim{sites, 1.0, 1.0, bdrbm::Boundary::open};
    const std::uint64_t tdim = std::uint64_t{1} << sites;
    Eigen::VectorXd in(tdim), out_omp(tdim), out_serial(tdim);
    for (std::uint64_t i = 0; i < tdim; ++i) in[i] = rng.normal();
    const double mv_omp =
        time_ms([&] { bdrbm::kernels::tfim_apply(tfim, 1.0, in, out_omp); }, reps);
    const double mv_serial = time_ms(
        [&] { bdrbm::kernels::serial::tfim_apply(tfim, 1.0, in, out_serial); }, reps);
    std::printf("tfim matvec (n=%2d)  omp %8.3f ms   serial %8.3f ms   |diff| %.3g\n",
                sites, mv_omp, mv_serial, (out_omp - out_serial).norm());

    // RBM enumeration (parallel inside exact_distribution)
    const int n_v = std::min(n_qubits, 16);
    bdrbm::RbmParams rbm = bdrbm::RbmParams::gaussian_init(n_v, n_v, 0.5, rng);
    const double enum_ms =
        time_ms([&] { bdrbm::exact_distribution(rbm).probs.sum(); }, reps);
    std::printf("rbm enumeration (n_v=%2d)            %8.3f ms\n", n_v, enum_ms);

    return rot_diff < 1e-12 ? 0 : 1;
}
