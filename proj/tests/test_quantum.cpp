#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bdrbm/errors.hpp"
#include "bdrbm/quantum.hpp"
#include "oracles.hpp"

using namespace bdrbm;

namespace {

PureState make_state(std::initializer_list<std::complex<double>> amps) {
    PureState s;
    s.amplitudes = Eigen::VectorXcd(amps.size());
    int i = 0;
    for (auto a : amps) s.amplitudes[i++] = a;
    s.n_qubits = static_cast<int>(std::log2(double(amps.size())) + 0.5);
    s.amplitudes.normalize();
    return s;
}

LocalBasis axes(std::initializer_list<Eigen::Vector3d> rs) {
    LocalBasis b;
    for (const auto& r : rs) b.axes.push_back(r.normalized());
    return b;
}

}  // namespace

TEST_CASE("tfim ground state: n=2 antiferromagnet at jx=0") {
    const TfimParams params{2, 1.0, 0.0, Boundary::open};
    const PureState gs = tfim_ground_state(params);
    CHECK(tfim_ground_energy(params) == doctest::Approx(-0.25).epsilon(1e-9));
    // state lies in span{|01>, |10>}; degeneracy resolved symmetrically
    CHECK(std::abs(gs.amplitudes[0]) < 1e-4);
    CHECK(std::abs(gs.amplitudes[3]) < 1e-4);
    CHECK(std::abs(gs.amplitudes[1]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
    CHECK(std::abs(gs.amplitudes[2]) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("tfim ground state: strong transverse field approaches |+>^n") {
    const TfimParams params{2, 1.0, 10.0, Boundary::open};
    const PureState gs = tfim_ground_state(params);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Constant(4, 0.5);
    const double overlap = std::norm(plus.dot(gs.amplitudes));
    CHECK(overlap > 0.99);
}

TEST_CASE("tfim ground state: n=6 energy matches dense oracle") {
    const TfimParams params{6, 1.0, 1.0, Boundary::open};
    const double dense = oracles::dense_tfim_ground_energy(params, 1.0);
    CHECK(tfim_ground_energy(params) == doctest::Approx(dense).epsilon(1e-8));

    const TfimParams periodic{6, 1.0, 0.7, Boundary::periodic};
    const double dense_p = oracles::dense_tfim_ground_energy(periodic, 0.7);
    CHECK(tfim_ground_energy(periodic) == doctest::Approx(dense_p).epsilon(1e-8));
}

TEST_CASE("tfim ground state: residual within tolerance") {
    const TfimParams params{8, 1.0, 1.3, Boundary::open};
    const double tol = 1e-9;
    const PureState gs = tfim_ground_state(params, tol);
    const double energy = tfim_ground_energy(params, tol);
    Eigen::VectorXd psi = gs.amplitudes.real();
    Eigen::VectorXd h_psi(psi.size());
    kernels::tfim_apply(params, std::max(params.j_x, 1e-6), psi, h_psi);
    CHECK((h_psi - energy * psi).norm() <= tol);
}

TEST_CASE("basis_unitary_single: closed-form cases") {
    const auto u_z = basis_unitary_single(0.0, 0.0);
    CHECK(std::abs(u_z(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(u_z(0, 1)) < 1e-15);
    CHECK(std::abs(u_z(1, 0)) < 1e-15);
    CHECK(std::abs(u_z(1, 1) + 1.0) < 1e-15);

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const auto u_x = basis_unitary_single(M_PI / 2.0, 0.0);
    CHECK(std::abs(u_x(0, 0) - inv_sqrt2) < 1e-15);
    CHECK(std::abs(u_x(0, 1) - inv_sqrt2) < 1e-15);
    CHECK(std::abs(u_x(1, 0) - inv_sqrt2) < 1e-15);
    CHECK(std::abs(u_x(1, 1) + inv_sqrt2) < 1e-15);

    const auto u_y = basis_unitary_single(M_PI / 2.0, M_PI / 2.0);
    CHECK(std::abs(u_y(0, 1) - std::complex<double>(0, -inv_sqrt2)) < 1e-15);
    CHECK(std::abs(u_y(1, 1) - std::complex<double>(0, inv_sqrt2)) < 1e-15);
}

TEST_CASE("basis_unitary_single: unitarity over random bases") {
    Rng rng(7);
    for (int trial = 0; trial < 1000; ++trial) {
        const LocalBasis b = random_basis(1, rng);
        const auto [theta, phi] = bloch_to_angles(b.axes[0]);
        const Eigen::Matrix2cd u = basis_unitary_single(theta, phi);
        CHECK((u * u.adjoint() - Eigen::Matrix2cd::Identity()).norm() < 1e-10);
    }
}

TEST_CASE("bloch_to_angles: axis cases and round trip") {
    auto [t1, p1] = bloch_to_angles({0, 0, 1});
    CHECK(t1 == doctest::Approx(0.0));
    CHECK(p1 == doctest::Approx(0.0));
    auto [t2, p2] = bloch_to_angles({1, 0, 0});
    CHECK(t2 == doctest::Approx(M_PI / 2));
    CHECK(p2 == doctest::Approx(0.0));
    auto [t3, p3] = bloch_to_angles({0, 1, 0});
    CHECK(t3 == doctest::Approx(M_PI / 2));
    CHECK(p3 == doctest::Approx(M_PI / 2));

    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Vector3d r = random_basis(1, rng).axes[0];
        const auto [theta, phi] = bloch_to_angles(r);
        const Eigen::Vector3d back(std::sin(theta) * std::cos(phi),
                                   std::sin(theta) * std::sin(phi), std::cos(theta));
        CHECK((back - r).norm() < 1e-9);
    }

    CHECK_THROWS_AS(bloch_to_angles({1, 1, 1}), ValidationError);
}

TEST_CASE("outcome_distribution: closed-form cases") {
    const PureState zero2 = make_state({1, 0, 0, 0});
    const auto d1 = outcome_distribution(zero2, axes({{0, 0, 1}, {0, 0, 1}}));
    CHECK(d1.probs[0] == doctest::Approx(1.0));
    CHECK(d1.probs.tail(3).cwiseAbs().maxCoeff() < 1e-12);

    const PureState bell = make_state({1, 0, 0, 1});
    const auto d2 = outcome_distribution(bell, axes({{1, 0, 0}, {1, 0, 0}}));
    CHECK(d2.probs[0] == doctest::Approx(0.5));
    CHECK(d2.probs[3] == doctest::Approx(0.5));
    CHECK(d2.probs[1] < 1e-12);
    CHECK(d2.probs[2] < 1e-12);

    const PureState plus = make_state({1, 1});
    const auto d3 = outcome_distribution(plus, axes({{0, 0, 1}}));
    CHECK(d3.probs[0] == doctest::Approx(0.5));
    CHECK(d3.probs[1] == doctest::Approx(0.5));
}

TEST_CASE("outcome_distribution: matches dense rho rotation oracle for n <= 4") {
    Rng rng(3);
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            PureState state;
            state.n_qubits = n;
            state.amplitudes = Eigen::VectorXcd(Eigen::Index{1} << n);
            for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i)
                state.amplitudes[i] = {rng.normal(), rng.normal()};
            state.amplitudes.normalize();
            const LocalBasis basis = random_basis(n, rng);
            const auto dist = outcome_distribution(state, basis);
            const auto dense = oracles::dense_outcome_distribution(state, basis);
            CHECK((dist.probs - dense).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("outcome_distribution: normalized and nonnegative") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + int(rng.integer(5));
        PureState state;
        state.n_qubits = n;
        state.amplitudes = Eigen::VectorXcd(Eigen::Index{1} << n);
        for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i)
            state.amplitudes[i] = {rng.normal(), rng.normal()};
        state.amplitudes.normalize();
        const auto dist = outcome_distribution(state, random_basis(n, rng));
        CHECK(dist.probs.minCoeff() >= 0.0);
        CHECK(std::abs(dist.probs.sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("outcome_distribution: antipodal axis flips the outcome bit") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + int(rng.integer(2));
        PureState state;
        state.n_qubits = n;
        state.amplitudes = Eigen::VectorXcd(Eigen::Index{1} << n);
        for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i)
            state.amplitudes[i] = {rng.normal(), rng.normal()};
        state.amplitudes.normalize();
        LocalBasis basis = random_basis(n, rng);
        const int flipped_qubit = int(rng.integer(n));
        LocalBasis anti = basis;
        anti.axes[flipped_qubit] = -anti.axes[flipped_qubit];

        const auto p = outcome_distribution(state, basis);
        const auto q = outcome_distribution(state, anti);
        const std::uint64_t mask = std::uint64_t{1} << (n - 1 - flipped_qubit);
        for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
            CHECK(std::abs(p.probs[i] - q.probs[Eigen::Index(std::uint64_t(i) ^ mask)]) <
                  1e-10);
        }
    }
}

TEST_CASE("serial and parallel kernels agree") {
    Rng rng(23);
    const int n = 10;
    Eigen::VectorXcd amps(1 << n);
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps[i] = {rng.normal(), rng.normal()};
    amps.normalize();
    const LocalBasis basis = random_basis(n, rng);

    Eigen::VectorXcd a = amps, b = amps;
    kernels::apply_local_rotation(a, basis);
    kernels::serial::apply_local_rotation(b, basis);
    CHECK((a - b).norm() == 0.0);

    const TfimParams params{n, 1.0, 0.8, Boundary::periodic};
    Eigen::VectorXd in = Eigen::VectorXd::Random(1 << n), out1(1 << n), out2(1 << n);
    kernels::tfim_apply(params, 0.8, in, out1);
    kernels::serial::tfim_apply(params, 0.8, in, out2);
    CHECK((out1 - out2).norm() == 0.0);
}

TEST_CASE("sample_outcomes: deterministic counts and binomial concentration") {
    OutcomeDistribution point;
    point.probs = Eigen::VectorXd::Zero(2);
    point.probs[0] = 1.0;
    const LocalBasis b1 = axes({{0, 0, 1}});
    const auto rec = sample_outcomes(point, b1, 100, std::uint64_t{5});
    CHECK(rec.counts.at("0") == 100);
    CHECK(rec.counts.size() == 1);

    OutcomeDistribution fair;
    fair.probs = Eigen::VectorXd::Constant(2, 0.5);
    const double sigma = std::sqrt(8192 * 0.25);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = sample_outcomes(fair, b1, 8192, seed);
        const double zeros = r.counts.count("0") ? double(r.counts.at("0")) : 0.0;
        CHECK(std::abs(zeros - 4096.0) < 5.0 * sigma);
    }

    const auto first = sample_outcomes(fair, b1, 1000, std::uint64_t{77});
    const auto second = sample_outcomes(fair, b1, 1000, std::uint64_t{77});
    CHECK(first.counts == second.counts);

    CHECK_THROWS_AS(sample_outcomes(fair, b1, 0, std::uint64_t{1}), ValidationError);
}

TEST_CASE("random_basis: hemisphere statistics") {
    Rng rng(31);
    double sum_x = 0, sum_y = 0, sum_z = 0;
    const int n_samples = 100000;
    for (int i = 0; i < n_samples; ++i) {
        const LocalBasis b = random_basis(1, rng);
        const auto& r = b.axes[0];
        CHECK(std::abs(r.norm() - 1.0) < 1e-12);
        CHECK(r.z() >= 0.0);
        sum_x += r.x();
        sum_y += r.y();
        sum_z += r.z();
    }
    CHECK(sum_z / n_samples > 0.49);
    CHECK(sum_z / n_samples < 0.51);
    CHECK(std::abs(sum_x / n_samples) < 0.01);
    CHECK(std::abs(sum_y / n_samples) < 0.01);
}

TEST_CASE("bitstring helpers and empirical distribution") {
    CHECK(index_to_bitstring(5, 4) == "0101");
    CHECK(bitstring_to_index("0101") == 5);

    MeasurementRecord record;
    record.basis = axes({{0, 0, 1}, {0, 0, 1}});
    record.shots = 10;
    record.counts["00"] = 6;
    record.counts["11"] = 4;
    const auto dist = empirical_distribution(record);
    CHECK(dist.probs[0] == doctest::Approx(0.6));
    CHECK(dist.probs[3] == doctest::Approx(0.4));
}

TEST_CASE("validation errors") {
    PureState bad;
    bad.n_qubits = 2;
    bad.amplitudes = Eigen::VectorXcd::Ones(4);
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    const PureState ok = make_state({1, 0, 0, 0});
    CHECK_THROWS_AS(outcome_distribution(ok, axes({{0, 0, 1}})), ValidationError);

    TfimParams small{1, 1.0, 1.0, Boundary::open};
    CHECK_THROWS_AS(tfim_ground_state(small), ValidationError);
}
