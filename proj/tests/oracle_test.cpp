#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "spinbath/oracle.hpp"
#include "spinbath/single_qubit.hpp"
#include "test_support.hpp"

using namespace spinbath;

namespace {

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

void expect_same_spectrum(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    const auto sa = sorted(a), sb = sorted(b);
    for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_NEAR(sa[i], sb[i], tol) << i;
}

}  // namespace

TEST(BuildHamiltonian, DecoupledSingleSite) {
    BathParams bath = BathParams::uniform(1, 0.6, 0.0, 0.0);
    const auto h = oracle::build_hamiltonian(SystemParams{2.0, 0.0}, bath);
    expect_same_spectrum(hermitian_eig(h.matrix).values, {1.3, 0.7, -0.7, -1.3}, 1e-15);
    // diagonal in the product basis
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            if (i != j) EXPECT_EQ(h.matrix(i, j), complex{});
        }
}

TEST(BuildHamiltonian, Traceless) {
    const auto h = oracle::build_hamiltonian(SystemParams{2.0, 1.0}, BathParams::uniform(2, 1.0, 0.5, 0.3));
    EXPECT_NEAR(std::abs(trace(h.matrix)), 0.0, 1e-15);
    EXPECT_LT(hermiticity_defect(h.matrix), 1e-15);
}

TEST(BuildHamiltonian, SpectrumMatchesConfigurationBlocks) {
    std::mt19937_64 rng(51);
    const SystemParams sys{0.4, 1.1};
    for (auto b : {Boundary::open, Boundary::periodic}) {
        const auto bath = testing_support::random_bath(3, rng, b);
        const auto h = oracle::build_hamiltonian(sys, bath);
        std::vector<double> expected;
        for (std::uint64_t m = 0; m < 8; ++m) {
            const auto q = config_quantities(sys, bath, {1.0}, ConfigIndex{m});
            const double offset = q.eta + 0.5 * q.eps_n;
            expected.push_back(offset - q.omega);
            expected.push_back(offset + q.omega);
        }
        expect_same_spectrum(hermitian_eig(h.matrix).values, expected, 1e-12);
    }
}

TEST(BuildHamiltonian, TwoQubitSpectrumMatchesBlocks) {
    std::mt19937_64 rng(52);
    const TwoQubitParams p{1.0, 2.0, 4.0, 1.0, 3.0};
    const auto bath = testing_support::random_bath(3, rng);
    const auto h = oracle::build_hamiltonian(p, bath);
    std::vector<double> expected;
    for (std::uint64_t m = 0; m < 8; ++m) {
        const auto lvl = bath_level(bath, ConfigIndex{m});
        const auto es = hermitian_eig(effective_hamiltonian(p, two_qubit_quantities(p, lvl)));
        for (double e : es.values) expected.push_back(e + lvl.eta + 0.5 * lvl.eps_n);
    }
    expect_same_spectrum(hermitian_eig(h.matrix).values, expected, 1e-12);
}

TEST(BuildHamiltonian, CapacityLimit) {
    EXPECT_THROW(oracle::build_hamiltonian(SystemParams{1, 1}, BathParams::uniform(13, 1, 1, 1)), CapacityError);
    EXPECT_THROW(oracle::build_hamiltonian(TwoQubitParams{}, BathParams::uniform(12, 1, 1, 1)), CapacityError);
}

TEST(InitialState, InfiniteTemperature) {
    const auto bath = BathParams::uniform(3, 1.0, 0.7, 0.2);
    const auto h = oracle::build_hamiltonian(SystemParams{2.0, 1.0}, bath);
    const auto psi = PureState::from_bloch_angles(0.8, 0.3).amplitudes();
    const auto uc = oracle::initial_state(h, {0.0}, psi, false);
    const auto c = oracle::initial_state(h, {0.0}, psi, true);
    ComplexMatrix expected(16);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t i = 0; i < 8; ++i) expected(a * 8 + i, b * 8 + i) = psi[a] * std::conj(psi[b]) / 8.0;
    EXPECT_LT(max_abs_diff(uc.rho, expected), 1e-15);
    EXPECT_LT(max_abs_diff(c.rho, expected), 1e-14);
}

TEST(InitialState, ValidAtModerateTemperature) {
    std::mt19937_64 rng(53);
    const auto bath = testing_support::random_bath(4, rng);
    const auto h = oracle::build_hamiltonian(SystemParams{1.0, 1.0}, bath);
    const auto psi = PureState::plus_x().amplitudes();
    for (bool correlated : {false, true}) {
        const auto s = oracle::initial_state(h, {2.0}, psi, correlated);
        EXPECT_NEAR(trace(s.rho).real(), 1.0, 1e-12);
        EXPECT_LT(hermiticity_defect(s.rho), 1e-12);
        EXPECT_GE(hermitian_eig(s.rho).values.front(), -1e-10);
    }
}

TEST(InitialState, LargeBetaDoesNotOverflow) {
    const auto bath = BathParams::uniform(4, 1.0, 1.0, 1.0);
    const auto h = oracle::build_hamiltonian(SystemParams{2.0, 1.0}, bath);
    const auto s = oracle::initial_state(h, {200.0}, PureState::plus_x().amplitudes(), true);
    EXPECT_NEAR(trace(s.rho).real(), 1.0, 1e-12);
    EXPECT_TRUE(std::isfinite(s.log_partition));
}

TEST(InitialState, RejectsBadState) {
    const auto h = oracle::build_hamiltonian(SystemParams{2.0, 1.0}, BathParams::uniform(2, 1, 1, 0));
    const std::vector<complex> not_normalized{1.0, 1.0};
    EXPECT_THROW(oracle::initial_state(h, {1.0}, not_normalized, false), ParameterError);
    const std::vector<complex> wrong_size{1.0, 0.0, 0.0, 0.0};
    EXPECT_THROW(oracle::initial_state(h, {1.0}, wrong_size, false), ParameterError);
}

TEST(EvolveAndReduce, ZeroTimeGivesSystemState) {
    std::mt19937_64 rng(54);
    const auto bath = testing_support::random_bath(3, rng);
    const auto h = oracle::build_hamiltonian(SystemParams{1.0, 0.5}, bath);
    const auto psi = PureState::from_bloch_angles(2.1, -1.0);
    for (bool correlated : {false, true}) {
        const auto rho0 = oracle::initial_state(h, {1.0}, psi.amplitudes(), correlated);
        const auto r = oracle::evolve_and_reduce(h, rho0, 0.0);
        EXPECT_LT(max_abs_diff(r, oracle::partial_trace_bath(rho0.rho, 2)), 1e-13);
        EXPECT_LT(max_abs_diff(r, to_dynamic(BlochVector::of(psi).density_matrix())), 1e-13);
    }
}

TEST(EvolveAndReduce, UncoupledSystemEvolvesFreely) {
    std::mt19937_64 rng(55);
    auto bath = testing_support::random_bath(3, rng);
    bath.g.assign(3, 0.0);
    const SystemParams sys{1.3, 0.8};
    const auto h = oracle::build_hamiltonian(sys, bath);
    const auto psi = PureState::from_bloch_angles(1.0, 0.5);
    const auto rho0 = oracle::initial_state(h, {1.5}, psi.amplitudes(), true);
    const Mat2 rs = BlochVector::of(psi).density_matrix();
    for (double t : {0.4, 3.0}) {
        const Mat2 u = rotation_unitary(sys.epsilon, sys.delta, t);
        const Mat2 expected = u * rs * adjoint(u);
        EXPECT_LT(max_abs_diff(oracle::evolve_and_reduce(h, rho0, t), to_dynamic(expected)), 1e-12);
    }
}

TEST(PartialTrace, PreservesTraceAndHermiticity) {
    std::mt19937_64 rng(56);
    const auto a = testing_support::random_hermitian(32, rng);
    const auto r = oracle::partial_trace_bath(a, 4);
    EXPECT_NEAR(std::abs(trace(r) - trace(a)), 0.0, 1e-13);
    EXPECT_LT(hermiticity_defect(r), 1e-13);
}

TEST(Evolver, ReusedDecompositionMatchesFreshEvolution) {
    std::mt19937_64 rng(57);
    const auto bath = testing_support::random_bath(4, rng);
    const auto h = oracle::build_hamiltonian(TwoQubitParams{1, 2, 4, 1, 3}, bath);
    const auto rho0 = oracle::initial_state(h, {1.0}, TwoQubitPureState::bell().amp, false);
    const oracle::Evolver ev(h, rho0);
    const double t = 1.7;
    // direct: U rho U^dagger with U from the dense exponential
    const auto u = herm_exp(h.matrix, complex{0.0, -t});
    const auto direct = oracle::partial_trace_bath(u * rho0.rho * adjoint(u), 4);
    EXPECT_LT(max_abs_diff(ev.reduce(t), direct), 1e-12);
}
