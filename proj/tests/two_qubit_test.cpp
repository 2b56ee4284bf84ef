#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spinbath/oracle.hpp"
#include "spinbath/two_qubit.hpp"
#include "test_support.hpp"

using namespace spinbath;

namespace {

const TwoQubitParams kPair{1.0, 2.0, 4.0, 1.0, 0.0};

Mat4 to_mat4(const ComplexMatrix& m) {
    Mat4 out;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) out(i, j) = m(i, j);
    return out;
}

Mat4 kron4(const Mat2& a, const Mat2& b) { return to_mat4(kron(a, b)); }

// Wootters concurrence through the Hermitian matrix sqrt(rho) rho~ sqrt(rho).
double reference_concurrence(const Mat4& rho) {
    const Mat4 yy = kron4(pauli::y(), pauli::y());
    const Mat4 tilde = yy * conjugate(rho) * yy;
    const auto es = hermitian_eig(rho);
    const Mat4 root = spectral_apply(es, [](double l) { return complex{std::sqrt(std::max(l, 0.0))}; });
    Mat4 r = root * tilde * root;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j) {
            const complex v = 0.5 * (r(i, j) + std::conj(r(j, i)));
            r(i, j) = v;
            r(j, i) = std::conj(v);
        }
    auto lam = hermitian_eig(r).values;
    std::vector<double> s;
    for (double l : lam) s.push_back(std::sqrt(std::max(l, 0.0)));
    std::sort(s.rbegin(), s.rend());
    return std::max(0.0, s[0] - s[1] - s[2] - s[3]);
}

Mat2 random_unitary(std::mt19937_64& rng) {
    const auto h = testing_support::random_hermitian(2, rng, 2.0);
    Mat2 m;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) m(i, j) = h(i, j);
    return herm_exp(m, complex{0.0, -1.0});
}

Mat4 random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat4 a;
    for (auto& v : a.data()) v = complex{n(rng), n(rng)};
    Mat4 rho = a * adjoint(a);
    const complex tr = trace(rho);
    for (auto& v : rho.data()) v /= tr;
    return rho;
}

void expect_valid_density(const Mat4& rho) {
    EXPECT_LT(hermiticity_defect(rho), 1e-12);
    EXPECT_NEAR(trace(rho).real(), 1.0, 1e-12);
    EXPECT_NEAR(trace(rho).imag(), 0.0, 1e-12);
    EXPECT_GE(hermitian_eig(rho).values.front(), -1e-10);
}

}  // namespace

TEST(Concurrence, BellAndProduct) {
    EXPECT_NEAR(concurrence(TwoQubitPureState::bell().projector()), 1.0, 1e-14);
    EXPECT_NEAR(concurrence(TwoQubitPureState::product00().projector()), 0.0, 1e-14);
}

TEST(Concurrence, WernerHalf) {
    for (double p : {0.2, 1.0 / 3.0, 0.5, 0.8}) {
        Mat4 rho = TwoQubitPureState::bell().projector();
        for (auto& v : rho.data()) v *= p;
        for (int i = 0; i < 4; ++i) rho(i, i) += (1.0 - p) / 4.0;
        const double expected = std::max(0.0, (3.0 * p - 1.0) / 2.0);
        EXPECT_NEAR(concurrence(rho), expected, 1e-12) << p;
        EXPECT_NEAR(reference_concurrence(rho), expected, 1e-7) << p;
    }
}

TEST(Concurrence, MatchesHermitianRouteOnRandomStates) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        const Mat4 rho = random_density(rng);
        const double c = concurrence(rho);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0 + 1e-10);
        EXPECT_NEAR(c, reference_concurrence(rho), 1e-7);
    }
}

TEST(Concurrence, PureStateClosedForm) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<complex, 4> a;
        double norm = 0.0;
        for (auto& v : a) {
            v = complex{n(rng), n(rng)};
            norm += std::norm(v);
        }
        for (auto& v : a) v /= std::sqrt(norm);
        // C = 2 |a00 a11 - a01 a10|
        EXPECT_NEAR(concurrence(TwoQubitPureState{a}.projector()), 2.0 * std::abs(a[0] * a[3] - a[1] * a[2]), 1e-12);
    }
}

TEST(Concurrence, LocalUnitaryInvariance) {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat4 rho = random_density(rng);
        const Mat4 u = kron4(random_unitary(rng), random_unitary(rng));
        EXPECT_NEAR(concurrence(rho), concurrence(u * rho * adjoint(u)), 1e-9);
    }
}

TEST(Concurrence, RejectsInvalidMatrices) {
    Mat4 bad = TwoQubitPureState::bell().projector();
    bad(0, 1) = 0.3;
    EXPECT_THROW(concurrence(bad), NumericError);
    Mat4 negative;
    negative(0, 0) = 1.5;
    negative(1, 1) = -0.5;
    EXPECT_THROW(concurrence(negative), NumericError);
}

TEST(ProductPath, InitialStateAndLambdaGuard) {
    const auto bath = BathParams::uniform(5, 1.0, 0.5, 0.1);
    for (bool correlated : {false, true}) {
        const auto rho = propagate_product(kPair, bath, {1.0}, {Backend::collapse}, TwoQubitPureState::bell(), 0.0,
                                           correlated);
        EXPECT_LT(max_abs_diff(rho, TwoQubitPureState::bell().projector()), 1e-15);
    }
    TwoQubitParams coupled = kPair;
    coupled.lambda = 3.0;
    EXPECT_THROW(propagate_product(coupled, bath, {1.0}, {}, TwoQubitPureState::bell(), 1.0, false), ParameterError);
}

TEST(ProductPath, InfiniteTemperatureFlagsAgree) {
    std::mt19937_64 rng(44);
    const auto bath = testing_support::random_bath(6, rng);
    for (double t : {0.7, 4.0}) {
        const auto a = propagate_product(kPair, bath, {0.0}, {Backend::enumerate}, TwoQubitPureState::bell(), t, false);
        const auto b = propagate_product(kPair, bath, {0.0}, {Backend::enumerate}, TwoQubitPureState::bell(), t, true);
        EXPECT_LT(max_abs_diff(a, b), 1e-12);
    }
}

TEST(ProductPath, MatchesOracleAtFiveSpins) {
    std::mt19937_64 rng(45);
    const auto bath = testing_support::random_bath(5, rng);
    const Thermal th{1.0};
    const auto psi = TwoQubitPureState::bell();
    const auto h = oracle::build_hamiltonian(kPair, bath);
    for (bool correlated : {false, true}) {
        const auto rho0 = oracle::initial_state(h, th, psi.amp, correlated);
        for (double t : {0.5, 1.5}) {
            const auto ref = to_mat4(oracle::evolve_and_reduce(h, rho0, t));
            const auto rho = propagate_product(kPair, bath, th, {Backend::enumerate}, psi, t, correlated);
            EXPECT_LT(max_abs_diff(rho, ref), 1e-9);
        }
    }
}

TEST(InteractingPath, AgreesWithProductAtZeroCoupling) {
    std::mt19937_64 rng(46);
    for (int n : {3, 7, 10}) {
        const auto bath = testing_support::random_bath(n, rng);
        for (const auto& psi : {TwoQubitPureState::bell(), TwoQubitPureState::product00()}) {
            for (bool correlated : {false, true}) {
                for (double t : {0.0, 0.9, 6.0}) {
                    const auto a = propagate_product(kPair, bath, {2.0}, {Backend::enumerate}, psi, t, correlated);
                    const auto b = propagate_interacting(kPair, bath, {2.0}, {Backend::enumerate}, psi, t, correlated);
                    EXPECT_LT(max_abs_diff(a, b), 1e-10);
                }
            }
        }
    }
}

TEST(InteractingPath, MatchesOracleWithCoupling) {
    std::mt19937_64 rng(47);
    TwoQubitParams p = kPair;
    p.lambda = 3.0;
    for (int trial = 0; trial < 2; ++trial) {
        const auto bath = testing_support::random_bath(4 + trial, rng);
        const Thermal th{trial == 0 ? 0.5 : 3.0};
        const auto h = oracle::build_hamiltonian(p, bath);
        for (const auto& psi : {TwoQubitPureState::bell(), TwoQubitPureState::product00()}) {
            for (bool correlated : {false, true}) {
                const oracle::Evolver ev(h, oracle::initial_state(h, th, psi.amp, correlated));
                const TwoQubitDynamics dyn(p, bath, th, {Backend::enumerate}, psi, PairPath::interacting);
                for (double t : {0.0, 0.8, 2.5, 9.0}) {
                    const auto ref = to_mat4(ev.reduce(t));
                    const auto rho = dyn.density(t, correlated);
                    EXPECT_LT(max_abs_diff(rho, ref), 1e-9);
                    EXPECT_NEAR(concurrence(rho), concurrence(ref), 1e-9);
                }
            }
        }
    }
}

TEST(InteractingPath, InitialStateIsProjector) {
    TwoQubitParams p = kPair;
    p.lambda = 5.0;
    const auto bath = BathParams::uniform(30, 1.0, 0.5, 0.0);
    for (bool correlated : {false, true}) {
        const auto rho = propagate_interacting(p, bath, {1.0}, {Backend::collapse}, TwoQubitPureState::product00(),
                                               0.0, correlated);
        EXPECT_LT(max_abs_diff(rho, TwoQubitPureState::product00().projector()), 1e-13);
    }
}

TEST(Densities, ValidAcrossRegimes) {
    const auto times = std::vector<double>{0.0, 0.3, 1.1, 2.7, 5.0, 9.9};
    for (double lambda : {0.0, 3.0}) {
        TwoQubitParams p = kPair;
        p.lambda = lambda;
        for (double beta : {0.0, 1.0, 10.0, 40.0}) {
            const auto bath = BathParams::uniform(50, 0.01, 1.0, 0.1);
            for (bool correlated : {false, true}) {
                const TwoQubitDynamics dyn(p, bath, {beta}, {Backend::collapse}, TwoQubitPureState::bell(),
                                           lambda == 0.0 ? PairPath::product : PairPath::interacting);
                for (const auto& rho : dyn.densities(times, correlated)) {
                    expect_valid_density(rho);
                    const double c = concurrence(rho);
                    EXPECT_GE(c, 0.0);
                    EXPECT_LE(c, 1.0 + 1e-10);
                }
            }
        }
    }
}

TEST(ConcurrenceTrajectory, BellStartsAtOne) {
    const auto c = concurrence_trajectory(kPair, BathParams::uniform(50, 1.0, 0.1, 0.0), {1.0}, {Backend::collapse},
                                          TwoQubitPureState::bell(), std::vector<double>{0.0, 1.0}, true);
    EXPECT_NEAR(c[0], 1.0, 1e-12);
    EXPECT_LT(c[1], 1.0);
}
