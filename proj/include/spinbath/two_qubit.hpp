// two_qubit.hpp: two central spins sharing one bath, and the Wootters concurrence
//
// Basis of the pair: index 2 a + b for |a_1 b_2>, qubit 1 most significant,
// |0> spin up. The global phases e^{-i eta_n t} e^{-i eps_n t/2} cancel in the
// reduced state and are dropped on both the product and the interacting path.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "spinbath/configspace.hpp"
#include "spinbath/model.hpp"
#include "spinbath/numerics.hpp"
#include "spinbath/single_qubit.hpp"

namespace spinbath {

struct TwoQubitParams {
    double eps1{0.0};
    double eps2{0.0};
    double delta1{0.0};
    double delta2{0.0};
    double lambda{0.0};  // sigma_z1 sigma_z2 coupling
};

struct TwoQubitConfigQuantities {
    double zeta1{0.0};
    double zeta2{0.0};
    double omega1{0.0};
    double omega2{0.0};
};

inline TwoQubitConfigQuantities two_qubit_quantities(const TwoQubitParams& p, const BathLevel& lvl) {
    TwoQubitConfigQuantities q;
    q.zeta1 = p.eps1 + lvl.G;
    q.zeta2 = p.eps2 + lvl.G;
    q.omega1 = half_norm(q.zeta1, p.delta1);
    q.omega2 = half_norm(q.zeta2, p.delta2);
    return q;
}

struct TwoQubitPureState {
    std::array<complex, 4> amp{1.0, 0.0, 0.0, 0.0};

    static TwoQubitPureState from_amplitudes(std::array<complex, 4> a) {
        TwoQubitPureState s{a};
        s.validate();
        return s;
    }
    // (|0_1 0_2> + |1_1 1_2>)/sqrt 2
    static TwoQubitPureState bell() {
        const double r = std::numbers::sqrt2 / 2.0;
        return {{r, 0.0, 0.0, r}};
    }
    static TwoQubitPureState product00() { return {{1.0, 0.0, 0.0, 0.0}}; }

    void validate() const {
        double n2 = 0.0;
        for (const auto& a : amp) n2 += std::norm(a);
        if (!(std::abs(n2 - 1.0) <= 1e-12)) throw ParameterError("two-qubit state is not normalized");
    }

    Mat4 projector() const {
        Mat4 m;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = amp[i] * std::conj(amp[j]);
        return m;
    }
};

using DensityMatrix4 = Mat4;

// (A (x) B) v for 2x2 factors on the pair basis.
inline std::array<complex, 4> apply_product(const Mat2& a, const Mat2& b, const std::array<complex, 4>& v) {
    std::array<complex, 4> out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            complex s{};
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) s += a(i, k) * b(j, l) * v[2 * k + l];
            out[2 * i + j] = s;
        }
    return out;
}

// zeta1/2 s_z1 + delta1/2 s_x1 + zeta2/2 s_z2 + delta2/2 s_x2 + lambda s_z1 s_z2
inline Mat4 effective_hamiltonian(const TwoQubitParams& p, const TwoQubitConfigQuantities& q) {
    Mat4 h;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double s1 = a == 0 ? 1.0 : -1.0;
            const double s2 = b == 0 ? 1.0 : -1.0;
            const int i = 2 * a + b;
            h(i, i) = 0.5 * q.zeta1 * s1 + 0.5 * q.zeta2 * s2 + p.lambda * s1 * s2;
            h(i, 2 * (1 - a) + b) = 0.5 * p.delta1;
            h(i, 2 * a + (1 - b)) = 0.5 * p.delta2;
        }
    return h;
}

enum class PairPath { product, interacting };

class TwoQubitDynamics {
public:
    TwoQubitDynamics(const TwoQubitParams& params, const BathParams& bath, const Thermal& th,
                     const ReductionPlan& plan, const TwoQubitPureState& psi, PairPath path,
                     std::optional<WeightCorruption> corruption = std::nullopt)
        : params_(params), space_(bath, plan), psi_(psi), path_(path) {
        th.validate();
        psi_.validate();
        if (path_ == PairPath::product && params_.lambda != 0.0)
            throw ParameterError("product propagation requires lambda == 0; use the interacting path");
        items_.resize(space_.size());
        for (std::size_t i = 0; i < items_.size(); ++i) {
            const BathLevel lvl = space_.level(i);
            Item& it = items_[i];
            it.q = two_qubit_quantities(params_, lvl);
            it.log_c = log_bath_weight(lvl, th);
            if (path_ == PairPath::product) {
                it.log_ca = it.log_c + log_product_factor(it.q, th.beta);
            } else {
                try {
                    it.eig = hermitian_eig(effective_hamiltonian(params_, it.q));
                } catch (const NumericError& e) {
                    throw NumericError("eigendecomposition failed at " + space_.describe(i) + ": " + e.what());
                }
                for (int k = 0; k < 4; ++k) {
                    complex s{};
                    for (int j = 0; j < 4; ++j) s += std::conj(it.eig.vectors(j, k)) * psi_.amp[j];
                    it.overlap[k] = s;
                }
                it.log_ca = it.log_c + log_spectral_factor(it, th.beta);
            }
        }
        if (corruption && corruption->item < items_.size()) {
            items_[corruption->item].log_c += corruption->log_offset;
            items_[corruption->item].log_ca += corruption->log_offset;
        }
    }

    const ConfigSpace& space() const noexcept { return space_; }

    DensityMatrix4 density(double t, bool correlated, unsigned workers = 0) const {
        if (!std::isfinite(t)) throw ParameterError("time must be finite");
        const auto sum = reduce_log_weighted<17>(
            space_,
            [&](std::size_t i) {
                const Item& it = items_[i];
                const auto phi = evolved(it, t);
                WeightedTerm<17> w;
                w.log_weight = correlated ? it.log_ca : it.log_c;
                w.values[0] = 1.0;
                for (int k = 0; k < 4; ++k) w.values[1 + k] = std::norm(phi[k]);
                int slot = 5;
                for (int r = 0; r < 4; ++r)
                    for (int c = r + 1; c < 4; ++c) {
                        const complex v = phi[r] * std::conj(phi[c]);
                        w.values[slot++] = v.real();
                        w.values[slot++] = v.imag();
                    }
                return w;
            },
            workers);
        const double z = sum.sums[0];
        if (!(z > 0.0)) throw NumericError("two-qubit normalizer is not positive");
        DensityMatrix4 rho;
        for (int k = 0; k < 4; ++k) rho(k, k) = sum.sums[1 + k] / z;
        int slot = 5;
        for (int r = 0; r < 4; ++r)
            for (int c = r + 1; c < 4; ++c) {
                const complex v{sum.sums[slot] / z, sum.sums[slot + 1] / z};
                slot += 2;
                rho(r, c) = v;
                rho(c, r) = std::conj(v);
            }
        return rho;
    }

    std::vector<DensityMatrix4> densities(std::span<const double> times, bool correlated) const {
        SingleQubitDynamics::check_times(times);
        std::vector<DensityMatrix4> out(times.size());
        parallel_for(times.size(), resolve_workers(space_.plan().worker_hint),
                     [&](std::size_t k) { out[k] = density(times[k], correlated, 1); });
        return out;
    }

private:
    struct Item {
        TwoQubitConfigQuantities q;
        double log_c{0.0};
        double log_ca{0.0};
        EigenSystem<Mat4> eig;              // interacting path only
        std::array<complex, 4> overlap{};   // V^dagger psi
    };

    // log <psi| A^(1) A^(2) |psi>, A^(i) = exp(-beta H_eff^(i))
    double log_product_factor(const TwoQubitConfigQuantities& q, double beta) const {
        if (beta == 0.0) return 0.0;
        const auto f1 = thermal_factor(q.zeta1, params_.delta1, beta);
        const auto f2 = thermal_factor(q.zeta2, params_.delta2, beta);
        const auto v = apply_product(f1.factor, f2.factor, psi_.amp);
        complex e{};
        for (int k = 0; k < 4; ++k) e += std::conj(psi_.amp[k]) * v[k];
        const double floor = (f1.x < 1e-8 || f2.x < 1e-8) ? 0.0 : std::exp(-2.0 * (f1.x + f2.x));
        return f1.log_scale + f2.log_scale + std::log(std::max(e.real(), floor));
    }

    // log sum_k e^{-beta lambda_k} |<v_k|psi>|^2 as a log-sum-exp
    static double log_spectral_factor(const Item& it, double beta) {
        if (beta == 0.0) return 0.0;
        std::array<double, 4> terms;
        for (int k = 0; k < 4; ++k) terms[k] = std::log(std::norm(it.overlap[k])) - beta * it.eig.values[k];
        const double hi = *std::max_element(terms.begin(), terms.end());
        double s = 0.0;
        for (double v : terms) s += std::exp(v - hi);
        return hi + std::log(s);
    }

    std::array<complex, 4> evolved(const Item& it, double t) const {
        if (path_ == PairPath::product) {
            return apply_product(rotation_unitary(it.q.zeta1, params_.delta1, t),
                                 rotation_unitary(it.q.zeta2, params_.delta2, t), psi_.amp);
        }
        std::array<complex, 4> phased;
        for (int k = 0; k < 4; ++k) phased[k] = std::polar(1.0, -it.eig.values[k] * t) * it.overlap[k];
        std::array<complex, 4> out{};
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) out[j] += it.eig.vectors(j, k) * phased[k];
        return out;
    }

    TwoQubitParams params_;
    ConfigSpace space_;
    TwoQubitPureState psi_;
    PairPath path_;
    std::vector<Item> items_;
};

inline DensityMatrix4 propagate_product(const TwoQubitParams& params, const BathParams& bath, const Thermal& th,
                                        const ReductionPlan& plan, const TwoQubitPureState& psi, double t,
                                        bool correlated) {
    return TwoQubitDynamics(params, bath, th, plan, psi, PairPath::product).density(t, correlated);
}

inline DensityMatrix4 propagate_interacting(const TwoQubitParams& params, const BathParams& bath, const Thermal& th,
                                            const ReductionPlan& plan, const TwoQubitPureState& psi, double t,
                                            bool correlated) {
    return TwoQubitDynamics(params, bath, th, plan, psi, PairPath::interacting).density(t, correlated);
}

// ------------------------------ concurrence ------------------------------------

// C = max(0, s1 - s2 - s3 - s4), s_i descending square roots of the eigenvalues
// of rho (s_y (x) s_y) rho* (s_y (x) s_y).
//
// The s_i are obtained as singular values of T = W^T (s_y (x) s_y) W with
// W = V sqrt(P) from rho = V P V^dagger, read off the Hermitian dilation
// [[0, T], [T^dagger, 0]]. This keeps absolute accuracy near zero, where taking
// square roots of eigenvalues of M would amplify rounding to ~1e-8.
inline double concurrence(const DensityMatrix4& rho) {
    constexpr double tol = 1e-8;
    if (hermiticity_defect(rho) > tol) throw NumericError("concurrence: density matrix is not Hermitian");
    const auto es = hermitian_eig(rho, tol);
    if (es.values.front() < -tol) throw NumericError("concurrence: density matrix has a negative eigenvalue");

    Mat4 w;
    for (int k = 0; k < 4; ++k) {
        const double root = std::sqrt(std::max(es.values[k], 0.0));
        for (int r = 0; r < 4; ++r) w(r, k) = es.vectors(r, k) * root;
    }
    // s_y (x) s_y: (0,3) = (3,0) = -1, (1,2) = (2,1) = +1
    constexpr int flip[4] = {3, 2, 1, 0};
    constexpr double sign[4] = {-1.0, 1.0, 1.0, -1.0};
    FixedMatrix<8> dilation;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            complex s{};
            for (int a = 0; a < 4; ++a) s += w(a, i) * sign[a] * w(flip[a], j);
            dilation(i, 4 + j) = s;
            dilation(4 + j, i) = std::conj(s);
        }
    const auto sv = hermitian_eig(dilation);
    // eigenvalues are +-s_i; the top four, descending
    const double s1 = sv.values[7], s2 = sv.values[6], s3 = sv.values[5], s4 = sv.values[4];
    return std::max(0.0, s1 - std::max(s2, 0.0) - std::max(s3, 0.0) - std::max(s4, 0.0));
}

inline std::vector<double> concurrence_trajectory(const TwoQubitParams& params, const BathParams& bath,
                                                  const Thermal& th, const ReductionPlan& plan,
                                                  const TwoQubitPureState& psi, std::span<const double> times,
                                                  bool correlated) {
    const PairPath path = params.lambda == 0.0 ? PairPath::product : PairPath::interacting;
    const auto rhos = TwoQubitDynamics(params, bath, th, plan, psi, path).densities(times, correlated);
    std::vector<double> out(rhos.size());
    for (std::size_t k = 0; k < rhos.size(); ++k) out[k] = concurrence(rhos[k]);
    return out;
}

}  // namespace spinbath
