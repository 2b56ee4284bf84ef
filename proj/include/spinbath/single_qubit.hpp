// single_qubit.hpp: exact reduced dynamics of one central spin
//
// For every bath configuration n the central spin sees H_eff,n =
// zeta_n/2 sigma_z + delta/2 sigma_x, so its Bloch vector is rotated about the
// axis (delta, 0, zeta_n)/(2 Omega_n) by the angle 2 Omega_n t. The reduced
// Bloch map is the weighted average of those rotations with weights c_n
// (uncorrelated start) or c_n A_n (correlated start).

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "spinbath/configspace.hpp"
#include "spinbath/model.hpp"
#include "spinbath/numerics.hpp"

namespace spinbath {

struct BlochVector {
    double x{0.0};
    double y{0.0};
    double z{0.0};

    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    static BlochVector of(const PureState& psi) {
        const complex coh = std::conj(psi.up) * psi.down;
        return {2.0 * coh.real(), 2.0 * coh.imag(), std::norm(psi.up) - std::norm(psi.down)};
    }

    // (1 + p.sigma) / 2
    Mat2 density_matrix() const {
        return Mat2{0.5 * (1.0 + z), complex{0.5 * x, -0.5 * y}, complex{0.5 * x, 0.5 * y}, 0.5 * (1.0 - z)};
    }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

// p(t) = s p(0) / normalizer. s and normalizer share the factor exp(log_scale),
// which is left out of both so that large-beta weights stay representable.
struct BlochPropagator {
    Mat3 s{};
    double normalizer{1.0};
    double log_scale{0.0};

    double log_normalizer() const { return std::log(normalizer) + log_scale; }

    Mat3 normalized() const {
        Mat3 out{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out[i][j] = s[i][j] / normalizer;
        return out;
    }

    BlochVector apply(const BlochVector& p0) const {
        const Mat3 m = normalized();
        return {m[0][0] * p0.x + m[0][1] * p0.y + m[0][2] * p0.z, m[1][0] * p0.x + m[1][1] * p0.y + m[1][2] * p0.z,
                m[2][0] * p0.x + m[2][1] * p0.y + m[2][2] * p0.z};
    }
};

// U_n(t) = e^{-i eta_n t} e^{-i eps_n t/2} u; the two phase angles are kept
// separately and never enter reduced states.
struct ConditionalUnitary {
    Mat2 u;
    double eta_phase{0.0};  // -eta_n t
    double eps_phase{0.0};  // -eps_n t / 2

    Mat2 with_phases() const { return std::polar(1.0, eta_phase + eps_phase) * u; }
};

// exp(-i t (zeta/2 sigma_z + delta/2 sigma_x))
//   = cos(Omega t) - i sin(Omega t)/Omega (zeta/2 sigma_z + delta/2 sigma_x)
inline Mat2 rotation_unitary(double zeta, double delta, double t) {
    const double omega = half_norm(zeta, delta);
    const double wt = omega * t;
    // sin(Omega t)/Omega -> t as Omega -> 0
    const double sinc_t = std::abs(wt) < 1e-8 ? t : std::sin(wt) / omega;
    const double c = std::cos(wt);
    const complex mi{0.0, -1.0};
    const complex hz = mi * sinc_t * (0.5 * zeta);
    const complex hx = mi * sinc_t * (0.5 * delta);
    return Mat2{c + hz, hx, hx, c - hz};
}

inline ConditionalUnitary conditional_unitary(const SystemParams& sys, const ConfigQuantities& q, double t) {
    ConditionalUnitary cu;
    cu.u = rotation_unitary(q.zeta, sys.delta, t);
    cu.eta_phase = -q.eta * t;
    cu.eps_phase = -0.5 * q.eps_n * t;
    return cu;
}

// Precomputes per-configuration rotation axes and weights once; propagators at
// individual times are then single reductions.
class SingleQubitDynamics {
public:
    SingleQubitDynamics(const SystemParams& sys, const BathParams& bath, const Thermal& th, const ReductionPlan& plan,
                        std::optional<PureState> psi = std::nullopt,
                        std::optional<WeightCorruption> corruption = std::nullopt)
        : space_(bath, plan), psi_(psi) {
        th.validate();
        if (psi_) psi_->validate();
        items_.resize(space_.size());
        for (std::size_t i = 0; i < items_.size(); ++i) {
            const ConfigQuantities q = config_quantities(sys, space_.level(i), th);
            Item& it = items_[i];
            it.omega = q.omega;
            if (q.omega > 0.0) {
                it.nx = sys.delta / (2.0 * q.omega);
                it.nz = q.zeta / (2.0 * q.omega);
            }
            it.log_c = q.log_c;
            it.log_ca = psi_ ? q.log_c + log_correlation_factor(sys, th, q, *psi_) : q.log_c;
        }
        if (corruption && corruption->item < items_.size()) {
            items_[corruption->item].log_c += corruption->log_offset;
            items_[corruption->item].log_ca += corruption->log_offset;
        }
    }

    const ConfigSpace& space() const noexcept { return space_; }

    BlochPropagator propagator(double t, bool correlated, unsigned workers = 0) const {
        if (correlated && !psi_) throw ParameterError("correlated propagator needs the prepared state");
        if (!std::isfinite(t)) throw ParameterError("time must be finite");
        const auto sum = reduce_log_weighted<10>(
            space_,
            [&](std::size_t i) {
                const Item& it = items_[i];
                const double theta = 2.0 * it.omega * t;
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const double sh = std::sin(it.omega * t);
                const double v = 2.0 * sh * sh;  // 1 - cos(theta)
                WeightedTerm<10> w;
                w.log_weight = correlated ? it.log_ca : it.log_c;
                w.values = {1.0,
                            c + v * it.nx * it.nx, -s * it.nz, v * it.nx * it.nz,
                            s * it.nz, c, -s * it.nx,
                            v * it.nx * it.nz, s * it.nx, c + v * it.nz * it.nz};
                return w;
            },
            workers);
        BlochPropagator p;
        p.normalizer = sum.sums[0];
        p.log_scale = sum.log_scale;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) p.s[r][c] = sum.sums[1 + 3 * r + c];
        if (!(p.normalizer > 0.0)) throw NumericError("Bloch propagator normalizer is not positive");
        return p;
    }

    // Bloch vectors at each time; time points are spread over the plan's workers.
    std::vector<BlochVector> trajectory(std::span<const double> times, bool correlated) const {
        if (!psi_) throw ParameterError("trajectory needs the prepared state");
        check_times(times);
        const BlochVector p0 = BlochVector::of(*psi_);
        std::vector<BlochVector> out(times.size());
        parallel_for(times.size(), resolve_workers(space_.plan().worker_hint),
                     [&](std::size_t k) { out[k] = propagator(times[k], correlated, 1).apply(p0); });
        return out;
    }

    static void check_times(std::span<const double> times) {
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (!std::isfinite(times[k])) throw ParameterError("times must be finite");
            if (k > 0 && times[k] < times[k - 1]) throw ParameterError("times must be ascending");
        }
    }

private:
    struct Item {
        double omega{0.0};
        double nx{0.0};
        double nz{0.0};
        double log_c{0.0};
        double log_ca{0.0};
    };

    ConfigSpace space_;
    std::optional<PureState> psi_;
    std::vector<Item> items_;
};

inline BlochPropagator propagator_uncorrelated(const SystemParams& sys, const BathParams& bath, const Thermal& th,
                                               const ReductionPlan& plan, double t) {
    return SingleQubitDynamics(sys, bath, th, plan).propagator(t, false);
}

inline BlochPropagator propagator_correlated(const SystemParams& sys, const BathParams& bath, const Thermal& th,
                                             const ReductionPlan& plan, const PureState& psi, double t) {
    return SingleQubitDynamics(sys, bath, th, plan, psi).propagator(t, true);
}

inline std::vector<BlochVector> bloch_trajectory(const SystemParams& sys, const BathParams& bath, const Thermal& th,
                                                 const ReductionPlan& plan, const PureState& psi,
                                                 std::span<const double> times, bool correlated) {
    return SingleQubitDynamics(sys, bath, th, plan, psi).trajectory(times, correlated);
}

}  // namespace spinbath
