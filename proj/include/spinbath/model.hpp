// model.hpp: physical parameters and per-configuration scalars of the central spin model
//
// Bit convention for bath configurations: bit i of a ConfigIndex is bath site
// i + 1; a set bit means that site is spin down (|1>, sigma_z = -1), a clear
// bit spin up (|0>, sigma_z = +1).

#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/numerics.hpp"

namespace spinbath {

struct SystemParams {
    double epsilon{0.0};  // level spacing of the central spin
    double delta{0.0};    // tunneling amplitude
};

enum class Boundary { open, periodic };

inline const char* to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

struct BathParams {
    int n_spins{1};
    std::vector<double> eps;  // per-site level spacing
    std::vector<double> g;    // per-site coupling to the central spin(s)
    std::vector<double> chi;  // bond i couples sites i and i+1 (bond N-1 wraps to site 1 when periodic)
    Boundary boundary{Boundary::open};

    static BathParams uniform(int n, double eps_value, double g_value, double chi_value,
                              Boundary b = Boundary::open) {
        BathParams p;
        p.n_spins = n;
        p.boundary = b;
        p.eps.assign(static_cast<std::size_t>(std::max(n, 0)), eps_value);
        p.g.assign(static_cast<std::size_t>(std::max(n, 0)), g_value);
        p.chi.assign(bond_count(n, b), chi_value);
        return p;
    }

    static std::size_t bond_count(int n, Boundary b) {
        if (n <= 0) return 0;
        return b == Boundary::open ? static_cast<std::size_t>(n - 1) : static_cast<std::size_t>(n);
    }
    std::size_t bond_count() const { return bond_count(n_spins, boundary); }

    void validate() const {
        if (n_spins < 1) throw ParameterError("bath.n_spins must be >= 1");
        const auto n = static_cast<std::size_t>(n_spins);
        if (eps.size() != n) throw ParameterError("bath eps_i: expected " + std::to_string(n) + " values");
        if (g.size() != n) throw ParameterError("bath g_i: expected " + std::to_string(n) + " values");
        if (chi.size() != bond_count())
            throw ParameterError("bath chi_i: expected " + std::to_string(bond_count()) + " values for " +
                                 to_string(boundary) + " boundary");
        for (const auto* list : {&eps, &g, &chi})
            for (double v : *list)
                if (!std::isfinite(v)) throw ParameterError("bath parameters must be finite");
    }

    // Name of the first site-dependent list, or empty if every list is uniform (bitwise equal entries).
    std::string first_nonuniform_field() const {
        auto uniform_list = [](const std::vector<double>& v) {
            for (double x : v)
                if (x != v.front()) return false;
            return true;
        };
        if (!uniform_list(eps)) return "eps_i";
        if (!uniform_list(g)) return "g_i";
        if (!uniform_list(chi)) return "chi_i";
        return {};
    }
    bool is_uniform() const { return first_nonuniform_field().empty(); }
};

struct Thermal {
    double beta{0.0};

    void validate() const {
        if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("thermal beta must be finite and >= 0");
    }
};

struct ConfigIndex {
    std::uint64_t bits{0};

    bool down(int site0) const noexcept { return (bits >> site0) & 1U; }
    // (-1)^{n_i} for the zero-based site index
    double sign(int site0) const noexcept { return down(site0) ? -1.0 : 1.0; }
};

// Bath-only eigenvalues of one configuration: B|n> = G|n>, sum eps_i/2 sigma_z|n> = eps_n/2 |n>,
// sum chi_i sigma_z sigma_z |n> = eta|n>.
struct BathLevel {
    double G{0.0};
    double eps_n{0.0};
    double eta{0.0};
};

inline BathLevel bath_level(const BathParams& bath, ConfigIndex n) {
    BathLevel lvl;
    const int N = bath.n_spins;
    for (int i = 0; i < N; ++i) {
        const double s = n.sign(i);
        lvl.G += s * bath.g[static_cast<std::size_t>(i)];
        lvl.eps_n += s * bath.eps[static_cast<std::size_t>(i)];
    }
    const std::size_t bonds = bath.bond_count();
    for (std::size_t b = 0; b < bonds; ++b) {
        const int i = static_cast<int>(b);
        const int j = (i + 1) % N;
        lvl.eta += n.sign(i) * n.sign(j) * bath.chi[b];
    }
    return lvl;
}

// log c_n = -beta (eta_n + eps_n / 2)
inline double log_bath_weight(const BathLevel& lvl, const Thermal& th) {
    return -th.beta * (lvl.eta + 0.5 * lvl.eps_n);
}

struct ConfigQuantities {
    double G{0.0};
    double eps_n{0.0};
    double eta{0.0};
    double zeta{0.0};   // epsilon + G_n
    double omega{0.0};  // sqrt(zeta^2 + delta^2) / 2
    double log_c{0.0};
    double c{1.0};      // exp(log_c); may overflow for extreme beta, use log_c in sums
};

inline double half_norm(double a, double b) { return 0.5 * std::hypot(a, b); }

inline ConfigQuantities config_quantities(const SystemParams& sys, const BathLevel& lvl, const Thermal& th) {
    ConfigQuantities q;
    q.G = lvl.G;
    q.eps_n = lvl.eps_n;
    q.eta = lvl.eta;
    q.zeta = sys.epsilon + lvl.G;
    q.omega = half_norm(q.zeta, sys.delta);
    q.log_c = log_bath_weight(lvl, th);
    q.c = std::exp(q.log_c);
    return q;
}

inline ConfigQuantities config_quantities(const SystemParams& sys, const BathParams& bath, const Thermal& th,
                                          ConfigIndex n) {
    bath.validate();
    if (bath.n_spins < 64 && (n.bits >> bath.n_spins) != 0)
        throw ParameterError("config index has bits beyond bath.n_spins");
    return config_quantities(sys, bath_level(bath, n), th);
}

// ------------------------------ system states ----------------------------------

struct PureState {
    complex up{1.0, 0.0};    // amplitude on |0>
    complex down{0.0, 0.0};  // amplitude on |1>

    static PureState from_amplitudes(complex a, complex b) {
        PureState s{a, b};
        s.validate();
        return s;
    }
    // |psi> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    static PureState from_bloch_angles(double theta, double phi) {
        return {std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi)};
    }
    static PureState plus_x() { return {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0}; }

    void validate() const {
        const double norm2 = std::norm(up) + std::norm(down);
        if (!(std::abs(norm2 - 1.0) <= 1e-12)) throw ParameterError("pure state is not normalized");
    }

    std::array<complex, 2> amplitudes() const { return {up, down}; }
};

// exp(-beta h) = e^{log_scale} * factor for h = zeta/2 sigma_z + delta/2 sigma_x.
//
// With x = beta * Omega and unit axis h/Omega, factor = P_- + e^{-2x} P_+ where P_-+
// project onto the lower and upper eigenvector of h, so the factor stays O(1)
// however large x gets. For x below 1e-8 the series form cosh(x) - beta h is used.
struct ThermalFactor {
    double log_scale{0.0};
    double x{0.0};
    Mat2 factor;

    // <psi|factor|psi>, bounded below by the smallest eigenvalue of the factor
    double expectation(const PureState& psi) const {
        const std::array<complex, 2> v = psi.amplitudes();
        const double val = spinbath::expectation(factor, v, v).real();
        const double floor = x < 1e-8 ? 0.0 : std::exp(-2.0 * x);
        return std::max(val, floor);
    }
};

inline ThermalFactor thermal_factor(double zeta, double delta, double beta) {
    ThermalFactor tf;
    const double omega = half_norm(zeta, delta);
    tf.x = beta * omega;
    if (tf.x < 1e-8) {
        const double ch = std::cosh(tf.x);
        tf.factor = Mat2{ch - 0.5 * beta * zeta, -0.5 * beta * delta, -0.5 * beta * delta, ch + 0.5 * beta * zeta};
        return tf;
    }
    tf.log_scale = tf.x;
    const double e = std::exp(-2.0 * tf.x);
    const double a = 0.5 * (1.0 + e);
    const double b = -0.5 * std::expm1(-2.0 * tf.x);  // (1 - e) / 2
    const double nz = zeta / (2.0 * omega);
    const double nx = delta / (2.0 * omega);
    tf.factor = Mat2{a - b * nz, -b * nx, -b * nx, a + b * nz};
    return tf;
}

// log A_n with A_n = <psi| exp(-beta H_eff,n) |psi>.
inline double log_correlation_factor(const SystemParams& sys, const Thermal& th, const ConfigQuantities& q,
                                     const PureState& psi) {
    if (th.beta == 0.0) return 0.0;
    const auto tf = thermal_factor(q.zeta, sys.delta, th.beta);
    if (tf.x >= 1e-8) {
        // p_- = (1 - r)/2 with r = <psi|h|psi>/Omega; evaluated from r directly so a
        // state aligned with the upper eigenvector gives exactly e^{-2x}.
        const std::array<complex, 2> v = psi.amplitudes();
        const double sz = std::norm(v[0]) - std::norm(v[1]);
        const double sx = 2.0 * (std::conj(v[0]) * v[1]).real();
        const double r = std::clamp((q.zeta * sz + sys.delta * sx) / (2.0 * q.omega), -1.0, 1.0);
        const double p_minus = 0.5 * (1.0 - r);
        const double p_plus = 0.5 * (1.0 + r);
        // log(p_- + p_+ e^{-2x}) without underflow when p_- vanishes
        const double la = p_minus > 0.0 ? std::log(p_minus) : -std::numeric_limits<double>::infinity();
        const double lb = std::log(p_plus) - 2.0 * tf.x;
        const double hi = std::max(la, lb);
        return tf.log_scale + hi + std::log1p(std::exp(std::min(la, lb) - hi));
    }
    return std::log(tf.expectation(psi));
}

// A_n = cosh(beta Omega_n) - sinh(beta Omega_n)/Omega_n <psi|(zeta_n/2 sigma_z + delta/2 sigma_x)|psi>
inline double correlation_factor(const SystemParams& sys, const Thermal& th, const ConfigQuantities& q,
                                 const PureState& psi) {
    psi.validate();
    return std::exp(log_correlation_factor(sys, th, q, psi));
}

}  // namespace spinbath
