// oracle.hpp: brute-force ground truth on the full system (x) bath Hilbert space
//
// Tensor ordering: the system qubits are the most significant factors (qubit 1
// before qubit 2), followed by bath site 1, site 2, ..., site N. A full basis
// index is therefore (system_index << N) | bath_index with bath site i stored
// at bit N - i. Nothing here uses the configuration structure of the model;
// every operator is assembled from Kronecker products and exponentiated densely.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/model.hpp"
#include "spinbath/numerics.hpp"
#include "spinbath/two_qubit.hpp"

namespace spinbath::oracle {

inline constexpr int kMaxQubits = 13;

// Kronecker product of single-site operators, first factor most significant.
inline ComplexMatrix kron_chain(const std::vector<Mat2>& factors) {
    ComplexMatrix out = ComplexMatrix::identity(1);
    for (const auto& f : factors) out = kron(out, f);
    return out;
}

// op_a on position a and op_b on position b (identity elsewhere) among `total` qubits.
inline ComplexMatrix embed(int total, int a, const Mat2& op_a, int b = -1, const Mat2& op_b = Mat2::identity()) {
    std::vector<Mat2> f(static_cast<std::size_t>(total), Mat2::identity());
    f[static_cast<std::size_t>(a)] = op_a;
    if (b >= 0) f[static_cast<std::size_t>(b)] = b == a ? op_a * op_b : op_b;
    return kron_chain(f);
}

inline void add_scaled(ComplexMatrix& acc, double s, const ComplexMatrix& m) {
    auto a = acc.data();
    auto d = m.data();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * d[i];
}

struct FullHamiltonian {
    ComplexMatrix matrix;  // 2^(q+N)
    ComplexMatrix bath;    // H_B alone, 2^N
    int system_qubits{1};
    int n_bath{1};

    std::size_t system_dim() const { return std::size_t{1} << system_qubits; }
    std::size_t bath_dim() const { return std::size_t{1} << n_bath; }
};

namespace detail {

inline void check_capacity(int q, const BathParams& bath) {
    bath.validate();
    if (q + bath.n_spins > kMaxQubits)
        throw CapacityError("oracle supports at most " + std::to_string(kMaxQubits) + " qubits in total; got " +
                            std::to_string(q + bath.n_spins));
}

// H_B on `total` qubits with the bath starting at position `offset`.
inline ComplexMatrix bath_hamiltonian(const BathParams& bath, int total, int offset) {
    const int N = bath.n_spins;
    ComplexMatrix h(std::size_t{1} << total);
    for (int i = 0; i < N; ++i)
        add_scaled(h, 0.5 * bath.eps[static_cast<std::size_t>(i)], embed(total, offset + i, pauli::z()));
    for (std::size_t b = 0; b < bath.bond_count(); ++b) {
        const int i = static_cast<int>(b);
        const int j = (i + 1) % N;
        add_scaled(h, bath.chi[b], embed(total, offset + i, pauli::z(), offset + j, pauli::z()));
    }
    return h;
}

// (1/2) sigma_z(system qubit `s`) (x) sum_i g_i sigma_z^(i)
inline ComplexMatrix coupling(const BathParams& bath, int total, int q, int s) {
    ComplexMatrix h(std::size_t{1} << total);
    for (int i = 0; i < bath.n_spins; ++i)
        add_scaled(h, 0.5 * bath.g[static_cast<std::size_t>(i)], embed(total, s, pauli::z(), q + i, pauli::z()));
    return h;
}

}  // namespace detail

inline FullHamiltonian build_hamiltonian(const SystemParams& sys, const BathParams& bath) {
    detail::check_capacity(1, bath);
    const int total = 1 + bath.n_spins;
    FullHamiltonian h;
    h.system_qubits = 1;
    h.n_bath = bath.n_spins;
    h.matrix = detail::bath_hamiltonian(bath, total, 1);
    add_scaled(h.matrix, 0.5 * sys.epsilon, embed(total, 0, pauli::z()));
    add_scaled(h.matrix, 0.5 * sys.delta, embed(total, 0, pauli::x()));
    add_scaled(h.matrix, 1.0, detail::coupling(bath, total, 1, 0));
    h.bath = detail::bath_hamiltonian(bath, bath.n_spins, 0);
    return h;
}

inline FullHamiltonian build_hamiltonian(const TwoQubitParams& sys, const BathParams& bath) {
    detail::check_capacity(2, bath);
    const int total = 2 + bath.n_spins;
    FullHamiltonian h;
    h.system_qubits = 2;
    h.n_bath = bath.n_spins;
    h.matrix = detail::bath_hamiltonian(bath, total, 2);
    add_scaled(h.matrix, 0.5 * sys.eps1, embed(total, 0, pauli::z()));
    add_scaled(h.matrix, 0.5 * sys.delta1, embed(total, 0, pauli::x()));
    add_scaled(h.matrix, 0.5 * sys.eps2, embed(total, 1, pauli::z()));
    add_scaled(h.matrix, 0.5 * sys.delta2, embed(total, 1, pauli::x()));
    add_scaled(h.matrix, sys.lambda, embed(total, 0, pauli::z(), 1, pauli::z()));
    add_scaled(h.matrix, 1.0, detail::coupling(bath, total, 2, 0));
    add_scaled(h.matrix, 1.0, detail::coupling(bath, total, 2, 1));
    h.bath = detail::bath_hamiltonian(bath, bath.n_spins, 0);
    return h;
}

struct FullState {
    ComplexMatrix rho;
    double log_partition{0.0};  // log Z_B (uncorrelated) or log Z (correlated)
};

// Gibbs factor exp(-beta (m - lambda_min)) and the shift -beta lambda_min.
struct ShiftedGibbs {
    ComplexMatrix factor;
    double log_shift{0.0};
};

inline ShiftedGibbs shifted_gibbs(const ComplexMatrix& m, double beta) {
    const auto es = hermitian_eig(m);
    const double e0 = es.values.front();
    ShiftedGibbs g;
    g.log_shift = -beta * e0;
    g.factor = spectral_apply(es, [&](double e) { return complex{std::exp(-beta * (e - e0)), 0.0}; });
    return g;
}

// Uncorrelated: |psi><psi| (x) e^{-beta H_B}/Z_B.
// Correlated:   |psi><psi| (x) <psi|e^{-beta H}|psi>/Z.
inline FullState initial_state(const FullHamiltonian& h, const Thermal& th, std::span<const complex> psi,
                               bool correlated) {
    th.validate();
    const std::size_t ds = h.system_dim();
    const std::size_t db = h.bath_dim();
    if (psi.size() != ds) throw ParameterError("oracle: state dimension does not match the system");
    double n2 = 0.0;
    for (const auto& a : psi) n2 += std::norm(a);
    if (std::abs(n2 - 1.0) > 1e-12) throw ParameterError("oracle: state is not normalized");

    ComplexMatrix rho_b(db);
    double log_shift = 0.0;
    if (!correlated) {
        auto g = shifted_gibbs(h.bath, th.beta);
        rho_b = std::move(g.factor);
        log_shift = g.log_shift;
    } else {
        const auto g = shifted_gibbs(h.matrix, th.beta);
        log_shift = g.log_shift;
        for (std::size_t i = 0; i < db; ++i)
            for (std::size_t j = 0; j < db; ++j) {
                complex s{};
                for (std::size_t a = 0; a < ds; ++a)
                    for (std::size_t b = 0; b < ds; ++b)
                        s += std::conj(psi[a]) * g.factor(a * db + i, b * db + j) * psi[b];
                rho_b(i, j) = s;
            }
    }
    const double z = trace(rho_b).real();
    if (!(z > 0.0) || !std::isfinite(z)) throw NumericError("oracle: partition function is not positive");
    for (auto& v : rho_b.data()) v /= z;

    FullState out;
    out.log_partition = log_shift + std::log(z);
    out.rho = ComplexMatrix(ds * db);
    for (std::size_t a = 0; a < ds; ++a)
        for (std::size_t b = 0; b < ds; ++b) {
            const complex pab = psi[a] * std::conj(psi[b]);
            for (std::size_t i = 0; i < db; ++i)
                for (std::size_t j = 0; j < db; ++j) out.rho(a * db + i, b * db + j) = pab * rho_b(i, j);
        }
    return out;
}

// Tr_B over the low-order bath factor.
inline ComplexMatrix partial_trace_bath(const ComplexMatrix& rho, std::size_t system_dim) {
    const std::size_t db = rho.dim() / system_dim;
    ComplexMatrix out(system_dim);
    for (std::size_t a = 0; a < system_dim; ++a)
        for (std::size_t b = 0; b < system_dim; ++b) {
            complex s{};
            for (std::size_t i = 0; i < db; ++i) s += rho(a * db + i, b * db + i);
            out(a, b) = s;
        }
    return out;
}

// Evolves one initial state under H for many times, diagonalizing H once.
class Evolver {
public:
    Evolver(const FullHamiltonian& h, const FullState& rho0)
        : system_dim_(h.system_dim()), eig_(hermitian_eig(h.matrix)) {
        rho_eig_ = adjoint(eig_.vectors) * rho0.rho * eig_.vectors;
    }

    // Tr_B[e^{-iHt} rho0 e^{iHt}]
    ComplexMatrix reduce(double t) const {
        const std::size_t d = rho_eig_.dim();
        std::vector<complex> ph(d);
        for (std::size_t k = 0; k < d; ++k) ph[k] = std::polar(1.0, -eig_.values[k] * t);
        ComplexMatrix rt(d);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l) rt(k, l) = ph[k] * rho_eig_(k, l) * std::conj(ph[l]);
        const ComplexMatrix x = eig_.vectors * rt;  // V R(t)
        const std::size_t db = d / system_dim_;
        ComplexMatrix out(system_dim_);
        for (std::size_t a = 0; a < system_dim_; ++a)
            for (std::size_t b = 0; b < system_dim_; ++b) {
                complex s{};
                for (std::size_t i = 0; i < db; ++i)
                    for (std::size_t l = 0; l < d; ++l)
                        s += x(a * db + i, l) * std::conj(eig_.vectors(b * db + i, l));
                out(a, b) = s;
            }
        return out;
    }

private:
    std::size_t system_dim_;
    EigenSystem<ComplexMatrix> eig_;
    ComplexMatrix rho_eig_;
};

inline ComplexMatrix evolve_and_reduce(const FullHamiltonian& h, const FullState& rho0, double t) {
    if (!std::isfinite(t)) throw ParameterError("oracle: time must be finite");
    return Evolver(h, rho0).reduce(t);
}

// Bloch vector Tr[sigma_k rho] of a 2x2 reduced state.
inline std::array<double, 3> bloch_of(const ComplexMatrix& rho) {
    return {2.0 * rho(1, 0).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

}  // namespace spinbath::oracle
