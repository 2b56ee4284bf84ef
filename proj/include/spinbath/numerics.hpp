// numerics.hpp: small dense complex linear algebra, deterministic summation, seeded Gaussian draws
//
// Matrices are row-major. FixedMatrix<D> covers the 2x2 and 4x4 system-sized
// objects, ComplexMatrix the 2^k x 2^k oracle objects. Both satisfy the
// SquareComplexMatrix concept so the eigensolver is written once.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spinbath/errors.hpp"

namespace spinbath {

using complex = std::complex<double>;

template <std::size_t D>
class FixedMatrix {
public:
    static constexpr std::size_t static_dim = D;

    FixedMatrix() { a_.fill(complex{0.0, 0.0}); }
    explicit FixedMatrix(std::size_t dim) : FixedMatrix() {
        if (dim != D) throw ParameterError("FixedMatrix: dimension mismatch");
    }
    FixedMatrix(std::initializer_list<complex> values) : FixedMatrix() {
        if (values.size() != D * D) throw ParameterError("FixedMatrix: wrong number of entries");
        std::copy(values.begin(), values.end(), a_.begin());
    }

    static FixedMatrix identity() {
        FixedMatrix m;
        for (std::size_t i = 0; i < D; ++i) m(i, i) = 1.0;
        return m;
    }

    constexpr std::size_t dim() const noexcept { return D; }
    complex& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * D + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * D + c]; }
    std::span<complex> data() noexcept { return a_; }
    std::span<const complex> data() const noexcept { return a_; }

private:
    std::array<complex, D * D> a_;
};

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, complex{0.0, 0.0}) {}

    static ComplexMatrix identity(std::size_t dim) {
        ComplexMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }
    complex& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * dim_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const noexcept { return a_[r * dim_ + c]; }
    std::span<complex> data() noexcept { return a_; }
    std::span<const complex> data() const noexcept { return a_; }

private:
    std::size_t dim_{0};
    std::vector<complex> a_;
};

template <class M>
concept SquareComplexMatrix = requires(M m, const M cm, std::size_t i) {
    { M(cm.dim()) };
    { cm.dim() } -> std::convertible_to<std::size_t>;
    { m(i, i) } -> std::same_as<complex&>;
    { cm(i, i) } -> std::same_as<const complex&>;
};

using Mat2 = FixedMatrix<2>;
using Mat4 = FixedMatrix<4>;

namespace pauli {
inline Mat2 identity() { return Mat2::identity(); }
inline Mat2 x() { return Mat2{0.0, 1.0, 1.0, 0.0}; }
inline Mat2 y() { return Mat2{0.0, complex{0.0, -1.0}, complex{0.0, 1.0}, 0.0}; }
inline Mat2 z() { return Mat2{1.0, 0.0, 0.0, -1.0}; }
}  // namespace pauli

// ------------------------------ elementary ops -------------------------------

template <SquareComplexMatrix M>
M operator*(const M& a, const M& b) {
    const std::size_t n = a.dim();
    M out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const complex aik = a(i, k);
            if (aik == complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

template <SquareComplexMatrix M>
M operator+(const M& a, const M& b) {
    M out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
    return out;
}

template <SquareComplexMatrix M>
M operator-(const M& a, const M& b) {
    M out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
    return out;
}

template <SquareComplexMatrix M>
M operator*(complex s, const M& a) {
    M out = a;
    for (auto& v : out.data()) v *= s;
    return out;
}

template <SquareComplexMatrix M>
M adjoint(const M& a) {
    const std::size_t n = a.dim();
    M out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = std::conj(a(j, i));
    return out;
}

template <SquareComplexMatrix M>
M conjugate(const M& a) {
    M out = a;
    for (auto& v : out.data()) v = std::conj(v);
    return out;
}

template <SquareComplexMatrix M>
complex trace(const M& a) {
    complex t{};
    for (std::size_t i = 0; i < a.dim(); ++i) t += a(i, i);
    return t;
}

template <SquareComplexMatrix M>
double max_abs(const M& a) {
    double m = 0.0;
    for (const auto& v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

template <SquareComplexMatrix M>
double max_abs_diff(const M& a, const M& b) {
    double m = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) m = std::max(m, std::abs(ad[i] - bd[i]));
    return m;
}

// max |a_ij - conj(a_ji)|
template <SquareComplexMatrix M>
double hermiticity_defect(const M& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = i; j < a.dim(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
    return m;
}

template <SquareComplexMatrix M>
std::vector<complex> apply(const M& a, std::span<const complex> v) {
    const std::size_t n = a.dim();
    if (v.size() != n) throw ParameterError("apply: vector dimension mismatch");
    std::vector<complex> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        complex s{};
        for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

// <u|A|v>
template <SquareComplexMatrix M>
complex expectation(const M& a, std::span<const complex> u, std::span<const complex> v) {
    const auto av = apply(a, v);
    complex s{};
    for (std::size_t i = 0; i < av.size(); ++i) s += std::conj(u[i]) * av[i];
    return s;
}

// Kronecker product of arbitrary square factors into a dynamic matrix.
template <SquareComplexMatrix A, SquareComplexMatrix B>
ComplexMatrix kron(const A& a, const B& b) {
    const std::size_t na = a.dim();
    const std::size_t nb = b.dim();
    ComplexMatrix out(na * nb);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < na; ++j) {
            const complex aij = a(i, j);
            if (aij == complex{}) continue;
            for (std::size_t k = 0; k < nb; ++k)
                for (std::size_t l = 0; l < nb; ++l) out(i * nb + k, j * nb + l) = aij * b(k, l);
        }
    return out;
}

template <SquareComplexMatrix M>
ComplexMatrix to_dynamic(const M& a) {
    ComplexMatrix out(a.dim());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    return out;
}

// ------------------------------ Hermitian eigensolver -------------------------

template <SquareComplexMatrix M>
struct EigenSystem {
    std::vector<double> values;  // ascending
    M vectors;                   // column k is the eigenvector of values[k]
};

inline constexpr int kJacobiSweepLimit = 60;

// Cyclic complex Jacobi. Each rotation first removes the phase of a_pq with a
// diagonal unitary, then applies the real symmetric Jacobi rotation, so every
// sweep is a sequence of unitary similarity transforms. Converges when the
// off-diagonal Frobenius norm is below machine precision relative to ||m||_F;
// throws NumericError after kJacobiSweepLimit sweeps.
template <SquareComplexMatrix M>
EigenSystem<M> hermitian_eig(const M& m, double hermitian_tol = 1e-10) {
    const std::size_t n = m.dim();
    if (n == 0) throw ParameterError("hermitian_eig: empty matrix");
    const double scale = std::max(1.0, max_abs(m));
    if (hermiticity_defect(m) > hermitian_tol * scale)
        throw NumericError("hermitian_eig: input is not Hermitian");

    M a = m;
    // Symmetrize so rounding in the input cannot leak into the rotations.
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
    M v = M(n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double frob2 = 0.0;
    for (const auto& x : a.data()) frob2 += std::norm(x);
    const double eps = std::numeric_limits<double>::epsilon();
    const double stop = eps * eps * frob2 * 1e-2;

    bool converged = false;
    for (int sweep = 0; sweep < kJacobiSweepLimit; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (off <= stop) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = std::abs(a(p, q));
                if (apq == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                // Skip rotations that cannot change the diagonal in floating point.
                const double g = 100.0 * apq;
                if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                const complex phase = a(p, q) / apq;  // e^{i phi}
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const complex ph_conj = std::conj(phase);
                // R = D * G with D_qq = e^{-i phi}; columns p, q of R:
                //   R_pp = c, R_qp = -s e^{-i phi}, R_pq = s, R_qq = c e^{-i phi}
                const complex r_qp = -s * ph_conj;
                const complex r_qq = c * ph_conj;
                for (std::size_t k = 0; k < n; ++k) {  // A <- A R
                    const complex akp = a(k, p);
                    const complex akq = a(k, q);
                    a(k, p) = akp * c + akq * r_qp;
                    a(k, q) = akp * s + akq * r_qq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // A <- R^dagger A
                    const complex apk = a(p, k);
                    const complex aqk = a(q, k);
                    a(p, k) = c * apk + std::conj(r_qp) * aqk;
                    a(q, k) = s * apk + std::conj(r_qq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {  // V <- V R
                    const complex vkp = v(k, p);
                    const complex vkq = v(k, q);
                    v(k, p) = vkp * c + vkq * r_qp;
                    v(k, q) = vkp * s + vkq * r_qq;
                }
            }
        }
    }
    if (!converged) throw NumericError("hermitian_eig: Jacobi sweep limit reached without convergence");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
    EigenSystem<M> out{std::vector<double>(n), M(n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

// V f(Lambda) V^dagger for an arbitrary complex function of the eigenvalues.
template <SquareComplexMatrix M, class F>
M spectral_apply(const EigenSystem<M>& es, F&& f) {
    const std::size_t n = es.values.size();
    std::vector<complex> fl(n);
    for (std::size_t k = 0; k < n; ++k) fl[k] = f(es.values[k]);
    M out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const complex vik = es.vectors(i, k) * fl[k];
            if (vik == complex{}) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(es.vectors(j, k));
        }
    return out;
}

// exp(scale * m) for Hermitian m; scale is -i t for propagators, -beta for Gibbs factors.
template <SquareComplexMatrix M>
M herm_exp(const M& m, complex scale) {
    const auto es = hermitian_eig(m);
    return spectral_apply(es, [scale](double lambda) { return std::exp(scale * lambda); });
}

// ------------------------------ summation -------------------------------------

namespace detail {
inline double pairwise_sum_impl(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum_impl(v.first(half)) + pairwise_sum_impl(v.subspan(half));
}
}  // namespace detail

// Fixed-shape pairwise tree: split at the midpoint, sum runs of <= 8 left to right.
inline double pairwise_sum(std::span<const double> values) { return detail::pairwise_sum_impl(values); }

// Neumaier-compensated running sum.
class KahanSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_{0.0};
    double comp_{0.0};
};

// ------------------------------ random draws ----------------------------------

inline constexpr const char* kGaussianAlgorithm = "mt19937_64+box_muller";

struct RandomSpec {
    double mean{0.0};
    double std_dev{0.0};
    std::uint64_t seed{0};
    std::string algorithm{kGaussianAlgorithm};
};

// Box-Muller over std::mt19937_64 (whose output sequence is fixed by the C++
// standard). Uniforms take the top 53 bits; both Box-Muller outputs are used,
// cosine branch first.
inline std::vector<double> gaussian_draw(const RandomSpec& spec, std::size_t count) {
    if (spec.algorithm != kGaussianAlgorithm)
        throw ParameterError("gaussian_draw: unknown algorithm tag '" + spec.algorithm + "'");
    if (!(spec.std_dev >= 0.0) || !std::isfinite(spec.std_dev) || !std::isfinite(spec.mean))
        throw ParameterError("gaussian_draw: std_dev must be finite and nonnegative");

    std::mt19937_64 gen(spec.seed);
    auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    std::vector<double> out;
    out.reserve(count);
    while (out.size() < count) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        out.push_back(spec.mean + spec.std_dev * (r * std::cos(angle)));
        if (out.size() < count) out.push_back(spec.mean + spec.std_dev * (r * std::sin(angle)));
    }
    return out;
}

}  // namespace spinbath
