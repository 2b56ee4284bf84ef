// configspace.hpp: bath configuration enumeration, uniform-parameter class collapse,
// and deterministic (thread-count independent) reductions over either.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <iterator>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "spinbath/errors.hpp"
#include "spinbath/model.hpp"
#include "spinbath/numerics.hpp"

namespace spinbath {

inline constexpr int kEnumerationCap = 24;
inline constexpr int kCollapseCap = 10000;
inline constexpr std::size_t kDefaultChunk = 4096;

enum class Backend { enumerate, collapse };

inline const char* to_string(Backend b) { return b == Backend::enumerate ? "enumerate" : "collapse"; }

struct ReductionPlan {
    Backend backend{Backend::enumerate};
    std::size_t chunk_size{kDefaultChunk};
    unsigned worker_hint{0};  // 0: one worker per hardware thread
};

// ------------------------------ enumeration -----------------------------------

class ConfigRange {
public:
    class iterator {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = ConfigIndex;
        using difference_type = std::ptrdiff_t;
        using pointer = const ConfigIndex*;
        using reference = ConfigIndex;

        iterator() = default;
        explicit iterator(std::uint64_t v) : v_(v) {}
        ConfigIndex operator*() const { return ConfigIndex{v_}; }
        iterator& operator++() {
            ++v_;
            return *this;
        }
        iterator operator++(int) {
            auto old = *this;
            ++v_;
            return old;
        }
        bool operator==(const iterator&) const = default;

    private:
        std::uint64_t v_{0};
    };

    explicit ConfigRange(std::uint64_t count) : count_(count) {}
    iterator begin() const { return iterator{0}; }
    iterator end() const { return iterator{count_}; }
    std::uint64_t size() const { return count_; }

private:
    std::uint64_t count_;
};

// Every bitmask 0 .. 2^N - 1 once, ascending.
inline ConfigRange enumerate_configs(int n_spins, int cap = kEnumerationCap) {
    if (n_spins < 1) throw ParameterError("enumerate_configs: N must be >= 1");
    if (n_spins > cap)
        throw CapacityError("enumeration of 2^" + std::to_string(n_spins) + " configurations exceeds the cap N <= " +
                            std::to_string(cap) + "; use the collapse backend for uniform bath parameters");
    return ConfigRange{std::uint64_t{1} << n_spins};
}

// ------------------------------ class collapse --------------------------------

// All bit patterns with k down spins and w domain walls (bonds joining unequal spins).
struct ConfigClass {
    double multiplicity{0.0};      // exact for N <= 53; +inf once 2^N overflows a double
    double log_multiplicity{0.0};  // always finite
    int k{0};
    int w{0};
};

namespace detail {

// Exact binomial for n <= 62, used while counts fit in 64 bits.
inline unsigned __int128 binom_exact(int n, int r) {
    if (r < 0 || n < 0 || r > n) return 0;
    r = std::min(r, n - r);
    unsigned __int128 c = 1;
    for (int i = 0; i < r; ++i) c = c * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
    return c;
}

inline double log_binom(int n, int r) {
    return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// Number of ways to write `total` as an ordered sum of `parts` positive integers.
struct Compositions {
    bool possible;
    int n, r;  // C(n, r)
};
inline Compositions compositions(int total, int parts) {
    if (parts == 0) return {total == 0, 0, 0};
    if (total < parts) return {false, 0, 0};
    return {true, total - 1, parts - 1};
}

inline void push_class(std::vector<ConfigClass>& out, int k, int w, unsigned __int128 exact, double log_count,
                       bool use_exact) {
    ConfigClass c;
    c.k = k;
    c.w = w;
    if (use_exact) {
        if (exact == 0) return;
        c.multiplicity = static_cast<double>(exact);
        c.log_multiplicity = std::log(c.multiplicity);
    } else {
        if (!std::isfinite(log_count)) return;
        c.log_multiplicity = log_count;
        c.multiplicity = std::exp(log_count);
    }
    out.push_back(c);
}

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace detail

// Degeneracy classes of an N-site chain, ordered by (k, w) ascending.
//
// Open chain: a pattern with w walls has w + 1 runs alternating between the
// two spin values; the count is a sum over the starting value of products of
// run-length compositions. Periodic chain: w = 2r is even and the count of
// cyclic patterns with r runs of each value is (N / r) C(k-1, r-1) C(N-k-1, r-1).
inline std::vector<ConfigClass> collapse_classes(int n_spins, Boundary boundary) {
    if (n_spins < 1) throw ParameterError("collapse_classes: N must be >= 1");
    if (n_spins > kCollapseCap)
        throw CapacityError("collapse backend supports N <= " + std::to_string(kCollapseCap));
    const int N = n_spins;
    const bool exact = N <= 62;
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<ConfigClass> out;

    for (int k = 0; k <= N; ++k) {
        const int ups = N - k;
        if (k == 0 || k == N) {
            detail::push_class(out, k, 0, 1, 0.0, exact);
            continue;
        }
        if (boundary == Boundary::open) {
            for (int w = 1; w <= N - 1; ++w) {
                const int runs = w + 1;
                unsigned __int128 total = 0;
                double log_total = ninf;
                for (int start_down = 0; start_down <= 1; ++start_down) {
                    const int first_runs = (runs + 1) / 2;
                    const int second_runs = runs / 2;
                    const int down_runs = start_down ? first_runs : second_runs;
                    const int up_runs = start_down ? second_runs : first_runs;
                    const auto cd = detail::compositions(k, down_runs);
                    const auto cu = detail::compositions(ups, up_runs);
                    if (!cd.possible || !cu.possible) continue;
                    if (exact)
                        total += detail::binom_exact(cd.n, cd.r) * detail::binom_exact(cu.n, cu.r);
                    else
                        log_total = detail::log_add(
                            log_total, detail::log_binom(cd.n, cd.r) + detail::log_binom(cu.n, cu.r));
                }
                detail::push_class(out, k, w, total, log_total, exact);
            }
        } else {
            for (int r = 1; 2 * r <= N; ++r) {
                const auto cd = detail::compositions(k, r);
                const auto cu = detail::compositions(ups, r);
                if (!cd.possible || !cu.possible) continue;
                unsigned __int128 total = 0;
                double log_total = ninf;
                if (exact)
                    total = static_cast<unsigned __int128>(N) * detail::binom_exact(cd.n, cd.r) *
                            detail::binom_exact(cu.n, cu.r) / static_cast<unsigned>(r);
                else
                    log_total = std::log(static_cast<double>(N) / r) + detail::log_binom(cd.n, cd.r) +
                                detail::log_binom(cu.n, cu.r);
                detail::push_class(out, k, 2 * r, total, log_total, exact);
            }
        }
    }
    return out;
}

// Bath eigenvalues shared by every pattern of a class; requires uniform parameters.
inline BathLevel class_level(const BathParams& bath, const ConfigClass& cls) {
    const double imbalance = static_cast<double>(bath.n_spins - 2 * cls.k);
    const double chi = bath.chi.empty() ? 0.0 : bath.chi.front();
    const double bonds = static_cast<double>(bath.bond_count());
    BathLevel lvl;
    lvl.G = bath.g.front() * imbalance;
    lvl.eps_n = bath.eps.front() * imbalance;
    lvl.eta = chi * (bonds - 2.0 * cls.w);
    return lvl;
}

// ------------------------------ configuration space ---------------------------

// The index set a reduction runs over: bitmasks (enumerate) or classes (collapse).
class ConfigSpace {
public:
    ConfigSpace(BathParams bath, ReductionPlan plan) : bath_(std::move(bath)), plan_(plan) {
        bath_.validate();
        if (plan_.chunk_size == 0) throw ParameterError("reduction chunk_size must be positive");
        if (plan_.backend == Backend::collapse) {
            const auto field = bath_.first_nonuniform_field();
            if (!field.empty())
                throw ParameterError("collapse backend requires uniform bath parameters; " + field +
                                     " is site-dependent");
            classes_ = collapse_classes(bath_.n_spins, bath_.boundary);
            size_ = classes_.size();
        } else {
            size_ = static_cast<std::size_t>(enumerate_configs(bath_.n_spins).size());
        }
    }

    std::size_t size() const noexcept { return size_; }
    const BathParams& bath() const noexcept { return bath_; }
    const ReductionPlan& plan() const noexcept { return plan_; }

    BathLevel level(std::size_t item) const {
        if (plan_.backend == Backend::collapse) return class_level(bath_, classes_[item]);
        return bath_level(bath_, ConfigIndex{item});
    }
    double multiplicity(std::size_t item) const {
        return plan_.backend == Backend::collapse ? classes_[item].multiplicity : 1.0;
    }
    double log_multiplicity(std::size_t item) const {
        return plan_.backend == Backend::collapse ? classes_[item].log_multiplicity : 0.0;
    }
    std::string describe(std::size_t item) const {
        if (plan_.backend == Backend::collapse)
            return "class (k=" + std::to_string(classes_[item].k) + ", w=" + std::to_string(classes_[item].w) + ")";
        return "mask " + std::to_string(item);
    }

private:
    BathParams bath_;
    ReductionPlan plan_;
    std::vector<ConfigClass> classes_;
    std::size_t size_{0};
};

// ------------------------------ parallel helpers ------------------------------

inline unsigned resolve_workers(unsigned hint) {
    if (hint != 0) return hint;
    return std::max(1U, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, count) on up to `workers` threads using contiguous
// index ranges. If several calls throw, the exception of the lowest index wins.
template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& f) {
    workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, workers), std::max<std::size_t>(count, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = count * w / workers;
        const std::size_t hi = count * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) {
                try {
                    f(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (unsigned w = 0; w < workers; ++w)
        if (errors[w]) std::rethrow_exception(errors[w]);
}

// ------------------------------ reductions ------------------------------------

// Fault-injection hook: shifts the log weight of one item. Used to prove that
// the oracle cross-check detects a corrupted weight.
struct WeightCorruption {
    std::size_t item{0};
    double log_offset{0.0};
};

template <std::size_t D>
struct WeightedTerm {
    double log_weight{0.0};
    std::array<double, D> values{};
};

// The represented sum is exp(log_scale) * sums.
template <std::size_t D>
struct ScaledSum {
    double log_scale{-std::numeric_limits<double>::infinity()};
    std::array<double, D> sums{};
};

namespace detail {

template <std::size_t D>
std::array<double, D> combine_plain(std::span<const std::array<double, D>> blocks) {
    if (blocks.size() == 1) return blocks.front();
    const std::size_t half = blocks.size() / 2;
    auto a = combine_plain<D>(blocks.first(half));
    const auto b = combine_plain<D>(blocks.subspan(half));
    for (std::size_t d = 0; d < D; ++d) a[d] += b[d];
    return a;
}

template <std::size_t D>
ScaledSum<D> combine_scaled(std::span<const ScaledSum<D>> blocks) {
    if (blocks.size() == 1) return blocks.front();
    const std::size_t half = blocks.size() / 2;
    const auto a = combine_scaled<D>(blocks.first(half));
    const auto b = combine_scaled<D>(blocks.subspan(half));
    const double ninf = -std::numeric_limits<double>::infinity();
    if (a.log_scale == ninf) return b;
    if (b.log_scale == ninf) return a;
    ScaledSum<D> out;
    out.log_scale = std::max(a.log_scale, b.log_scale);
    const double fa = std::exp(a.log_scale - out.log_scale);
    const double fb = std::exp(b.log_scale - out.log_scale);
    for (std::size_t d = 0; d < D; ++d) out.sums[d] = a.sums[d] * fa + b.sums[d] * fb;
    return out;
}

template <class Term>
auto call_term(const ConfigSpace& space, Term& term, std::size_t item) {
    try {
        return term(item);
    } catch (const std::exception& e) {
        throw NumericError("reduction term failed at " + space.describe(item) + ": " + e.what());
    }
}

}  // namespace detail

// Sum over the configuration space of multiplicity(item) * term(item).
// Items are split into fixed blocks of plan.chunk_size; each block is a
// compensated sum and block results are combined by a fixed pairwise tree, so
// the result does not depend on the worker count.
template <std::size_t D, class Term>
std::array<double, D> reduce_weighted(const ConfigSpace& space, Term&& term, unsigned workers = 0) {
    const std::size_t n = space.size();
    const std::size_t chunk = space.plan().chunk_size;
    const std::size_t blocks = (n + chunk - 1) / chunk;
    std::vector<std::array<double, D>> partial(blocks);
    if (workers == 0) workers = resolve_workers(space.plan().worker_hint);
    parallel_for(blocks, workers, [&](std::size_t b) {
        std::array<KahanSum, D> acc{};
        const std::size_t hi = std::min(n, (b + 1) * chunk);
        for (std::size_t i = b * chunk; i < hi; ++i) {
            const std::array<double, D> v = detail::call_term(space, term, i);
            const double m = space.multiplicity(i);
            for (std::size_t d = 0; d < D; ++d) {
                if (!std::isfinite(v[d]))
                    throw NumericError("reduction term is not finite at " + space.describe(i));
                acc[d].add(m * v[d]);
            }
        }
        for (std::size_t d = 0; d < D; ++d) partial[b][d] = acc[d].value();
    });
    return detail::combine_plain<D>(partial);
}

// Sum of exp(log_weight + log_multiplicity) * values, carried with a running
// max-exponent shift so weights like exp(beta * N) never overflow.
template <std::size_t D, class Term>
ScaledSum<D> reduce_log_weighted(const ConfigSpace& space, Term&& term, unsigned workers = 0) {
    const std::size_t n = space.size();
    const std::size_t chunk = space.plan().chunk_size;
    const std::size_t blocks = (n + chunk - 1) / chunk;
    std::vector<ScaledSum<D>> partial(blocks);
    if (workers == 0) workers = resolve_workers(space.plan().worker_hint);
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t lo = b * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        std::vector<WeightedTerm<D>> buf(hi - lo);
        double shift = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i < hi; ++i) {
            auto& t = buf[i - lo];
            t = detail::call_term(space, term, i);
            t.log_weight += space.log_multiplicity(i);
            if (std::isnan(t.log_weight) || t.log_weight == std::numeric_limits<double>::infinity())
                throw NumericError("reduction weight is not finite at " + space.describe(i));
            for (double v : t.values)
                if (!std::isfinite(v)) throw NumericError("reduction term is not finite at " + space.describe(i));
            shift = std::max(shift, t.log_weight);
        }
        ScaledSum<D> out;
        out.log_scale = shift;
        if (shift == -std::numeric_limits<double>::infinity()) {
            partial[b] = out;
            return;
        }
        std::array<KahanSum, D> acc{};
        for (const auto& t : buf) {
            const double w = std::exp(t.log_weight - shift);
            for (std::size_t d = 0; d < D; ++d) acc[d].add(w * t.values[d]);
        }
        for (std::size_t d = 0; d < D; ++d) out.sums[d] = acc[d].value();
        partial[b] = out;
    });
    if (partial.empty()) return {};
    return detail::combine_scaled<D>(partial);
}

}  // namespace spinbath
