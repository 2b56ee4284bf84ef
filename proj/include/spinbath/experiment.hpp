// experiment.hpp: experiment configurations, figure presets, CSV result tables and
// the analytic-versus-oracle cross-check used by the spinbath command line tool.
//
// Config files are flat `key = value` text with dotted keys; `#` starts a
// comment. Parsing is strict: unknown, duplicated or mode-foreign keys are
// errors. The full key list is in README.md.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spinbath/configspace.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/model.hpp"
#include "spinbath/numerics.hpp"
#include "spinbath/oracle.hpp"
#include "spinbath/single_qubit.hpp"
#include "spinbath/two_qubit.hpp"

namespace spinbath {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 12345;
inline constexpr double kOracleTolerance = 1e-9;

enum class Mode { single, two_qubit };
enum class BackendChoice { automatic, enumerate, collapse };
enum class SeriesSelection { both, uncorrelated, correlated };

// One bath parameter list: a single value (uniform or Gaussian mean) or one value per site/bond.
struct ParamField {
    std::vector<double> values{0.0};
    std::optional<double> std_dev;  // present: Gaussian random with mean values[0]
};

struct ExperimentConfig {
    std::string name{"custom"};
    Mode mode{Mode::single};
    SystemParams sys{2.0, 1.0};
    TwoQubitParams pair{1.0, 2.0, 4.0, 1.0, 0.0};
    int n_spins{1};
    Boundary boundary{Boundary::open};
    ParamField g, eps, chi;
    double beta{1.0};
    std::string state{"+x"};  // +x -x +y -y +z -z angles | bell product custom
    double theta{0.0};
    double phi{0.0};
    std::vector<complex> amplitudes;
    double t_start{0.0};
    double t_end{20.0};
    int n_points{400};
    BackendChoice backend{BackendChoice::automatic};
    SeriesSelection series{SeriesSelection::both};
    std::uint64_t seed{kDefaultSeed};
    std::string rng_algorithm{kGaussianAlgorithm};
    std::string output_path;
    unsigned workers{0};  // not part of the file format; set from the environment by the tool
};

// ------------------------------ formatting ------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_double(v[i]);
    }
    return s;
}

inline const char* to_string(Mode m) { return m == Mode::single ? "single" : "two_qubit"; }
inline const char* to_string(BackendChoice b) {
    switch (b) {
        case BackendChoice::enumerate: return "enumerate";
        case BackendChoice::collapse: return "collapse";
        default: return "auto";
    }
}
inline const char* to_string(SeriesSelection s) {
    switch (s) {
        case SeriesSelection::uncorrelated: return "uncorrelated";
        case SeriesSelection::correlated: return "correlated";
        default: return "both";
    }
}

// Canonical key = value text; parse_config(to_config_text(c)) reproduces c.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("mode", to_string(c.mode));
    if (c.mode == Mode::single) {
        e.emplace_back("system.epsilon", format_double(c.sys.epsilon));
        e.emplace_back("system.delta", format_double(c.sys.delta));
    } else {
        e.emplace_back("system.epsilon1", format_double(c.pair.eps1));
        e.emplace_back("system.epsilon2", format_double(c.pair.eps2));
        e.emplace_back("system.delta1", format_double(c.pair.delta1));
        e.emplace_back("system.delta2", format_double(c.pair.delta2));
        e.emplace_back("system.lambda", format_double(c.pair.lambda));
    }
    e.emplace_back("bath.n_spins", std::to_string(c.n_spins));
    e.emplace_back("bath.boundary", to_string(c.boundary));
    auto field = [&](const char* key, const ParamField& f) {
        e.emplace_back(std::string("bath.") + key, join_doubles(f.values));
        if (f.std_dev) e.emplace_back(std::string("bath.") + key + "_std", format_double(*f.std_dev));
    };
    field("g", c.g);
    field("eps", c.eps);
    field("chi", c.chi);
    e.emplace_back("thermal.beta", format_double(c.beta));
    e.emplace_back("state", c.state);
    if (c.state == "angles") {
        e.emplace_back("state.theta", format_double(c.theta));
        e.emplace_back("state.phi", format_double(c.phi));
    }
    if (c.state == "custom") {
        std::vector<double> flat;
        for (const auto& a : c.amplitudes) {
            flat.push_back(a.real());
            flat.push_back(a.imag());
        }
        e.emplace_back("state.amplitudes", join_doubles(flat));
    }
    e.emplace_back("time.start", format_double(c.t_start));
    e.emplace_back("time.end", format_double(c.t_end));
    e.emplace_back("time.points", std::to_string(c.n_points));
    e.emplace_back("backend", to_string(c.backend));
    e.emplace_back("series", to_string(c.series));
    e.emplace_back("random.seed", std::to_string(c.seed));
    e.emplace_back("random.algorithm", c.rng_algorithm);
    if (!c.output_path.empty()) e.emplace_back("output.path", c.output_path);
    return e;
}

inline std::string to_config_text(const ExperimentConfig& c) {
    std::string s;
    for (const auto& [k, v] : config_entries(c)) s += k + " = " + v + "\n";
    return s;
}

// ------------------------------ parsing ---------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view text, const std::string& key) {
    text = trim(text);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
        throw UsageError("config field '" + key + "': expected a finite number, got '" + std::string(text) + "'");
    return v;
}

template <class Int>
Int parse_int(std::string_view text, const std::string& key) {
    text = trim(text);
    Int v{};
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != end)
        throw UsageError("config field '" + key + "': expected an integer, got '" + std::string(text) + "'");
    return v;
}

inline std::vector<double> parse_list(std::string_view text, const std::string& key) {
    std::vector<double> out;
    while (true) {
        const auto comma = text.find(',');
        out.push_back(parse_double(text.substr(0, comma), key));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace detail

inline void validate(const ExperimentConfig& c);

inline ExperimentConfig parse_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) throw UsageError("config field '" + key + "' given twice");
    }

    ExperimentConfig c;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto num = [&](const std::string& key, double& target) {
        if (auto v = take(key)) target = detail::parse_double(*v, key);
    };

    if (auto m = take("mode")) {
        if (*m == "single") c.mode = Mode::single;
        else if (*m == "two_qubit") c.mode = Mode::two_qubit;
        else throw UsageError("config field 'mode': expected single or two_qubit");
    }
    if (c.mode == Mode::two_qubit) {
        c.state = "bell";
        c.t_end = 10.0;
    }
    if (c.mode == Mode::single) {
        num("system.epsilon", c.sys.epsilon);
        num("system.delta", c.sys.delta);
    } else {
        num("system.epsilon1", c.pair.eps1);
        num("system.epsilon2", c.pair.eps2);
        num("system.delta1", c.pair.delta1);
        num("system.delta2", c.pair.delta2);
        num("system.lambda", c.pair.lambda);
    }
    if (auto v = take("bath.n_spins")) c.n_spins = detail::parse_int<int>(*v, "bath.n_spins");
    if (auto v = take("bath.boundary")) {
        if (*v == "open") c.boundary = Boundary::open;
        else if (*v == "periodic") c.boundary = Boundary::periodic;
        else throw UsageError("config field 'bath.boundary': expected open or periodic");
    }
    auto field = [&](const std::string& key, ParamField& f) {
        if (auto v = take("bath." + key)) f.values = detail::parse_list(*v, "bath." + key);
        if (auto v = take("bath." + key + "_std")) f.std_dev = detail::parse_double(*v, "bath." + key + "_std");
    };
    field("g", c.g);
    field("eps", c.eps);
    field("chi", c.chi);
    num("thermal.beta", c.beta);
    if (auto v = take("state")) c.state = *v;
    if (c.state == "angles") {
        num("state.theta", c.theta);
        num("state.phi", c.phi);
    }
    if (c.state == "custom") {
        if (auto v = take("state.amplitudes")) {
            const auto flat = detail::parse_list(*v, "state.amplitudes");
            if (flat.size() % 2 != 0) throw UsageError("config field 'state.amplitudes': expected re, im pairs");
            for (std::size_t i = 0; i < flat.size(); i += 2) c.amplitudes.emplace_back(flat[i], flat[i + 1]);
        }
    }
    num("time.start", c.t_start);
    num("time.end", c.t_end);
    if (auto v = take("time.points")) c.n_points = detail::parse_int<int>(*v, "time.points");
    if (auto v = take("backend")) {
        if (*v == "auto") c.backend = BackendChoice::automatic;
        else if (*v == "enumerate") c.backend = BackendChoice::enumerate;
        else if (*v == "collapse") c.backend = BackendChoice::collapse;
        else throw UsageError("config field 'backend': expected auto, enumerate or collapse");
    }
    if (auto v = take("series")) {
        if (*v == "both") c.series = SeriesSelection::both;
        else if (*v == "uncorrelated") c.series = SeriesSelection::uncorrelated;
        else if (*v == "correlated") c.series = SeriesSelection::correlated;
        else throw UsageError("config field 'series': expected both, uncorrelated or correlated");
    }
    if (auto v = take("random.seed")) c.seed = detail::parse_int<std::uint64_t>(*v, "random.seed");
    if (auto v = take("random.algorithm")) c.rng_algorithm = *v;
    if (auto v = take("output.path")) c.output_path = *v;

    if (!kv.empty())
        throw UsageError("config field '" + kv.begin()->first + "' is unknown or not valid for mode " +
                         to_string(c.mode));
    validate(c);
    return c;
}

// ------------------------------ resolution ------------------------------------

namespace detail {

inline std::vector<double> resolve_field(const ParamField& f, std::size_t count, const char* name,
                                         std::uint64_t seed, const std::string& algorithm) {
    if (f.std_dev) {
        if (f.values.size() != 1)
            throw UsageError(std::string("config field 'bath.") + name + "': a random field takes a single mean");
        if (*f.std_dev < 0.0) throw UsageError(std::string("config field 'bath.") + name + "_std' must be >= 0");
        RandomSpec spec{f.values[0], *f.std_dev, seed, algorithm};
        try {
            return gaussian_draw(spec, count);
        } catch (const ParameterError& e) {
            throw UsageError(std::string("config field 'random.algorithm': ") + e.what());
        }
    }
    if (f.values.size() == 1) return std::vector<double>(count, f.values[0]);
    if (f.values.size() != count)
        throw UsageError(std::string("config field 'bath.") + name + "': expected 1 or " + std::to_string(count) +
                         " values, got " + std::to_string(f.values.size()));
    return f.values;
}

}  // namespace detail

// Random fields draw from independent streams: g_i uses seed, eps_i seed + 1, chi_i seed + 2.
inline BathParams resolve_bath(const ExperimentConfig& c) {
    if (c.n_spins < 1) throw UsageError("config field 'bath.n_spins' must be >= 1");
    BathParams b;
    b.n_spins = c.n_spins;
    b.boundary = c.boundary;
    const auto n = static_cast<std::size_t>(c.n_spins);
    b.g = detail::resolve_field(c.g, n, "g", c.seed, c.rng_algorithm);
    b.eps = detail::resolve_field(c.eps, n, "eps", c.seed + 1, c.rng_algorithm);
    b.chi = detail::resolve_field(c.chi, b.bond_count(), "chi", c.seed + 2, c.rng_algorithm);
    return b;
}

inline ReductionPlan resolve_plan(const ExperimentConfig& c, const BathParams& bath) {
    ReductionPlan plan;
    plan.worker_hint = c.workers;
    switch (c.backend) {
        case BackendChoice::enumerate: plan.backend = Backend::enumerate; break;
        case BackendChoice::collapse: plan.backend = Backend::collapse; break;
        default: plan.backend = bath.is_uniform() ? Backend::collapse : Backend::enumerate;
    }
    return plan;
}

inline PureState resolve_single_state(const ExperimentConfig& c) {
    const double r = std::numbers::sqrt2 / 2.0;
    if (c.state == "+x") return {r, r};
    if (c.state == "-x") return {r, -r};
    if (c.state == "+y") return {r, complex{0.0, r}};
    if (c.state == "-y") return {r, complex{0.0, -r}};
    if (c.state == "+z") return {1.0, 0.0};
    if (c.state == "-z") return {0.0, 1.0};
    if (c.state == "angles") return PureState::from_bloch_angles(c.theta, c.phi);
    if (c.state == "custom") {
        if (c.amplitudes.size() != 2) throw UsageError("config field 'state.amplitudes': single mode needs 2 amplitudes");
        try {
            return PureState::from_amplitudes(c.amplitudes[0], c.amplitudes[1]);
        } catch (const ParameterError&) {
            throw UsageError("config field 'state.amplitudes': state is not normalized");
        }
    }
    throw UsageError("config field 'state': '" + c.state + "' is not a single-qubit state");
}

inline TwoQubitPureState resolve_pair_state(const ExperimentConfig& c) {
    if (c.state == "bell") return TwoQubitPureState::bell();
    if (c.state == "product") return TwoQubitPureState::product00();
    if (c.state == "custom") {
        if (c.amplitudes.size() != 4)
            throw UsageError("config field 'state.amplitudes': two_qubit mode needs 4 amplitudes");
        try {
            return TwoQubitPureState::from_amplitudes({c.amplitudes[0], c.amplitudes[1], c.amplitudes[2], c.amplitudes[3]});
        } catch (const ParameterError&) {
            throw UsageError("config field 'state.amplitudes': state is not normalized");
        }
    }
    throw UsageError("config field 'state': '" + c.state + "' is not a two-qubit state");
}

inline std::vector<double> time_grid(const ExperimentConfig& c) {
    std::vector<double> t(static_cast<std::size_t>(c.n_points));
    const double span = c.t_end - c.t_start;
    for (int k = 0; k < c.n_points; ++k) t[static_cast<std::size_t>(k)] = c.t_start + span * k / (c.n_points - 1);
    return t;
}

inline void validate(const ExperimentConfig& c) {
    if (c.n_points < 2) throw UsageError("config field 'time.points' must be >= 2");
    if (!(c.t_end > c.t_start)) throw UsageError("config field 'time.end' must exceed time.start");
    if (!(c.beta >= 0.0)) throw UsageError("config field 'thermal.beta' must be >= 0");
    if (c.rng_algorithm != kGaussianAlgorithm)
        throw UsageError("config field 'random.algorithm': unknown tag '" + c.rng_algorithm + "' (supported: " +
                         kGaussianAlgorithm + ")");
    const BathParams bath = resolve_bath(c);
    if (c.backend == BackendChoice::collapse) {
        const auto field = bath.first_nonuniform_field();
        if (!field.empty())
            throw UsageError("config field 'backend': collapse requires uniform bath parameters but " + field +
                             " is site-dependent");
    }
    if (c.mode == Mode::single) resolve_single_state(c);
    else resolve_pair_state(c);
}

// ------------------------------ presets ---------------------------------------

struct PresetInfo {
    std::string name;
    std::string summary;
};

inline std::vector<PresetInfo> list_presets() {
    return {
        {"fig1", "single qubit, g=0.1, beta=1, eps_i=1, chi=0, N=50"},
        {"fig2", "single qubit, g=1, beta=0.1, eps_i=1, chi=0, N=50"},
        {"fig3", "single qubit, g=0.5, beta=1, eps_i=1, chi=0, N=50"},
        {"fig4", "single qubit, g=1, beta=1, eps_i=1, chi=0, N=50"},
        {"fig5", "single qubit, g=1, beta=10, eps_i=1, chi=0, N=50"},
        {"fig6", "single qubit, g=1, beta=10, eps_i=0.01, chi=0, N=50"},
        {"fig7", "single qubit, g=1, beta=1, eps_i=1, chi=0.1, N=10"},
        {"fig8", "single qubit, g=1, beta=10, eps_i=1, chi=0.1, N=10"},
        {"fig9", "single qubit, g=1, beta=10, eps_i=0.01, chi=1, N=10"},
        {"fig10", "single qubit, g=5, beta=10, eps_i=1, chi=1, N=10"},
        {"fig11", "single qubit, Gaussian g~(5,0.01), eps_i~(1,0.001), chi~(1,0.01), beta=10, N=10"},
        {"fig12", "single qubit, Gaussian g~(5,1), eps_i~(1,0.2), chi~(1,0.2), beta=10, N=10"},
        {"fig13", "two qubits, Bell state, lambda=0, g=0.1, beta=1, eps_i=1, N=50"},
        {"fig14", "two qubits, Bell state, lambda=0, g=0.5, beta=1, eps_i=1, N=50"},
        {"fig15", "two qubits, Bell state, lambda=0, g=1, beta=10, eps_i=1, N=50"},
        {"fig16", "two qubits, Bell state, lambda=0, g=1, beta=10, eps_i=0.01, N=50"},
        {"fig17", "two qubits, Bell state, lambda=0, g=1, beta=10, eps_i=0.01, chi=0.1, N=10"},
        {"fig18", "two qubits, Bell state, lambda=3, g=1, beta=1, eps_i=1, N=50"},
        {"fig19", "two qubits, product state |00>, lambda=5, g=0.5, beta=1, eps_i=1, N=50"},
    };
}

// Caption parameters of each figure. Time ranges are not stated with the
// figures: single-qubit presets use [0, 20], two-qubit presets [0, 10], 400 points.
inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    auto single = [&](double g, double beta, double eps_i, double chi, int n) {
        c.mode = Mode::single;
        c.sys = {2.0, 1.0};
        c.g.values = {g};
        c.beta = beta;
        c.eps.values = {eps_i};
        c.chi.values = {chi};
        c.n_spins = n;
        c.state = "+x";
        c.t_end = 20.0;
    };
    auto pair = [&](double g, double beta, double eps_i, double chi, int n, double lambda) {
        c.mode = Mode::two_qubit;
        c.pair = {1.0, 2.0, 4.0, 1.0, lambda};
        c.g.values = {g};
        c.beta = beta;
        c.eps.values = {eps_i};
        c.chi.values = {chi};
        c.n_spins = n;
        c.state = "bell";
        c.t_end = 10.0;
    };
    if (name == "fig1") single(0.1, 1.0, 1.0, 0.0, 50);
    else if (name == "fig2") single(1.0, 0.1, 1.0, 0.0, 50);
    else if (name == "fig3") single(0.5, 1.0, 1.0, 0.0, 50);
    else if (name == "fig4") single(1.0, 1.0, 1.0, 0.0, 50);
    else if (name == "fig5") single(1.0, 10.0, 1.0, 0.0, 50);
    else if (name == "fig6") single(1.0, 10.0, 0.01, 0.0, 50);
    else if (name == "fig7") single(1.0, 1.0, 1.0, 0.1, 10);
    else if (name == "fig8") single(1.0, 10.0, 1.0, 0.1, 10);
    else if (name == "fig9") single(1.0, 10.0, 0.01, 1.0, 10);
    else if (name == "fig10") single(5.0, 10.0, 1.0, 1.0, 10);
    else if (name == "fig11") {
        single(5.0, 10.0, 1.0, 1.0, 10);
        c.g.std_dev = 0.01;
        c.eps.std_dev = 0.001;
        c.chi.std_dev = 0.01;
    } else if (name == "fig12") {
        single(5.0, 10.0, 1.0, 1.0, 10);
        c.g.std_dev = 1.0;
        c.eps.std_dev = 0.2;
        c.chi.std_dev = 0.2;
    } else if (name == "fig13") pair(0.1, 1.0, 1.0, 0.0, 50, 0.0);
    else if (name == "fig14") pair(0.5, 1.0, 1.0, 0.0, 50, 0.0);
    else if (name == "fig15") pair(1.0, 10.0, 1.0, 0.0, 50, 0.0);
    else if (name == "fig16") pair(1.0, 10.0, 0.01, 0.0, 50, 0.0);
    else if (name == "fig17") pair(1.0, 10.0, 0.01, 0.1, 10, 0.0);
    else if (name == "fig18") pair(1.0, 1.0, 1.0, 0.0, 50, 3.0);
    else if (name == "fig19") {
        pair(0.5, 1.0, 1.0, 0.0, 50, 5.0);
        c.state = "product";
    } else {
        throw UsageError("unknown preset '" + name + "' (expected fig1 ... fig19)");
    }
    return c;
}

// ------------------------------ results ---------------------------------------

struct ResultTable {
    std::vector<std::string> metadata;  // written as '# ' lines
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_csv(const ResultTable& table, std::ostream& os) {
    for (const auto& m : table.metadata) os << "# " << m << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
        os << '\n';
    }
}

// Gnuplot script plotting every series of a CSV written by write_csv.
inline std::string plot_script(const ResultTable& table, const std::string& csv_path) {
    std::ostringstream s;
    s << "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nplot ";
    for (std::size_t i = 1; i < table.columns.size(); ++i)
        s << (i > 1 ? ", " : "") << "'" << csv_path << "' using 1:" << i + 1 << " with lines";
    s << "\n";
    return s.str();
}

inline std::vector<bool> selected_flags(const ExperimentConfig& c) {
    switch (c.series) {
        case SeriesSelection::uncorrelated: return {false};
        case SeriesSelection::correlated: return {true};
        default: return {false, true};
    }
}

inline ResultTable run(const ExperimentConfig& c) {
    validate(c);
    const BathParams bath = resolve_bath(c);
    const ReductionPlan plan = resolve_plan(c, bath);
    const Thermal th{c.beta};
    const auto times = time_grid(c);

    ResultTable table;
    table.metadata.push_back(std::string("spinbath ") + kToolVersion);
    table.metadata.push_back("experiment = " + c.name);
    table.metadata.push_back(std::string("resolved.backend = ") + to_string(plan.backend));
    for (const auto& [k, v] : config_entries(c)) table.metadata.push_back(k + " = " + v);

    table.columns.push_back("t");
    std::vector<std::vector<double>> series;
    for (bool correlated : selected_flags(c)) {
        const char* suffix = correlated ? "_correlated" : "_uncorrelated";
        if (c.mode == Mode::single) {
            const auto traj = bloch_trajectory(c.sys, bath, th, plan, resolve_single_state(c), times, correlated);
            std::vector<double> px(traj.size());
            for (std::size_t k = 0; k < traj.size(); ++k) px[k] = traj[k].x;
            series.push_back(std::move(px));
            table.columns.push_back(std::string("px") + suffix);
        } else {
            series.push_back(concurrence_trajectory(c.pair, bath, th, plan, resolve_pair_state(c), times, correlated));
            table.columns.push_back(std::string("C") + suffix);
        }
    }
    table.rows.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        table.rows[k].push_back(times[k]);
        for (const auto& s : series) table.rows[k].push_back(s[k]);
    }
    return table;
}

// ------------------------------ oracle cross-check ----------------------------

struct SeriesDeviation {
    std::string series;
    double max_deviation{0.0};
};

struct OracleReport {
    int n_spins{0};
    std::vector<SeriesDeviation> deviations;
    bool passed{false};
};

struct OracleCheckOptions {
    std::optional<WeightCorruption> corruption;  // fault injection for the analytic side
    double tolerance{kOracleTolerance};
};

// Runs the analytic and the brute-force path on the config with N replaced by
// n_override and reports the largest deviation of every series over the grid.
inline OracleReport oracle_check(ExperimentConfig c, int n_override, const OracleCheckOptions& opt = {}) {
    const int q = c.mode == Mode::single ? 1 : 2;
    if (n_override < 1 || n_override + q > oracle::kMaxQubits)
        throw CapacityError("oracle-check: --n must be in [1, " + std::to_string(oracle::kMaxQubits - q) + "]");
    c.n_spins = n_override;
    auto drop_lists = [](ParamField& f) {
        if (f.values.size() > 1) throw UsageError("oracle-check: per-site parameter lists cannot be resized by --n");
    };
    drop_lists(c.g);
    drop_lists(c.eps);
    drop_lists(c.chi);
    validate(c);

    const BathParams bath = resolve_bath(c);
    const ReductionPlan plan = resolve_plan(c, bath);
    const Thermal th{c.beta};
    const auto times = time_grid(c);

    OracleReport report;
    report.n_spins = n_override;
    for (bool correlated : selected_flags(c)) {
        const std::string suffix = correlated ? "_correlated" : "_uncorrelated";
        if (c.mode == Mode::single) {
            const PureState psi = resolve_single_state(c);
            const SingleQubitDynamics dyn(c.sys, bath, th, plan, psi, opt.corruption);
            const auto analytic = dyn.trajectory(times, correlated);
            const auto h = oracle::build_hamiltonian(c.sys, bath);
            const auto amps = psi.amplitudes();
            const oracle::Evolver ev(h, oracle::initial_state(h, th, amps, correlated));
            double dev = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                const auto p = oracle::bloch_of(ev.reduce(times[k]));
                dev = std::max({dev, std::abs(p[0] - analytic[k].x), std::abs(p[1] - analytic[k].y),
                                std::abs(p[2] - analytic[k].z)});
            }
            report.deviations.push_back({"p" + suffix, dev});
        } else {
            const TwoQubitPureState psi = resolve_pair_state(c);
            const PairPath path = c.pair.lambda == 0.0 ? PairPath::product : PairPath::interacting;
            const TwoQubitDynamics dyn(c.pair, bath, th, plan, psi, path, opt.corruption);
            const auto analytic = dyn.densities(times, correlated);
            const auto h = oracle::build_hamiltonian(c.pair, bath);
            const oracle::Evolver ev(h, oracle::initial_state(h, th, psi.amp, correlated));
            double dev_rho = 0.0;
            double dev_c = 0.0;
            for (std::size_t k = 0; k < times.size(); ++k) {
                const auto ref = ev.reduce(times[k]);
                Mat4 ref4;
                for (int r = 0; r < 4; ++r)
                    for (int col = 0; col < 4; ++col) ref4(r, col) = ref(r, col);
                dev_rho = std::max(dev_rho, max_abs_diff(ref4, analytic[k]));
                dev_c = std::max(dev_c, std::abs(concurrence(ref4) - concurrence(analytic[k])));
            }
            report.deviations.push_back({"rho" + suffix, dev_rho});
            report.deviations.push_back({"C" + suffix, dev_c});
        }
    }
    report.passed = std::all_of(report.deviations.begin(), report.deviations.end(),
                                [&](const SeriesDeviation& d) { return d.max_deviation <= opt.tolerance; });
    return report;
}

}  // namespace spinbath
