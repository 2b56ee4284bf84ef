// spinbath: command line front end for presets, config files and oracle cross-checks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "spinbath/spinbath.hpp"

namespace {

// Exit codes: 1 oracle mismatch, 2 usage, 3 capacity, 4 numeric failure.
constexpr int kExitMismatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNumeric = 4;

unsigned thread_cap() {
    const char* env = std::getenv("SPINBATH_THREADS");
    if (!env || !*env) return 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) throw spinbath::UsageError("SPINBATH_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
}

spinbath::ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw spinbath::UsageError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    auto cfg = spinbath::parse_config(text.str());
    cfg.name = std::filesystem::path(path).stem().string();
    return cfg;
}

void emit(const spinbath::ExperimentConfig& cfg, bool plot) {
    spinbath::ExperimentConfig c = cfg;
    c.workers = thread_cap();
    const auto table = spinbath::run(c);
    if (c.output_path.empty()) {
        spinbath::write_csv(table, std::cout);
        if (plot) std::cerr << "--plot needs an output path; skipped\n";
        return;
    }
    std::ofstream out(c.output_path, std::ios::binary);
    if (!out) throw spinbath::UsageError("cannot write '" + c.output_path + "'");
    spinbath::write_csv(table, out);
    if (plot) {
        std::ofstream gp(c.output_path + ".gp", std::ios::binary);
        gp << spinbath::plot_script(table, c.output_path);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact central-spin / spin-bath dynamics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", spinbath::kToolVersion);

    std::string config_path, out_path, preset_name, target;
    std::uint64_t seed = 0;
    int n_override = 0;
    bool plot = false, corrupt = false;

    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
    run_cmd->add_option("--config", config_path, "Config file (key = value)")->required();
    run_cmd->add_option("--out", out_path, "CSV output path (overrides output.path)");
    run_cmd->add_flag("--plot", plot, "Also write a gnuplot script next to the CSV");

    auto* preset_cmd = app.add_subcommand("preset", "Run a figure preset");
    preset_cmd->add_option("name", preset_name, "Preset name (fig1 ... fig19)")->required();
    auto* out_opt = preset_cmd->add_option("--out", out_path, "CSV output path (default: stdout)");
    auto* seed_opt = preset_cmd->add_option("--seed", seed, "Seed for random bath parameters");
    preset_cmd->add_flag("--plot", plot, "Also write a gnuplot script next to the CSV");
    (void)out_opt;

    auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare analytic results with brute-force evolution");
    oracle_cmd->add_option("target", target, "Preset name or config path")->required();
    oracle_cmd->add_option("--n", n_override, "Bath size for the check")->required();
    oracle_cmd->add_flag("--corrupt-weight", corrupt, "Perturb one configuration weight (self-test)")
        ->group("");

    auto* list_cmd = app.add_subcommand("list-presets", "List figure presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& p : spinbath::list_presets()) std::cout << p.name << "\t" << p.summary << "\n";
        } else if (run_cmd->parsed()) {
            auto cfg = load_config(config_path);
            if (!out_path.empty()) cfg.output_path = out_path;
            emit(cfg, plot);
        } else if (preset_cmd->parsed()) {
            auto cfg = spinbath::preset(preset_name);
            if (seed_opt->count()) cfg.seed = seed;
            cfg.output_path = out_path;
            emit(cfg, plot);
        } else if (oracle_cmd->parsed()) {
            spinbath::ExperimentConfig cfg;
            if (target.rfind("fig", 0) == 0 && !std::filesystem::exists(target)) cfg = spinbath::preset(target);
            else cfg = load_config(target);
            cfg.workers = thread_cap();
            spinbath::OracleCheckOptions opt;
            if (corrupt) opt.corruption = spinbath::WeightCorruption{0, 1.0};
            const auto report = spinbath::oracle_check(cfg, n_override, opt);
            std::cout << "oracle-check " << cfg.name << " N=" << report.n_spins << "\n";
            for (const auto& d : report.deviations)
                std::cout << "  " << d.series << " max deviation " << spinbath::format_double(d.max_deviation) << "\n";
            std::cout << (report.passed ? "PASS" : "FAIL") << " (tolerance "
                      << spinbath::kOracleTolerance << ")\n";
            return report.passed ? 0 : kExitMismatch;
        }
    } catch (const spinbath::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const spinbath::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const spinbath::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const spinbath::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
