#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "lsqcert/errors.hpp"
#include "lsqcert/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<std::string> out_dir;
    std::optional<double> tolerance;

    void apply(lsqcert::ExperimentConfig& cfg) const {
        if (seed) {
            cfg.seed = *seed;
            if (cfg.source == lsqcert::ExperimentConfig::SystemSource::Spectrum) {
                cfg.system_seed = *seed;
            }
        }
        if (steps) cfg.steps = *steps;
        if (out_dir) cfg.out_dir = *out_dir;
        if (tolerance) cfg.rank_tolerance = *tolerance;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "override the config seed");
    cmd->add_option("--steps", ov.steps, "override the step count");
    cmd->add_option("--out-dir", ov.out_dir, "override the output directory");
    cmd->add_option("--tolerance", ov.tolerance, "override the relative rank tolerance");
}

int execute_run(lsqcert::ExperimentConfig cfg, const Overrides& ov) {
    ov.apply(cfg);
    if (cfg.steps < 1) throw lsqcert::ConfigError("steps must be an integer >= 1");
    if (!(cfg.rank_tolerance >= 0.0)) {
        throw lsqcert::ConfigError("rank_tolerance must be >= 0");
    }

    const lsqcert::RunResult result = lsqcert::run(cfg);
    lsqcert::write_outputs(result, cfg.out_dir);

    const lsqcert::StepRecord& last = result.records.back();
    std::printf("wrote %s/{records.csv,report.txt,plot.py,snapshots.csv,model.csv,"
                "run_config.json}\n",
                cfg.out_dir.c_str());
    std::printf("final step k=%zu: rank %zu", last.k, last.observed_rank);
    if (last.err_frobenius) {
        std::printf(", ||A - A_hat||_F = %.3e", *last.err_frobenius);
    }
    std::printf("\n");
    return kExitOk;
}

lsqcert::ExperimentConfig demo_config(const std::string& name) {
    if (name != "petersen") {
        throw lsqcert::ConfigError("unknown demo '" + name + "' (available: petersen)");
    }
    lsqcert::ExperimentConfig cfg;
    cfg.source = lsqcert::ExperimentConfig::SystemSource::PetersenWeighted;
    cfg.dt = 0.1;
    cfg.steps = 15;
    cfg.seed = 7;
    cfg.out_dir = "petersen_out";
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"least-squares LTI model regression with deterministic error "
                 "certificates"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides run_ov;
    CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment config");
    run_cmd->add_option("config", config_path, "JSON experiment config")->required();
    add_override_flags(run_cmd, run_ov);

    std::string data_path;
    std::string fit_out_dir = "fit_out";
    double fit_tolerance = lsqcert::kDefaultRankTolerance;
    CLI::App* fit_cmd =
        app.add_subcommand("fit", "fit a linear model to an external CSV time series");
    fit_cmd->add_option("data", data_path, "CSV with one state per row")->required();
    fit_cmd->add_option("--out-dir", fit_out_dir, "output directory");
    fit_cmd->add_option("--tolerance", fit_tolerance, "relative rank tolerance");

    std::string demo_name = "petersen";
    Overrides demo_ov;
    CLI::App* demo_cmd = app.add_subcommand("demo", "run a bundled experiment");
    demo_cmd->add_option("name", demo_name, "demo name (petersen)");
    add_override_flags(demo_cmd, demo_ov);

    try {
        app.parse(argc, argv);

        if (run_cmd->parsed()) {
            return execute_run(lsqcert::ExperimentConfig::from_json_file(config_path),
                               run_ov);
        }
        if (fit_cmd->parsed()) {
            lsqcert::FitOptions options;
            if (!(fit_tolerance >= 0.0)) {
                throw lsqcert::ConfigError("tolerance must be >= 0");
            }
            options.rank_tolerance = fit_tolerance;
            const lsqcert::FitResult result = lsqcert::fit_external(data_path, options);
            lsqcert::write_fit_outputs(result, fit_out_dir);
            std::printf("wrote %s/{model.csv,fit_records.csv}\n", fit_out_dir.c_str());
            std::printf("fit %zu snapshots of dimension %zu, final rank %zu, residual "
                        "%.3e\n",
                        result.snapshot_count, result.state_dimension,
                        result.steps.back().observed_rank,
                        result.steps.back().residual_frobenius);
            return kExitOk;
        }
        return execute_run(demo_config(demo_name), demo_ov);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    } catch (const lsqcert::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const lsqcert::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitValidation;
    } catch (const lsqcert::ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
}
