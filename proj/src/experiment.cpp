#include "lsqcert/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsqcert/errors.hpp"
#include "lsqcert/kernels.hpp"
#include "lsqcert/random.hpp"

namespace lsqcert {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

DenseMatrix matrix_from_json(const json& rows, const std::string& field) {
    if (!rows.is_array() || rows.empty()) {
        throw ConfigError(field + " must be a non-empty array of rows");
    }
    const std::size_t n_rows = rows.size();
    std::size_t n_cols = 0;
    std::vector<double> entries;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const json& row = rows[i];
        if (!row.is_array()) throw ConfigError(field + " rows must be arrays");
        if (i == 0) {
            n_cols = row.size();
            entries.reserve(n_rows * n_cols);
        } else if (row.size() != n_cols) {
            throw ConfigError(field + " rows have inconsistent lengths");
        }
        for (const json& cell : row) {
            if (!cell.is_number()) throw ConfigError(field + " entries must be numbers");
            entries.push_back(cell.get<double>());
        }
    }
    DenseMatrix m(n_rows, n_cols, std::move(entries));
    require_finite(m, field.c_str());
    return m;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig cfg;

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw ConfigError("seed must be a non-negative integer");
        }
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    cfg.system_seed = cfg.seed;

    if (!j.contains("system") || !j["system"].is_object()) {
        throw ConfigError("system must be an object");
    }
    const json& sys = j["system"];
    if (!sys.contains("type") || !sys["type"].is_string()) {
        throw ConfigError("system.type must be a string");
    }
    const std::string type = sys["type"].get<std::string>();
    if (type == "explicit") {
        cfg.source = ExperimentConfig::SystemSource::Explicit;
        if (!sys.contains("entries")) throw ConfigError("system.entries is required");
        cfg.matrix = matrix_from_json(sys["entries"], "system.entries");
        if (cfg.matrix.rows() != cfg.matrix.cols()) {
            throw ConfigError("system.entries must be square");
        }
    } else if (type == "spectrum") {
        cfg.source = ExperimentConfig::SystemSource::Spectrum;
        if (!sys.contains("eigenvalues") || !sys["eigenvalues"].is_array() ||
            sys["eigenvalues"].empty()) {
            throw ConfigError("system.eigenvalues must be a non-empty array");
        }
        for (const json& v : sys["eigenvalues"]) {
            if (!v.is_number()) throw ConfigError("system.eigenvalues must be numbers");
            cfg.spectrum.push_back(v.get<double>());
        }
        if (sys.contains("seed")) {
            if (!sys["seed"].is_number_unsigned()) {
                throw ConfigError("system.seed must be a non-negative integer");
            }
            cfg.system_seed = sys["seed"].get<std::uint64_t>();
        }
    } else if (type == "petersen_weighted") {
        cfg.source = ExperimentConfig::SystemSource::PetersenWeighted;
        if (sys.contains("dt")) {
            if (!sys["dt"].is_number() || !(sys["dt"].get<double>() > 0.0)) {
                throw ConfigError("system.dt must be > 0");
            }
            cfg.dt = sys["dt"].get<double>();
        }
    } else if (type == "continuous") {
        cfg.source = ExperimentConfig::SystemSource::Continuous;
        if (!sys.contains("entries")) throw ConfigError("system.entries is required");
        cfg.matrix = matrix_from_json(sys["entries"], "system.entries");
        if (cfg.matrix.rows() != cfg.matrix.cols()) {
            throw ConfigError("system.entries must be square");
        }
        if (!sys.contains("dt") || !sys["dt"].is_number() ||
            !(sys["dt"].get<double>() > 0.0)) {
            throw ConfigError("system.dt must be > 0");
        }
        cfg.dt = sys["dt"].get<double>();
    } else {
        throw ConfigError("system.type must be one of explicit|spectrum|"
                          "petersen_weighted|continuous");
    }

    if (j.contains("initial_condition")) {
        const json& ic = j["initial_condition"];
        if (!ic.is_object() || !ic.contains("type") || !ic["type"].is_string()) {
            throw ConfigError("initial_condition.type must be a string");
        }
        const std::string ic_type = ic["type"].get<std::string>();
        if (ic_type == "explicit") {
            if (!ic.contains("values") || !ic["values"].is_array() ||
                ic["values"].empty()) {
                throw ConfigError("initial_condition.values must be a non-empty array");
            }
            std::vector<double> values;
            for (const json& v : ic["values"]) {
                if (!v.is_number()) {
                    throw ConfigError("initial_condition.values must be numbers");
                }
                values.push_back(v.get<double>());
            }
            cfg.x0 = std::move(values);
        } else if (ic_type != "gaussian") {
            throw ConfigError("initial_condition.type must be gaussian|explicit");
        }
    }

    if (j.contains("steps")) {
        if (!j["steps"].is_number_unsigned() || j["steps"].get<std::size_t>() < 1) {
            throw ConfigError("steps must be an integer >= 1");
        }
        cfg.steps = j["steps"].get<std::size_t>();
    }
    if (j.contains("rank_tolerance")) {
        if (!j["rank_tolerance"].is_number() ||
            !(j["rank_tolerance"].get<double>() >= 0.0)) {
            throw ConfigError("rank_tolerance must be >= 0");
        }
        cfg.rank_tolerance = j["rank_tolerance"].get<double>();
    }
    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw ConfigError("out_dir must be a string");
        cfg.out_dir = j["out_dir"].get<std::string>();
    }
    if (j.contains("norms")) {
        if (!j["norms"].is_array()) throw ConfigError("norms must be an array");
        cfg.record_spectral = false;
        cfg.record_frobenius = false;
        for (const json& v : j["norms"]) {
            if (v == "spectral") {
                cfg.record_spectral = true;
            } else if (v == "frobenius") {
                cfg.record_frobenius = true;
            } else {
                throw ConfigError("norms entries must be spectral|frobenius");
            }
        }
        if (!cfg.record_spectral && !cfg.record_frobenius) {
            throw ConfigError("norms must request at least one norm");
        }
    }
    return cfg;
}

LtiSystem build_system(const ExperimentConfig& cfg) {
    switch (cfg.source) {
        case ExperimentConfig::SystemSource::Explicit:
            return LtiSystem::from_matrix(cfg.matrix, cfg.rank_tolerance);
        case ExperimentConfig::SystemSource::Spectrum:
            return synthesize_symmetric(cfg.spectrum, cfg.system_seed);
        case ExperimentConfig::SystemSource::PetersenWeighted:
            return discretize(weighted_petersen_laplacian(), cfg.dt, cfg.rank_tolerance);
        case ExperimentConfig::SystemSource::Continuous:
            return discretize(cfg.matrix, cfg.dt, cfg.rank_tolerance);
    }
    throw ConfigError("system.type is invalid");
}

std::vector<double> initial_state(const ExperimentConfig& cfg, std::size_t n) {
    if (cfg.x0) {
        if (cfg.x0->size() != n) {
            throw ConfigError("initial_condition.values length does not match the "
                              "system dimension");
        }
        require_finite(std::span<const double>(*cfg.x0), "initial_condition.values");
        if (norm2(*cfg.x0) == 0.0) {
            throw ConfigError("initial_condition.values must be nonzero");
        }
        return *cfg.x0;
    }
    SeededRng rng(cfg.seed);
    std::vector<double> x0 = rng.gaussian_vector(n);
    const double nrm = norm2(x0);
    for (double& e : x0) e /= nrm;
    return x0;
}

const char* source_name(ExperimentConfig::SystemSource s) {
    switch (s) {
        case ExperimentConfig::SystemSource::Explicit: return "explicit";
        case ExperimentConfig::SystemSource::Spectrum: return "spectrum";
        case ExperimentConfig::SystemSource::PetersenWeighted: return "petersen_weighted";
        case ExperimentConfig::SystemSource::Continuous: return "continuous";
    }
    return "?";
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    return parse_config(j);
}

std::string ExperimentConfig::to_json_text() const {
    json sys;
    sys["type"] = source_name(source);
    switch (source) {
        case SystemSource::Explicit:
        case SystemSource::Continuous: {
            json rows = json::array();
            for (std::size_t i = 0; i < matrix.rows(); ++i) {
                rows.push_back(matrix.row(i));
            }
            sys["entries"] = std::move(rows);
            if (source == SystemSource::Continuous) sys["dt"] = dt;
            break;
        }
        case SystemSource::Spectrum:
            sys["eigenvalues"] = spectrum;
            sys["seed"] = system_seed;
            break;
        case SystemSource::PetersenWeighted:
            sys["dt"] = dt;
            break;
    }

    json j;
    j["system"] = std::move(sys);
    if (x0) {
        j["initial_condition"] = {{"type", "explicit"}, {"values", *x0}};
    } else {
        j["initial_condition"] = {{"type", "gaussian"}};
    }
    j["steps"] = steps;
    j["rank_tolerance"] = rank_tolerance;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    json norms = json::array();
    if (record_spectral) norms.push_back("spectral");
    if (record_frobenius) norms.push_back("frobenius");
    j["norms"] = std::move(norms);
    return j.dump(2) + "\n";
}

RunResult run(const ExperimentConfig& config) {
    LtiSystem system = build_system(config);
    const std::vector<double> x0 = initial_state(config, system.dimension());

    std::optional<InitialCondition> ic;
    if (system.symmetric()) {
        try {
            ic = decompose_initial_condition(*system.spectral_profile(), x0);
        } catch (const InvalidInputError&) {
            ic.reset();  // nu = 0; certificates still stream, ic-based fields N/A
        }
    }

    SnapshotLog log = simulate(system, x0, config.steps);
    RegressionState state(x0, config.rank_tolerance);
    const double a_frob = frobenius_norm(system.a());

    std::vector<StepRecord> records;
    records.reserve(config.steps);
    for (std::size_t t = 1; t < log.snapshot_count(); ++t) {
        const std::span<const double> snap = log.snapshot(t);
        state.ingest(snap);
        if (state.step() < 1) continue;

        const ErrorCertificate cert = error_certificate(state, system);
        const BoundReport bounds = bound_report(system, ic, state, cert);

        StepRecord rec;
        rec.k = cert.k;
        rec.observed_rank = bounds.observed_rank;
        rec.predicted_rank = bounds.predicted_rank;
        if (config.record_spectral) rec.err_spectral = cert.empirical_spectral;
        if (config.record_frobenius) rec.err_frobenius = cert.empirical_frobenius;
        rec.thm1_bound = cert.thm1_bound;
        rec.thm2_bound = bounds.thm2.value;
        rec.thm2_bound_signed = bounds.thm2_signed.value;
        rec.thm4_spectral = bounds.thm4_spectral.value;
        rec.thm4_frobenius = bounds.thm4_frobenius.value;
        rec.degenerate = cert.degenerate;
        rec.lemma3_residual = bounds.lemma3.value;
        if (cert.error_operator) {
            const DenseMatrix predicted =
                system.a() - kernels::multiply(system.a(), *cert.error_operator);
            rec.thm1_identity_residual =
                frobenius_norm(state.estimate() - predicted) / a_frob;
            rec.error_operator_norm = spectral_norm(*cert.error_operator);
        }
        records.push_back(std::move(rec));
    }

    std::vector<std::vector<double>> snapshots;
    snapshots.reserve(log.snapshot_count());
    for (std::size_t t = 0; t < log.snapshot_count(); ++t) {
        const std::span<const double> snap = log.snapshot(t);
        snapshots.emplace_back(snap.begin(), snap.end());
    }

    return RunResult{config, std::move(system), x0, std::move(records),
                     state.estimate(), std::move(snapshots)};
}

void emit_csv(const std::vector<StepRecord>& records,
              const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << kRecordsCsvHeader << "\n";
    for (const StepRecord& r : records) {
        out << r.k << ',' << r.observed_rank << ','
            << (r.predicted_rank ? std::to_string(*r.predicted_rank) : "") << ','
            << fmt_opt(r.err_spectral) << ',' << fmt_opt(r.err_frobenius) << ','
            << fmt_opt(r.thm1_bound) << ',' << fmt_opt(r.thm2_bound) << ','
            << fmt_opt(r.thm4_spectral) << ',' << fmt_opt(r.thm4_frobenius) << ','
            << (r.degenerate ? 1 : 0) << ',' << fmt_opt(r.lemma3_residual) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void emit_report(const RunResult& result, const std::filesystem::path& path) {
    const std::vector<StepRecord>& records = result.records;
    const ExperimentConfig& cfg = result.config;
    const double a_frob = frobenius_norm(result.system.a());
    std::ofstream out = open_for_write(path);

    out << "model regression error report\n";
    out << "=============================\n";
    out << "system: " << source_name(cfg.source) << ", n = " << result.system.dimension()
        << ", symmetric = " << (result.system.symmetric() ? "yes" : "no") << "\n";
    if (result.system.spectral_profile()) {
        const SpectralProfile& p = *result.system.spectral_profile();
        out << "spectrum: s = " << p.distinct_count() << " distinct value(s), rank = "
            << p.rank;
        if (p.lambda_star) {
            out << ", lambda* = " << fmt(*p.lambda_star);
        } else {
            out << ", all eigenvalues simple";
        }
        out << "\n";
    }
    out << "steps: " << cfg.steps << ", seed: " << cfg.seed
        << ", rank tolerance: " << fmt(cfg.rank_tolerance) << "\n";
    out << "rank convention: X_k holds k+1 snapshots, so the predicted rank law reads "
           "min(k+1, s)\n";
    out << "||A||_F = " << fmt(a_frob) << "\n\n";

    out << "k, rank(obs/pred), err_2, err_F, degenerate\n";
    for (const StepRecord& r : records) {
        out << r.k << ", " << r.observed_rank << "/"
            << (r.predicted_rank ? std::to_string(*r.predicted_rank) : "-") << ", "
            << fmt_opt(r.err_spectral) << ", " << fmt_opt(r.err_frobenius) << ", "
            << (r.degenerate ? "yes" : "no") << "\n";
    }
    out << "\nchecks\n------\n";

    // Theorem 1: identity and spectral dominance on non-degenerate steps.
    {
        double worst_identity = 0.0;
        double worst_margin = 0.0;
        std::size_t applicable = 0;
        for (const StepRecord& r : records) {
            if (!r.thm1_identity_residual) continue;
            ++applicable;
            worst_identity = std::max(worst_identity, *r.thm1_identity_residual);
            if (r.error_operator_norm && r.thm1_bound) {
                worst_margin =
                    std::max(worst_margin, *r.error_operator_norm - *r.thm1_bound);
            }
        }
        if (applicable == 0) {
            out << "thm1: N/A (all steps degenerate)\n";
        } else if (worst_identity <= kIdentityCheckTolerance &&
                   worst_margin <= kDominanceSlack) {
            out << "thm1: PASS (identity residual max " << fmt(worst_identity)
                << ", ||E_k||_2 within bound at every non-degenerate step)\n";
        } else {
            out << "thm1: FAIL (identity residual max " << fmt(worst_identity)
                << ", worst bound margin " << fmt(worst_margin) << ")\n";
        }
    }

    // Theorem 2 dominance (singular-value reading; signed reading shown too).
    {
        bool any = false, ok = true;
        double worst = -1e300;
        for (const StepRecord& r : records) {
            if (!r.thm2_bound || !r.err_frobenius) continue;
            any = true;
            const double lhs = *r.err_frobenius * *r.err_frobenius;
            worst = std::max(worst, lhs - *r.thm2_bound);
            if (lhs > *r.thm2_bound + kDominanceSlack) ok = false;
        }
        if (!any) {
            std::string reason = "hypotheses not met";
            if (!result.system.symmetric()) {
                reason = "system not symmetric";
            } else if (result.system.spectral_profile() &&
                       !result.system.spectral_profile()->all_simple()) {
                reason = "repeated eigenvalues present";
            }
            out << "thm2: N/A (" << reason << ")\n";
        } else if (ok) {
            out << "thm2: PASS (||A-A_hat||_F^2 <= bound at every applicable step; "
                   "worst margin "
                << fmt(worst) << ")\n";
            for (const StepRecord& r : records) {
                if (r.thm2_bound) {
                    out << "  k=" << r.k << ": bound " << fmt(*r.thm2_bound)
                        << " (sqrt " << fmt(std::sqrt(std::max(0.0, *r.thm2_bound)))
                        << "), signed-eigenvalue reading "
                        << fmt_opt(r.thm2_bound_signed) << "\n";
                }
            }
        } else {
            out << "thm2: FAIL (worst squared-error margin " << fmt(worst) << ")\n";
        }
    }

    // Theorem 3 rank law.
    {
        bool any = false, ok = true;
        for (const StepRecord& r : records) {
            if (!r.predicted_rank) continue;
            any = true;
            if (r.observed_rank != *r.predicted_rank) ok = false;
        }
        if (!any) {
            out << "thm3: N/A (system not symmetric)\n";
        } else {
            out << (ok ? "thm3: PASS (observed rank equals min(k+1, s) at every step)\n"
                       : "thm3: FAIL (numeric rank at the configured tolerance deviates "
                         "from min(k+1, s))\n");
        }
    }

    // Theorem 4 exact error floor.
    {
        bool any = false, ok = true;
        double measured = 0.0, predicted = 0.0;
        for (const StepRecord& r : records) {
            if (!r.thm4_spectral || !r.err_spectral) continue;
            any = true;
            measured = *r.err_spectral;
            predicted = *r.thm4_spectral;
            if (std::abs(measured - predicted) >
                kErrorFloorSpectralTolerance * std::max(predicted, 1e-300)) {
                ok = false;
            }
            if (r.thm4_frobenius && r.err_frobenius) {
                const double lhs = *r.err_frobenius * *r.err_frobenius;
                const double rhs = *r.thm4_frobenius * *r.thm4_frobenius;
                if (std::abs(lhs - rhs) > kErrorFloorFrobeniusTolerance) ok = false;
            }
        }
        if (!any) {
            std::string reason = "k < s at every recorded step";
            if (!result.system.symmetric()) {
                reason = "system not symmetric";
            } else if (result.system.spectral_profile() &&
                       result.system.spectral_profile()->all_simple()) {
                reason = "all eigenvalues simple";
            }
            out << "thm4: N/A (" << reason << ")\n";
        } else if (ok) {
            out << "thm4: PASS (measured spectral error " << fmt(measured)
                << " vs predicted lambda* " << fmt(predicted) << ")\n";
        } else {
            out << "thm4: FAIL (measured " << fmt(measured) << " vs predicted "
                << fmt(predicted) << ")\n";
        }
    }

    // Lemma 3 nullspace structure.
    {
        bool any = false, ok = true;
        double worst = 0.0;
        for (const StepRecord& r : records) {
            if (!r.lemma3_residual) continue;
            any = true;
            worst = std::max(worst, *r.lemma3_residual);
            if (*r.lemma3_residual > kNullspaceResidualTolerance) ok = false;
        }
        if (!any) {
            out << "lemma3: N/A (rank never saturated at s)\n";
        } else {
            out << (ok ? "lemma3: PASS (max residual " : "lemma3: FAIL (max residual ")
                << fmt(worst) << ")\n";
        }
    }

    if (!out) throw IoError("write failed: " + path.string());
}

void emit_plot_script(const std::vector<StepRecord>& records,
                      const std::string& csv_filename,
                      const std::filesystem::path& path) {
    if (records.empty()) throw InvalidInputError("emit_plot_script: no records");
    std::ofstream out = open_for_write(path);
    out << R"PY(#!/usr/bin/env python3
"""Bar chart of the model regression error per step with bound overlays."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
csv_path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, ")PY"
        << csv_filename << R"PY(")

rows = []
with open(csv_path, newline="") as fh:
    for row in csv.DictReader(fh):
        rows.append(row)

def column(name):
    out = []
    for row in rows:
        cell = row[name]
        out.append(float(cell) if cell else None)
    return out

k = [int(row["k"]) for row in rows]
err2 = column("err_spectral")
errF = column("err_frobenius")
thm1 = column("thm1_bound")
thm2 = column("thm2_bound")
thm4s = column("thm4_spectral")
thm4f = column("thm4_frobenius")

fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)

def overlay(ax, xs, ys, label, style):
    pts = [(x, y) for x, y in zip(xs, ys) if y is not None]
    if pts:
        ax.plot([p[0] for p in pts], [p[1] for p in pts], style, label=label)

top.bar(k, [e if e is not None else 0.0 for e in err2], color="steelblue",
        label="||A - A_hat_k||_2")
overlay(top, k, thm1, "error-operator bound ||I - S P / tr||_2", "r--o")
overlay(top, k, thm4s, "repeated-spectrum floor lambda*", "k:")
top.set_ylabel("spectral norm")
top.set_yscale("symlog", linthresh=1e-12)
top.legend(loc="best", fontsize=8)

bottom.bar(k, [e if e is not None else 0.0 for e in errF], color="darkseagreen",
           label="||A - A_hat_k||_F")
overlay(bottom, k, [None if b is None else max(b, 0.0) ** 0.5 for b in thm2],
        "sqrt of simple-spectrum bound", "r--o")
overlay(bottom, k, thm4f, "repeated-spectrum Frobenius floor", "k:")
bottom.set_ylabel("Frobenius norm")
bottom.set_xlabel("step k")
bottom.set_yscale("symlog", linthresh=1e-12)
bottom.legend(loc="best", fontsize=8)

fig.suptitle("model regression error vs. theoretical bounds")
out_png = os.path.splitext(csv_path)[0] + ".png"
fig.savefig(out_png, dpi=150, bbox_inches="tight")
print(out_png)
)PY";
    if (!out) throw IoError("write failed: " + path.string());
}

void write_matrix_csv(const DenseMatrix& m, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    out << "# " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << fmt(m(i, j));
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_outputs(const RunResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    emit_csv(result.records, out_dir / "records.csv");
    emit_report(result, out_dir / "report.txt");
    emit_plot_script(result.records, "records.csv", out_dir / "plot.py");

    {
        std::ofstream out = open_for_write(out_dir / "snapshots.csv");
        for (const std::vector<double>& snap : result.snapshots) {
            for (std::size_t j = 0; j < snap.size(); ++j) {
                if (j) out << ',';
                out << fmt(snap[j]);
            }
            out << "\n";
        }
        if (!out) throw IoError("write failed: snapshots.csv");
    }

    write_matrix_csv(result.model, out_dir / "model.csv");

    {
        std::ofstream out = open_for_write(out_dir / "run_config.json");
        out << result.config.to_json_text();
        if (!out) throw IoError("write failed: run_config.json");
    }
}

FitResult fit_external(const std::filesystem::path& csv_path, const FitOptions& options) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open data: " + csv_path.string());

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        std::vector<double> row;
        std::size_t field_no = 0;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            ++field_no;
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            std::string cell = line.substr(pos, comma - pos);
            const std::size_t begin = cell.find_first_not_of(" \t");
            const std::size_t end = cell.find_last_not_of(" \t");
            cell = begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1);

            double value = 0.0;
            const auto [ptr, errc] =
                std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (errc != std::errc() || ptr != cell.data() + cell.size()) {
                throw ParseError("row " + std::to_string(line_no) + ", column " +
                                     std::to_string(field_no) + ": cannot parse '" +
                                     cell + "' as a number",
                                 line_no, field_no);
            }
            if (!std::isfinite(value)) {
                throw ParseError("non-finite value at row " + std::to_string(line_no) +
                                     ", column " + std::to_string(field_no),
                                 line_no, field_no);
            }
            row.push_back(value);
            pos = comma + 1;
        }
        if (width == 0) {
            width = row.size();
        } else if (row.size() != width) {
            throw ParseError("row " + std::to_string(line_no) + " has " +
                                 std::to_string(row.size()) + " fields, expected " +
                                 std::to_string(width),
                             line_no, row.size());
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw InvalidInputError("fit_external: need at least 2 data rows");
    }

    SnapshotLog log(rows.front());
    for (std::size_t i = 1; i < rows.size(); ++i) log.append(rows[i]);

    FitResult result;
    result.state_dimension = width;
    result.snapshot_count = rows.size();
    result.model = fit_batch(log, options.rank_tolerance);

    for (std::size_t kk = 0; kk <= log.k(); ++kk) {
        DenseMatrix x = log.x_prefix(kk);
        DenseMatrix y(width, kk + 1);
        for (std::size_t j = 0; j <= kk; ++j) y.set_column(j, log.snapshot(j + 1));
        const DenseMatrix model_k =
            kernels::multiply(y, pseudo_inverse(x, options.rank_tolerance));
        const double residual = frobenius_norm(y - kernels::multiply(model_k, x));
        result.steps.push_back(
            {kk, numeric_rank(x, options.rank_tolerance), residual});
    }
    return result;
}

void write_fit_outputs(const FitResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    write_matrix_csv(result.model, out_dir / "model.csv");
    std::ofstream out = open_for_write(out_dir / "fit_records.csv");
    out << "k,observed_rank,residual_frobenius\n";
    for (const FitStep& s : result.steps) {
        out << s.k << ',' << s.observed_rank << ',' << fmt(s.residual_frobenius) << "\n";
    }
    if (!out) throw IoError("write failed: fit_records.csv");
}

}  // namespace lsqcert
