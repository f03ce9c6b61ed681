#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lsqcert/bounds.hpp"
#include "lsqcert/regression.hpp"
#include "lsqcert/system.hpp"

namespace lsqcert {

/// Config-driven experiment: one system source, one initial condition, a
/// step budget, and output controls. Parsed from a single JSON document.
struct ExperimentConfig {
    enum class SystemSource { Explicit, Spectrum, PetersenWeighted, Continuous };

    SystemSource source = SystemSource::PetersenWeighted;
    DenseMatrix matrix;            // Explicit (discrete A) or Continuous (generator)
    std::vector<double> spectrum;  // Spectrum source
    double dt = 0.1;               // Continuous / PetersenWeighted
    std::uint64_t system_seed = 1; // orthogonal basis seed for Spectrum

    std::optional<std::vector<double>> x0;  // explicit initial state; else Gaussian
    std::size_t steps = 10;
    double rank_tolerance = kDefaultRankTolerance;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool record_spectral = true;
    bool record_frobenius = true;

    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    static ExperimentConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

/// One CSV row. Absent bounds serialize as empty fields, never as zeros.
struct StepRecord {
    std::size_t k = 0;
    std::size_t observed_rank = 0;
    std::optional<std::size_t> predicted_rank;
    std::optional<double> err_spectral;
    std::optional<double> err_frobenius;
    std::optional<double> thm1_bound;
    std::optional<double> thm2_bound;
    std::optional<double> thm4_spectral;
    std::optional<double> thm4_frobenius;
    bool degenerate = false;
    std::optional<double> lemma3_residual;

    // Diagnostics carried in memory for the report; not CSV columns.
    std::optional<double> thm1_identity_residual;  // ||A_hat - A(I-E)||_F / ||A||_F
    std::optional<double> error_operator_norm;     // ||E_k||_2
    std::optional<double> thm2_bound_signed;
};

inline constexpr const char* kRecordsCsvHeader =
    "k,observed_rank,predicted_rank,err_spectral,err_frobenius,thm1_bound,"
    "thm2_bound,thm4_spectral,thm4_frobenius,degenerate,lemma3_residual";

struct RunResult {
    ExperimentConfig config;  // resolved (seed and defaults filled in)
    LtiSystem system;
    std::vector<double> x0;
    std::vector<StepRecord> records;
    DenseMatrix model;  // final estimate
    std::vector<std::vector<double>> snapshots;  // x0 .. x_{steps+1}
};

/// Simulates, ingests step by step, certifies, and collects one record per
/// step 1..steps. Deterministic given the seed.
RunResult run(const ExperimentConfig& config);

void emit_csv(const std::vector<StepRecord>& records, const std::filesystem::path& path);
void emit_report(const RunResult& result, const std::filesystem::path& path);
void emit_plot_script(const std::vector<StepRecord>& records,
                      const std::string& csv_filename,
                      const std::filesystem::path& path);

/// Writes records.csv, report.txt, plot.py, snapshots.csv, model.csv and
/// run_config.json under out_dir.
void write_outputs(const RunResult& result, const std::filesystem::path& out_dir);

/// Matrix file: a `# rows cols` comment line, then comma-separated rows with
/// round-trip precision.
void write_matrix_csv(const DenseMatrix& m, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// External time-series fitting (no ground truth, so no certificates; rank
// history and the per-step residual ||Y - A_hat X||_F instead)
// ---------------------------------------------------------------------------

struct FitOptions {
    double rank_tolerance = kDefaultRankTolerance;
};

struct FitStep {
    std::size_t k = 0;
    std::size_t observed_rank = 0;
    double residual_frobenius = 0.0;
};

struct FitResult {
    DenseMatrix model;
    std::vector<FitStep> steps;
    std::size_t state_dimension = 0;
    std::size_t snapshot_count = 0;
};

/// Parses a CSV of T rows x n columns (one state per row, T >= 2) and fits
/// the full stream. Ragged rows or non-numeric/non-finite cells raise
/// ParseError with the row/column location.
FitResult fit_external(const std::filesystem::path& csv_path,
                       const FitOptions& options = {});

/// Writes model.csv and fit_records.csv under out_dir.
void write_fit_outputs(const FitResult& result, const std::filesystem::path& out_dir);

}  // namespace lsqcert
