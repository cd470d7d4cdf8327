#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hck/geometry.hpp"
#include "hck/regression.hpp"
#include "hck/spectrum.hpp"
#include "hck/theory.hpp"

namespace hck {

struct ExperimentConfig {
    std::string name = "custom";
    Architecture teacher;
    Architecture student;
    Space space = Space::Multisphere;
    int stride = 0;  // 0 = patch size
    std::vector<int> n_list = {128, 256, 512, 1024, 2048, 4096, 8192};
    int n_test = 8192;
    int trials = 16;
    std::uint64_t master_seed = 42;
    RidgePolicy ridge_policy = RidgePolicy::Ridgeless;
    double fixed_lambda = 0.0;
    std::vector<double> lambda_grid;  // OptimalGrid policy; default grid if empty
    double noise_std = 0.0;
    bool with_replica = false;

    void validate() const;
    std::string canonical_string() const;
    std::uint64_t hash() const;  // FNV-1a of the canonical string

    static ExperimentConfig from_toml_file(const std::string& path);
};

struct LearningCurveReport {
    ExperimentConfig config;
    LearningCurveResult curve;
    double predicted_beta = 0.0;
    double bound_beta = 0.0;
    std::vector<double> replica_curve;        // per n; empty when disabled
    std::vector<double> spectral_bias_curve;  // per n; empty when disabled
    double wall_seconds = 0.0;
};

LearningCurveReport run_experiment(const ExperimentConfig& config, int threads = 0);

// Writes curve.csv (n, mean_error, std_error; config hash in the first line)
// and meta.json into `dir`.
void write_report(const LearningCurveReport& report, const std::string& dir);

struct SectorFitReport {
    int sector = 1;
    PowerLawFit fit;
    double predicted_slope = 0.0;  // -(2ν + d_eff(l))
};

struct SpectrumRunReport {
    SpectrumTable table;
    std::vector<SectorFitReport> sector_fits;
    double location_degeneracy_rel = 0.0;  // worst spread across locations
    double nullspace_max_abs = 0.0;        // largest |Λ| among null modes
    double mercer_residual = 0.0;
    std::optional<PowerLawFit> rank_fit;
    double capacity_alpha = 0.0;
};

// Computes the spectrum of the architecture kernel (Fourier for s_1 = 2,
// quadrature for s_1 >= 3), classifies sectors, fits per-sector slopes
// against -(2ν + d_eff(l)) and writes spectrum.csv / meta.json when
// out_dir is nonempty. grid/quad_order of 0 pick documented defaults.
SpectrumRunReport run_spectrum(const Architecture& arch, int k_max, long grid,
                               int quad_order, const std::string& out_dir);

// Replica and spectral-bias error predictions from matched-basis spectra.
struct TheoryCurve {
    std::vector<int> n_list;
    std::vector<double> replica;
    std::vector<double> spectral_bias;
};

// Builds aligned student/teacher spectra (shallow fast path when both are
// shallow with s_1 = 2, dense transform for p <= 2), extends the tail, and
// evaluates both predictors at ridge λ.
TheoryCurve theory_curve(const Architecture& student, const Architecture& teacher,
                         const std::vector<int>& n_list, double lambda, int k_max,
                         long grid);
void write_theory_curve_csv(const TheoryCurve& curve, const std::string& path);

// CSV ingestion: numeric columns, labels in the last column; optional
// per-patch normalisation onto the multisphere. Parse failures name the line.
std::pair<RowMatrix, Eigen::VectorXd> ingest_dataset(const std::string& path,
                                                     const std::string& format,
                                                     int patch_size, bool normalize);
void write_dataset_csv(const RowMatrix& features, const Eigen::VectorXd& labels,
                       const std::string& path);

struct ReportFit {
    double beta_hat = 0.0;
    double beta_stderr = 0.0;
    double predicted_beta = 0.0;
    std::uint64_t config_hash = 0;
};

// Refits the exponent from a written curve.csv; refuses a report whose
// embedded hash disagrees with the meta.json sidecar unless force is set.
ReportFit fit_report_exponent(const std::string& curve_csv, bool force = false);

struct Preset {
    std::string name;
    std::string description;
    ExperimentConfig config;
    double expected_beta = 0.0;
    double beta_tolerance = 0.0;
};

const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace hck
