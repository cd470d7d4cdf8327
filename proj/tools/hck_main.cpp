// Command-line front end: spectrum computation, teacher-student learning
// curves, replica predictions, report fitting, dataset ingestion and the
// preset scenarios.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "hck/harness.hpp"

namespace fs = std::filesystem;
using namespace hck;

namespace {

Architecture arch_from_flags(const std::string& filters, int top, const std::string& kind) {
    std::vector<int> f;
    std::string cur;
    for (char c : filters + ",") {
        if (c == ',') {
            if (!cur.empty()) f.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return make_arch(f, top, kernel_kind_from_string(kind));
}

int report_learning(const LearningCurveReport& report, const std::string& out, bool do_assert,
                    double tolerance) {
    if (!out.empty()) write_report(report, out);
    std::printf("%-22s beta_hat = %.4f +- %.4f   predicted = %.4f   bound = %.4f\n",
                report.config.name.c_str(), report.curve.beta_hat, report.curve.beta_stderr,
                report.predicted_beta, report.bound_beta);
    for (const auto& p : report.curve.points)
        std::printf("  n=%6d  error = %.6e +- %.6e  (%d/%d trials)\n", p.n, p.mean_error,
                    p.std_error, p.survivors, report.config.trials);
    if (!do_assert) return 0;
    const bool ok = std::abs(report.curve.beta_hat - report.predicted_beta) <= tolerance;
    std::printf("assert: |beta_hat - predicted| = %.4f %s %.4f -> %s\n",
                std::abs(report.curve.beta_hat - report.predicted_beta), ok ? "<=" : ">",
                tolerance, ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical convolutional kernel toolbox"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker pool size (0 = all cores)");

    // ---- spectrum ----
    auto* sp = app.add_subcommand("spectrum", "kernel eigenvalues, sectors and decay fits");
    std::string sp_filters = "2,2", sp_kind = "ntk", sp_out;
    int sp_top = 1, sp_kmax = 256, sp_quad = 0;
    long sp_grid = 0;
    bool sp_assert = false;
    sp->add_option("--filters", sp_filters, "comma-separated filter sizes");
    sp->add_option("--top", sp_top, "readout windows p_L");
    sp->add_option("--kind", sp_kind, "rfk | ntk");
    sp->add_option("--kmax", sp_kmax, "largest mode index per patch");
    sp->add_option("--grid", sp_grid, "angle grid size (s1=2; 0 = default)");
    sp->add_option("--quad", sp_quad, "quadrature order (s1>=3; 0 = default)");
    sp->add_option("--out", sp_out, "output directory");
    sp->add_flag("--assert", sp_assert, "exit nonzero unless fitted slopes match theory");

    // ---- learn ----
    auto* le = app.add_subcommand("learn", "teacher-student learning curve from a TOML config");
    std::string le_config, le_out;
    bool le_assert = false;
    std::uint64_t le_seed = 0;
    bool le_seed_set = false;
    le->add_option("--config", le_config, "TOML experiment config")->required();
    le->add_option("--out", le_out, "output directory");
    le->add_option("--seed", le_seed, "override the master seed")
        ->each([&](const std::string&) { le_seed_set = true; });
    le->add_flag("--assert", le_assert, "exit nonzero unless beta_hat matches the prediction");

    // ---- replica ----
    auto* re = app.add_subcommand("replica", "replica / spectral-bias error predictions");
    std::string re_sfilters = "2", re_tfilters, re_kind = "ntk", re_out;
    int re_stop = 4, re_ttop = 0, re_kmax = 0;
    double re_lambda = 0.0;
    std::vector<int> re_nlist = {128, 256, 512, 1024, 2048, 4096, 8192};
    re->add_option("--filters", re_sfilters, "student filter sizes");
    re->add_option("--top", re_stop, "student readout windows");
    re->add_option("--teacher-filters", re_tfilters, "teacher filter sizes (default: student)");
    re->add_option("--teacher-top", re_ttop, "teacher readout windows (default: student)");
    re->add_option("--kind", re_kind, "rfk | ntk");
    re->add_option("--kmax", re_kmax, "spectrum truncation (0 = default)");
    re->add_option("--lambda", re_lambda, "ridge in the replica equations");
    re->add_option("--n", re_nlist, "sample sizes");
    re->add_option("--out", re_out, "output directory");

    // ---- fit ----
    auto* fi = app.add_subcommand("fit", "refit the exponent of a written curve.csv");
    std::string fi_report;
    bool fi_force = false;
    fi->add_option("--report", fi_report, "path to curve.csv")->required();
    fi->add_flag("--force", fi_force, "ignore config-hash mismatches");

    // ---- ingest ----
    auto* in = app.add_subcommand("ingest", "load a CSV dataset (labels in the last column)");
    std::string in_path, in_format = "csv", in_out;
    int in_patch = 2;
    bool in_norm = false;
    in->add_option("--input", in_path, "dataset file")->required();
    in->add_option("--format", in_format, "input format (csv)");
    in->add_option("--patch-size", in_patch, "patch size for normalisation checks");
    in->add_flag("--normalize", in_norm, "project patches onto the multisphere");
    in->add_option("--out", in_out, "re-export path (round-trip check)");

    // ---- preset ----
    auto* pr = app.add_subcommand("preset", "built-in experiment scenarios");
    auto* pr_list = pr->add_subcommand("list", "list presets");
    auto* pr_run = pr->add_subcommand("run", "run one preset");
    std::string pr_name, pr_out;
    bool pr_assert = false;
    int pr_trials = 0, pr_nmax = 0;
    std::uint64_t pr_seed = 0;
    bool pr_seed_set = false;
    pr_run->add_option("name", pr_name, "preset name")->required();
    pr_run->add_option("--out", pr_out, "output directory (default: preset name)");
    pr_run->add_option("--seed", pr_seed, "override the master seed")
        ->each([&](const std::string&) { pr_seed_set = true; });
    pr_run->add_option("--trials", pr_trials, "override trial count (reduced-accuracy mode)");
    pr_run->add_option("--n-max", pr_nmax, "truncate the n list (reduced-accuracy mode)");
    pr_run->add_flag("--assert", pr_assert, "exit nonzero unless beta_hat is in tolerance");

    CLI11_PARSE(app, argc, argv);

    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (sp->parsed()) {
            const Architecture arch = arch_from_flags(sp_filters, sp_top, sp_kind);
            const SpectrumRunReport rep = run_spectrum(arch, sp_kmax, sp_grid, sp_quad, sp_out);
            std::printf("%s  k_max=%d  entries=%zu  mercer residual=%.3e\n",
                        arch.to_string().c_str(), rep.table.k_max, rep.table.entries.size(),
                        rep.mercer_residual);
            bool ok = true;
            for (const auto& sf : rep.sector_fits) {
                const double tol = std::max(0.05, 0.025 * std::abs(sf.predicted_slope));
                const bool good = std::abs(sf.fit.exponent - sf.predicted_slope) <= tol;
                ok &= good;
                std::printf("  sector %d: slope %.3f +- %.3f  (theory %.3f)  %s\n", sf.sector,
                            sf.fit.exponent, sf.fit.stderr_, sf.predicted_slope,
                            good ? "ok" : "off");
            }
            if (rep.rank_fit)
                std::printf("  rank decay: %.3f  (theory %.3f)\n", rep.rank_fit->exponent,
                            -rep.capacity_alpha);
            std::printf("  location degeneracy spread: %.2e  null-space max: %.2e\n",
                        rep.location_degeneracy_rel, rep.nullspace_max_abs);
            return sp_assert && !ok ? 1 : 0;
        }

        if (le->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::from_toml_file(le_config);
            if (le_seed_set) cfg.master_seed = le_seed;
            const auto report = run_experiment(cfg, threads);
            return report_learning(report, le_out, le_assert, 0.15);
        }

        if (re->parsed()) {
            const Architecture student = arch_from_flags(re_sfilters, re_stop, re_kind);
            const Architecture teacher =
                re_tfilters.empty()
                    ? student
                    : arch_from_flags(re_tfilters, re_ttop > 0 ? re_ttop : re_stop, re_kind);
            const TheoryCurve tc =
                theory_curve(student, teacher, re_nlist, re_lambda, re_kmax, 0);
            for (std::size_t i = 0; i < tc.n_list.size(); ++i)
                std::printf("n=%6d  replica = %.6e   spectral bias = %.6e\n", tc.n_list[i],
                            tc.replica[i], tc.spectral_bias[i]);
            if (!re_out.empty()) {
                fs::create_directories(re_out);
                write_theory_curve_csv(tc, (fs::path(re_out) / "theory.csv").string());
            }
            return 0;
        }

        if (fi->parsed()) {
            const ReportFit rf = fit_report_exponent(fi_report, fi_force);
            std::printf("beta_hat = %.4f +- %.4f   predicted = %.4f\n", rf.beta_hat,
                        rf.beta_stderr, rf.predicted_beta);
            return 0;
        }

        if (in->parsed()) {
            const auto [X, y] = ingest_dataset(in_path, in_format, in_patch, in_norm);
            std::printf("ingested %ld rows, %ld features\n", static_cast<long>(X.rows()),
                        static_cast<long>(X.cols()));
            if (!in_out.empty()) write_dataset_csv(X, y, in_out);
            return 0;
        }

        if (pr->parsed()) {
            if (pr_list->parsed()) {
                for (const auto& p : presets())
                    std::printf("%-22s beta=%.4f  tol=%.2f  %s\n", p.name.c_str(),
                                p.expected_beta, p.beta_tolerance, p.description.c_str());
                return 0;
            }
            const Preset* preset = find_preset(pr_name);
            if (!preset) {
                std::fprintf(stderr, "unknown preset '%s' (try: hck preset list)\n",
                             pr_name.c_str());
                return 2;
            }
            ExperimentConfig cfg = preset->config;
            if (pr_seed_set) cfg.master_seed = pr_seed;
            if (pr_trials > 0) cfg.trials = pr_trials;
            if (pr_nmax > 0) {
                std::vector<int> trimmed;
                for (int n : cfg.n_list)
                    if (n <= pr_nmax) trimmed.push_back(n);
                cfg.n_list = trimmed;
            }
            const auto report = run_experiment(cfg, threads);
            const std::string out = pr_out.empty() ? preset->name : pr_out;
            int rc = 0;
            if (pr_assert) {
                const bool ok = std::abs(report.curve.beta_hat - preset->expected_beta) <=
                                preset->beta_tolerance;
                rc = ok ? 0 : 1;
            }
            report_learning(report, out, false, 0.0);
            if (pr_assert)
                std::printf("assert: beta_hat %.4f vs %.4f +- %.2f -> %s\n",
                            report.curve.beta_hat, preset->expected_beta,
                            preset->beta_tolerance, rc == 0 ? "pass" : "FAIL");
            return rc;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
