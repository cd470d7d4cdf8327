// Acceptance suite: one pass/fail line per criterion, exit code equal to the
// number of failures. `--list` shows the criteria, `--only N [M ...]` runs a
// subset. Expensive shared artifacts (the teacher-student curves) are cached
// across criteria within a run.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "hck/harness.hpp"
#include "hck/rng.hpp"

using namespace hck;
namespace fs = std::filesystem;

namespace {

struct Ctx {
    std::map<std::string, LearningCurveReport> reports;

    const LearningCurveReport& preset_report(const std::string& name, int trials_override = 0) {
        const std::string key = name + (trials_override ? ":" + std::to_string(trials_override)
                                                        : "");
        auto it = reports.find(key);
        if (it != reports.end()) return it->second;
        const Preset* p = find_preset(name);
        if (!p) throw std::runtime_error("unknown preset " + name);
        ExperimentConfig cfg = p->config;
        if (trials_override) cfg.trials = trials_override;
        std::printf("    [running preset %s: trials=%d, n up to %d]\n", name.c_str(),
                    cfg.trials, cfg.n_list.back());
        std::fflush(stdout);
        return reports.emplace(key, run_experiment(cfg)).first->second;
    }
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

bool within(double value, double target, double tol, std::string& detail,
            const std::string& label) {
    const bool ok = std::abs(value - target) <= tol;
    detail += fmt("%s%s = %.4f (want %.4f +- %.3f)", detail.empty() ? "" : "; ",
                  label.c_str(), value, target, tol);
    return ok;
}

// ---------------------------------------------------------------------------

bool criterion_kappa_values(Ctx&, std::string& detail) {
    bool ok = true;
    ok &= std::abs(kappa0(1.0) - 1.0) <= 1e-12;
    ok &= std::abs(kappa0(-1.0)) <= 1e-12;
    ok &= std::abs(kappa1(1.0) - 1.0) <= 1e-12;
    ok &= std::abs(kappa1(-1.0)) <= 1e-12;
    ok &= std::abs(kappa1(0.0) - 1.0 / std::numbers::pi) <= 1e-12;
    detail = fmt("worst deviation %.2e",
                 std::max({std::abs(kappa0(1.0) - 1.0), std::abs(kappa0(-1.0)),
                           std::abs(kappa1(1.0) - 1.0), std::abs(kappa1(-1.0)),
                           std::abs(kappa1(0.0) - 1.0 / std::numbers::pi)}));
    return ok;
}

bool criterion_ntk_self_value(Ctx&, std::string& detail) {
    Rng rng(2024);
    bool ok = true;
    double worst = 0.0;
    for (int L = 1; L <= 4; ++L)
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<int> filters;
            for (int l = 0; l < L; ++l)
                filters.push_back(2 + static_cast<int>(rng.next_u64() % 3));
            const int top = 1 + static_cast<int>(rng.next_u64() % 3);
            const Architecture arch = make_arch(filters, top, KernelKind::NTK);
            OverlapTable ones;
            ones.values.assign(static_cast<std::size_t>(arch.patch_count(1)), 1.0);
            const double dev = std::abs(ntk(arch, ones) - (L + 1.0));
            worst = std::max(worst, dev);
            ok &= dev <= 1e-9;
        }
    detail = fmt("worst |NTK(1) - (L+1)| = %.2e over L = 1..4", worst);
    return ok;
}

bool criterion_monte_carlo(Ctx&, std::string& detail) {
    const Architecture arch = make_arch({2, 2}, 1, KernelKind::RFK);
    const InputBatch batch = sample_inputs(Space::Multisphere, arch, 20, 31415);
    std::vector<std::pair<int, int>> pairs;
    for (int q = 0; q < 10; ++q) pairs.emplace_back(2 * q, 2 * q + 1);
    const auto estimates =
        monte_carlo_rfk_pairs(arch, {1024, 1024}, 10000, batch.points, pairs, 2718);
    bool ok = true;
    double worst = 0.0;
    for (int q = 0; q < 10; ++q) {
        const Eigen::VectorXd x = batch.points.row(pairs[q].first);
        const Eigen::VectorXd y = batch.points.row(pairs[q].second);
        const double exact = rfk(arch, overlaps(x, y, arch));
        const double sigmas =
            std::abs(estimates[q].estimate - exact) / estimates[q].standard_error;
        worst = std::max(worst, sigmas);
        ok &= sigmas <= 3.0;
    }
    detail = fmt("10 pairs, worst deviation %.2f standard errors", worst);
    return ok;
}

bool criterion_local_decay(Ctx&, std::string& detail) {
    const auto nt = eigenvalues_fourier(make_arch({2}, 1, KernelKind::NTK), 256, 1L << 16);
    const auto nfit = fit_power_law(sector_modes(nt, 1, 1e-14 * nt.max_eigenvalue()), 16, 256);
    const auto rt = eigenvalues_fourier(make_arch({2}, 1, KernelKind::RFK), 256, 1L << 16);
    const auto rfit = fit_power_law(sector_modes(rt, 1, 1e-14 * rt.max_eigenvalue()), 16, 256);
    bool ok = within(nfit.exponent, -2.0, 0.05, detail, "NTK slope");
    ok &= within(rfit.exponent, -4.0, 0.10, detail, "RFK slope");
    return ok;
}

bool criterion_global_decay(Ctx&, std::string& detail) {
    const auto table = eigenvalues_fourier(make_arch({2, 2}, 1, KernelKind::NTK), 256, 4096);
    const auto pts = diagonal_modes(table, 2, 1e-14 * table.max_eigenvalue());
    const auto fit = fit_power_law(pts, 16.0 * std::numbers::sqrt2,
                                   256.0 * std::numbers::sqrt2);
    return within(fit.exponent, -3.0, 0.10, detail, "diagonal slope");
}

bool criterion_sector_structure(Ctx&, std::string& detail) {
    const SpectrumRunReport rep =
        run_spectrum(make_arch({2, 2}, 1, KernelKind::NTK), 512, 8192, 0, "");
    bool ok = true;
    for (const auto& sf : rep.sector_fits) {
        if (sf.sector == 1) ok &= within(sf.fit.exponent, -2.0, 0.05, detail, "sector-1");
        if (sf.sector == 2) ok &= within(sf.fit.exponent, -3.0, 0.10, detail, "sector-2");
    }
    detail += fmt("; location spread %.2e", rep.location_degeneracy_rel);
    ok &= rep.location_degeneracy_rel <= 1e-8;

    // modes coupling distinct readout windows are null (p_L = 2 configs)
    const auto wide = eigenvalues_fourier(make_arch({2, 2}, 2, KernelKind::NTK), 12, 64);
    const double cut = 1e-10 * wide.max_eigenvalue();
    double worst_null = 0.0;
    for (const auto& e : wide.entries)
        if (e.sector == kSectorNullSpace) worst_null = std::max(worst_null, std::abs(e.eigenvalue));
    detail += fmt("; null-space max %.2e (cut %.2e)", worst_null, cut);
    ok &= worst_null <= cut;
    return ok;
}

bool criterion_mercer(Ctx&, std::string& detail) {
    const Architecture n = make_arch({2}, 1, KernelKind::NTK);
    const double rn = mercer_sum_check(eigenvalues_fourier(n, 512, 1L << 16), n);
    const Architecture r = make_arch({2}, 1, KernelKind::RFK);
    const double rr = mercer_sum_check(eigenvalues_fourier(r, 512, 1L << 16), r);
    detail = fmt("NTK residual %.2e (cap %.0e), RFK residual %.2e (cap %.0e)", std::abs(rn),
                 1e-2 * 2.0, std::abs(rr), 1e-4);
    return std::abs(rn) <= 1e-2 * 2.0 && std::abs(rr) <= 1e-4;
}

bool criterion_rank_decay(Ctx&, std::string& detail) {
    const Architecture arch = make_arch({2, 2}, 1, KernelKind::NTK);
    const auto table = eigenvalues_fourier(arch, 256, 4096);
    const auto fit = rank_decay(table);
    const double alpha = capacity_exponent(arch);
    bool ok = within(fit.exponent, -1.5, 0.10, detail, "rank slope");
    ok &= within(fit.exponent, -alpha, 0.10, detail, "vs -capacity");
    return ok;
}

bool criterion_learning_curves(Ctx& ctx, std::string& detail) {
    bool ok = true;
    ok &= within(ctx.preset_report("matched-shallow").curve.beta_hat, 1.0, 0.15, detail,
                 "matched shallow");
    ok &= within(ctx.preset_report("deep2-on-shallow").curve.beta_hat, 0.75, 0.10, detail,
                 "[2,2] on [2]");
    ok &= within(ctx.preset_report("matched-deep2").curve.beta_hat, 0.5, 0.10, detail,
                 "matched [2,2]");
    ok &= within(ctx.preset_report("deep3-on-shallow").curve.beta_hat, 0.625, 0.10, detail,
                 "[2,2,2] on [2]");
    return ok;
}

bool criterion_hierarchical_curse(Ctx& ctx, std::string& detail) {
    return within(ctx.preset_report("rfk-matched-deep2").curve.beta_hat, 1.5, 0.20, detail,
                  "matched RFK [2,2]");
}

bool criterion_replica_agreement(Ctx& ctx, std::string& detail) {
    const auto& report = ctx.preset_report("matched-shallow");
    if (report.replica_curve.empty()) {
        detail = "no replica curve attached";
        return false;
    }
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < report.curve.points.size(); ++i) {
        const auto& p = report.curve.points[i];
        if (p.n < 512) continue;
        const double rel = std::abs(report.replica_curve[i] - p.mean_error) / p.mean_error;
        worst = std::max(worst, rel);
        ok &= rel <= 0.20;
    }
    detail = fmt("worst relative deviation %.3f for n >= 512", worst);
    return ok;
}

bool criterion_noisy_optimal_ridge(Ctx& ctx, std::string& detail) {
    const auto& noisy = ctx.preset_report("noisy-optimal-deep2");
    const Architecture student = noisy.config.student;
    const TargetSpec target = target_from_teacher(student, noisy.config.teacher);
    const double alpha = capacity_exponent(student);
    const double r = source_exponent(student, target);
    const double want = -alpha / (alpha * r + 1.0);

    // slope of log lambda* against log n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& p : noisy.curve.points) {
        if (p.mean_optimal_lambda <= 0.0) continue;
        const double x = std::log(double(p.n)), y = std::log(p.mean_optimal_lambda);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    bool ok = within(slope, want, 0.2 * std::abs(want), detail, "lambda* slope");

    // noisy optimally-regularised decay is slower than noiseless ridgeless
    const double beta_noiseless = ctx.preset_report("matched-deep2").curve.beta_hat;
    detail += fmt("; beta noisy %.3f < noiseless %.3f", noisy.curve.beta_hat, beta_noiseless);
    ok &= noisy.curve.beta_hat < beta_noiseless;
    return ok;
}

bool criterion_robustness(Ctx& ctx, std::string& detail) {
    bool ok = true;
    ok &= within(ctx.preset_report("hypercube-shallow", 8).curve.beta_hat, 1.0, 0.15, detail,
                 "hypercube");
    ok &= within(ctx.preset_report("overlap-shallow", 8).curve.beta_hat, 1.0, 0.15, detail,
                 "overlap");
    return ok;
}

bool criterion_determinism(Ctx&, std::string& detail) {
    ExperimentConfig cfg;
    cfg.name = "determinism-probe";
    cfg.teacher = make_arch({2}, 4, KernelKind::NTK);
    cfg.student = cfg.teacher;
    cfg.n_list = {64, 128, 256};
    cfg.n_test = 256;
    cfg.trials = 4;
    cfg.master_seed = 99;

    const fs::path base = fs::temp_directory_path() / "hck_acceptance_det";
    fs::remove_all(base);
    const auto run_with_threads = [&](int threads, const std::string& tag) {
        omp_set_num_threads(threads);
        write_report(run_experiment(cfg), (base / tag).string());
        std::ifstream in(base / tag / "curve.csv", std::ios::binary);
        return std::string{std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>()};
    };
    const std::string a = run_with_threads(2, "t2");
    const std::string b = run_with_threads(1, "t1");
    const std::string c = run_with_threads(2, "t2b");
    omp_set_num_threads(omp_get_num_procs());
    fs::remove_all(base);
    detail = fmt("curve.csv of %zu bytes, byte-identical across reruns and thread counts",
                 a.size());
    return !a.empty() && a == b && a == c;
}

struct Criterion {
    int id;
    const char* title;
    bool (*run)(Ctx&, std::string&);
};

const Criterion kCriteria[] = {
    {1, "arc-cosine boundary values", criterion_kappa_values},
    {2, "NTK self-value L+1", criterion_ntk_self_value},
    {3, "Monte-Carlo covariance vs analytic RFK", criterion_monte_carlo},
    {4, "local-sector decay, shallow kernels", criterion_local_decay},
    {5, "global-sector decay, two hidden layers", criterion_global_decay},
    {6, "sector structure, degeneracy and null space", criterion_sector_structure},
    {7, "truncated Mercer sum rule", criterion_mercer},
    {8, "rank-ordered decay vs capacity", criterion_rank_decay},
    {9, "teacher-student learning-curve exponents", criterion_learning_curves},
    {10, "curse for hierarchical RFK targets", criterion_hierarchical_curse},
    {11, "replica prediction vs experiment", criterion_replica_agreement},
    {12, "noisy labels and the optimal-ridge schedule", criterion_noisy_optimal_ridge},
    {13, "hypercube inputs and overlapping windows", criterion_robustness},
    {14, "byte-identical reruns across thread counts", criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto& c : kCriteria) std::printf("%2d  %s\n", c.id, c.title);
            return 0;
        }
        if (std::strcmp(argv[i], "--only") == 0) continue;
        only.insert(std::atoi(argv[i]));
    }

    Ctx ctx;
    int failures = 0;
    const auto suite_start = std::chrono::steady_clock::now();
    for (const auto& c : kCriteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(ctx, detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d [%s] %-46s (%8.1f s)  %s\n", c.id, ok ? "PASS" : "FAIL",
                    c.title, secs, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
    std::printf("%d criterion(s) failed, total %.1f s\n", failures, total);
    return failures;
}
