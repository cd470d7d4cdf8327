#include "hck/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hck/errors.hpp"
#include "hck/rng.hpp"
#include "tomlmini.hpp"

namespace fs = std::filesystem;

namespace hck {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string policy_name(RidgePolicy p) {
    switch (p) {
        case RidgePolicy::Ridgeless: return "ridgeless";
        case RidgePolicy::Fixed: return "fixed";
        case RidgePolicy::OptimalGrid: return "optimal";
    }
    return "?";
}

RidgePolicy policy_from_string(const std::string& s) {
    if (s == "ridgeless") return RidgePolicy::Ridgeless;
    if (s == "fixed") return RidgePolicy::Fixed;
    if (s == "optimal") return RidgePolicy::OptimalGrid;
    throw std::invalid_argument("unknown ridge policy: " + s);
}

}  // namespace

void ExperimentConfig::validate() const {
    teacher.validate();
    student.validate();
    if (teacher.input_dim() != student.input_dim())
        throw std::invalid_argument("config: teacher and student dimensions differ");
    if (n_list.empty() || !std::is_sorted(n_list.begin(), n_list.end()))
        throw std::invalid_argument("config: n_list must be ascending and nonempty");
    if (n_test < 1) throw std::invalid_argument("config: n_test must be >= 1");
    if (trials < 2) throw std::invalid_argument("config: trials must be >= 2");
    if (noise_std < 0.0) throw std::invalid_argument("config: negative noise std");
    if (stride != 0 && stride != 1 && stride != teacher.patch_dim())
        throw std::invalid_argument("config: stride must be 0 (patch size) or 1");
    if (ridge_policy == RidgePolicy::Fixed && fixed_lambda < 0.0)
        throw std::invalid_argument("config: negative fixed ridge");
}

std::string ExperimentConfig::canonical_string() const {
    std::ostringstream os;
    os << "teacher=" << teacher.to_string() << ";student=" << student.to_string()
       << ";space=" << to_string(space) << ";stride=" << stride << ";n=";
    for (int n : n_list) os << n << ",";
    os << ";n_test=" << n_test << ";trials=" << trials << ";seed=" << master_seed
       << ";policy=" << policy_name(ridge_policy) << ";lambda=" << fixed_lambda
       << ";grid=";
    for (double l : lambda_grid) os << l << ",";
    os << ";noise=" << noise_std;
    return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_string()); }

ExperimentConfig ExperimentConfig::from_toml_file(const std::string& path) {
    const auto doc = toml::parse_file(path);
    const auto arch_from = [&](const std::string& table) {
        const auto filters64 = toml::get_int_array(doc, table + ".filters");
        if (filters64.empty())
            throw std::invalid_argument("config: missing " + table + ".filters");
        std::vector<int> filters(filters64.begin(), filters64.end());
        const int top = static_cast<int>(toml::get_int(doc, table + ".top", 1));
        const auto kind = kernel_kind_from_string(toml::get_string(doc, table + ".kind", "ntk"));
        return make_arch(filters, top, kind);
    };

    ExperimentConfig cfg;
    cfg.name = toml::get_string(doc, "name", "custom");
    cfg.teacher = arch_from("teacher");
    cfg.student = arch_from("student");
    cfg.space = space_from_string(toml::get_string(doc, "space", "multisphere"));
    cfg.stride = static_cast<int>(toml::get_int(doc, "stride", 0));
    const auto ns = toml::get_int_array(doc, "n_list");
    if (!ns.empty()) cfg.n_list.assign(ns.begin(), ns.end());
    cfg.n_test = static_cast<int>(toml::get_int(doc, "n_test", cfg.n_test));
    cfg.trials = static_cast<int>(toml::get_int(doc, "trials", cfg.trials));
    cfg.master_seed = static_cast<std::uint64_t>(toml::get_int(doc, "seed", 42));
    cfg.ridge_policy = policy_from_string(toml::get_string(doc, "ridge", "ridgeless"));
    cfg.fixed_lambda = toml::get_double(doc, "fixed_lambda", 0.0);
    const auto grid = toml::get_double_array(doc, "lambda_grid");
    if (!grid.empty()) cfg.lambda_grid = grid;
    cfg.noise_std = toml::get_double(doc, "noise_std", 0.0);
    cfg.with_replica = toml::get_bool(doc, "replica", false);
    cfg.validate();
    return cfg;
}

LearningCurveReport run_experiment(const ExperimentConfig& config, int threads) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();

    LearningCurveSettings s;
    s.teacher = config.teacher;
    s.student = config.student;
    s.space = config.space;
    s.stride = config.stride;
    s.n_list = config.n_list;
    s.n_test = config.n_test;
    s.trials = config.trials;
    s.master_seed = config.master_seed;
    s.policy = config.ridge_policy;
    s.fixed_lambda = config.fixed_lambda;
    s.lambda_grid = config.lambda_grid;
    if (s.policy == RidgePolicy::OptimalGrid && s.lambda_grid.empty())
        s.lambda_grid = log_lambda_grid(1e-7, 1.0, 57);
    s.noise_std = config.noise_std;
    s.threads = threads;

    LearningCurveReport report;
    report.config = config;
    report.curve = learning_curve(s);

    const TargetSpec target = target_from_teacher(config.student, config.teacher);
    report.predicted_beta = predicted_exponent(config.student, target);
    report.bound_beta = bound_exponent(config.student, target);

    if (config.with_replica) {
        const double lam = config.ridge_policy == RidgePolicy::Fixed ? config.fixed_lambda : 0.0;
        const TheoryCurve tc =
            theory_curve(config.student, config.teacher, config.n_list, lam, 0, 0);
        report.replica_curve = tc.replica;
        report.spectral_bias_curve = tc.spectral_bias;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void write_report(const LearningCurveReport& report, const std::string& dir) {
    fs::create_directories(dir);
    const std::string hash = hex64(report.config.hash());

    {
        std::FILE* f = std::fopen((fs::path(dir) / "curve.csv").c_str(), "w");
        if (!f) throw std::runtime_error("cannot open curve.csv in " + dir);
        std::fprintf(f, "# config=%s\n", hash.c_str());
        std::fprintf(f, "n,mean_error,std_error\n");
        for (const auto& p : report.curve.points)
            std::fprintf(f, "%d,%.17g,%.17g\n", p.n, p.mean_error, p.std_error);
        std::fclose(f);
    }

    nlohmann::json j;
    j["name"] = report.config.name;
    j["config_hash"] = hash;
    j["config"] = report.config.canonical_string();
    j["teacher"] = report.config.teacher.to_string();
    j["student"] = report.config.student.to_string();
    j["space"] = to_string(report.config.space);
    j["stride"] = report.config.stride;
    j["n_test"] = report.config.n_test;
    j["trials"] = report.config.trials;
    j["seed"] = report.config.master_seed;
    j["ridge_policy"] = policy_name(report.config.ridge_policy);
    j["noise_std"] = report.config.noise_std;
    j["beta_hat"] = report.curve.beta_hat;
    j["beta_stderr"] = report.curve.beta_stderr;
    j["fit_window"] = {report.curve.fit_window_n_lo, report.curve.fit_window_n_hi};
    j["predicted_beta"] = report.predicted_beta;
    j["bound_beta"] = report.bound_beta;
    j["wall_seconds"] = report.wall_seconds;
    j["n"] = nlohmann::json::array();
    j["mean_error"] = nlohmann::json::array();
    j["std_error"] = nlohmann::json::array();
    j["survivors"] = nlohmann::json::array();
    j["optimal_lambda"] = nlohmann::json::array();
    for (const auto& p : report.curve.points) {
        j["n"].push_back(p.n);
        j["mean_error"].push_back(p.mean_error);
        j["std_error"].push_back(p.std_error);
        j["survivors"].push_back(p.survivors);
        j["optimal_lambda"].push_back(p.mean_optimal_lambda);
    }
    if (!report.replica_curve.empty()) {
        j["replica_error"] = report.replica_curve;
        j["spectral_bias_error"] = report.spectral_bias_curve;
    }
    std::ofstream out(fs::path(dir) / "meta.json");
    out << j.dump(2) << "\n";
}

namespace {

long default_grid(int p) {
    switch (p) {
        case 1: return 1L << 16;
        case 2: return 4096;
        case 3: return 512;
        default: return 256;
    }
}

}  // namespace

SpectrumRunReport run_spectrum(const Architecture& arch, int k_max, long grid,
                               int quad_order, const std::string& out_dir) {
    arch.validate();
    const int p = arch.patch_count(1);
    SpectrumRunReport report;

    if (arch.patch_dim() == 2) {
        if (grid == 0) grid = default_grid(p);
        if (4L * k_max > grid)
            throw resolution_error("run_spectrum: k_max too large for the grid; lower k_max "
                                   "or pass a larger grid");
        report.table = eigenvalues_fourier(arch, k_max, grid);
    } else {
        if (quad_order == 0) quad_order = 8 * k_max;
        report.table = eigenvalues_quadrature(arch, k_max, quad_order);
    }

    const SpectrumTable& table = report.table;
    const double lam_max = table.max_eigenvalue();
    const double thr_fit = 1e-14 * lam_max;
    const double nu = arch.smoothness();

    for (int l = 1; l <= arch.hidden_layers(); ++l) {
        auto pts = l == 1 ? sector_modes(table, 1, thr_fit)
                          : diagonal_modes(table, l, thr_fit);
        if (l == 1) {
            // fit the even degrees: the sector-1 prefactor is parity-dependent
            // and the odd class has larger subleading corrections
            std::erase_if(pts, [](const auto& pt) {
                return static_cast<long>(pt.first) % 2 != 0;
            });
        }
        if (pts.empty()) continue;
        double pos_max = 0.0;
        for (const auto& [x, y] : pts) pos_max = std::max(pos_max, x);
        // default window: the octave and a half below half the resolved range
        const double hi = pos_max / 2.0;
        const double lo = hi / (2.0 * std::numbers::sqrt2);
        SectorFitReport sf;
        sf.sector = l;
        sf.predicted_slope = -(2.0 * nu + effective_dim(arch, l));
        try {
            sf.fit = fit_power_law(pts, lo, hi);
        } catch (const std::exception&) {
            continue;  // sector unread at this k_max (too few modes)
        }
        report.sector_fits.push_back(sf);
    }

    // eigenvalue spread across meta-patch locations with the same in-window
    // pattern; resolved modes only
    {
        std::map<std::string, std::pair<double, double>> spread;
        const double floor = 1e-6 * lam_max;
        for (const auto& e : table.entries) {
            if (e.sector < 1 || e.eigenvalue < floor) continue;
            const int width = table.arch.meta_patch_size(e.sector) / table.arch.patch_dim();
            int first = 0;
            while (e.k[first] == 0) ++first;
            const int base = (first / width) * width;
            std::string key = std::to_string(e.sector) + ":";
            for (int i = 0; i < width; ++i) key += std::to_string(e.k[base + i]) + ",";
            auto [it, fresh] = spread.emplace(key, std::make_pair(e.eigenvalue, e.eigenvalue));
            if (!fresh) {
                it->second.first = std::min(it->second.first, e.eigenvalue);
                it->second.second = std::max(it->second.second, e.eigenvalue);
            }
        }
        double worst = 0.0;
        for (const auto& [key, mm] : spread)
            worst = std::max(worst, (mm.second - mm.first) / mm.second);
        report.location_degeneracy_rel = worst;
    }

    for (const auto& e : table.entries)
        if (e.sector == kSectorNullSpace)
            report.nullspace_max_abs = std::max(report.nullspace_max_abs, std::abs(e.eigenvalue));

    report.mercer_residual = mercer_sum_check(table, arch);
    report.capacity_alpha = capacity_exponent(arch);
    try {
        report.rank_fit = rank_decay(table);
    } catch (const insufficient_tail_error&) {
        report.rank_fit.reset();
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_spectrum_csv(table, (fs::path(out_dir) / "spectrum.csv").string());
        nlohmann::json j;
        j["arch"] = arch.to_string();
        j["config_hash"] = hex64(arch.fingerprint());
        j["k_max"] = table.k_max;
        j["grid"] = table.grid;
        j["quad_order"] = table.quad_order;
        j["mercer_residual"] = report.mercer_residual;
        j["capacity_alpha"] = report.capacity_alpha;
        j["location_degeneracy_rel"] = report.location_degeneracy_rel;
        j["nullspace_max_abs"] = report.nullspace_max_abs;
        j["sectors"] = nlohmann::json::array();
        for (const auto& sf : report.sector_fits)
            j["sectors"].push_back({{"sector", sf.sector},
                                    {"slope", sf.fit.exponent},
                                    {"stderr", sf.fit.stderr_},
                                    {"predicted", sf.predicted_slope},
                                    {"points", sf.fit.points}});
        if (report.rank_fit)
            j["rank_slope"] = report.rank_fit->exponent;
        std::ofstream out(fs::path(out_dir) / "meta.json");
        out << j.dump(2) << "\n";
    }
    return report;
}

TheoryCurve theory_curve(const Architecture& student, const Architecture& teacher,
                         const std::vector<int>& n_list, double lambda, int k_max,
                         long grid) {
    if (student.patch_dim() != 2 || teacher.patch_dim() != 2)
        throw std::invalid_argument("theory_curve: only s_1 = 2 kernels are supported");
    if (student.input_dim() != teacher.input_dim())
        throw std::invalid_argument("theory_curve: dimension mismatch");

    const int p = student.patch_count(1);
    SpectrumTable st, tt;
    if (student.hidden_layers() == 1 && teacher.hidden_layers() == 1) {
        if (k_max == 0) k_max = 512;
        if (grid == 0) grid = 1L << 16;
        st = eigenvalues_fourier_shallow(student, k_max, grid);
        tt = eigenvalues_fourier_shallow(teacher, k_max, grid);
    } else if (p <= 2) {
        if (k_max == 0) k_max = 256;
        if (grid == 0) grid = default_grid(p);
        st = eigenvalues_fourier(student, k_max, grid);
        tt = eigenvalues_fourier(teacher, k_max, grid);
    } else {
        throw std::invalid_argument(
            "theory_curve: needs shallow kernels or at most two patches");
    }

    ModeSpectrum spec = mode_spectrum_from_tables(st, tt);
    const int n_max = *std::max_element(n_list.begin(), n_list.end());
    spec = extend_power_law_tail(spec, 64.0 * n_max);

    TheoryCurve out;
    out.n_list = n_list;
    for (int n : n_list) {
        out.replica.push_back(replica_error(spec, n, lambda));
        out.spectral_bias.push_back(spectral_bias_error(spec, n));
    }
    return out;
}

void write_theory_curve_csv(const TheoryCurve& curve, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "n,replica_error,spectral_bias_error\n");
    for (std::size_t i = 0; i < curve.n_list.size(); ++i)
        std::fprintf(f, "%d,%.17g,%.17g\n", curve.n_list[i], curve.replica[i],
                     curve.spectral_bias[i]);
    std::fclose(f);
}

std::pair<RowMatrix, Eigen::VectorXd> ingest_dataset(const std::string& path,
                                                     const std::string& format,
                                                     int patch_size, bool normalize) {
    if (format != "csv") throw std::invalid_argument("ingest: unsupported format " + format);
    if (patch_size < 1) throw std::invalid_argument("ingest: bad patch size");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                std::string rest = cell.substr(used);
                if (rest.find_first_not_of(" \t\r") != std::string::npos)
                    throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                throw std::runtime_error("ingest: line " + std::to_string(line_no) +
                                         ": cannot parse '" + cell + "'");
            }
        }
        if (row.size() < 2)
            throw std::runtime_error("ingest: line " + std::to_string(line_no) +
                                     ": need features plus a label");
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::runtime_error("ingest: line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(width) + " columns, got " +
                                     std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("ingest: no data rows in " + path);

    const int d = static_cast<int>(width) - 1;
    if (d % patch_size != 0)
        throw std::invalid_argument("ingest: feature dimension " + std::to_string(d) +
                                    " not divisible by patch size " +
                                    std::to_string(patch_size));
    RowMatrix X(static_cast<Eigen::Index>(rows.size()), d);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), j) = rows[i][j];
        y[static_cast<Eigen::Index>(i)] = rows[i][width - 1];
    }
    if (normalize) {
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (int p0 = 0; p0 < d; p0 += patch_size) {
                const double nrm = X.row(i).segment(p0, patch_size).norm();
                if (nrm == 0.0)
                    throw std::domain_error("ingest: zero patch cannot be normalised (row " +
                                            std::to_string(i + 1) + ")");
                X.row(i).segment(p0, patch_size) /= nrm;
            }
    }
    return {std::move(X), std::move(y)};
}

void write_dataset_csv(const RowMatrix& features, const Eigen::VectorXd& labels,
                       const std::string& path) {
    if (features.rows() != labels.size())
        throw std::invalid_argument("write_dataset_csv: row count mismatch");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j)
            std::fprintf(f, "%.17g,", features(i, j));
        std::fprintf(f, "%.17g\n", labels[i]);
    }
    std::fclose(f);
}

ReportFit fit_report_exponent(const std::string& curve_csv, bool force) {
    std::ifstream in(curve_csv);
    if (!in) throw std::runtime_error("fit: cannot open " + curve_csv);
    std::string line;
    std::uint64_t embedded_hash = 0;
    LearningCurveResult curve;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# config=", 0) == 0) {
            embedded_hash = std::stoull(line.substr(9), nullptr, 16);
            continue;
        }
        if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
        LearningCurvePoint p;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &p.n, &p.mean_error, &p.std_error) != 3)
            throw std::runtime_error("fit: " + curve_csv + ": line " +
                                     std::to_string(line_no) + " is not n,mean,std");
        curve.points.push_back(p);
    }
    if (curve.points.size() < 4)
        throw std::invalid_argument("fit: need at least 4 points, got " +
                                    std::to_string(curve.points.size()));

    ReportFit out;
    out.config_hash = embedded_hash;

    const fs::path meta_path = fs::path(curve_csv).parent_path() / "meta.json";
    if (fs::exists(meta_path)) {
        std::ifstream meta(meta_path);
        nlohmann::json j;
        meta >> j;
        const std::uint64_t meta_hash =
            std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        if (meta_hash != embedded_hash && !force)
            throw std::runtime_error("fit: config hash mismatch between curve.csv and "
                                     "meta.json (rerun or pass --force)");
        out.predicted_beta = j.value("predicted_beta", 0.0);
    } else if (!force) {
        throw std::runtime_error("fit: missing meta.json sidecar (pass --force to fit anyway)");
    }

    fit_curve_exponent(curve);
    out.beta_hat = curve.beta_hat;
    out.beta_stderr = curve.beta_stderr;
    return out;
}

namespace {

std::vector<Preset> build_presets() {
    const auto ntk = [](std::vector<int> f, int top) {
        return make_arch(std::move(f), top, KernelKind::NTK);
    };
    const auto rfk = [](std::vector<int> f, int top) {
        return make_arch(std::move(f), top, KernelKind::RFK);
    };

    std::vector<Preset> out;
    const auto add = [&](std::string name, std::string desc, Architecture teacher,
                         Architecture student, double beta, double tol) {
        Preset p;
        p.name = std::move(name);
        p.description = std::move(desc);
        p.config.name = p.name;
        p.config.teacher = std::move(teacher);
        p.config.student = std::move(student);
        p.expected_beta = beta;
        p.beta_tolerance = tol;
        out.push_back(std::move(p));
    };

    add("matched-shallow", "shallow NTK teacher and student, four binary patches",
        ntk({2}, 4), ntk({2}, 4), 1.0, 0.15);
    out.back().config.with_replica = true;

    add("deep2-on-shallow", "two-hidden-layer student on a shallow teacher",
        ntk({2}, 2), ntk({2, 2}, 1), 0.75, 0.10);
    add("matched-deep2", "matched two-hidden-layer NTK (global target)",
        ntk({2, 2}, 1), ntk({2, 2}, 1), 0.5, 0.10);
    add("deep3-on-shallow", "three-hidden-layer student on a shallow teacher",
        ntk({2}, 4), ntk({2, 2, 2}, 1), 0.625, 0.10);
    add("deep3-on-deep2", "three-hidden-layer student on a two-layer teacher",
        ntk({2, 2}, 2), ntk({2, 2, 2}, 1), 5.0 / 12.0, 0.10);
    add("matched-deep3", "matched three-hidden-layer NTK (global target)",
        ntk({2, 2, 2}, 1), ntk({2, 2, 2}, 1), 0.25, 0.10);
    add("matched-deep2-wide", "matched two-layer NTK with a width-4 second filter",
        ntk({2, 4}, 1), ntk({2, 4}, 1), 0.25, 0.10);
    add("ternary-shallow", "matched shallow NTK with ternary filters",
        ntk({3}, 2), ntk({3}, 2), 0.5, 0.15);

    add("rfk-matched-deep2", "matched two-layer RFK (network-output target)",
        rfk({2, 2}, 1), rfk({2, 2}, 1), 1.5, 0.20);

    add("noisy-optimal-deep2", "matched two-layer NTK, noisy labels, tuned ridge",
        ntk({2, 2}, 1), ntk({2, 2}, 1), 1.0 / 3.0, 0.15);
    {
        auto& cfg = out.back().config;
        cfg.noise_std = 0.1;
        cfg.ridge_policy = RidgePolicy::OptimalGrid;
        cfg.lambda_grid = log_lambda_grid(1e-7, 1.0, 57);
        cfg.n_list = {128, 256, 512, 1024, 2048, 4096};
    }

    add("hypercube-shallow", "matched shallow NTK on hypercube inputs",
        ntk({2}, 4), ntk({2}, 4), 1.0, 0.15);
    out.back().config.space = Space::Hypercube;
    add("gaussian-shallow", "matched shallow NTK on Gaussian inputs",
        ntk({2}, 4), ntk({2}, 4), 1.0, 0.15);
    out.back().config.space = Space::Gaussian;
    add("overlap-shallow", "matched shallow NTK, stride-1 windows, hypercube inputs",
        ntk({2}, 4), ntk({2}, 4), 1.0, 0.15);
    {
        auto& cfg = out.back().config;
        cfg.space = Space::Hypercube;
        cfg.stride = 1;
    }

    for (auto& p : out) p.config.validate();
    return out;
}

}  // namespace

const std::vector<Preset>& presets() {
    static const std::vector<Preset> all = build_presets();
    return all;
}

const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return &p;
    return nullptr;
}

}  // namespace hck
