#include "hck/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>
#include <gsl/gsl_integration.h>

#include <nlohmann/json.hpp>

#include "hck/errors.hpp"
#include "hck/kernels.hpp"

namespace hck {

namespace {

// exact binomial via stepwise products; zero when r < 0 or r > n
std::int64_t binom(int n, int r) {
    if (r < 0 || r > n) return 0;
    r = std::min(r, n - r);
    std::int64_t c = 1;
    for (int j = 1; j <= r; ++j) c = c * (n - r + j) / j;
    return c;
}

}  // namespace

std::int64_t degeneracy(int k, int s) {
    if (k < 0 || s < 2) throw std::invalid_argument("degeneracy: need k >= 0, s >= 2");
    if (k == 0) return 1;
    // dim of degree-k harmonics: C(s+k-1, k) - C(s+k-3, k-2)
    return binom(s + k - 1, k) - binom(s + k - 3, k - 2);
}

double SpectrumTable::max_eigenvalue() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.eigenvalue);
    return m;
}

const SpectrumEntry* SpectrumTable::find(const std::vector<int>& k) const {
    for (const auto& e : entries)
        if (e.k == k) return &e;
    return nullptr;
}

namespace {

// Non-allocating kernel evaluator over a flat dot-product table. Copies of
// this object own their scratch buffers, so per-thread copies can run
// concurrently.
struct KernelEval {
    Architecture arch;
    mutable std::vector<double> k, n;

    double operator()(const double* t, int p) const {
        k.assign(t, t + p);
        const bool is_ntk = arch.kind == KernelKind::NTK;
        if (is_ntk) n.resize(p);
        for (int i = 0; i < p; ++i) {
            const double ti = std::min(1.0, std::max(-1.0, t[i]));
            k[i] = kappa1(ti);
            if (is_ntk) n[i] = k[i] + ti * kappa0(ti);
        }
        int count = p;
        for (int l = 2; l <= arch.hidden_layers(); ++l) {
            const int sl = arch.filter_sizes[l - 1];
            count /= sl;
            for (int w = 0; w < count; ++w) {
                double mk = 0.0, mn = 0.0;
                for (int j = 0; j < sl; ++j) {
                    mk += k[w * sl + j];
                    if (is_ntk) mn += n[w * sl + j];
                }
                mk /= sl;
                k[w] = kappa1(mk);
                if (is_ntk) n[w] = k[w] + (mn / sl) * kappa0(mk);
            }
        }
        double sum = 0.0;
        const auto& out = is_ntk ? n : k;
        for (int w = 0; w < count; ++w) sum += out[w];
        return sum / count;
    }
};

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

void classify_all(SpectrumTable& table) {
    for (auto& e : table.entries) e.sector = classify_sector(e.k, table.arch).sector;
}

}  // namespace

MultiDotKernel arch_kernel(const Architecture& arch) {
    return MultiDotKernel(KernelEval{arch, {}, {}});
}

SpectrumTable fourier_spectrum(const MultiDotKernel& kern, const Architecture& sector_arch,
                               int k_max, long grid) {
    const int p = sector_arch.patch_count(1);
    if (k_max < 1) throw std::invalid_argument("fourier_spectrum: k_max must be >= 1");
    if (p > 4) throw std::invalid_argument("fourier_spectrum: p > 4 exceeds the memory guard");
    if (!is_power_of_two(grid))
        throw std::invalid_argument("fourier_spectrum: grid size must be a power of two");
    if (grid < 4L * k_max)
        throw resolution_error("fourier_spectrum: grid < 4*k_max cannot resolve the modes; "
                               "raise the grid size or lower k_max");

    const long m = grid / 2;
    const long npts = m + 1;  // half grid [0, pi], DCT-I of logical size 2m
    double total_bytes = 8.0;
    for (int a = 0; a < p; ++a) total_bytes *= static_cast<double>(npts);
    if (total_bytes > 6.5e9)
        throw resolution_error("fourier_spectrum: grid would need " +
                               std::to_string(total_bytes / 1e9) +
                               " GB; lower the grid size or the number of patches");

    long long total = 1;
    for (int a = 0; a < p; ++a) total *= npts;

    std::unique_ptr<double, decltype(&fftw_free)> data(
        static_cast<double*>(fftw_malloc(sizeof(double) * static_cast<std::size_t>(total))),
        &fftw_free);
    if (!data) throw std::bad_alloc();

    std::vector<double> cosv(npts);
    for (long j = 0; j < npts; ++j)
        cosv[j] = std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));

    // fill K(cos θ) over the half grid; every slot is independent
#pragma omp parallel
    {
        MultiDotKernel local = kern;
        std::vector<double> t(p);
#pragma omp for schedule(static)
        for (long long idx = 0; idx < total; ++idx) {
            long long rem = idx;
            for (int a = p - 1; a >= 0; --a) {
                t[a] = cosv[rem % npts];
                rem /= npts;
            }
            data.get()[idx] = local(t.data(), p);
        }
    }

    {
        std::vector<int> dims(p, static_cast<int>(npts));
        std::vector<fftw_r2r_kind> kinds(p, FFTW_REDFT00);
        fftw_plan plan = fftw_plan_r2r(p, dims.data(), data.get(), data.get(), kinds.data(),
                                       FFTW_ESTIMATE);
        if (!plan) throw numerical_error("fourier_spectrum: fftw plan failed");
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    // DCT-I output Y_k = X_0 + (-1)^k X_m + 2 Σ X_j cos(pi j k / m) equals the
    // full-circle DFT sum, so Λ_k = Y_k / (2m)^p.
    double scale = 1.0;
    for (int a = 0; a < p; ++a) scale /= static_cast<double>(2 * m);

    SpectrumTable table;
    table.arch = sector_arch;
    table.k_max = k_max;
    table.grid = grid;
    long long n_entries = 1;
    for (int a = 0; a < p; ++a) n_entries *= (k_max + 1);
    table.entries.reserve(static_cast<std::size_t>(n_entries));

    std::vector<int> k(p, 0);
    for (long long e = 0; e < n_entries; ++e) {
        long long rem = e;
        for (int a = p - 1; a >= 0; --a) {
            k[a] = static_cast<int>(rem % (k_max + 1));
            rem /= (k_max + 1);
        }
        long long off = 0;
        for (int a = 0; a < p; ++a) off = off * npts + k[a];
        SpectrumEntry entry;
        entry.k = k;
        entry.eigenvalue = data.get()[off] * scale;
        entry.deg = 1;
        for (int a = 0; a < p; ++a) entry.deg *= degeneracy(k[a], 2);
        table.entries.push_back(std::move(entry));
    }
    classify_all(table);
    return table;
}

SpectrumTable eigenvalues_fourier(const Architecture& arch, int k_max, long grid) {
    if (arch.patch_dim() != 2)
        throw std::invalid_argument("eigenvalues_fourier: requires s_1 = 2");
    return fourier_spectrum(arch_kernel(arch), arch, k_max, grid);
}

SpectrumTable eigenvalues_fourier_shallow(const Architecture& arch, int k_max, long grid) {
    if (arch.hidden_layers() != 1)
        throw std::invalid_argument("eigenvalues_fourier_shallow: architecture is not shallow");
    if (arch.patch_dim() != 2)
        throw std::invalid_argument("eigenvalues_fourier_shallow: requires s_1 = 2");
    const int p = arch.patch_count(1);

    // 1-D transform of the single-patch kernel g
    Architecture one_patch = arch;
    one_patch.top_multiplicity = 1;
    SpectrumTable line = fourier_spectrum(arch_kernel(one_patch), one_patch, k_max, grid);

    SpectrumTable table;
    table.arch = arch;
    table.k_max = k_max;
    table.grid = grid;
    table.entries.reserve(static_cast<std::size_t>(k_max) * p + 1);
    {
        SpectrumEntry c;
        c.k.assign(p, 0);
        c.eigenvalue = line.entries[0].eigenvalue;  // ĝ(0)
        c.deg = 1;
        c.sector = kSectorConstant;
        table.entries.push_back(std::move(c));
    }
    for (int k = 1; k <= k_max; ++k) {
        const double lam = line.entries[k].eigenvalue / p;
        for (int i = 0; i < p; ++i) {
            SpectrumEntry e;
            e.k.assign(p, 0);
            e.k[i] = k;
            e.eigenvalue = lam;
            e.deg = 2;
            e.sector = 1;
            table.entries.push_back(std::move(e));
        }
    }
    return table;
}

double legendre_poly(int k, int s, double t) {
    if (k < 0 || s < 2) throw std::invalid_argument("legendre_poly: need k >= 0, s >= 2");
    if (k == 0) return 1.0;
    if (k == 1) return t;
    const double lambda = 0.5 * (s - 2);
    double pkm1 = 1.0, pk = t;
    for (int j = 1; j < k; ++j) {
        const double pkp1 = (2.0 * (j + lambda) * t * pk - j * pkm1) / (j + 2.0 * lambda);
        pkm1 = pk;
        pk = pkp1;
    }
    return pk;
}

SpectrumTable quadrature_spectrum(const MultiDotKernel& kern, const Architecture& sector_arch,
                                  int s, int k_max, int quad_order) {
    const int p = sector_arch.patch_count(1);
    if (k_max < 1) throw std::invalid_argument("quadrature_spectrum: k_max must be >= 1");
    if (p > 3) throw std::invalid_argument("quadrature_spectrum: p > 3 exceeds the memory guard");
    if (quad_order < 2 * k_max)
        throw resolution_error("quadrature_spectrum: quadrature order < 2*k_max cannot "
                               "resolve the modes; raise quad_order");

    const int q = quad_order;
    const double jac = 0.5 * (s - 3);  // weight (1-t)^a (1+t)^b with a = b = (s-3)/2
    std::vector<double> nodes(q), weights(q);
    {
        gsl_integration_fixed_workspace* ws = gsl_integration_fixed_alloc(
            gsl_integration_fixed_jacobi, static_cast<std::size_t>(q), -1.0, 1.0, jac, jac);
        if (!ws) throw numerical_error("quadrature_spectrum: gsl jacobi rule failed");
        const double* n = gsl_integration_fixed_nodes(ws);
        const double* w = gsl_integration_fixed_weights(ws);
        std::copy(n, n + q, nodes.begin());
        std::copy(w, w + q, weights.begin());
        gsl_integration_fixed_free(ws);
    }

    // |S^{s-2}| / |S^{s-1}| = Γ(s/2) / (sqrt(pi) Γ((s-1)/2))
    const double ratio =
        std::tgamma(0.5 * s) / (std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (s - 1)));

    // B(k, q) = ratio * w_q * P_{k,s}(t_q), rows k = 0..k_max
    Eigen::MatrixXd B(k_max + 1, q);
    {
        Eigen::VectorXd pkm1 = Eigen::VectorXd::Ones(q), pk(q);
        for (int j = 0; j < q; ++j) pk[j] = nodes[j];
        B.row(0) = pkm1.transpose();
        if (k_max >= 1) B.row(1) = pk.transpose();
        const double lambda = 0.5 * (s - 2);
        for (int k = 1; k < k_max; ++k) {
            Eigen::VectorXd pkp1(q);
            for (int j = 0; j < q; ++j)
                pkp1[j] = (2.0 * (k + lambda) * nodes[j] * pk[j] - k * pkm1[j]) /
                          (k + 2.0 * lambda);
            pkm1 = pk;
            pk = pkp1;
            B.row(k + 1) = pk.transpose();
        }
        for (int j = 0; j < q; ++j) B.col(j) *= ratio * weights[j];
    }

    // evaluate the kernel on the tensor grid of nodes
    long long total = 1;
    for (int a = 0; a < p; ++a) total *= q;
    std::vector<double> data(static_cast<std::size_t>(total));
#pragma omp parallel
    {
        MultiDotKernel local = kern;
        std::vector<double> t(p);
#pragma omp for schedule(static)
        for (long long idx = 0; idx < total; ++idx) {
            long long rem = idx;
            for (int a = p - 1; a >= 0; --a) {
                t[a] = nodes[rem % q];
                rem /= q;
            }
            data[static_cast<std::size_t>(idx)] = local(t.data(), p);
        }
    }

    // contract one axis at a time: data has layout [done-k axes..., q axes...]
    const int kdim = k_max + 1;
    std::vector<double> next;
    for (int axis = 0; axis < p; ++axis) {
        long long pre = 1;
        for (int a = 0; a < axis; ++a) pre *= kdim;
        long long post = 1;
        for (int a = axis + 1; a < p; ++a) post *= q;
        next.assign(static_cast<std::size_t>(pre * kdim * post), 0.0);
        for (long long b = 0; b < pre; ++b) {
            using CMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
            Eigen::Map<const CMat> in(data.data() + b * q * post, q, post);
            Eigen::Map<CMat> out(next.data() + b * kdim * post, kdim, post);
            out.noalias() = B * in;
        }
        data.swap(next);
    }

    SpectrumTable table;
    table.arch = sector_arch;
    table.k_max = k_max;
    table.quad_order = quad_order;
    long long n_entries = 1;
    for (int a = 0; a < p; ++a) n_entries *= kdim;
    table.entries.reserve(static_cast<std::size_t>(n_entries));
    std::vector<int> k(p, 0);
    for (long long e = 0; e < n_entries; ++e) {
        long long rem = e;
        for (int a = p - 1; a >= 0; --a) {
            k[a] = static_cast<int>(rem % kdim);
            rem /= kdim;
        }
        SpectrumEntry entry;
        entry.k = k;
        entry.eigenvalue = data[static_cast<std::size_t>(e)];
        entry.deg = 1;
        for (int a = 0; a < p; ++a) entry.deg *= degeneracy(k[a], s);
        table.entries.push_back(std::move(entry));
    }
    classify_all(table);
    return table;
}

SpectrumTable eigenvalues_quadrature(const Architecture& arch, int k_max, int quad_order) {
    if (arch.patch_dim() < 3)
        throw std::invalid_argument("eigenvalues_quadrature: requires s_1 >= 3 "
                                    "(use eigenvalues_fourier for s_1 = 2)");
    return quadrature_spectrum(arch_kernel(arch), arch, arch.patch_dim(), k_max, quad_order);
}

SectorLabel classify_sector(const std::vector<int>& k, const Architecture& arch) {
    const int p = arch.patch_count(1);
    if (static_cast<int>(k.size()) != p)
        throw std::invalid_argument("classify_sector: multi-index length mismatch");
    int first = -1, last = -1;
    for (int i = 0; i < p; ++i) {
        if (k[i] < 0) throw std::invalid_argument("classify_sector: negative index component");
        if (k[i] != 0) {
            if (first < 0) first = i;
            last = i;
        }
    }
    SectorLabel label;
    if (first < 0) {
        label.sector = kSectorConstant;
        return label;
    }
    for (int l = 1; l <= arch.hidden_layers(); ++l) {
        const int width = arch.meta_patch_size(l) / arch.patch_dim();  // in patch units
        if (first / width == last / width) {
            label.sector = l;
            label.location = meta_patch_from_flat(arch, l, first / width);
            return label;
        }
    }
    label.sector = kSectorNullSpace;  // spans several readout windows (p_L > 1)
    return label;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                          double window_lo, double window_hi) {
    if (!(window_lo < window_hi))
        throw std::invalid_argument("fit_power_law: empty window");
    std::vector<std::pair<double, double>> sel;
    for (const auto& [x, y] : points)
        if (x >= window_lo && x <= window_hi) sel.emplace_back(x, y);
    if (sel.size() < 8)
        throw std::invalid_argument("fit_power_law: fewer than 8 points in window");
    for (const auto& [x, y] : sel)
        if (y <= 0.0) throw std::domain_error("fit_power_law: nonpositive value in window");

    const int n = static_cast<int>(sel.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : sel) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double det = n * sxx - sx * sx;
    if (det <= 0.0) throw std::domain_error("fit_power_law: degenerate abscissae");
    PowerLawFit fit;
    fit.exponent = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.exponent * sx) / n;
    double rss = 0.0;
    for (const auto& [x, y] : sel) {
        const double r = std::log(y) - (fit.intercept + fit.exponent * std::log(x));
        rss += r * r;
    }
    fit.stderr_ = std::sqrt(std::max(0.0, rss / (n - 2)) / (sxx - sx * sx / n));
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    fit.points = n;
    return fit;
}

std::vector<std::pair<double, double>> sector_modes(const SpectrumTable& table, int sector,
                                                    double threshold) {
    std::vector<std::pair<double, double>> out;
    if (sector != 1) return diagonal_modes(table, sector, threshold);
    const int p = table.patch_count();
    for (const auto& e : table.entries) {
        if (e.sector != 1 || e.eigenvalue <= threshold) continue;
        // canonical location: first patch
        if (e.k[0] == 0) continue;
        bool rest_zero = true;
        for (int i = 1; i < p; ++i) rest_zero &= (e.k[i] == 0);
        if (rest_zero) out.emplace_back(static_cast<double>(e.k[0]), e.eigenvalue);
    }
    return out;
}

std::vector<std::pair<double, double>> diagonal_modes(const SpectrumTable& table, int sector,
                                                      double threshold) {
    std::vector<std::pair<double, double>> out;
    const int p = table.patch_count();
    const int width = table.arch.meta_patch_size(sector) / table.arch.patch_dim();
    for (const auto& e : table.entries) {
        if (e.sector != sector || e.eigenvalue <= threshold) continue;
        const int k0 = e.k[0];
        if (k0 == 0) continue;
        bool diag = true;
        for (int i = 0; i < p; ++i) diag &= (e.k[i] == (i < width ? k0 : 0));
        if (diag) out.emplace_back(k0 * std::sqrt(static_cast<double>(width)), e.eigenvalue);
    }
    return out;
}

PowerLawFit rank_decay(const SpectrumTable& table) {
    const double lam_max = table.max_eigenvalue();
    const double drop = 1e-12 * lam_max;

    // largest eigenvalue sitting on the truncation edge: ranks below it may
    // interleave modes missing from the table
    double lam_cut = 0.0;
    for (const auto& e : table.entries) {
        bool edge = false;
        for (int ki : e.k) edge |= (ki == table.k_max);
        if (edge) lam_cut = std::max(lam_cut, e.eigenvalue);
    }

    std::vector<std::pair<double, std::int64_t>> blocks;  // (eigenvalue, multiplicity)
    for (const auto& e : table.entries)
        if (e.eigenvalue > drop) blocks.emplace_back(e.eigenvalue, e.deg);
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    std::vector<std::pair<double, double>> pts;  // (rank, eigenvalue)
    double rank = 0.0, rank_hi = 0.0;
    for (const auto& [lam, mult] : blocks) {
        const double mid = rank + 0.5 * (static_cast<double>(mult) + 1.0);
        rank += static_cast<double>(mult);
        if (lam >= 4.0 * lam_cut) {
            pts.emplace_back(mid, lam);
            rank_hi = rank;
        }
    }
    // fit the top octave-and-a-half of trustworthy ranks; lower ranks are
    // preasymptotic
    if (rank_hi < 64.0 || pts.size() < 8)
        throw insufficient_tail_error("rank_decay: spectrum tail too short to fit");
    return fit_power_law(pts, rank_hi / 8.0, rank_hi);
}

double mercer_sum_residual(const SpectrumTable& table, double kernel_at_one) {
    double sum = 0.0;
    for (const auto& e : table.entries) sum += e.eigenvalue * static_cast<double>(e.deg);
    return kernel_at_one - sum;
}

double mercer_sum_check(const SpectrumTable& table, const Architecture& arch) {
    OverlapTable ones;
    ones.values.assign(static_cast<std::size_t>(arch.patch_count(1)), 1.0);
    return mercer_sum_residual(table, kernel_value(arch, ones));
}

void write_spectrum_csv(const SpectrumTable& table, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    const int p = table.patch_count();
    for (int i = 0; i < p; ++i) std::fprintf(f, "k%d,", i + 1);
    std::fprintf(f, "sector,eigenvalue,degeneracy\n");
    for (const auto& e : table.entries) {
        for (int i = 0; i < p; ++i) std::fprintf(f, "%d,", e.k[i]);
        std::fprintf(f, "%d,%.17g,%lld\n", e.sector, e.eigenvalue,
                     static_cast<long long>(e.deg));
    }
    std::fclose(f);
}

void write_spectrum_json(const SpectrumTable& table, double mercer_residual,
                         const std::string& path) {
    nlohmann::json j;
    j["arch"] = table.arch.to_string();
    j["arch_fingerprint"] = table.arch.fingerprint();
    j["k_max"] = table.k_max;
    j["grid"] = table.grid;
    j["quad_order"] = table.quad_order;
    j["mercer_residual"] = mercer_residual;
    j["entries"] = table.entries.size();
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    const std::string body = j.dump(2);
    std::fwrite(body.data(), 1, body.size(), f);
    std::fputc('\n', f);
    std::fclose(f);
}

}  // namespace hck
