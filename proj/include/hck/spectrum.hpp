#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hck/geometry.hpp"

namespace hck {

// Sector of an eigenfunction: 0 for the constant mode, 1..L for the layer
// whose meta-patch carries it, -1 for the null space (modes coupling more
// than one readout window when p_L > 1).
constexpr int kSectorConstant = 0;
constexpr int kSectorNullSpace = -1;

struct SectorLabel {
    int sector = kSectorConstant;
    MetaPatchIndex location;  // valid when 1 <= sector <= L
};

// Number of linearly independent spherical harmonics of degree k on S^{s-1}.
std::int64_t degeneracy(int k, int s);

struct SpectrumEntry {
    std::vector<int> k;        // nonnegative multi-index, one per patch
    double eigenvalue = 0.0;
    int sector = kSectorConstant;
    std::int64_t deg = 1;      // prod_i N_{k_i, s}
};

struct SpectrumTable {
    std::vector<SpectrumEntry> entries;
    Architecture arch;
    int k_max = 0;
    long grid = 0;        // full-circle grid size (Fourier) or 0
    int quad_order = 0;   // quadrature order or 0
    int patch_count() const { return arch.patch_count(1); }
    double max_eigenvalue() const;
    const SpectrumEntry* find(const std::vector<int>& k) const;
};

// Kernel as a function of the p per-patch dot products.
using MultiDotKernel = std::function<double(const double*, int)>;
MultiDotKernel arch_kernel(const Architecture& arch);

// Eigenvalues for s_1 = 2: the p-dimensional Fourier transform of
// K(cos θ_1, ..., cos θ_p), computed on a regular angle grid. `grid` is the
// full-circle size per axis (power of two, >= 4 k_max); since the kernel is
// even in every angle the transform is evaluated as a DCT-I on the half grid
// of (grid/2 + 1) points per axis. Entries carry all multi-indices with
// 0 <= k_i <= k_max and degeneracy 2 per nonzero component.
SpectrumTable eigenvalues_fourier(const Architecture& arch, int k_max, long grid);
SpectrumTable fourier_spectrum(const MultiDotKernel& kern, const Architecture& sector_arch,
                               int k_max, long grid);

// Shallow kernels (L = 1) are sums of single-patch kernels, so their spectrum
// reduces to a 1-D transform regardless of p: Λ_(k,0,...,0) = ĝ(k)/p with
// location degeneracy p, and every multi-nonzero mode is null. Agrees with
// the general path (tested) while sidestepping the p-dimensional grid.
SpectrumTable eigenvalues_fourier_shallow(const Architecture& arch, int k_max, long grid);

// Eigenvalues for s_1 >= 3: projection of K({t_i}) onto products of Legendre
// polynomials P_{k,s} by Gauss-Jacobi quadrature with weight
// (1 - t^2)^{(s-3)/2} per axis. quad_order >= 2 k_max.
SpectrumTable eigenvalues_quadrature(const Architecture& arch, int k_max, int quad_order);
SpectrumTable quadrature_spectrum(const MultiDotKernel& kern, const Architecture& sector_arch,
                                  int s, int k_max, int quad_order);

// Legendre/Gegenbauer polynomial P_{k,s}(t), normalised to P_{k,s}(1) = 1,
// via the three-term recurrence. For s = 2 this is the Chebyshev T_k.
double legendre_poly(int k, int s, double t);

// Smallest layer whose meta-patch contains all nonzero components of k, with
// its location; NullSpace when the nonzero components span more than one
// readout window; the zero multi-index is the constant sector.
SectorLabel classify_sector(const std::vector<int>& k, const Architecture& arch);

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0;   // log-space
    double stderr_ = 0.0;     // standard error of the exponent
    double window_lo = 0.0, window_hi = 0.0;
    int points = 0;
};

// Least squares of log(value) on log(position) over position in
// [window_lo, window_hi]. Needs >= 8 points in window; nonpositive values in
// the window raise std::domain_error.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                          double window_lo, double window_hi);

// Per-sector fit helpers: positions are |k| for sector 1 and ||k|| along the
// diagonal of the first layer-l meta-patch for l >= 2. Modes with eigenvalue
// below `threshold` are dropped before fitting (shallow kernels have exact
// zeros at odd k).
std::vector<std::pair<double, double>> sector_modes(const SpectrumTable& table, int sector,
                                                    double threshold);
std::vector<std::pair<double, double>> diagonal_modes(const SpectrumTable& table, int sector,
                                                      double threshold);

// Rank-ordered decay: expand degeneracies, sort descending, fit the tail of
// Λ(ρ) against the rank ρ. Ranks beyond the point where truncation could
// interleave missing modes are not used.
PowerLawFit rank_decay(const SpectrumTable& table);

// K(all t = 1) minus the truncated sum Σ_k Λ_k deg(k); bounds the tail mass.
double mercer_sum_check(const SpectrumTable& table, const Architecture& arch);
double mercer_sum_residual(const SpectrumTable& table, double kernel_at_one);

void write_spectrum_csv(const SpectrumTable& table, const std::string& path);
void write_spectrum_json(const SpectrumTable& table, double mercer_residual,
                         const std::string& path);

}  // namespace hck
