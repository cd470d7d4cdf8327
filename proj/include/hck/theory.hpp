#pragma once

#include <cstdint>
#include <vector>

#include "hck/geometry.hpp"
#include "hck/spectrum.hpp"

namespace hck {

// Target function for rate predictions: supported on a layer-l meta-patch of
// the student, with finite-norm derivatives up to order m. A Gaussian random
// field drawn from a hierarchical teacher kernel has m = ν_teacher.
struct TargetSpec {
    int support_layer = 1;     // l in [1, L_student]
    double smoothness = 0.5;   // m > 0
    std::uint64_t teacher_fingerprint = 0;
};

// Smallest student sector whose meta-patch covers the teacher's readout
// windows, with m = ν_teacher.
TargetSpec target_from_teacher(const Architecture& student, const Architecture& teacher);

// Ridgeless rate: β = [2m / (2ν + d_eff(l))] · [(2ν + d_eff(L)) / d_eff(L)]
double predicted_exponent(const Architecture& student, const TargetSpec& target);

// Optimally-regularised bound rate:
// β = 2m(2ν + d_eff(L)) / [2m(2ν + d_eff(L)) + (2ν + d_eff(l)) d_eff(L)]
double bound_exponent(const Architecture& student, const TargetSpec& target);

// Same bound for a fully-connected comparator on p effective dimensions.
double fully_connected_bound_exponent(double m, int p);  // 2m / (2m + p)

// Supremum of admissible capacity exponents: 1 + 2ν / d_eff(L)
double capacity_exponent(const Architecture& student);

// Source exponent r = 2m / (2ν + d_eff(l))
double source_exponent(const Architecture& student, const TargetSpec& target);

// λ_n = n^{-α/(αr+1)} (unit prefactor, for slope comparison)
double optimal_lambda_schedule(double alpha, double r, double n);

// Mode spectrum for the self-consistent error predictor: eigenvalues with
// multiplicities and target second moments E[c²], descending in eigenvalue.
struct Mode {
    double eigenvalue = 0.0;
    double multiplicity = 1.0;
    double target_moment = 0.0;
};

struct ModeSpectrum {
    std::vector<Mode> modes;  // sorted by eigenvalue, descending
    double total_target_power() const;
    double total_multiplicity() const;
    void sort_descending();
};

// Matched-basis spectra: student eigenvalues with teacher eigenvalues as
// target moments, aligned by multi-index. Both tables must enumerate the
// same multi-index set (same k_max and patch count).
ModeSpectrum mode_spectrum_from_tables(const SpectrumTable& student,
                                       const SpectrumTable& teacher);

// Appends an analytic power-law tail in rank space so that the total
// multiplicity reaches `target_rank`: eigenvalues continue the rank_decay
// fit of the existing modes, moments continue their own fitted tail.
ModeSpectrum extend_power_law_tail(const ModeSpectrum& spec, double target_rank);

// Solves z = λ + (1/n) Σ_ρ Λ_ρ z / (Λ_ρ + z) for z = κ_λ(n)/n by bisection
// on [λ, λ + Σ Λ mult / n]; relative tolerance 1e-12.
double replica_kappa(const ModeSpectrum& spec, double n, double lambda);

// Mode-sum error with the λ-derivative prefactor from the implicit function
// theorem (no finite differencing):
//   ε = [1 - (1/n) Σ mult (Λ/(Λ+z))²]^{-1} · Σ mult (z/(Λ+z))² E[c²]
// Convention: n = 0 returns the total target power.
double replica_error(const ModeSpectrum& spec, double n, double lambda);

// Truncation ansatz: sum of target moments over all modes ranked below n.
double spectral_bias_error(const ModeSpectrum& spec, double n);

struct FinitenessCheck {
    bool capacity_finite = false;
    bool source_finite = false;
    double eigenvalue_tail = 0.0;  // fitted exponent of Λ(ρ)
    double moment_tail = 0.0;      // fitted exponent of E[c²](ρ)
};

// Decides finiteness of Σ Λ^{1/α} and Σ Λ^{-r} c² from fitted rank tails.
FinitenessCheck source_capacity_check(const ModeSpectrum& spec, double alpha, double r);

}  // namespace hck
