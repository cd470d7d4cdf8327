#include "hck/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hck/errors.hpp"

namespace hck {

TargetSpec target_from_teacher(const Architecture& student, const Architecture& teacher) {
    if (student.input_dim() != teacher.input_dim())
        throw std::invalid_argument("target_from_teacher: dimension mismatch");
    const int teacher_window = teacher.input_dim() / teacher.top_multiplicity;
    TargetSpec spec;
    spec.smoothness = teacher.smoothness();
    spec.teacher_fingerprint = teacher.fingerprint();
    for (int l = 1; l <= student.hidden_layers(); ++l) {
        if (student.meta_patch_size(l) >= teacher_window) {
            spec.support_layer = l;
            return spec;
        }
    }
    throw std::invalid_argument(
        "target_from_teacher: teacher windows exceed the student receptive field");
}

namespace {

void check_target(const Architecture& student, const TargetSpec& t) {
    if (t.support_layer < 1 || t.support_layer > student.hidden_layers())
        throw std::invalid_argument("target: support layer outside the student sectors");
    if (!(t.smoothness > 0.0)) throw std::invalid_argument("target: smoothness must be > 0");
}

}  // namespace

double predicted_exponent(const Architecture& student, const TargetSpec& target) {
    check_target(student, target);
    const double nu = student.smoothness();
    const double m = target.smoothness;
    const double dl = effective_dim(student, target.support_layer);
    const double dL = effective_dim(student, student.hidden_layers());
    return (2.0 * m / (2.0 * nu + dl)) * ((2.0 * nu + dL) / dL);
}

double bound_exponent(const Architecture& student, const TargetSpec& target) {
    check_target(student, target);
    const double nu = student.smoothness();
    const double m = target.smoothness;
    const double dl = effective_dim(student, target.support_layer);
    const double dL = effective_dim(student, student.hidden_layers());
    const double a = 2.0 * m * (2.0 * nu + dL);
    return a / (a + (2.0 * nu + dl) * dL);
}

double fully_connected_bound_exponent(double m, int p) {
    if (!(m > 0.0) || p < 1) throw std::invalid_argument("fc bound: bad parameters");
    return 2.0 * m / (2.0 * m + p);
}

double capacity_exponent(const Architecture& student) {
    const double nu = student.smoothness();
    const double dL = effective_dim(student, student.hidden_layers());
    return 1.0 + 2.0 * nu / dL;
}

double source_exponent(const Architecture& student, const TargetSpec& target) {
    check_target(student, target);
    return 2.0 * target.smoothness /
           (2.0 * student.smoothness() + effective_dim(student, target.support_layer));
}

double optimal_lambda_schedule(double alpha, double r, double n) {
    if (!(alpha >= 1.0) || !(r > 0.0) || !(n > 0.0))
        throw std::invalid_argument("optimal_lambda_schedule: need alpha >= 1, r > 0, n > 0");
    return std::pow(n, -alpha / (alpha * r + 1.0));
}

double ModeSpectrum::total_target_power() const {
    double s = 0.0;
    for (const auto& m : modes) s += m.multiplicity * m.target_moment;
    return s;
}

double ModeSpectrum::total_multiplicity() const {
    double s = 0.0;
    for (const auto& m : modes) s += m.multiplicity;
    return s;
}

void ModeSpectrum::sort_descending() {
    std::sort(modes.begin(), modes.end(),
              [](const Mode& a, const Mode& b) { return a.eigenvalue > b.eigenvalue; });
}

ModeSpectrum mode_spectrum_from_tables(const SpectrumTable& student,
                                       const SpectrumTable& teacher) {
    if (student.entries.size() != teacher.entries.size())
        throw std::invalid_argument("mode_spectrum_from_tables: table sizes differ");
    ModeSpectrum spec;
    spec.modes.reserve(student.entries.size());
    const double cut = 1e-12 * student.max_eigenvalue();
    for (std::size_t i = 0; i < student.entries.size(); ++i) {
        const auto& se = student.entries[i];
        const auto& te = teacher.entries[i];
        if (se.k != te.k)
            throw std::invalid_argument("mode_spectrum_from_tables: multi-index mismatch");
        if (se.eigenvalue <= cut) continue;  // null or grid-noise mode
        Mode m;
        m.eigenvalue = se.eigenvalue;
        m.multiplicity = static_cast<double>(se.deg);
        m.target_moment = std::max(0.0, te.eigenvalue);
        spec.modes.push_back(m);
    }
    spec.sort_descending();
    return spec;
}

namespace {

// tail fit of y against cumulative rank over the last decade of modes
double fit_rank_tail(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 8) throw insufficient_tail_error("rank tail: fewer than 8 points");
    const double hi = pts.back().first;
    std::vector<std::pair<double, double>> window;
    for (const auto& p : pts)
        if (p.first >= hi / 10.0 && p.second > 0.0) window.push_back(p);
    if (window.size() < 8) throw insufficient_tail_error("rank tail: window too small");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : window) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(window.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::pair<double, double>> ranked(const ModeSpectrum& spec, bool moments) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(spec.modes.size());
    double rank = 0.0;
    for (const auto& m : spec.modes) {
        rank += m.multiplicity;
        pts.emplace_back(rank, moments ? m.target_moment : m.eigenvalue);
    }
    return pts;
}

}  // namespace

ModeSpectrum extend_power_law_tail(const ModeSpectrum& spec, double target_rank) {
    ModeSpectrum out = spec;
    out.sort_descending();
    const double have = out.total_multiplicity();
    if (have >= target_rank || out.modes.empty()) return out;

    const auto lam_pts = ranked(out, false);
    const double lam_tail = fit_rank_tail(lam_pts);
    const auto mom_pts = ranked(out, true);
    double mom_tail = 0.0;
    bool have_moments = out.total_target_power() > 0.0;
    if (have_moments) mom_tail = fit_rank_tail(mom_pts);

    const double lam_last = out.modes.back().eigenvalue;
    const double mom_last = out.modes.back().target_moment;

    // geometric rank blocks keep the mode count manageable
    double rank = have;
    const double growth = 1.01;
    while (rank < target_rank) {
        const double next = std::min(target_rank, std::max(rank * growth, rank + 1.0));
        const double mid = 0.5 * (rank + next);
        Mode m;
        m.multiplicity = next - rank;
        m.eigenvalue = lam_last * std::pow(mid / have, lam_tail);
        m.target_moment = have_moments ? mom_last * std::pow(mid / have, mom_tail) : 0.0;
        out.modes.push_back(m);
        rank = next;
    }
    return out;
}

double replica_kappa(const ModeSpectrum& spec, double n, double lambda) {
    if (n < 1.0) throw std::invalid_argument("replica_kappa: need n >= 1");
    if (lambda < 0.0) throw std::invalid_argument("replica_kappa: negative ridge");

    double trace = 0.0;
    for (const auto& m : spec.modes) trace += m.eigenvalue * m.multiplicity;
    if (spec.modes.empty() || trace == 0.0) return lambda;

    const auto gap = [&](double z) {
        double s = 0.0;
        for (const auto& m : spec.modes)
            s += m.multiplicity * m.eigenvalue * z / (m.eigenvalue + z);
        return z - lambda - s / n;
    };

    double lo = lambda, hi = lambda + trace / n;
    const double bracket = hi;
    // gap(lo) <= 0 and gap(hi) >= 0: the RHS is concave increasing in z
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
        // 1e-12 relative to the root, with an absolute floor for roots that
        // collapse to zero (every mode learned in the ridgeless limit)
        if (hi - lo <= 1e-12 * hi || hi - lo <= 1e-14 * bracket) return 0.5 * (lo + hi);
    }
    throw numerical_error("replica_kappa: bisection did not converge");
}

double replica_error(const ModeSpectrum& spec, double n, double lambda) {
    if (n == 0.0) return spec.total_target_power();  // nothing learned
    const double z = replica_kappa(spec, n, lambda);
    double learn = 0.0, sum = 0.0;
    for (const auto& m : spec.modes) {
        const double frac = m.eigenvalue / (m.eigenvalue + z);
        learn += m.multiplicity * frac * frac;
        const double miss = z / (m.eigenvalue + z);
        sum += m.multiplicity * miss * miss * m.target_moment;
    }
    const double denom = 1.0 - learn / n;
    if (denom <= 0.0)
        throw numerical_error("replica_error: derivative prefactor is not positive");
    return sum / denom;
}

double spectral_bias_error(const ModeSpectrum& spec, double n) {
    if (n < 0.0) throw std::invalid_argument("spectral_bias_error: negative n");
    double rank = 0.0, err = 0.0;
    for (const auto& m : spec.modes) {
        const double next = rank + m.multiplicity;
        if (next <= n) {
            // fully learned
        } else if (rank >= n) {
            err += m.multiplicity * m.target_moment;
        } else {
            err += (next - n) * m.target_moment;  // block straddles the cut
        }
        rank = next;
    }
    return err;
}

FinitenessCheck source_capacity_check(const ModeSpectrum& spec, double alpha, double r) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("source_capacity_check: need alpha >= 1");
    FinitenessCheck out;
    ModeSpectrum sorted = spec;
    sorted.sort_descending();
    out.eigenvalue_tail = fit_rank_tail(ranked(sorted, false));
    out.moment_tail = fit_rank_tail(ranked(sorted, true));
    // Σ Λ^{1/α} ~ Σ ρ^{tail/α}; Σ Λ^{-r} c² ~ Σ ρ^{-r·tail + moment_tail}
    out.capacity_finite = out.eigenvalue_tail / alpha < -1.0;
    out.source_finite = -r * out.eigenvalue_tail + out.moment_tail < -1.0;
    return out;
}

}  // namespace hck
