#include "hck/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hck/rng.hpp"

namespace hck {

namespace {

constexpr double kClampBand = 1e-9;
constexpr double kPi = std::numbers::pi;

double clamp_unit(double t) {
    if (t > 1.0 + kClampBand || t < -1.0 - kClampBand)
        throw std::invalid_argument("kappa: argument outside [-1,1] clamp band");
    return t > 1.0 ? 1.0 : (t < -1.0 ? -1.0 : t);
}

}  // namespace

double kappa0(double t) {
    t = clamp_unit(t);
    return (kPi - std::acos(t)) / kPi;
}

double kappa1(double t) {
    t = clamp_unit(t);
    return ((kPi - std::acos(t)) * t + std::sqrt(1.0 - t * t)) / kPi;
}

OverlapTable overlaps(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const Architecture& arch) {
    const int d = arch.input_dim();
    if (x.size() != d || y.size() != d)
        throw std::invalid_argument("overlaps: input dimension mismatch");
    const int s = arch.patch_dim();
    OverlapTable tbl;
    tbl.values.resize(d / s);
    for (int i = 0; i < d / s; ++i) {
        double t = x.segment(static_cast<Eigen::Index>(i) * s, s)
                       .dot(y.segment(static_cast<Eigen::Index>(i) * s, s));
        tbl.values[i] = std::min(1.0, std::max(-1.0, t));
    }
    return tbl;
}

namespace {

// One pass of the layered recursion over a flat window table. `vals` enters
// holding the p_1 first-layer values and leaves holding the p_L top values.
template <typename Step>
void reduce_layers(const Architecture& arch, std::vector<double>& aux,
                   std::vector<double>& vals, Step step) {
    for (int l = 2; l <= arch.hidden_layers(); ++l) {
        const int sl = arch.filter_sizes[l - 1];
        const int count = static_cast<int>(vals.size()) / sl;
        for (int w = 0; w < count; ++w) step(l, w, sl, aux, vals);
        aux.resize(count);
        vals.resize(count);
    }
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double rfk(const Architecture& arch, const OverlapTable& t) {
    if (t.size() != arch.patch_count(1))
        throw std::invalid_argument("rfk: overlap table has wrong length");
    std::vector<double> k(t.values.size());
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = kappa1(t.values[i]);
    for (int l = 2; l <= arch.hidden_layers(); ++l) {
        const int sl = arch.filter_sizes[l - 1];
        const int count = static_cast<int>(k.size()) / sl;
        for (int w = 0; w < count; ++w) {
            double m = 0.0;
            for (int j = 0; j < sl; ++j) m += k[w * sl + j];
            k[w] = kappa1(m / sl);
        }
        k.resize(count);
    }
    return mean_of(k);
}

double ntk(const Architecture& arch, const OverlapTable& t) {
    if (t.size() != arch.patch_count(1))
        throw std::invalid_argument("ntk: overlap table has wrong length");
    std::vector<double> k(t.values.size()), n(t.values.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double ti = t.values[i];
        k[i] = kappa1(ti);
        n[i] = k[i] + ti * kappa0(ti);
    }
    for (int l = 2; l <= arch.hidden_layers(); ++l) {
        const int sl = arch.filter_sizes[l - 1];
        const int count = static_cast<int>(k.size()) / sl;
        for (int w = 0; w < count; ++w) {
            double mk = 0.0, mn = 0.0;
            for (int j = 0; j < sl; ++j) {
                mk += k[w * sl + j];
                mn += n[w * sl + j];
            }
            mk /= sl;
            mn /= sl;
            k[w] = kappa1(mk);
            n[w] = k[w] + mn * kappa0(mk);
        }
        k.resize(count);
        n.resize(count);
    }
    return mean_of(n);
}

double kernel_value(const Architecture& arch, const OverlapTable& t) {
    return arch.kind == KernelKind::RFK ? rfk(arch, t) : ntk(arch, t);
}

double kernel_rd(const Architecture& arch, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& y, int stride) {
    const int d = arch.input_dim();
    if (x.size() != d || y.size() != d)
        throw std::invalid_argument("kernel_rd: input dimension mismatch");
    const int s = arch.patch_dim();
    if (stride != s && stride != 1)
        throw std::invalid_argument("kernel_rd: stride must be the patch size or 1");

    const auto px = split_patches(x, s, stride);
    const auto py = split_patches(y, s, stride);
    const int windows = static_cast<int>(px.size());

    // sx/sy hold the summed squared norms of the current-level windows; the
    // level-l prefactor is sqrt(sx/s_l) * sqrt(sy/s_l).
    std::vector<double> k(windows), n(windows), sx(windows), sy(windows);
    for (int i = 0; i < windows; ++i) {
        const double nx2 = px[i].squaredNorm();
        const double ny2 = py[i].squaredNorm();
        if (nx2 == 0.0 || ny2 == 0.0)
            throw std::domain_error("kernel_rd: zero-norm patch has no angle");
        const double nx = std::sqrt(nx2), ny = std::sqrt(ny2);
        const double dot = px[i].dot(py[i]);
        const double t = dot / (nx * ny);
        k[i] = nx * ny * kappa1(t);
        n[i] = k[i] + dot * kappa0(t);
        sx[i] = nx2;
        sy[i] = ny2;
    }
    for (int l = 2; l <= arch.hidden_layers(); ++l) {
        const int sl = arch.filter_sizes[l - 1];
        if (static_cast<int>(k.size()) % sl != 0)
            throw std::invalid_argument("kernel_rd: window count not divisible at layer " +
                                        std::to_string(l));
        const int count = static_cast<int>(k.size()) / sl;
        for (int w = 0; w < count; ++w) {
            double mk = 0.0, mn = 0.0, msx = 0.0, msy = 0.0;
            for (int j = 0; j < sl; ++j) {
                mk += k[w * sl + j];
                mn += n[w * sl + j];
                msx += sx[w * sl + j];
                msy += sy[w * sl + j];
            }
            mk /= sl;
            mn /= sl;
            const double denom = std::sqrt(msx / sl) * std::sqrt(msy / sl);
            const double u = mk / denom;
            k[w] = denom * kappa1(u);
            n[w] = k[w] + mn * kappa0(u);
            sx[w] = msx;
            sy[w] = msy;
        }
        k.resize(count);
        n.resize(count);
        sx.resize(count);
        sy.resize(count);
    }
    return arch.kind == KernelKind::RFK ? mean_of(k) : mean_of(n);
}

NetworkWeights zero_weights(const Architecture& arch, const std::vector<int>& widths) {
    const int L = arch.hidden_layers();
    if (static_cast<int>(widths.size()) != L)
        throw std::invalid_argument("weights: need one width per hidden layer");
    NetworkWeights w;
    w.widths = widths;
    w.layer.resize(L);
    w.layer[0] = Eigen::MatrixXd::Zero(widths[0], arch.filter_sizes[0]);
    for (int l = 2; l <= L; ++l)
        w.layer[l - 1] =
            Eigen::MatrixXd::Zero(widths[l - 1], widths[l - 2] * arch.filter_sizes[l - 1]);
    w.readout = Eigen::MatrixXd::Zero(widths[L - 1], arch.top_multiplicity);
    return w;
}

NetworkWeights random_weights(const Architecture& arch, const std::vector<int>& widths,
                              std::uint64_t seed) {
    NetworkWeights w = zero_weights(arch, widths);
    Rng rng(derive_seed(seed, "weights", 0));
    for (auto& m : w.layer) rng.fill_normal(m.data(), static_cast<std::size_t>(m.size()));
    rng.fill_normal(w.readout.data(), static_cast<std::size_t>(w.readout.size()));
    return w;
}

namespace {

inline double relu_sqrt2(double z) { return z > 0.0 ? std::numbers::sqrt2 * z : 0.0; }

}  // namespace

double network_forward(const Architecture& arch, const NetworkWeights& w,
                       const Eigen::VectorXd& x) {
    const int L = arch.hidden_layers();
    if (static_cast<int>(w.layer.size()) != L || static_cast<int>(w.widths.size()) != L)
        throw std::invalid_argument("network_forward: weights do not match architecture");
    if (x.size() != arch.input_dim())
        throw std::invalid_argument("network_forward: input dimension mismatch");

    const int s1 = arch.filter_sizes[0];
    const int p1 = arch.patch_count(1);
    if (w.layer[0].rows() != w.widths[0] || w.layer[0].cols() != s1)
        throw std::invalid_argument("network_forward: first-layer shape mismatch");

    // act(h, i): activation of neuron channel h at window i
    Eigen::MatrixXd act(w.widths[0], p1);
    for (int i = 0; i < p1; ++i) {
        const auto patch = x.segment(static_cast<Eigen::Index>(i) * s1, s1);
        for (int h = 0; h < w.widths[0]; ++h)
            act(h, i) = relu_sqrt2(w.layer[0].row(h).dot(patch));
    }

    for (int l = 2; l <= L; ++l) {
        const int sl = arch.filter_sizes[l - 1];
        const int Hl = w.widths[l - 1], Hp = w.widths[l - 2];
        const int pl = static_cast<int>(act.cols()) / sl;
        if (w.layer[l - 1].rows() != Hl || w.layer[l - 1].cols() != Hp * sl)
            throw std::invalid_argument("network_forward: layer shape mismatch");
        const double norm = 1.0 / (std::sqrt(static_cast<double>(Hp)) *
                                   std::sqrt(static_cast<double>(sl)));
        Eigen::MatrixXd next(Hl, pl);
        for (int i = 0; i < pl; ++i) {
            for (int h = 0; h < Hl; ++h) {
                double z = 0.0;
                for (int j = 0; j < sl; ++j)
                    z += w.layer[l - 1]
                             .row(h)
                             .segment(static_cast<Eigen::Index>(j) * Hp, Hp)
                             .dot(act.col(i * sl + j));
                next(h, i) = relu_sqrt2(norm * z);
            }
        }
        act = std::move(next);
    }

    const int pL = arch.top_multiplicity;
    const int HL = w.widths[L - 1];
    if (act.cols() != pL || w.readout.rows() != HL || w.readout.cols() != pL)
        throw std::invalid_argument("network_forward: readout shape mismatch");
    double out = 0.0;
    for (int i = 0; i < pL; ++i) out += w.readout.col(i).dot(act.col(i));
    return out / (std::sqrt(static_cast<double>(HL)) * std::sqrt(static_cast<double>(pL)));
}

MonteCarloEstimate monte_carlo_rfk(const Architecture& arch, const std::vector<int>& widths,
                                   int n_samples, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, std::uint64_t seed) {
    RowMatrix points(2, x.size());
    points.row(0) = x.transpose();
    points.row(1) = y.transpose();
    return monte_carlo_rfk_pairs(arch, widths, n_samples, points, {{0, 1}}, seed).front();
}

std::vector<MonteCarloEstimate> monte_carlo_rfk_pairs(
    const Architecture& arch, const std::vector<int>& widths, int n_samples,
    const RowMatrix& points, const std::vector<std::pair<int, int>>& pairs,
    std::uint64_t seed) {
    if (n_samples < 100)
        throw std::invalid_argument("monte_carlo_rfk_pairs: need at least 100 samples");
    const int L = arch.hidden_layers();
    if (static_cast<int>(widths.size()) != L)
        throw std::invalid_argument("monte_carlo_rfk_pairs: need one width per hidden layer");
    if (points.cols() != arch.input_dim())
        throw std::invalid_argument("monte_carlo_rfk_pairs: point dimension mismatch");
    for (const auto& [a, b] : pairs)
        if (a < 0 || b < 0 || a >= points.rows() || b >= points.rows())
            throw std::invalid_argument("monte_carlo_rfk_pairs: pair index out of range");

    const int npts = static_cast<int>(points.rows());
    const int npairs = static_cast<int>(pairs.size());
    const int s1 = arch.filter_sizes[0];
    const int p1 = arch.patch_count(1);

    // patches of all points as columns: s1 x (npts * p1)
    Eigen::MatrixXd patches(s1, static_cast<Eigen::Index>(npts) * p1);
    for (int i = 0; i < npts; ++i)
        for (int w = 0; w < p1; ++w)
            patches.col(static_cast<Eigen::Index>(i) * p1 + w) =
                points.row(i).segment(static_cast<Eigen::Index>(w) * s1, s1).transpose();

    // per-sample products, reduced sequentially afterwards so the result does
    // not depend on the thread count
    std::vector<double> vals(static_cast<std::size_t>(npairs) * n_samples);

#pragma omp parallel
    {
        Eigen::MatrixXd weights, act, next, gathered;
        Eigen::VectorXd f(npts);
#pragma omp for schedule(static)
        for (int sample = 0; sample < n_samples; ++sample) {
            Rng rng(derive_seed(seed, "mc", static_cast<std::uint64_t>(sample)));

            weights.resize(widths[0], s1);
            rng.fill_normal(weights.data(), static_cast<std::size_t>(weights.size()));
            act.noalias() = weights * patches;  // H1 x (npts*p1)
            act = (act.array() > 0.0).select(act * std::numbers::sqrt2, 0.0);

            int pl = p1;
            for (int l = 2; l <= L; ++l) {
                const int sl = arch.filter_sizes[l - 1];
                const int Hl = widths[l - 1], Hp = widths[l - 2];
                pl /= sl;
                weights.resize(Hl, static_cast<Eigen::Index>(Hp) * sl);
                rng.fill_normal(weights.data(), static_cast<std::size_t>(weights.size()));
                // gather windows: (Hp*sl) x (npts*pl)
                gathered.resize(static_cast<Eigen::Index>(Hp) * sl,
                                static_cast<Eigen::Index>(npts) * pl);
                for (int i = 0; i < npts; ++i)
                    for (int w = 0; w < pl; ++w)
                        for (int j = 0; j < sl; ++j)
                            gathered.block(static_cast<Eigen::Index>(j) * Hp, i * pl + w, Hp,
                                           1) = act.col((i * pl + w) * sl + j);
                const double norm = 1.0 / std::sqrt(static_cast<double>(Hp) * sl);
                next.noalias() = weights * gathered;
                act = (next.array() > 0.0).select(next * (std::numbers::sqrt2 * norm), 0.0);
            }

            const int pL = arch.top_multiplicity;
            const int HL = widths[L - 1];
            weights.resize(HL, pL);
            rng.fill_normal(weights.data(), static_cast<std::size_t>(weights.size()));
            const double norm = 1.0 / std::sqrt(static_cast<double>(HL) * pL);
            for (int i = 0; i < npts; ++i) {
                double acc = 0.0;
                for (int w = 0; w < pL; ++w)
                    acc += weights.col(w).dot(act.col(static_cast<Eigen::Index>(i) * pL + w));
                f[i] = acc * norm;
            }
            for (int q = 0; q < npairs; ++q)
                vals[static_cast<std::size_t>(q) * n_samples + sample] =
                    f[pairs[q].first] * f[pairs[q].second];
        }
    }

    std::vector<MonteCarloEstimate> out(npairs);
    for (int q = 0; q < npairs; ++q) {
        double sum = 0.0, sum2 = 0.0;
        for (int sample = 0; sample < n_samples; ++sample) {
            const double v = vals[static_cast<std::size_t>(q) * n_samples + sample];
            sum += v;
            sum2 += v * v;
        }
        out[q].samples = n_samples;
        out[q].estimate = sum / n_samples;
        const double var = (sum2 - sum * sum / n_samples) / (n_samples - 1);
        out[q].standard_error = std::sqrt(std::max(0.0, var) / n_samples);
    }
    return out;
}

}  // namespace hck
