#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hck/geometry.hpp"

namespace hck {

// Arc-cosine building blocks. Inputs are clamped to [-1, 1] inside a 1e-9
// tolerance band (patch dot products can exceed 1 by rounding); values
// further out are rejected.
double kappa0(double t);  // (pi - arccos t) / pi
double kappa1(double t);  // ((pi - arccos t) t + sqrt(1 - t^2)) / pi

// Per-patch dot products t_i = x_i . y_i for the p_1 first-layer patches,
// clamped to [-1, 1].
struct OverlapTable {
    std::vector<double> values;
    int size() const { return static_cast<int>(values.size()); }
};

OverlapTable overlaps(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const Architecture& arch);

// Hierarchical kernels on the multisphere, evaluated layer by layer over a
// flat window table:
//   RFK:  K^(1) = kappa1(t),  K^(l) = kappa1(mean_window K^(l-1)),
//         K^(L+1) = mean over the p_L top windows.
//   NTK:  N^(1) = kappa1(t) + t kappa0(t),
//         N^(l) = K^(l) + (mean_window N^(l-1)) * kappa0(mean_window K^(l-1)),
//         N^(L+1) = mean over the p_L top windows.
double rfk(const Architecture& arch, const OverlapTable& t);
double ntk(const Architecture& arch, const OverlapTable& t);
double kernel_value(const Architecture& arch, const OverlapTable& t);  // dispatch on arch.kind

// Same kernels for inputs in R^d: angles t = x_i . y_i / (|x_i||y_i|) and
// per-level root-mean-square norm prefactors. stride must be s_1 (disjoint
// windows) or 1 (d wrapped windows). With stride 1 the overlap applies at
// layer 1 only; layers >= 2 group windows disjointly and the readout
// averages whatever windows remain. A zero-norm patch has no angle and
// raises std::domain_error.
double kernel_rd(const Architecture& arch, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& y, int stride);

// Finite-width network matching the kernel definitions, activation
// sigma(z) = sqrt(2) * max(0, z), no biases.
struct NetworkWeights {
    // layer[0]: H_1 x s_1 (filters shared across windows)
    // layer[l-1], l >= 2: H_l x (H_{l-1} * s_l)
    std::vector<Eigen::MatrixXd> layer;
    Eigen::MatrixXd readout;  // H_L x p_L
    std::vector<int> widths;  // H_1 ... H_L
};

NetworkWeights random_weights(const Architecture& arch, const std::vector<int>& widths,
                              std::uint64_t seed);
NetworkWeights zero_weights(const Architecture& arch, const std::vector<int>& widths);

double network_forward(const Architecture& arch, const NetworkWeights& w,
                       const Eigen::VectorXd& x);

// Empirical mean of f(x) f(y) over random initialisations, with its standard
// error. Converges to the RFK of the architecture as widths and samples grow;
// the default width for every layer is 1024.
struct MonteCarloEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    int samples = 0;
};

MonteCarloEstimate monte_carlo_rfk(const Architecture& arch, const std::vector<int>& widths,
                                   int n_samples, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& y, std::uint64_t seed);

// Same estimator for several pairs at once, sharing the weight draws across
// pairs (each estimate stays unbiased with its own standard error; sharing
// the draws only correlates the estimates across pairs).
std::vector<MonteCarloEstimate> monte_carlo_rfk_pairs(
    const Architecture& arch, const std::vector<int>& widths, int n_samples,
    const RowMatrix& points, const std::vector<std::pair<int, int>>& pairs,
    std::uint64_t seed);

}  // namespace hck
