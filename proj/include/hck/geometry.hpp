#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hck {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelKind { RFK, NTK };
enum class Space { Multisphere, Hypercube, Gaussian };

std::string to_string(KernelKind k);
std::string to_string(Space s);
KernelKind kernel_kind_from_string(const std::string& s);
Space space_from_string(const std::string& s);

// Hierarchical convolutional architecture: L hidden layers with filter sizes
// (s_1, ..., s_L) acting on non-overlapping windows, and p_L windows feeding
// the linear readout. Input dimension is d = p_L * prod_l s_l.
struct Architecture {
    std::vector<int> filter_sizes;  // s_1 ... s_L, each >= 2
    int top_multiplicity = 1;       // p_L >= 1
    KernelKind kind = KernelKind::NTK;

    int hidden_layers() const { return static_cast<int>(filter_sizes.size()); }  // L
    int input_dim() const;                // d
    int patch_dim() const { return filter_sizes.at(0); }  // s_1
    int patch_count(int l) const;         // p_l = d / prod_{l'<=l} s_{l'}
    int meta_patch_size(int l) const;     // prod_{l'<=l} s_{l'}

    // smoothness exponent of the kernel: 1/2 for NTK, 3/2 for RFK
    double smoothness() const { return kind == KernelKind::NTK ? 0.5 : 1.5; }

    std::uint64_t fingerprint() const;
    std::string to_string() const;  // e.g. "ntk[2,2]x1"

    void validate() const;  // throws std::invalid_argument on bad shape
};

Architecture make_arch(std::vector<int> filters, int top_multiplicity, KernelKind kind);

// d_eff(l): s_1 - 1 for l = 1, (s_1 - 1) * prod_{l'=2..l} s_{l'} for l >= 2
int effective_dim(const Architecture& arch, int l);

// Address of one meta-patch: the receptive field of a layer-l neuron,
// identified by the branch choices (i_{l+1}, ..., i_{L+1}) walking down from
// the readout. Branch indices are 1-based; i_{L+1} ranges over the p_L
// readout windows and i_m over s_m for m <= L. The empty path is accepted
// only for l = L with p_L = 1 (the single top window).
struct MetaPatchIndex {
    int layer = 1;
    std::vector<int> path;
};

// 0-based window position of the meta-patch among the p_l windows of layer l.
int meta_patch_flat_index(const Architecture& arch, const MetaPatchIndex& idx);
MetaPatchIndex meta_patch_from_flat(const Architecture& arch, int layer, int flat);

// The contiguous coordinate block addressed by idx (the receptive field).
Eigen::VectorXd meta_patch(const Eigen::VectorXd& x, const Architecture& arch,
                           const MetaPatchIndex& idx);

// stride == s: the d/s disjoint patches in order; stride == 1: d windows with
// circular wrap-around. Other strides are not defined.
std::vector<Eigen::VectorXd> split_patches(const Eigen::VectorXd& x, int s, int stride);

// A batch of n input points, one per row. For Multisphere every patch of
// every point is unit-norm; batches are immutable after construction.
struct InputBatch {
    RowMatrix points;
    Space space = Space::Multisphere;
    std::uint64_t seed = 0;
    int patch_dim = 1;  // s used when sampling (normalisation unit)

    int size() const { return static_cast<int>(points.rows()); }
    int dim() const { return static_cast<int>(points.cols()); }
    InputBatch head(int n) const;          // first n points
    InputBatch tail_from(int start) const; // points [start, end)
};

// Multisphere: per-patch normalised Gaussians; Hypercube: iid U[0,1];
// Gaussian: iid standard normal. Deterministic under (space, arch, n, seed).
InputBatch sample_inputs(Space space, const Architecture& arch, int n, std::uint64_t seed);

// max_i | ||patch_i|| - 1 | over all patches of all points (Multisphere check)
double max_patch_norm_deviation(const InputBatch& batch);

}  // namespace hck
