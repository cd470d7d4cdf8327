#include "hck/geometry.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "hck/rng.hpp"

namespace hck {

std::string to_string(KernelKind k) { return k == KernelKind::RFK ? "rfk" : "ntk"; }

std::string to_string(Space s) {
    switch (s) {
        case Space::Multisphere: return "multisphere";
        case Space::Hypercube: return "hypercube";
        case Space::Gaussian: return "gaussian";
    }
    return "?";
}

KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "rfk" || s == "RFK") return KernelKind::RFK;
    if (s == "ntk" || s == "NTK") return KernelKind::NTK;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

Space space_from_string(const std::string& s) {
    if (s == "multisphere") return Space::Multisphere;
    if (s == "hypercube") return Space::Hypercube;
    if (s == "gaussian") return Space::Gaussian;
    throw std::invalid_argument("unknown input space: " + s);
}

void Architecture::validate() const {
    if (filter_sizes.empty()) throw std::invalid_argument("architecture needs at least one hidden layer");
    for (int s : filter_sizes)
        if (s < 2) throw std::invalid_argument("filter sizes must be >= 2");
    if (top_multiplicity < 1) throw std::invalid_argument("top multiplicity must be >= 1");
}

int Architecture::input_dim() const {
    int d = top_multiplicity;
    for (int s : filter_sizes) d *= s;
    return d;
}

int Architecture::meta_patch_size(int l) const {
    if (l < 1 || l > hidden_layers()) throw std::invalid_argument("layer index out of range");
    int m = 1;
    for (int i = 0; i < l; ++i) m *= filter_sizes[i];
    return m;
}

int Architecture::patch_count(int l) const { return input_dim() / meta_patch_size(l); }

std::uint64_t Architecture::fingerprint() const { return fnv1a(to_string()); }

std::string Architecture::to_string() const {
    std::ostringstream os;
    os << hck::to_string(kind) << "[";
    for (std::size_t i = 0; i < filter_sizes.size(); ++i)
        os << (i ? "," : "") << filter_sizes[i];
    os << "]x" << top_multiplicity;
    return os.str();
}

Architecture make_arch(std::vector<int> filters, int top_multiplicity, KernelKind kind) {
    Architecture a{std::move(filters), top_multiplicity, kind};
    a.validate();
    return a;
}

int effective_dim(const Architecture& arch, int l) {
    if (l < 1 || l > arch.hidden_layers())
        throw std::invalid_argument("effective_dim: layer out of range");
    int e = arch.filter_sizes[0] - 1;
    for (int i = 1; i < l; ++i) e *= arch.filter_sizes[i];
    return e;
}

namespace {

// path = (i_{l+1}, ..., i_L, i_{L+1}); the trailing i_{L+1} may be omitted
// when p_L = 1 (it is then the single top window).
std::vector<int> normalized_path(const Architecture& arch, const MetaPatchIndex& idx) {
    const int L = arch.hidden_layers();
    if (idx.layer < 1 || idx.layer > L)
        throw std::invalid_argument("meta-patch layer out of range");
    const int want = L - idx.layer + 1;
    std::vector<int> path = idx.path;
    if (static_cast<int>(path.size()) == want - 1 && arch.top_multiplicity == 1)
        path.push_back(1);
    if (static_cast<int>(path.size()) != want)
        throw std::invalid_argument("meta-patch path has wrong length");
    for (int m = idx.layer + 1; m <= L; ++m) {
        const int v = path[m - idx.layer - 1];
        if (v < 1 || v > arch.filter_sizes[m - 1])
            throw std::invalid_argument("meta-patch branch index out of range");
    }
    if (path.back() < 1 || path.back() > arch.top_multiplicity)
        throw std::invalid_argument("meta-patch top window index out of range");
    return path;
}

}  // namespace

int meta_patch_flat_index(const Architecture& arch, const MetaPatchIndex& idx) {
    const std::vector<int> path = normalized_path(arch, idx);
    const int L = arch.hidden_layers();
    int flat = path.back() - 1;  // i_{L+1}
    for (int m = L; m > idx.layer; --m)
        flat = flat * arch.filter_sizes[m - 1] + (path[m - idx.layer - 1] - 1);
    return flat;
}

MetaPatchIndex meta_patch_from_flat(const Architecture& arch, int layer, int flat) {
    const int L = arch.hidden_layers();
    if (layer < 1 || layer > L) throw std::invalid_argument("layer out of range");
    if (flat < 0 || flat >= arch.patch_count(layer))
        throw std::invalid_argument("flat meta-patch index out of range");
    MetaPatchIndex idx;
    idx.layer = layer;
    idx.path.resize(L - layer + 1);
    int b = flat;
    for (int m = layer + 1; m <= L; ++m) {
        idx.path[m - layer - 1] = b % arch.filter_sizes[m - 1] + 1;
        b /= arch.filter_sizes[m - 1];
    }
    idx.path.back() = b + 1;
    return idx;
}

Eigen::VectorXd meta_patch(const Eigen::VectorXd& x, const Architecture& arch,
                           const MetaPatchIndex& idx) {
    if (x.size() != arch.input_dim())
        throw std::invalid_argument("meta_patch: input has wrong dimension");
    const int flat = meta_patch_flat_index(arch, idx);
    const int m = arch.meta_patch_size(idx.layer);
    return x.segment(static_cast<Eigen::Index>(flat) * m, m);
}

std::vector<Eigen::VectorXd> split_patches(const Eigen::VectorXd& x, int s, int stride) {
    const int d = static_cast<int>(x.size());
    if (s < 1 || s > d) throw std::invalid_argument("split_patches: bad patch size");
    std::vector<Eigen::VectorXd> out;
    if (stride == s) {
        if (d % s != 0)
            throw std::invalid_argument("split_patches: patch size does not divide dimension");
        out.reserve(d / s);
        for (int i = 0; i < d; i += s) out.push_back(x.segment(i, s));
    } else if (stride == 1) {
        out.reserve(d);
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd w(s);
            for (int j = 0; j < s; ++j) w[j] = x[(i + j) % d];
            out.push_back(std::move(w));
        }
    } else {
        throw std::invalid_argument("split_patches: stride must be the patch size or 1");
    }
    return out;
}

InputBatch InputBatch::head(int n) const {
    InputBatch b{points.topRows(n), space, seed, patch_dim};
    return b;
}

InputBatch InputBatch::tail_from(int start) const {
    InputBatch b{points.bottomRows(points.rows() - start), space, seed, patch_dim};
    return b;
}

InputBatch sample_inputs(Space space, const Architecture& arch, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_inputs: n must be >= 1");
    arch.validate();
    const int d = arch.input_dim();
    const int s = arch.patch_dim();
    InputBatch batch;
    batch.points.resize(n, d);
    batch.space = space;
    batch.seed = seed;
    batch.patch_dim = s;
    Rng rng(derive_seed(seed, "inputs", 0));
    for (int i = 0; i < n; ++i) {
        double* row = batch.points.row(i).data();
        switch (space) {
            case Space::Multisphere:
                for (int p = 0; p < d; p += s) {
                    double nrm2 = 0.0;
                    do {
                        nrm2 = 0.0;
                        for (int j = 0; j < s; ++j) {
                            row[p + j] = rng.normal();
                            nrm2 += row[p + j] * row[p + j];
                        }
                    } while (nrm2 == 0.0);  // probability-zero degenerate draw
                    const double inv = 1.0 / std::sqrt(nrm2);
                    for (int j = 0; j < s; ++j) row[p + j] *= inv;
                }
                break;
            case Space::Hypercube:
                for (int j = 0; j < d; ++j) row[j] = rng.uniform();
                break;
            case Space::Gaussian:
                for (int j = 0; j < d; ++j) row[j] = rng.normal();
                break;
        }
    }
    return batch;
}

double max_patch_norm_deviation(const InputBatch& batch) {
    const int s = batch.patch_dim;
    double worst = 0.0;
    for (int i = 0; i < batch.size(); ++i)
        for (int p = 0; p + s <= batch.dim(); p += s)
            worst = std::max(worst, std::abs(batch.points.row(i).segment(p, s).norm() - 1.0));
    return worst;
}

}  // namespace hck
