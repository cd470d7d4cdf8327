#include "hck/gram.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hck {

namespace {

static_assert(std::endian::native == std::endian::little,
              "gram binary io assumes a little-endian host");

struct PairKernel {
    const Architecture& arch;
    bool fast_multisphere;  // dot-product recursion applies
    int stride;

    double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        if (fast_multisphere) return kernel_value(arch, overlaps(x, y, arch));
        return kernel_rd(arch, x, y, stride);
    }
};

GramMatrix assemble(const Architecture& arch, const InputBatch& batch,
                    const InputBatch* other, int stride, bool parallel) {
    arch.validate();
    if (stride == 0) stride = arch.patch_dim();
    if (batch.dim() != arch.input_dim())
        throw std::invalid_argument("gram: batch dimension does not match architecture");
    if (other && other->dim() != arch.input_dim())
        throw std::invalid_argument("gram: second batch dimension mismatch");

    const bool fast = batch.space == Space::Multisphere && stride == arch.patch_dim() &&
                      (!other || other->space == Space::Multisphere);
    const PairKernel kern{arch, fast, stride};

    GramMatrix g;
    g.arch_fingerprint = arch.fingerprint();
    g.space = batch.space;
    g.kind = arch.kind;
    g.stride = stride;
    g.symmetric = (other == nullptr);

    const int n = batch.size();
    if (!other) {
        g.entries.resize(n, n);
        // upper triangle, then mirror: symmetry is exact by construction
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd xi = batch.points.row(i);
            for (int j = i; j < n; ++j)
                g.entries(i, j) = kern(xi, batch.points.row(j));
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) g.entries(j, i) = g.entries(i, j);
    } else {
        const int m = other->size();
        g.entries.resize(n, m);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd xi = batch.points.row(i);
            for (int j = 0; j < m; ++j)
                g.entries(i, j) = kern(xi, other->points.row(j));
        }
    }
    return g;
}

}  // namespace

GramMatrix gram(const Architecture& arch, const InputBatch& batch, const InputBatch* other,
                int stride) {
    return assemble(arch, batch, other, stride, true);
}

GramMatrix gram_serial(const Architecture& arch, const InputBatch& batch,
                       const InputBatch* other, int stride) {
    return assemble(arch, batch, other, stride, false);
}

double min_eigenvalue(const GramMatrix& g) {
    if (!g.symmetric) throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.entries,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

namespace {

constexpr char kMagic[8] = {'H', 'C', 'K', 'G', 'R', 'A', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void put(std::FILE* f, const T& v) {
    if (std::fwrite(&v, sizeof(T), 1, f) != 1)
        throw std::runtime_error("gram io: short write");
}

template <typename T>
T get(std::FILE* f) {
    T v;
    if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("gram io: short read");
    return v;
}

}  // namespace

void write_gram_binary(const GramMatrix& g, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("gram io: cannot open " + path);
    if (std::fwrite(kMagic, 1, 8, f.get()) != 8) throw std::runtime_error("gram io: short write");
    put<std::uint32_t>(f.get(), kVersion);
    put<std::uint64_t>(f.get(), static_cast<std::uint64_t>(g.rows()));
    put<std::uint64_t>(f.get(), static_cast<std::uint64_t>(g.cols()));
    put<std::uint64_t>(f.get(), g.arch_fingerprint);
    put<std::uint8_t>(f.get(), static_cast<std::uint8_t>(g.space));
    put<std::uint8_t>(f.get(), static_cast<std::uint8_t>(g.kind));
    put<std::uint8_t>(f.get(), g.symmetric ? 1 : 0);
    put<std::uint8_t>(f.get(), 0);
    put<std::int32_t>(f.get(), g.stride);
    Eigen::RowVectorXd row(g.cols());
    for (int i = 0; i < g.rows(); ++i) {
        row = g.entries.row(i);  // storage is column-major; make the row contiguous
        if (std::fwrite(row.data(), sizeof(double), g.cols(), f.get()) !=
            static_cast<std::size_t>(g.cols()))
            throw std::runtime_error("gram io: short write");
    }
}

GramMatrix read_gram_binary(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("gram io: cannot open " + path);
    char magic[8];
    if (std::fread(magic, 1, 8, f.get()) != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("gram io: bad magic in " + path);
    if (get<std::uint32_t>(f.get()) != kVersion)
        throw std::runtime_error("gram io: unsupported version");
    GramMatrix g;
    const auto rows = get<std::uint64_t>(f.get());
    const auto cols = get<std::uint64_t>(f.get());
    g.arch_fingerprint = get<std::uint64_t>(f.get());
    g.space = static_cast<Space>(get<std::uint8_t>(f.get()));
    g.kind = static_cast<KernelKind>(get<std::uint8_t>(f.get()));
    g.symmetric = get<std::uint8_t>(f.get()) != 0;
    get<std::uint8_t>(f.get());
    g.stride = get<std::int32_t>(f.get());
    g.entries.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t i = 0; i < rows; ++i) {
        Eigen::VectorXd row(cols);
        if (std::fread(row.data(), sizeof(double), cols, f.get()) != cols)
            throw std::runtime_error("gram io: truncated body");
        g.entries.row(static_cast<Eigen::Index>(i)) = row;
    }
    return g;
}

void write_gram_csv(const GramMatrix& g, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) throw std::runtime_error("gram io: cannot open " + path);
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            std::fprintf(f.get(), "%.17g%c", g.entries(i, j), j + 1 == g.cols() ? '\n' : ',');
}

}  // namespace hck
