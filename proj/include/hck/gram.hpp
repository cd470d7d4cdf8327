#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "hck/geometry.hpp"
#include "hck/kernels.hpp"

namespace hck {

// Pairwise kernel evaluations with provenance. Symmetric matrices are
// assembled on the upper triangle and mirrored, so symmetry is exact.
struct GramMatrix {
    Eigen::MatrixXd entries;
    std::uint64_t arch_fingerprint = 0;
    Space space = Space::Multisphere;
    KernelKind kind = KernelKind::NTK;
    int stride = 0;
    bool symmetric = false;

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

// Kernel matrix of `batch` against itself (symmetric) or against `other`
// (rows index `batch`, columns index `other`). Multisphere batches with
// disjoint stride use the dot-product recursion; anything else goes through
// the R^d kernel. stride == 0 means "the patch size".
//
// The OpenMP version computes each entry independently, so its output is
// bit-identical to the serial reference for any thread count.
GramMatrix gram(const Architecture& arch, const InputBatch& batch,
                const InputBatch* other = nullptr, int stride = 0);
GramMatrix gram_serial(const Architecture& arch, const InputBatch& batch,
                       const InputBatch* other = nullptr, int stride = 0);

// Smallest eigenvalue via a dense symmetric eigensolver (test oracle).
double min_eigenvalue(const GramMatrix& g);

// Little-endian binary format:
//   magic "HCKGRAM1" | u32 version | u64 rows | u64 cols | u64 fingerprint |
//   u8 space | u8 kind | u8 symmetric | u8 pad | i32 stride |
//   rows*cols float64, row-major.
void write_gram_binary(const GramMatrix& g, const std::string& path);
GramMatrix read_gram_binary(const std::string& path);

// CSV (one row per line, full precision); intended for small matrices.
void write_gram_csv(const GramMatrix& g, const std::string& path);

}  // namespace hck
