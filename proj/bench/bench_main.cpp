// Compares the serial reference implementations against the OpenMP versions
// and reports speedups. The parallel paths must be bit-identical to the
// serial ones; this is checked here as well as in the test suite.

#include <chrono>
#include <cstdio>
#include <cstring>

#include <omp.h>

#include "hck/gram.hpp"
#include "hck/spectrum.hpp"

using namespace hck;
using clk = std::chrono::steady_clock;

namespace {

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

void bench_gram(int n, const Architecture& arch) {
    const InputBatch batch = sample_inputs(Space::Multisphere, arch, n, 7);

    auto t0 = clk::now();
    const GramMatrix serial = gram_serial(arch, batch);
    const double ts = seconds_since(t0);

    t0 = clk::now();
    const GramMatrix parallel = gram(arch, batch);
    const double tp = seconds_since(t0);

    const bool equal = std::memcmp(serial.entries.data(), parallel.entries.data(),
                                   sizeof(double) * n * n) == 0;
    std::printf("gram %-12s n=%5d   serial %8.3f s   omp %8.3f s   speedup %4.2fx   %s\n",
                arch.to_string().c_str(), n, ts, tp, ts / tp,
                equal ? "bit-identical" : "MISMATCH");
}

void bench_spectrum(int k_max, long grid, const Architecture& arch) {
    const int threads = omp_get_max_threads();
    omp_set_num_threads(1);
    auto t0 = clk::now();
    const SpectrumTable serial = eigenvalues_fourier(arch, k_max, grid);
    const double ts = seconds_since(t0);

    omp_set_num_threads(threads);
    t0 = clk::now();
    const SpectrumTable parallel = eigenvalues_fourier(arch, k_max, grid);
    const double tp = seconds_since(t0);

    bool equal = serial.entries.size() == parallel.entries.size();
    for (std::size_t i = 0; equal && i < serial.entries.size(); ++i)
        equal = serial.entries[i].eigenvalue == parallel.entries[i].eigenvalue;
    std::printf("spectrum %-8s grid=%ld^2 kmax=%d   1 thread %6.3f s   %d threads %6.3f s   "
                "speedup %4.2fx   %s\n",
                arch.to_string().c_str(), grid, k_max, ts, threads, tp, ts / tp,
                equal ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    std::printf("threads available: %d\n", omp_get_max_threads());

    const Architecture deep2 = make_arch({2, 2}, 1, KernelKind::NTK);
    const Architecture shallow = make_arch({2}, 4, KernelKind::NTK);

    bench_gram(quick ? 256 : 2048, deep2);
    bench_gram(quick ? 256 : 2048, shallow);
    bench_spectrum(quick ? 32 : 256, quick ? 256 : 4096, deep2);
    return 0;
}
