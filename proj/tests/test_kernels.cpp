#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hck/kernels.hpp"
#include "hck/rng.hpp"

using namespace hck;

namespace {

OverlapTable table_of(int p, double t) {
    OverlapTable tbl;
    tbl.values.assign(static_cast<std::size_t>(p), t);
    return tbl;
}

}  // namespace

TEST_CASE("kappa boundary values") {
    CHECK(kappa0(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kappa0(-1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kappa0(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(kappa1(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kappa1(-1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kappa1(0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("kappa clamp band") {
    CHECK(kappa0(1.0 + 5e-10) == doctest::Approx(1.0));
    CHECK(kappa1(-1.0 - 5e-10) == doctest::Approx(0.0));
    CHECK_THROWS_AS(kappa0(1.0 + 1e-8), std::invalid_argument);
    CHECK_THROWS_AS(kappa1(-1.1), std::invalid_argument);
}

TEST_CASE("kappa monotonicity and convexity of kappa1") {
    double prev0 = kappa0(-1.0), prev1 = kappa1(-1.0);
    double prev_diff = 0.0;
    const int n = 400;
    for (int i = 1; i <= n; ++i) {
        const double t = -1.0 + 2.0 * i / n;
        const double k0 = kappa0(t), k1 = kappa1(t);
        CHECK(k0 >= prev0);
        CHECK(k1 >= prev1);
        const double diff = k1 - prev1;
        if (i > 1) CHECK(diff >= prev_diff - 1e-12);  // convex: increments grow
        prev_diff = diff;
        prev0 = k0;
        prev1 = k1;
    }
}

TEST_CASE("overlaps at aligned, opposite and orthogonal patches") {
    const Architecture a = make_arch({2}, 2, KernelKind::NTK);
    Eigen::VectorXd x(4);
    x << 1, 0, 0, 1;
    const OverlapTable same = overlaps(x, x, a);
    for (double t : same.values) CHECK(t == doctest::Approx(1.0));
    const OverlapTable opp = overlaps(x, (-x).eval(), a);
    for (double t : opp.values) CHECK(t == doctest::Approx(-1.0));
    Eigen::VectorXd y(4);
    y << 0, 1, -1, 0;  // each patch orthogonal to the one in x
    const OverlapTable orth = overlaps(x, y, a);
    for (double t : orth.values) CHECK(t == doctest::Approx(0.0));
    Eigen::VectorXd bad(6);
    CHECK_THROWS_AS(overlaps(x, bad, a), std::invalid_argument);
}

TEST_CASE("rfk closed-form values") {
    for (const auto& arch : {make_arch({2}, 3, KernelKind::RFK),
                             make_arch({2, 2}, 1, KernelKind::RFK),
                             make_arch({3, 2}, 2, KernelKind::RFK)})
        CHECK(rfk(arch, table_of(arch.patch_count(1), 1.0)) == doctest::Approx(1.0));

    CHECK(rfk(make_arch({2}, 2, KernelKind::RFK), table_of(2, -1.0)) ==
          doctest::Approx(0.0));
    CHECK(rfk(make_arch({2, 2}, 1, KernelKind::RFK), table_of(2, -1.0)) ==
          doctest::Approx(1.0 / std::numbers::pi));
}

TEST_CASE("ntk closed-form values") {
    Rng rng(3);
    for (int L = 1; L <= 4; ++L) {
        std::vector<int> filters;
        for (int l = 0; l < L; ++l) filters.push_back(2 + static_cast<int>(rng.next_u64() % 3));
        const Architecture arch = make_arch(filters, 1 + static_cast<int>(rng.next_u64() % 2),
                                            KernelKind::NTK);
        CHECK(ntk(arch, table_of(arch.patch_count(1), 1.0)) ==
              doctest::Approx(L + 1.0).epsilon(1e-9));
    }
    CHECK(ntk(make_arch({2}, 1, KernelKind::NTK), table_of(1, -1.0)) == doctest::Approx(0.0));
    CHECK(ntk(make_arch({2}, 1, KernelKind::NTK), table_of(1, 0.0)) ==
          doctest::Approx(1.0 / std::numbers::pi));
}

TEST_CASE("kernel bounds and maximum at coincident inputs") {
    const Architecture r = make_arch({2, 2}, 2, KernelKind::RFK);
    const Architecture n = make_arch({2, 2}, 2, KernelKind::NTK);
    const InputBatch batch = sample_inputs(Space::Multisphere, r, 24, 17);
    const Eigen::VectorXd x0 = batch.points.row(0);
    for (int i = 1; i < batch.size(); ++i) {
        const Eigen::VectorXd y = batch.points.row(i);
        const double kr = rfk(r, overlaps(x0, y, r));
        const double kn = ntk(n, overlaps(x0, y, n));
        CHECK(kr >= 0.0);
        CHECK(kr <= 1.0 + 1e-12);
        CHECK(std::abs(kn) <= 3.0 + 1e-12);
        CHECK(kr <= rfk(r, overlaps(x0, x0, r)) + 1e-12);
        CHECK(kn <= ntk(n, overlaps(x0, x0, n)) + 1e-12);
    }
}

TEST_CASE("kernel symmetry is exact") {
    const Architecture arch = make_arch({2, 2}, 2, KernelKind::NTK);
    const InputBatch batch = sample_inputs(Space::Multisphere, arch, 8, 23);
    for (int i = 0; i < 4; ++i) {
        const Eigen::VectorXd x = batch.points.row(2 * i);
        const Eigen::VectorXd y = batch.points.row(2 * i + 1);
        CHECK(ntk(arch, overlaps(x, y, arch)) == ntk(arch, overlaps(y, x, arch)));
        CHECK(kernel_rd(arch, x, y, 2) == kernel_rd(arch, y, x, 2));
    }
}

TEST_CASE("window permutation invariance") {
    const Architecture arch = make_arch({2, 2}, 1, KernelKind::NTK);
    const InputBatch batch = sample_inputs(Space::Multisphere, arch, 2, 31);
    Eigen::VectorXd x = batch.points.row(0), y = batch.points.row(1);
    // swapping the two windows feeding the second layer, in both inputs,
    // permutes two summands of a mean: bitwise identical
    Eigen::VectorXd xs(4), ys(4);
    xs << x[2], x[3], x[0], x[1];
    ys << y[2], y[3], y[0], y[1];
    CHECK(ntk(arch, overlaps(x, y, arch)) == ntk(arch, overlaps(xs, ys, arch)));

    // three windows: the mean is permutation invariant up to rounding
    const Architecture three = make_arch({2}, 3, KernelKind::NTK);
    const InputBatch b3 = sample_inputs(Space::Multisphere, three, 2, 37);
    Eigen::VectorXd u = b3.points.row(0), v = b3.points.row(1);
    Eigen::VectorXd ur(6), vr(6);
    ur << u[2], u[3], u[4], u[5], u[0], u[1];
    vr << v[2], v[3], v[4], v[5], v[0], v[1];
    CHECK(ntk(three, overlaps(u, v, three)) ==
          doctest::Approx(ntk(three, overlaps(ur, vr, three))).epsilon(1e-13));
}

TEST_CASE("kernel_rd reduces to the multisphere kernel on unit patches") {
    for (KernelKind kind : {KernelKind::RFK, KernelKind::NTK}) {
        const Architecture arch = make_arch({2, 2}, 2, kind);
        const InputBatch batch = sample_inputs(Space::Multisphere, arch, 10, 41);
        for (int i = 0; i + 1 < batch.size(); i += 2) {
            const Eigen::VectorXd x = batch.points.row(i);
            const Eigen::VectorXd y = batch.points.row(i + 1);
            const double direct = kernel_value(arch, overlaps(x, y, arch));
            CHECK(kernel_rd(arch, x, y, 2) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("kernel_rd on a positive ray") {
    const Architecture arch = make_arch({2}, 2, KernelKind::RFK);
    Eigen::VectorXd x(4);
    x << 0.3, 0.4, 1.0, 2.0;
    const double c = 1.7;
    const Eigen::VectorXd y = c * x;
    // all angles are 1, so the kernel is the mean of c |x_i|^2
    const double expect = c * x.squaredNorm() / arch.patch_count(1);
    CHECK(kernel_rd(arch, x, y, 2) == doctest::Approx(expect).epsilon(1e-12));

    Eigen::VectorXd z = x;
    z[0] = z[1] = 0.0;
    CHECK_THROWS_AS(kernel_rd(arch, z, y, 2), std::domain_error);
}

namespace {

// Independent transcription of the R^d recursion, structured as a literal
// per-level walk over meta-patch index tuples. Oracle for kernel_rd.
struct PlainRd {
    const Architecture& arch;
    const Eigen::VectorXd &x, &y;

    double patch_norm2(const Eigen::VectorXd& v, int level, int window) const {
        const int size = arch.meta_patch_size(level);
        return v.segment(static_cast<Eigen::Index>(window) * size, size).squaredNorm();
    }

    // returns {rfk, ntk} of the window at `level`
    std::pair<double, double> eval(int level, int window) const {
        if (level == 1) {
            const int s = arch.filter_sizes[0];
            const auto xi = x.segment(static_cast<Eigen::Index>(window) * s, s);
            const auto yi = y.segment(static_cast<Eigen::Index>(window) * s, s);
            const double nx = xi.norm(), ny = yi.norm();
            const double t = xi.dot(yi) / (nx * ny);
            const double k = nx * ny * kappa1(t);
            return {k, k + xi.dot(yi) * kappa0(t)};
        }
        const int sl = arch.filter_sizes[level - 1];
        double mk = 0.0, mn = 0.0, mx = 0.0, my = 0.0;
        for (int j = 0; j < sl; ++j) {
            const auto [k, n] = eval(level - 1, window * sl + j);
            mk += k / sl;
            mn += n / sl;
            mx += patch_norm2(x, level - 1, window * sl + j) / sl;
            my += patch_norm2(y, level - 1, window * sl + j) / sl;
        }
        const double denom = std::sqrt(mx) * std::sqrt(my);
        const double k = denom * kappa1(mk / denom);
        return {k, k + mn * kappa0(mk / denom)};
    }

    double operator()() const {
        const int pL = arch.top_multiplicity;
        double k = 0.0, n = 0.0;
        for (int w = 0; w < pL; ++w) {
            const auto [kw, nw] = eval(arch.hidden_layers(), w);
            k += kw / pL;
            n += nw / pL;
        }
        return arch.kind == KernelKind::RFK ? k : n;
    }
};

}  // namespace

TEST_CASE("kernel_rd matches an independent transcription of the recursion") {
    Rng rng(55);
    for (KernelKind kind : {KernelKind::RFK, KernelKind::NTK}) {
        const Architecture arch = make_arch({2, 2}, 1, kind);
        for (int rep = 0; rep < 8; ++rep) {
            Eigen::VectorXd x(4), y(4);
            for (int i = 0; i < 4; ++i) {
                x[i] = rng.uniform();
                y[i] = rng.uniform();
            }
            const double oracle = PlainRd{arch, x, y}();
            CHECK(kernel_rd(arch, x, y, 2) == doctest::Approx(oracle).epsilon(1e-14));
        }
    }
    // deeper architecture with a readout over two windows
    const Architecture deep = make_arch({2, 2}, 2, KernelKind::NTK);
    Eigen::VectorXd x(8), y(8);
    for (int i = 0; i < 8; ++i) {
        x[i] = rng.uniform() + 0.1;
        y[i] = rng.uniform() + 0.1;
    }
    CHECK(kernel_rd(deep, x, y, 2) == doctest::Approx(PlainRd{deep, x, y}()).epsilon(1e-14));
}

TEST_CASE("network forward pass") {
    const Architecture arch = make_arch({2}, 1, KernelKind::RFK);
    const std::vector<int> widths{1};

    SUBCASE("zero weights give zero output") {
        const Architecture deep = make_arch({2, 2}, 1, KernelKind::RFK);
        const NetworkWeights w = zero_weights(deep, {3, 2});
        Eigen::VectorXd x(4);
        x << 0.6, -0.8, 1.0, 0.0;
        CHECK(network_forward(deep, w, x) == 0.0);
    }

    SUBCASE("hand-computed two-dimensional case") {
        NetworkWeights w = zero_weights(arch, widths);
        w.layer[0](0, 0) = 0.5;
        w.layer[0](0, 1) = -0.25;
        w.readout(0, 0) = 2.0;
        Eigen::VectorXd x(2);
        x << 0.6, 0.8;
        // z = 0.5*0.6 - 0.25*0.8 = 0.1; sigma = sqrt(2)*0.1; out = 2*sigma
        CHECK(network_forward(arch, w, x) ==
              doctest::Approx(0.2 * std::numbers::sqrt2).epsilon(1e-15));
    }

    SUBCASE("readout is linear") {
        const Architecture deep = make_arch({2, 2}, 1, KernelKind::RFK);
        NetworkWeights w = random_weights(deep, {5, 4}, 77);
        const InputBatch batch = sample_inputs(Space::Multisphere, deep, 1, 3);
        const Eigen::VectorXd x = batch.points.row(0);
        const double f = network_forward(deep, w, x);
        w.readout *= 2.0;
        CHECK(network_forward(deep, w, x) == doctest::Approx(2.0 * f).epsilon(1e-12));
    }
}

TEST_CASE("monte carlo covariance matches the analytic kernel") {
    const Architecture arch = make_arch({2, 2}, 1, KernelKind::RFK);
    const std::vector<int> widths{256, 256};
    const InputBatch batch = sample_inputs(Space::Multisphere, arch, 2, 13);
    const Eigen::VectorXd x = batch.points.row(0), y = batch.points.row(1);

    SUBCASE("coincident inputs") {
        const auto est = monte_carlo_rfk(arch, widths, 2000, x, x, 2);
        CHECK(std::abs(est.estimate - 1.0) <= 3.0 * est.standard_error);
    }
    SUBCASE("antipodal inputs, one layer") {
        const Architecture shallow = make_arch({2}, 2, KernelKind::RFK);
        const InputBatch b = sample_inputs(Space::Multisphere, shallow, 1, 19);
        const Eigen::VectorXd u = b.points.row(0);
        const auto est = monte_carlo_rfk(shallow, {256}, 2000, u, (-u).eval(), 3);
        CHECK(std::abs(est.estimate) <= 3.0 * est.standard_error);
    }
    SUBCASE("random pair against the recursion") {
        const double exact = rfk(arch, overlaps(x, y, arch));
        const auto est = monte_carlo_rfk(arch, widths, 2000, x, y, 4);
        CHECK(std::abs(est.estimate - exact) <= 3.0 * est.standard_error);
    }
    SUBCASE("documented-seed consistency sweep") {
        // repeated runs stay within 3 standard errors almost always; one
        // excursion in twelve fixed seeds is tolerated
        const double exact = rfk(arch, overlaps(x, y, arch));
        int misses = 0;
        for (std::uint64_t seed = 100; seed < 112; ++seed) {
            const auto est = monte_carlo_rfk(arch, widths, 400, x, y, seed);
            if (std::abs(est.estimate - exact) > 3.0 * est.standard_error) ++misses;
        }
        CHECK(misses <= 1);
    }
}
