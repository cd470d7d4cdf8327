#include "hck/regression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <omp.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "hck/errors.hpp"
#include "hck/rng.hpp"

namespace hck {

namespace {

// LLT with jitter escalation; returns the factor of K + jitter I
Eigen::LLT<Eigen::MatrixXd> chol_with_jitter(const Eigen::MatrixXd& K, const char* what) {
    const int n = static_cast<int>(K.rows());
    double jitter = 1e-12 * K.trace() / n;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() == Eigen::Success) return llt;
    for (int retry = 0; retry <= 4; ++retry) {
        llt.compute(K + jitter * Eigen::MatrixXd::Identity(n, n));
        if (llt.info() == Eigen::Success) return llt;
        jitter *= 10.0;
    }
    throw numerical_error(std::string(what) + ": Cholesky failed after jitter escalation");
}

}  // namespace

TeacherSample sample_teacher(const GramMatrix& teacher_gram, std::uint64_t seed,
                             double noise_std) {
    if (!teacher_gram.symmetric)
        throw std::invalid_argument("sample_teacher: Gram matrix must be symmetric");
    if (noise_std < 0.0) throw std::invalid_argument("sample_teacher: negative noise std");
    const int n = teacher_gram.rows();

    TeacherSample out;
    out.seed = seed;
    out.teacher_fingerprint = teacher_gram.arch_fingerprint;
    out.noise_std = noise_std;

    Eigen::VectorXd z(n);
    Rng rng(derive_seed(seed, "teacher", 0));
    rng.fill_normal(z.data(), static_cast<std::size_t>(n));

    const auto llt = chol_with_jitter(teacher_gram.entries, "sample_teacher");
    out.field = llt.matrixL() * z;

    out.labels = out.field;
    if (noise_std > 0.0) {
        Rng noise(derive_seed(seed, "noise", 0));
        for (int i = 0; i < n; ++i) out.labels[i] += noise_std * noise.normal();
    }
    return out;
}

Predictor krr_fit(const GramMatrix& gram, const Eigen::VectorXd& y, double ridge) {
    if (!gram.symmetric) throw std::invalid_argument("krr_fit: Gram matrix must be symmetric");
    if (gram.rows() != y.size()) throw std::invalid_argument("krr_fit: label length mismatch");
    if (ridge < 0.0) throw std::invalid_argument("krr_fit: negative ridge");
    const int n = gram.rows();

    Predictor pred;
    pred.ridge = ridge;
    // ridgeless convention: substitute a trace-scaled jitter
    pred.applied_ridge = ridge > 0.0 ? ridge : 1e-12 * gram.entries.trace() / (double(n) * n);

    const Eigen::MatrixXd sys =
        gram.entries + (double(n) * pred.applied_ridge) * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    if (llt.info() != Eigen::Success) {
        // PSD Gram plus positive shift should not fail; escalate once via the ladder
        pred.alpha = chol_with_jitter(sys, "krr_fit").solve(y);
    } else {
        pred.alpha = llt.solve(y);
    }

    const double rel = (sys * pred.alpha - y).norm() / std::max(1e-300, y.norm());
    if (rel > 1e-8)
        throw numerical_error("krr_fit: solve residual " + std::to_string(rel) +
                              " exceeds 1e-8");
    return pred;
}

Eigen::VectorXd predict(const Predictor& pred, const Eigen::MatrixXd& cross_gram) {
    if (cross_gram.cols() != pred.alpha.size())
        throw std::invalid_argument("predict: cross-Gram width does not match coefficients");
    return cross_gram * pred.alpha;
}

double test_error(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("test_error: length mismatch");
    if (predictions.size() == 0) throw std::invalid_argument("test_error: empty input");
    return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

std::vector<double> log_lambda_grid(double lo, double hi, int points) {
    if (!(lo > 0.0 && hi > lo && points >= 2))
        throw std::invalid_argument("log_lambda_grid: bad parameters");
    std::vector<double> g(points);
    const double step = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = lo * std::exp(step * i);
    return g;
}

RidgeCurve optimal_ridge(const GramMatrix& train_gram, const Eigen::VectorXd& y_train,
                         const Eigen::MatrixXd& cross_gram, const Eigen::VectorXd& y_test,
                         const std::vector<double>& lambda_grid) {
    if (lambda_grid.size() < 16)
        throw std::invalid_argument("optimal_ridge: grid needs at least 16 points");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw std::invalid_argument("optimal_ridge: grid must be ascending");
    const int n = train_gram.rows();

    // one eigendecomposition serves every ridge value
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(train_gram.entries);
    if (es.info() != Eigen::Success)
        throw numerical_error("optimal_ridge: eigendecomposition failed");
    const Eigen::VectorXd evals = es.eigenvalues();
    const Eigen::VectorXd yproj = es.eigenvectors().transpose() * y_train;
    const Eigen::MatrixXd cross_v = cross_gram * es.eigenvectors();

    RidgeCurve curve;
    curve.lambdas = lambda_grid;
    curve.errors.resize(lambda_grid.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        const double shift = double(n) * lambda_grid[i];
        Eigen::VectorXd coef = yproj.array() / (evals.array() + shift).max(1e-300);
        const double err = test_error(cross_v * coef, y_test);
        curve.errors[i] = err;
        if (err < best) {
            best = err;
            curve.best_index = static_cast<int>(i);
            curve.best_lambda = lambda_grid[i];
        }
    }
    return curve;
}

namespace {

struct TrialOutcome {
    bool ok = false;
    double error = 0.0;
    double optimal_lambda = 0.0;
};

TrialOutcome run_trial(const LearningCurveSettings& s, int n, std::uint64_t trial_seed) {
    TrialOutcome out;
    try {
        const Architecture& sample_arch = s.teacher;  // same d and s_1 as the student
        InputBatch joint = sample_inputs(s.space, sample_arch, n + s.n_test, trial_seed);
        const InputBatch train = joint.head(n);
        const InputBatch test = joint.tail_from(n);

        const GramMatrix teacher_joint = gram_serial(s.teacher, joint, nullptr, s.stride);
        const TeacherSample teacher =
            sample_teacher(teacher_joint, derive_seed(trial_seed, "field", 0), s.noise_std);
        const Eigen::VectorXd y_train = teacher.labels.head(n);
        const Eigen::VectorXd f_test = teacher.field.tail(s.n_test);

        const GramMatrix student_train = gram_serial(s.student, train, nullptr, s.stride);
        const GramMatrix student_cross = gram_serial(s.student, test, &train, s.stride);

        switch (s.policy) {
            case RidgePolicy::Ridgeless: {
                const Predictor pred = krr_fit(student_train, y_train, 0.0);
                out.error = test_error(predict(pred, student_cross.entries), f_test);
                break;
            }
            case RidgePolicy::Fixed: {
                const Predictor pred = krr_fit(student_train, y_train, s.fixed_lambda);
                out.error = test_error(predict(pred, student_cross.entries), f_test);
                out.optimal_lambda = s.fixed_lambda;
                break;
            }
            case RidgePolicy::OptimalGrid: {
                const RidgeCurve curve = optimal_ridge(student_train, y_train,
                                                       student_cross.entries, f_test,
                                                       s.lambda_grid);
                out.error = curve.errors[curve.best_index];
                out.optimal_lambda = curve.best_lambda;
                break;
            }
        }
        out.ok = true;
    } catch (const numerical_error& err) {
        std::fprintf(stderr, "learning_curve: trial failed (n=%d): %s\n", n, err.what());
        out.ok = false;
    }
    return out;
}

}  // namespace

LearningCurveResult learning_curve(const LearningCurveSettings& s) {
    if (s.n_list.empty()) throw std::invalid_argument("learning_curve: empty n list");
    if (!std::is_sorted(s.n_list.begin(), s.n_list.end()))
        throw std::invalid_argument("learning_curve: n list must be ascending");
    if (s.trials < 2) throw std::invalid_argument("learning_curve: need at least 2 trials");
    if (s.teacher.input_dim() != s.student.input_dim())
        throw std::invalid_argument("learning_curve: teacher/student dimensions differ");
    if (s.space == Space::Multisphere && s.teacher.patch_dim() != s.student.patch_dim())
        throw std::invalid_argument(
            "learning_curve: multisphere requires equal first-layer filter sizes");
    if (s.policy == RidgePolicy::OptimalGrid && s.lambda_grid.size() < 16)
        throw std::invalid_argument("learning_curve: optimal-ridge policy needs a lambda grid");

    const int n_points = static_cast<int>(s.n_list.size());
    const int total = n_points * s.trials;
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(total));

    // flatten (n, trial) tasks, largest n first for load balance; outcome
    // slots are indexed by task id so scheduling cannot affect the result
    std::vector<int> order(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return s.n_list[a / s.trials] > s.n_list[b / s.trials];
    });

    const int threads = s.threads > 0 ? s.threads : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
    for (int t = 0; t < total; ++t) {
        const int task = order[t];
        const int ni = task / s.trials;
        const int trial = task % s.trials;
        const std::uint64_t trial_seed =
            derive_seed(s.master_seed, "trial",
                        static_cast<std::uint64_t>(ni) * 1000003ull + trial);
        outcomes[task] = run_trial(s, s.n_list[ni], trial_seed);
    }

    LearningCurveResult result;
    result.points.resize(n_points);
    for (int ni = 0; ni < n_points; ++ni) {
        auto& pt = result.points[ni];
        pt.n = s.n_list[ni];
        double sum = 0.0, sum2 = 0.0, suml = 0.0;
        int ok = 0;
        for (int trial = 0; trial < s.trials; ++trial) {
            const auto& o = outcomes[static_cast<std::size_t>(ni) * s.trials + trial];
            if (!o.ok) continue;
            ++ok;
            sum += o.error;
            sum2 += o.error * o.error;
            suml += o.optimal_lambda;
        }
        if (ok < (4 * s.trials + 4) / 5)  // ceil(0.8 trials)
            throw numerical_error("learning_curve: fewer than 80% of trials survived at n=" +
                                  std::to_string(pt.n));
        pt.survivors = ok;
        pt.mean_error = sum / ok;
        pt.std_error = ok > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / ok) / (ok - 1)))
                              : 0.0;
        pt.mean_optimal_lambda = suml / ok;
    }
    fit_curve_exponent(result);
    return result;
}

void fit_curve_exponent(LearningCurveResult& result) {
    const auto& pts = result.points;
    if (pts.size() < 2) throw std::invalid_argument("fit_curve_exponent: need >= 2 points");
    const int n_max = pts.back().n;
    const double n_lo = n_max / 10.0;

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    int used = 0;
    int window_lo = n_max;
    for (const auto& p : pts) {
        if (p.n < n_lo || p.mean_error <= 0.0) continue;
        const double x = std::log(static_cast<double>(p.n));
        const double y = std::log(p.mean_error);
        const double sd = std::max(p.std_error, 1e-6 * p.mean_error + 1e-300);
        const double w = 1.0 / (sd * sd);
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
        ++used;
        window_lo = std::min(window_lo, p.n);
    }
    if (used < 2) throw std::invalid_argument("fit_curve_exponent: fewer than 2 usable points");
    const double det = sw * swxx - swx * swx;
    const double slope = (sw * swxy - swx * swy) / det;
    result.beta_hat = -slope;
    result.beta_stderr = std::sqrt(sw / det);
    result.fit_window_n_lo = window_lo;
    result.fit_window_n_hi = n_max;
}

}  // namespace hck
