#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hck/geometry.hpp"
#include "hck/gram.hpp"

namespace hck {

// A Gaussian random field drawn jointly on a point set, with covariance given
// by a teacher Gram matrix: labels = chol(K) z + noise. `field` keeps the
// clean values so test error can be measured against the field itself.
struct TeacherSample {
    Eigen::VectorXd labels;  // field + noise
    Eigen::VectorXd field;   // noiseless field values
    std::uint64_t seed = 0;
    std::uint64_t teacher_fingerprint = 0;
    double noise_std = 0.0;
};

// Cholesky with jitter escalation: start at 1e-12 trace/n, x10 per retry,
// at most 4 retries, then numerical_error.
TeacherSample sample_teacher(const GramMatrix& teacher_gram, std::uint64_t seed,
                             double noise_std);

struct Predictor {
    Eigen::VectorXd alpha;  // dual coefficients, (K + n λ I) α = y
    double ridge = 0.0;     // λ as passed (0 means ridgeless)
    double applied_ridge = 0.0;  // λ actually used (jitter under ridgeless)
};

// Solves (K + n λ I) α = y. λ = 0 substitutes the ridgeless jitter
// λ0 = 1e-12 trace(K)/n. The solution is verified to relative residual 1e-8.
Predictor krr_fit(const GramMatrix& gram, const Eigen::VectorXd& y, double ridge);

Eigen::VectorXd predict(const Predictor& pred, const Eigen::MatrixXd& cross_gram);

double test_error(const Eigen::VectorXd& predictions, const Eigen::VectorXd& targets);

struct RidgeCurve {
    std::vector<double> lambdas;
    std::vector<double> errors;
    double best_lambda = 0.0;
    int best_index = -1;
};

// Measured test error over a log-spaced λ grid (>= 16 points); one
// eigendecomposition of the train Gram serves every λ.
RidgeCurve optimal_ridge(const GramMatrix& train_gram, const Eigen::VectorXd& y_train,
                         const Eigen::MatrixXd& cross_gram, const Eigen::VectorXd& y_test,
                         const std::vector<double>& lambda_grid);

std::vector<double> log_lambda_grid(double lo, double hi, int points);

enum class RidgePolicy { Ridgeless, Fixed, OptimalGrid };

struct LearningCurveSettings {
    Architecture teacher;
    Architecture student;
    Space space = Space::Multisphere;
    int stride = 0;  // 0 = patch size
    std::vector<int> n_list;
    int n_test = 8192;
    int trials = 16;
    std::uint64_t master_seed = 0;
    RidgePolicy policy = RidgePolicy::Ridgeless;
    double fixed_lambda = 0.0;
    std::vector<double> lambda_grid;  // for OptimalGrid
    double noise_std = 0.0;           // added to training labels
    int threads = 0;                  // 0 = library default
};

struct LearningCurvePoint {
    int n = 0;
    double mean_error = 0.0;
    double std_error = 0.0;  // std over trials
    int survivors = 0;
    double mean_optimal_lambda = 0.0;  // OptimalGrid policy only
};

struct LearningCurveResult {
    std::vector<LearningCurvePoint> points;
    double beta_hat = 0.0;
    double beta_stderr = 0.0;
    int fit_window_n_lo = 0, fit_window_n_hi = 0;
};

// Teacher-student protocol: for every (n, trial) draw fresh inputs on
// n + n_test points, sample the teacher field jointly, fit the student on the
// n training points under the ridge policy, and record the mean squared error
// of the predictor against the clean field on the test points. Noise (when
// noise_std > 0) perturbs only the training labels. Trials run in parallel;
// every trial is internally serial and seeded by (master_seed, n index,
// trial index), so the result is a pure function of the settings.
LearningCurveResult learning_curve(const LearningCurveSettings& s);

// Weighted least squares of log(mean error) on log n over the largest decade
// (n >= max n / 10), weights 1 / std^2.
void fit_curve_exponent(LearningCurveResult& result);

}  // namespace hck
