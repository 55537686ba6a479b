#ifndef GPSINDY_BENCHMARK_HPP
#define GPSINDY_BENCHMARK_HPP

#include "gpsindy/pipeline.hpp"
#include "gpsindy/systems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace gpsindy {

struct BenchmarkRow {
    std::string method;
    std::string system;
    double sigma = 0.0;
    double frequency_hz = 0.0;
    std::uint64_t seed = 0;     ///< trial index within the sweep
    double coeff_mse = 0.0;     ///< +inf when the fit itself failed
    double traj_rmse = 0.0;     ///< +inf on divergent validation rollout
    double log_rmse = 0.0;      ///< natural log; -inf sentinel at zero error
    double lambda_used = 0.0;   ///< mean of the per-column lambdas (0 for SSR)
    double wall_time = 0.0;     ///< seconds; stays 0 unless timing is enabled
};

struct BenchmarkReport {
    std::vector<BenchmarkRow> rows;
};

/// Mean over all p*n entries of the squared coefficient differences.
[[nodiscard]] double coeff_mse(const Eigen::MatrixXd& xi_gt, const Eigen::MatrixXd& xi_learned);

/// Root mean squared error over the selected columns (all when empty) and
/// every row.
[[nodiscard]] double trajectory_rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                                     const std::vector<int>& columns = {});

struct QuantileSummary {
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

/// Order-statistics quantiles with linear interpolation between adjacent
/// values (the convention numpy calls type 7).
[[nodiscard]] QuantileSummary quantile_summary(std::vector<double> values);

struct NoiseSweepConfig {
    SystemKind system = SystemKind::lotka_volterra;
    std::vector<FitMethod> methods{FitMethod::sindy, FitMethod::gpsindy};
    std::vector<double> sigma_grid{0.05, 0.10, 0.15, 0.20, 0.25};
    int seeds = 40;
    std::uint64_t root_seed = 0;
    double duration = 30.0;
    double dt = 0.1;
    double train_fraction = 0.8;
    bool noise_on_xdot = true;
    FitOptions fit;            ///< library, smoother, fixed lambda, standardize
    bool measure_time = false; ///< keep off for byte-identical reruns
};

/// For every (sigma, trial, method): simulate, corrupt, split, fit, score
/// coefficients against ground truth and a clean validation rollout.
[[nodiscard]] BenchmarkReport run_noise_sweep(const NoiseSweepConfig& config);

/// The frequency-sweep protocol: first-order library with trig products
/// and controls, per-column lambda path with rollout selection, time-indexed
/// derivative smoothing with midpoint upsampling. One capture lap keeps the
/// whole sweep inside a desk-scale runtime budget.
[[nodiscard]] FitOptions default_frequency_fit();

struct FrequencySweepConfig {
    std::vector<FitMethod> methods{FitMethod::sindy, FitMethod::gpsindy, FitMethod::ssr_coeff,
                                   FitMethod::ssr_res};
    std::vector<double> frequencies{50.0, 25.0, 10.0, 5.0};
    std::vector<double> sigma_grid{0.0, 0.05, 0.1};
    int rollouts = 45;
    std::uint64_t root_seed = 0;
    double diameter = 3.0;
    double lap_time = 5.5;
    double duration = 5.5;
    double base_rate_hz = 50.0;
    double train_fraction = 0.8;
    FitOptions fit = default_frequency_fit();
    bool measure_time = false;
};

/// Figure-8 capture analogue: synthesize at the base rate, downsample to
/// each frequency, finite-difference the noisy states, fit every method,
/// and score the held-out rollout on the position coordinates.
[[nodiscard]] BenchmarkReport run_frequency_sweep(const FrequencySweepConfig& config);

/// CSV with the fixed BenchmarkRow column order, 17 significant digits,
/// rows sorted by (method, sigma, frequency, seed); loads back bit-exactly.
void emit_report(const BenchmarkReport& report, const std::string& path);
[[nodiscard]] BenchmarkReport load_report(const std::string& path);

struct ConditionSummary {
    std::string method;
    double sigma = 0.0;
    double frequency_hz = 0.0;
    QuantileSummary rmse;  ///< over the finite traj_rmse values
    int divergent = 0;
    int count = 0;
};

/// Groups rows by (method, sigma, frequency); divergent rollouts are
/// counted, never folded into the quantiles.
[[nodiscard]] std::vector<ConditionSummary> summarize_report(const BenchmarkReport& report);

/// <system>_<sweep>_<16-hex-digest-of-config>.csv — no dates, so reruns of
/// the same config land on the same file.
[[nodiscard]] std::uint64_t fnv1a64(const std::string& text);
[[nodiscard]] std::string default_report_name(const std::string& system, const std::string& sweep,
                                              const std::string& config_text);

} // namespace gpsindy

#endif // GPSINDY_BENCHMARK_HPP
