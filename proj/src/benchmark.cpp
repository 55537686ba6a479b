#include "gpsindy/benchmark.hpp"

#include "gpsindy/errors.hpp"
#include "gpsindy/random.hpp"
#include "format_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

namespace gpsindy {

using detail::fmt17;
using detail::parse_double;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

FitOptions default_frequency_fit() {
    FitOptions fit;
    fit.library.poly_order = 1;
    fit.library.include_sin = true;
    fit.library.include_cos = true;
    fit.library.include_cross_trig_products = true;
    fit.library.include_control = true;
    fit.fixed_lambda.reset();
    fit.admm.rho = 100.0;
    fit.smoother.derivative_kernel_input = DerivativeKernelInput::time;
    fit.smoother.candidate_families = {KernelFamily::squared_exponential,
                                       KernelFamily::matern32};
    fit.smoother.restarts = 1;
    fit.smoother.nm.max_iter = 120;
    fit.gp_upsample = 2;
    return fit;
}

double coeff_mse(const Eigen::MatrixXd& xi_gt, const Eigen::MatrixXd& xi_learned) {
    if (xi_gt.rows() != xi_learned.rows() || xi_gt.cols() != xi_learned.cols())
        throw DimensionError("coefficient matrices differ in shape");
    return (xi_gt - xi_learned).array().square().mean();
}

double trajectory_rmse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth,
                       const std::vector<int>& columns) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw DimensionError("trajectories differ in shape");
    if (columns.empty())
        return std::sqrt((pred - truth).array().square().mean());
    double sum = 0.0;
    for (int j : columns) {
        if (j < 0 || j >= pred.cols())
            throw DimensionError("column index out of range in trajectory_rmse");
        sum += (pred.col(j) - truth.col(j)).squaredNorm();
    }
    return std::sqrt(sum / (static_cast<double>(pred.rows()) *
                            static_cast<double>(columns.size())));
}

QuantileSummary quantile_summary(std::vector<double> values) {
    if (values.empty())
        throw EmptySample("quantile_summary needs at least one value");
    for (double v : values)
        if (!std::isfinite(v))
            throw InvalidInput("quantile_summary needs finite values");
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double h = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<size_t>(std::floor(h));
        const size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {at(0.5), at(0.25), at(0.75)};
}

namespace {

double mean_lambda(const LearnedModel& model) {
    return model.lambda_per_column.size() ? model.lambda_per_column.mean() : 0.0;
}

double safe_log(double rmse) {
    return rmse == 0.0 ? -kInf : std::log(rmse);
}

// Fits one method on one corrupted dataset and scores it against the clean
// hold-out; any numeric failure turns into an infinite-error row rather
// than aborting the sweep.
void score_cell(BenchmarkRow& row, FitMethod method, const TrajectoryDataset& train,
                const TrajectoryDataset& val, const TrajectoryDataset& clean_val,
                const Eigen::MatrixXd* xi_gt, const std::vector<int>& rmse_columns,
                const FitOptions& fit, bool measure_time) {
    row.method = to_string(method);
    row.coeff_mse = kInf;
    row.traj_rmse = kInf;
    row.log_rmse = kInf;
    const auto start = std::chrono::steady_clock::now();
    try {
        const LearnedModel model = fit_model(method, train, val, fit);
        if (measure_time)
            row.wall_time = elapsed_seconds(start);
        if (xi_gt)
            row.coeff_mse = coeff_mse(*xi_gt, model.xi);
        row.lambda_used = mean_lambda(model);
        try {
            const Eigen::MatrixXd pred =
                rollout(model_to_dynamics(model), clean_val.X.row(0).transpose(), clean_val.t,
                        clean_val.U);
            row.traj_rmse = trajectory_rmse(pred, clean_val.X, rmse_columns);
            row.log_rmse = safe_log(row.traj_rmse);
        } catch (const Divergence&) {
            // divergent rollout: leave the infinite trajectory error
        }
    } catch (const Error& e) {
        if (e.category() != ErrorCategory::numeric)
            throw;
        if (measure_time)
            row.wall_time = elapsed_seconds(start);
        // fit failed outright: infinite errors, no lambda
    }
}

void sort_rows(BenchmarkReport& report) {
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const BenchmarkRow& a, const BenchmarkRow& b) {
                         return std::tie(a.method, a.sigma, a.frequency_hz, a.seed) <
                                std::tie(b.method, b.sigma, b.frequency_hz, b.seed);
                     });
}

} // namespace

BenchmarkReport run_noise_sweep(const NoiseSweepConfig& config) {
    if (config.methods.empty() || config.sigma_grid.empty() || config.seeds < 1)
        throw ConfigError("noise sweep needs methods, sigmas, and at least one seed");

    const Eigen::VectorXd t_grid = uniform_grid(config.duration, config.dt);
    const Eigen::VectorXd x0 = default_initial_state(config.system);
    const double freq = 1.0 / config.dt;

    const TrajectoryDataset clean =
        generate_dataset(config.system, t_grid, x0, {0.0, 0}, config.noise_on_xdot);
    const TrajectoryDataset clean_val = train_test_split(clean, config.train_fraction).second;
    const Eigen::MatrixXd xi_gt = ground_truth_xi(config.system, config.fit.library);

    BenchmarkReport report;
    for (size_t si = 0; si < config.sigma_grid.size(); ++si) {
        const double sigma = config.sigma_grid[si];
        for (int trial = 0; trial < config.seeds; ++trial) {
            const NoiseSpec noise{sigma, derive_seed(config.root_seed, si + 1,
                                                     static_cast<std::uint64_t>(trial) + 1)};
            const TrajectoryDataset noisy =
                generate_dataset(config.system, t_grid, x0, noise, config.noise_on_xdot);
            const auto [train, val] = train_test_split(noisy, config.train_fraction);
            for (FitMethod method : config.methods) {
                BenchmarkRow row;
                row.system = to_string(config.system);
                row.sigma = sigma;
                row.frequency_hz = freq;
                row.seed = static_cast<std::uint64_t>(trial);
                score_cell(row, method, train, val, clean_val, &xi_gt, {}, config.fit,
                           config.measure_time);
                report.rows.push_back(std::move(row));
            }
        }
    }
    sort_rows(report);
    return report;
}

BenchmarkReport run_frequency_sweep(const FrequencySweepConfig& config) {
    if (config.methods.empty() || config.sigma_grid.empty() || config.frequencies.empty() ||
        config.rollouts < 1)
        throw ConfigError("frequency sweep needs methods, sigmas, frequencies, and rollouts");
    for (double freq : config.frequencies) {
        const double ratio = config.base_rate_hz / freq;
        if (!(freq > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9)
            throw ConfigError("each frequency must divide the base rate evenly");
    }

    // Ground truth exists because the figure-8 is driven by unicycle
    // kinematics; a library without the true terms just loses this metric.
    const Eigen::MatrixXd* xi_gt_ptr = nullptr;
    Eigen::MatrixXd xi_gt;
    try {
        xi_gt = ground_truth_xi(SystemKind::unicycle, config.fit.library);
        xi_gt_ptr = &xi_gt;
    } catch (const IncompatibleLibrary&) {
    }

    const std::vector<int> position_columns{0, 1};
    BenchmarkReport report;
    for (int trial = 0; trial < config.rollouts; ++trial) {
        for (size_t si = 0; si < config.sigma_grid.size(); ++si) {
            const double sigma = config.sigma_grid[si];
            const std::uint64_t seed =
                derive_seed(config.root_seed, static_cast<std::uint64_t>(trial) + 1, si + 1);
            const TrajectoryDataset noisy_base = figure_eight_dataset(
                config.diameter, config.lap_time, config.duration, config.base_rate_hz,
                {sigma, seed});
            const TrajectoryDataset clean_base = figure_eight_dataset(
                config.diameter, config.lap_time, config.duration, config.base_rate_hz,
                {0.0, seed}); // same seed, so the traversal phase matches
            for (double freq : config.frequencies) {
                const auto keep = static_cast<size_t>(std::round(config.base_rate_hz / freq));
                TrajectoryDataset ds = downsample(noisy_base, keep);
                const TrajectoryDataset clean = downsample(clean_base, keep);
                // Mirror the hardware pipeline: derivatives come from finite
                // differences of the noisy, downsampled states.
                ds.Xdot = central_difference(ds.X, ds.t);
                const auto [train, val] = train_test_split(ds, config.train_fraction);
                const TrajectoryDataset clean_val =
                    train_test_split(clean, config.train_fraction).second;
                for (FitMethod method : config.methods) {
                    BenchmarkRow row;
                    row.system = "figure_eight";
                    row.sigma = sigma;
                    row.frequency_hz = freq;
                    row.seed = static_cast<std::uint64_t>(trial);
                    score_cell(row, method, train, val, clean_val, xi_gt_ptr,
                               position_columns, config.fit, config.measure_time);
                    report.rows.push_back(std::move(row));
                }
            }
        }
    }
    sort_rows(report);
    return report;
}

namespace {

constexpr const char* kReportHeader =
    "method,system,sigma,frequency_hz,seed,coeff_mse,traj_rmse,log_rmse,lambda_used,wall_time";

} // namespace

void emit_report(const BenchmarkReport& report, const std::string& path) {
    BenchmarkReport sorted = report;
    sort_rows(sorted);
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << kReportHeader << "\n";
    for (const BenchmarkRow& row : sorted.rows) {
        out << row.method << ',' << row.system << ',' << fmt17(row.sigma) << ','
            << fmt17(row.frequency_hz) << ',' << row.seed << ',' << fmt17(row.coeff_mse) << ','
            << fmt17(row.traj_rmse) << ',' << fmt17(row.log_rmse) << ','
            << fmt17(row.lambda_used) << ',' << fmt17(row.wall_time) << "\n";
    }
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

BenchmarkReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ":1: empty report");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kReportHeader)
        throw ParseError(path + ":1: unexpected report header");

    BenchmarkReport report;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (fields.size() != 10)
            throw ParseError(path + ":" + std::to_string(line_number) +
                             ": expected 10 comma-separated fields");
        auto number = [&](const std::string& text) {
            double value = 0.0;
            if (!parse_double(text, value))
                throw ParseError(path + ":" + std::to_string(line_number) + ": bad number '" +
                                 text + "'");
            return value;
        };
        BenchmarkRow row;
        row.method = fields[0];
        row.system = fields[1];
        row.sigma = number(fields[2]);
        row.frequency_hz = number(fields[3]);
        try {
            row.seed = std::stoull(fields[4]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_number) + ": bad seed '" +
                             fields[4] + "'");
        }
        row.coeff_mse = number(fields[5]);
        row.traj_rmse = number(fields[6]);
        row.log_rmse = number(fields[7]);
        row.lambda_used = number(fields[8]);
        row.wall_time = number(fields[9]);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<ConditionSummary> summarize_report(const BenchmarkReport& report) {
    BenchmarkReport sorted = report;
    sort_rows(sorted);
    std::vector<ConditionSummary> summaries;
    size_t i = 0;
    while (i < sorted.rows.size()) {
        const BenchmarkRow& head = sorted.rows[i];
        ConditionSummary summary;
        summary.method = head.method;
        summary.sigma = head.sigma;
        summary.frequency_hz = head.frequency_hz;
        std::vector<double> finite;
        while (i < sorted.rows.size() && sorted.rows[i].method == summary.method &&
               sorted.rows[i].sigma == summary.sigma &&
               sorted.rows[i].frequency_hz == summary.frequency_hz) {
            ++summary.count;
            if (std::isfinite(sorted.rows[i].traj_rmse))
                finite.push_back(sorted.rows[i].traj_rmse);
            else
                ++summary.divergent;
            ++i;
        }
        summary.rmse = finite.empty() ? QuantileSummary{kInf, kInf, kInf}
                                      : quantile_summary(finite);
        summaries.push_back(std::move(summary));
    }
    return summaries;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string default_report_name(const std::string& system, const std::string& sweep,
                                const std::string& config_text) {
    char digest[17];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_text)));
    return system + "_" + sweep + "_" + digest + ".csv";
}

} // namespace gpsindy
