#ifndef GPSINDY_PIPELINE_HPP
#define GPSINDY_PIPELINE_HPP

#include "gpsindy/gp.hpp"
#include "gpsindy/library.hpp"
#include "gpsindy/model.hpp"
#include "gpsindy/solvers.hpp"
#include "gpsindy/trajectory.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace gpsindy {

struct LambdaSchedule {
    std::vector<double> values; ///< strictly increasing, nonempty
};

/// One column's regression candidates along the lambda path.
struct LambdaPath {
    std::vector<double> lambdas;
    std::vector<SparseSolution> solutions; ///< aligned with lambdas
};

/// Solves the LASSO along the canonical schedule — 1e-6 tenfold up to 1,
/// then +10 steps — stopping at (and including) the first lambda whose
/// solution is all zero.
[[nodiscard]] LambdaPath solve_lambda_path(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                           const AdmmConfig& admm = {});

[[nodiscard]] LambdaSchedule default_lambda_schedule(const Eigen::MatrixXd& theta,
                                                     const Eigen::VectorXd& y,
                                                     const AdmmConfig& admm = {});

struct FitOptions {
    LibrarySpec library;
    SmootherConfig smoother;                   ///< used by the GP-smoothing pipeline only
    std::optional<double> fixed_lambda = 0.1;  ///< nullopt: lambda path + rollout selection
    AdmmConfig admm;
    bool standardize = false; ///< run the smoother in standardized units
    /// Solve the LASSO on unit-l2 library columns and rescale the
    /// coefficients back, so the penalty treats all terms evenly.
    bool normalize = false;
    /// GP-smoothed regression rows per measured sample interval: 1 keeps the
    /// measurement grid; 2 adds the interval midpoints, doubling the points
    /// available to the regression on sparse captures. Only the GP pipeline
    /// can manufacture rows, so other methods ignore this.
    int gp_upsample = 1;
};

/// Smooth states, smooth derivatives, build the library on the smoothed
/// states, then fit each derivative column by LASSO (fixed lambda or
/// validation-rollout selection over the lambda path).
[[nodiscard]] LearnedModel gpsindy_fit(const TrajectoryDataset& train,
                                       const TrajectoryDataset& val, const FitOptions& options);

/// The same regression on the raw measurements, no smoothing.
[[nodiscard]] LearnedModel sindy_fit(const TrajectoryDataset& train, const TrajectoryDataset& val,
                                     const FitOptions& options);

/// Stepwise-regression baselines; sparsity level picked by validation
/// residual (coefficient variant) or built into the solver (residual
/// variant). fixed_lambda is ignored.
[[nodiscard]] LearnedModel ssr_coeff_fit(const TrajectoryDataset& train,
                                         const TrajectoryDataset& val, const FitOptions& options);
[[nodiscard]] LearnedModel ssr_res_fit(const TrajectoryDataset& train,
                                       const TrajectoryDataset& val, const FitOptions& options);

[[nodiscard]] LearnedModel fit_model(FitMethod method, const TrajectoryDataset& train,
                                     const TrajectoryDataset& val, const FitOptions& options);

struct LambdaSelection {
    Eigen::VectorXd lambda_per_column;
    Eigen::MatrixXd xi;
};

/// Single-pass coordinate selection: columns are visited in index order;
/// each candidate lambda's solution is swapped into the current
/// coefficient matrix, the model is rolled out over the validation window
/// from the validation initial state, and the candidate with the smallest
/// RMSE on that column's trace wins (ties to the larger lambda). Divergent
/// rollouts score +inf; a column where everything diverges raises
/// DivergentModel.
[[nodiscard]] LambdaSelection cross_validate_lambda(const std::vector<LambdaPath>& per_column,
                                                    const LearnedModel& shape,
                                                    const TrajectoryDataset& val);

/// Classical RK4 over the given timestamps with zero-order-hold controls
/// (row i of U applies on [t_i, t_{i+1})); row 0 is x0. Non-finite or
/// wildly large states raise Divergence with the step index.
[[nodiscard]] Eigen::MatrixXd
rollout(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
        const Eigen::VectorXd& x0, const Eigen::VectorXd& t,
        const std::optional<Eigen::MatrixXd>& U = std::nullopt);

} // namespace gpsindy

#endif // GPSINDY_PIPELINE_HPP
