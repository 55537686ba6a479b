#ifndef GPSINDY_GP_HPP
#define GPSINDY_GP_HPP

#include "gpsindy/kernels.hpp"
#include "gpsindy/optimize.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace gpsindy {

/// Which signal indexes the kernel when smoothing derivatives.
enum class DerivativeKernelInput { time, smoothed_state, control };

[[nodiscard]] const char* to_string(DerivativeKernelInput input);
[[nodiscard]] DerivativeKernelInput derivative_kernel_input_from_string(const std::string& name);

struct SmootherConfig {
    DerivativeKernelInput derivative_kernel_input = DerivativeKernelInput::smoothed_state;
    std::vector<KernelFamily> candidate_families{
        KernelFamily::squared_exponential, KernelFamily::matern12, KernelFamily::matern32,
        KernelFamily::periodic, KernelFamily::rational_quadratic};
    int restarts = 2;
    double jitter_base = 1e-10; ///< first jitter, relative to trace(K)/r
    NelderMeadOptions nm;       ///< per-restart optimizer budget
    /// Hyperparameter search cost grows cubically with the training size.
    /// Above this row count the search objective sees a strided subset of
    /// the data; the returned posterior still conditions on every row.
    /// 0 lifts the cap.
    int hyperfit_max_rows = 150;
};

/// A fitted zero-mean GP: cached Cholesky factor and solve so posterior
/// means are a single matrix product.
struct GPFit {
    KernelSpec spec;
    Eigen::MatrixXd Z;          ///< training inputs, rows are points
    Eigen::VectorXd y;          ///< training targets
    Eigen::VectorXd alpha;      ///< (K + sn^2 I + jitter I)^{-1} y
    Eigen::MatrixXd chol_lower; ///< L with L L^T = K + sn^2 I + jitter I
    double jitter = 0.0;        ///< absolute jitter that made the factorization succeed
    double nll = 0.0;           ///< negative log marginal likelihood at these hyperparameters
};

/// Negative log marginal likelihood of a zero-mean GP,
///   1/2 y^T (K + sn^2 I)^{-1} y + 1/2 log det(K + sn^2 I) + r/2 log 2pi,
/// via Cholesky (log-det from the factor diagonal). If the factorization
/// fails, jitter starts at jitter_base * trace(K)/r and grows tenfold up to
/// 1e-4 * trace(K)/r before IllConditioned is thrown.
[[nodiscard]] double nll(const KernelSpec& spec, const Eigen::MatrixXd& Z,
                         const Eigen::VectorXd& y, double jitter_base = 1e-10);

/// Factorizes K + sn^2 I (+ escalating jitter) and caches the solve.
[[nodiscard]] GPFit fit_gp(const KernelSpec& spec, const Eigen::MatrixXd& Z,
                           const Eigen::VectorXd& y, double jitter_base = 1e-10);

/// K(Zstar, Z) * alpha using the cached solve.
[[nodiscard]] Eigen::VectorXd posterior_mean(const GPFit& fit, const Eigen::MatrixXd& Zstar);

/// Multi-start Nelder-Mead over log hyperparameters. Starts come from a
/// fixed low-discrepancy sequence in [-4, 2] per dimension, so the start
/// set for r restarts is a prefix of the set for r+1 and the achieved nll
/// is monotone in the restart count. The noise is floored at
/// 1e-6 * std(y). Returns the best hyperparameters and their nll.
[[nodiscard]] std::pair<HyperParams, double>
fit_hyperparams(KernelFamily family, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                int restarts, double jitter_base = 1e-10, const NelderMeadOptions& nm = {});

/// Fits every candidate family and keeps the lowest nll; exact ties go to
/// the family listed first in the KernelFamily enum.
[[nodiscard]] GPFit select_kernel(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                  const SmootherConfig& config);

struct SmoothResult {
    Eigen::MatrixXd values;      ///< smoothed columns, same shape as the input
    std::vector<GPFit> fits;     ///< per-column fit (in internally normalized target units)
    Eigen::VectorXd target_mean; ///< per-column centring removed before fitting
    Eigen::VectorXd target_scale; ///< per-column scale divided out before fitting
};

/// Posterior means of an existing smooth at new kernel inputs, mapped back to
/// the original target units. Lets a smooth fitted on sparse samples be
/// evaluated on a denser grid.
[[nodiscard]] Eigen::MatrixXd smooth_eval(const SmoothResult& result,
                                          const Eigen::MatrixXd& Zstar);

/// Smooths each column of X with a GP indexed by time, evaluated back at
/// the same timestamps. Targets are centred and scaled internally; outputs
/// are in the original units.
[[nodiscard]] SmoothResult smooth_states(const Eigen::VectorXd& t, const Eigen::MatrixXd& X,
                                         const SmootherConfig& config);

/// Smooths each column of Xdot with a GP indexed by the given kernel input
/// (time, smoothed states, or controls — chosen by the caller).
[[nodiscard]] SmoothResult smooth_derivatives(const Eigen::MatrixXd& Xdot,
                                              const Eigen::MatrixXd& kernel_input,
                                              const SmootherConfig& config);

} // namespace gpsindy

#endif // GPSINDY_GP_HPP
