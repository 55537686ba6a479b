#ifndef GPSINDY_SOLVERS_HPP
#define GPSINDY_SOLVERS_HPP

#include <Eigen/Dense>

#include <vector>

namespace gpsindy {

/// Entries at or below this magnitude count as pruned when reporting nnz.
inline constexpr double kPruneEps = 1e-6;

struct AdmmConfig {
    double rho = 1.0;      ///< penalty parameter, fixed (no adaptation)
    double abs_tol = 1e-6;
    double rel_tol = 1e-4;
    int max_iter = 10000;
    bool record_history = false; ///< store the augmented Lagrangian per iteration
};

struct SparseSolution {
    Eigen::VectorXd xi;
    int nnz = 0;                  ///< entries with |xi_k| > kPruneEps
    double objective = 0.0;       ///< achieved value of the solver's objective
    int iterations = 0;
    bool converged = false;
    bool ridge_fallback = false;  ///< a rank-deficient solve needed the ridge penalty
    std::vector<double> history;  ///< filled when AdmmConfig::record_history is set
};

/// sign(a) * max(|a| - kappa, 0).
[[nodiscard]] double soft_threshold(double a, double kappa);

/// LASSO, 1/2 ||theta xi - y||^2 + lambda ||xi||_1, by scaled-form ADMM.
/// The xi-update factorization of theta^T theta + rho I is computed once;
/// the z-update is an elementwise soft threshold; stopping uses the usual
/// primal/dual residual tolerances. The returned xi is the z iterate, so
/// pruned entries are exact zeros.
[[nodiscard]] SparseSolution lasso_admm(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                        double lambda, const AdmmConfig& config = {});

/// Iterate carried between consecutive solves of the same (theta, y) problem
/// at neighboring lambdas, so each solve starts near its optimum.
struct AdmmState {
    Eigen::VectorXd xi, z, u;
};

/// lasso_admm with continuation: a non-null state seeds the iteration (when
/// its size matches) and receives the final iterate on return.
[[nodiscard]] SparseSolution lasso_admm(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                        double lambda, const AdmmConfig& config,
                                        AdmmState* state);

/// Sequential thresholded least squares: alternate a least-squares fit on
/// the active set with zeroing every coefficient below the threshold, until
/// the active set stops changing.
[[nodiscard]] SparseSolution stlsq(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                   double threshold, int max_rounds = 10);

/// Stepwise sparse regression, coefficient variant: start from the full
/// least-squares fit and repeatedly drop the smallest-magnitude coefficient,
/// refitting after each drop. Returns the whole sequence, sparsity p down
/// to 1.
[[nodiscard]] std::vector<SparseSolution> ssr_coefficient(const Eigen::MatrixXd& theta,
                                                          const Eigen::VectorXd& y);

/// Stepwise sparse regression, residual variant: at each sparsity level try
/// dropping every remaining column and keep the drop with the smallest
/// training residual; the returned model is the sequence member with the
/// lowest residual on the validation pair (ties go to the sparser model).
[[nodiscard]] SparseSolution ssr_residual(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                          const Eigen::MatrixXd& val_theta,
                                          const Eigen::VectorXd& val_y);

} // namespace gpsindy

#endif // GPSINDY_SOLVERS_HPP
