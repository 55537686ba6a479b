#ifndef GPSINDY_OPTIMIZE_HPP
#define GPSINDY_OPTIMIZE_HPP

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace gpsindy {

struct NelderMeadOptions {
    int max_iter = 200;          ///< iteration cap; each iteration is 1-2 evaluations
    double initial_step = 0.5;   ///< edge length of the starting simplex
    double xtol = 1e-4;          ///< simplex diameter needed to declare convergence
    double ftol = 1e-6;          ///< value spread needed to declare convergence
};

struct NelderMeadResult {
    Eigen::VectorXd x;                 ///< best point seen
    double fval = 0.0;                 ///< objective at x
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::vector<double> best_history;  ///< best objective after each iteration
};

/// Derivative-free simplex minimisation (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Non-finite objective values are treated as
/// +inf, so the search walks back out of bad regions instead of aborting.
/// The best vertex never worsens from one iteration to the next.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {});

} // namespace gpsindy

#endif // GPSINDY_OPTIMIZE_HPP
