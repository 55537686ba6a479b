#include "gpsindy/solvers.hpp"

#include "gpsindy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpsindy {

namespace {

int count_nonzero(const Eigen::VectorXd& xi) {
    return static_cast<int>((xi.cwiseAbs().array() > kPruneEps).count());
}

double half_sq_residual(const Eigen::MatrixXd& theta, const Eigen::VectorXd& xi,
                        const Eigen::VectorXd& y) {
    return 0.5 * (theta * xi - y).squaredNorm();
}

void check_problem(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y) {
    if (theta.rows() != y.size())
        throw DimensionError("design matrix rows and target length differ");
    if (theta.cols() < 1 || theta.rows() < 1)
        throw InvalidInput("regression needs at least one row and one column");
    if (!theta.allFinite() || !y.allFinite())
        throw InvalidInput("regression inputs must be finite");
}

// Least squares via the normal equations, with a ridge fallback of
// 1e-10*trace(G) when the Cholesky factorization fails.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                       bool& ridge_used) {
    const Eigen::MatrixXd G = A.transpose() * A;
    const Eigen::VectorXd b = A.transpose() * y;
    if (G.trace() <= 0.0) { // every active column is identically zero
        ridge_used = true;
        return Eigen::VectorXd::Zero(A.cols());
    }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
        Eigen::VectorXd xi = llt.solve(b);
        if (xi.allFinite())
            return xi;
    }
    ridge_used = true;
    Eigen::MatrixXd Gr = G;
    Gr.diagonal().array() += 1e-10 * G.trace();
    return Gr.ldlt().solve(b);
}

// Full-length solution from an active-set fit.
SparseSolution scatter_solution(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                const std::vector<Eigen::Index>& active,
                                const Eigen::VectorXd& coef, bool ridge_used) {
    SparseSolution sol;
    sol.xi = Eigen::VectorXd::Zero(theta.cols());
    for (size_t k = 0; k < active.size(); ++k)
        sol.xi(active[k]) = coef(static_cast<Eigen::Index>(k));
    sol.nnz = count_nonzero(sol.xi);
    sol.objective = half_sq_residual(theta, sol.xi, y);
    sol.converged = true;
    sol.ridge_fallback = ridge_used;
    return sol;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& theta,
                               const std::vector<Eigen::Index>& active) {
    Eigen::MatrixXd A(theta.rows(), static_cast<Eigen::Index>(active.size()));
    for (size_t k = 0; k < active.size(); ++k)
        A.col(static_cast<Eigen::Index>(k)) = theta.col(active[k]);
    return A;
}

} // namespace

double soft_threshold(double a, double kappa) {
    if (kappa < 0.0)
        throw InvalidInput("soft_threshold needs kappa >= 0");
    const double shrunk = std::abs(a) - kappa;
    return shrunk > 0.0 ? (a < 0.0 ? -shrunk : shrunk) : 0.0;
}

SparseSolution lasso_admm(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                          const AdmmConfig& config) {
    return lasso_admm(theta, y, lambda, config, nullptr);
}

SparseSolution lasso_admm(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                          const AdmmConfig& config, AdmmState* state) {
    check_problem(theta, y);
    if (lambda < 0.0 || !std::isfinite(lambda))
        throw InvalidInput("lambda must be finite and >= 0");
    if (!(config.rho > 0.0) || !(config.abs_tol > 0.0) || !(config.rel_tol > 0.0) ||
        config.max_iter < 1)
        throw ConfigError("ADMM config needs rho > 0, tolerances > 0, max_iter >= 1");

    const Eigen::Index p = theta.cols();
    const double rho = config.rho;
    Eigen::MatrixXd G = theta.transpose() * theta;
    G.diagonal().array() += rho;
    const Eigen::LLT<Eigen::MatrixXd> llt(G); // rho I makes this positive definite
    const Eigen::VectorXd b = theta.transpose() * y;

    Eigen::VectorXd xi = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
    if (state && state->xi.size() == p && state->z.size() == p && state->u.size() == p) {
        xi = state->xi;
        z = state->z;
        u = state->u;
    }
    const double kappa = lambda / rho;
    const double sqrt_p = std::sqrt(static_cast<double>(p));

    SparseSolution sol;
    for (int iter = 0; iter < config.max_iter; ++iter) {
        xi = llt.solve(b + rho * (z - u));
        const Eigen::VectorXd z_old = z;
        z = (xi + u).unaryExpr([kappa](double a) { return soft_threshold(a, kappa); });
        u += xi - z;
        ++sol.iterations;

        if (config.record_history) {
            // Augmented Lagrangian in scaled form.
            const double value = half_sq_residual(theta, xi, y) + lambda * z.lpNorm<1>() +
                                 0.5 * rho * ((xi - z + u).squaredNorm() - u.squaredNorm());
            sol.history.push_back(value);
        }

        const double r_norm = (xi - z).norm();
        const double s_norm = rho * (z - z_old).norm();
        const double eps_pri =
            sqrt_p * config.abs_tol + config.rel_tol * std::max(xi.norm(), z.norm());
        const double eps_dual = sqrt_p * config.abs_tol + config.rel_tol * rho * u.norm();
        if (r_norm <= eps_pri && s_norm <= eps_dual) {
            sol.converged = true;
            break;
        }
    }

    if (state) {
        state->xi = xi;
        state->z = z;
        state->u = u;
    }
    sol.xi = z;
    sol.nnz = count_nonzero(sol.xi);
    sol.objective = half_sq_residual(theta, sol.xi, y) + lambda * sol.xi.lpNorm<1>();
    return sol;
}

SparseSolution stlsq(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double threshold,
                     int max_rounds) {
    check_problem(theta, y);
    if (threshold < 0.0 || !std::isfinite(threshold))
        throw InvalidInput("threshold must be finite and >= 0");
    if (max_rounds < 1)
        throw InvalidInput("stlsq needs max_rounds >= 1");

    const Eigen::Index p = theta.cols();
    std::vector<Eigen::Index> active(p);
    for (Eigen::Index j = 0; j < p; ++j)
        active[static_cast<size_t>(j)] = j;

    bool ridge_used = false;
    bool stable = false;
    Eigen::VectorXd coef;
    int rounds = 0;
    while (rounds < max_rounds && !active.empty()) {
        coef = solve_normal_equations(select_columns(theta, active), y, ridge_used);
        ++rounds;
        std::vector<Eigen::Index> kept;
        Eigen::VectorXd kept_coef(coef.size());
        Eigen::Index kk = 0;
        for (size_t k = 0; k < active.size(); ++k) {
            if (std::abs(coef(static_cast<Eigen::Index>(k))) >= threshold) {
                kept.push_back(active[k]);
                kept_coef(kk++) = coef(static_cast<Eigen::Index>(k));
            }
        }
        if (kept.size() == active.size()) {
            stable = true;
            break;
        }
        active = std::move(kept);
    }

    // Final coefficients are the least-squares fit on the final support.
    Eigen::VectorXd final_coef;
    if (!active.empty() && !stable)
        final_coef = solve_normal_equations(select_columns(theta, active), y, ridge_used);
    else
        final_coef = coef;
    SparseSolution sol = active.empty()
                             ? scatter_solution(theta, y, {}, Eigen::VectorXd(), ridge_used)
                             : scatter_solution(theta, y, active, final_coef, ridge_used);
    sol.iterations = rounds;
    sol.converged = stable || active.empty();
    return sol;
}

std::vector<SparseSolution> ssr_coefficient(const Eigen::MatrixXd& theta,
                                            const Eigen::VectorXd& y) {
    check_problem(theta, y);
    const Eigen::Index p = theta.cols();
    std::vector<Eigen::Index> active(p);
    for (Eigen::Index j = 0; j < p; ++j)
        active[static_cast<size_t>(j)] = j;

    std::vector<SparseSolution> sequence;
    sequence.reserve(static_cast<size_t>(p));
    while (!active.empty()) {
        bool ridge_used = false;
        const Eigen::VectorXd coef =
            solve_normal_equations(select_columns(theta, active), y, ridge_used);
        sequence.push_back(scatter_solution(theta, y, active, coef, ridge_used));
        Eigen::Index drop = 0;
        for (Eigen::Index k = 1; k < coef.size(); ++k)
            if (std::abs(coef(k)) < std::abs(coef(drop)))
                drop = k;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    return sequence;
}

SparseSolution ssr_residual(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& val_theta, const Eigen::VectorXd& val_y) {
    check_problem(theta, y);
    check_problem(val_theta, val_y);
    if (val_theta.cols() != theta.cols())
        throw DimensionError("training and validation libraries disagree on column count");

    std::vector<Eigen::Index> active(theta.cols());
    for (Eigen::Index j = 0; j < theta.cols(); ++j)
        active[static_cast<size_t>(j)] = j;

    SparseSolution best;
    double best_val = std::numeric_limits<double>::infinity();
    bool first = true;
    while (true) {
        bool ridge_used = false;
        const Eigen::VectorXd coef =
            solve_normal_equations(select_columns(theta, active), y, ridge_used);
        SparseSolution sol = scatter_solution(theta, y, active, coef, ridge_used);
        const double val_residual = half_sq_residual(val_theta, sol.xi, val_y);
        if (first || val_residual <= best_val) { // ties prefer the sparser, later model
            best = sol;
            best_val = val_residual;
            first = false;
        }
        if (active.size() == 1)
            break;

        // Greedy step: drop whichever column leaves the smallest training
        // residual after refitting.
        Eigen::Index best_drop = 0;
        double best_train = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < active.size(); ++k) {
            std::vector<Eigen::Index> trial = active;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
            bool trial_ridge = false;
            const Eigen::VectorXd trial_coef =
                solve_normal_equations(select_columns(theta, trial), y, trial_ridge);
            const SparseSolution trial_sol =
                scatter_solution(theta, y, trial, trial_coef, trial_ridge);
            if (trial_sol.objective < best_train) {
                best_train = trial_sol.objective;
                best_drop = static_cast<Eigen::Index>(k);
            }
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_drop));
    }
    return best;
}

} // namespace gpsindy
