#include "gpsindy/pipeline.hpp"

#include "gpsindy/errors.hpp"

#include <cmath>
#include <limits>

namespace gpsindy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

LambdaPath solve_lambda_path(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                             const AdmmConfig& admm) {
    LambdaPath path;
    AdmmState carry; // continuation across neighboring lambdas
    auto solve = [&](double lambda) {
        SparseSolution sol = lasso_admm(theta, y, lambda, admm, &carry);
        const bool all_zero = sol.nnz == 0;
        path.lambdas.push_back(lambda);
        path.solutions.push_back(std::move(sol));
        return all_zero;
    };
    for (double lambda : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0})
        if (solve(lambda))
            return path;
    // Arithmetic tail; lambda >= ||theta^T y||_inf forces the zero solution,
    // so the loop terminates shortly past that bound.
    const double zero_bound = (theta.transpose() * y).cwiseAbs().maxCoeff();
    for (double lambda = 11.0; lambda <= zero_bound + 20.0; lambda += 10.0)
        if (solve(lambda))
            return path;
    return path;
}

LambdaSchedule default_lambda_schedule(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                       const AdmmConfig& admm) {
    return {solve_lambda_path(theta, y, admm).lambdas};
}

Eigen::MatrixXd
rollout(const std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>& f,
        const Eigen::VectorXd& x0, const Eigen::VectorXd& t,
        const std::optional<Eigen::MatrixXd>& U) {
    if (t.size() < 1)
        throw InvalidTimestamps("rollout needs at least one timestamp");
    for (Eigen::Index i = 1; i < t.size(); ++i)
        if (!(t(i) > t(i - 1)))
            throw InvalidTimestamps("rollout timestamps must be strictly increasing");
    if (U && U->rows() != t.size())
        throw DimensionError("control rows do not match the timestamps");

    Eigen::MatrixXd X(t.size(), x0.size());
    X.row(0) = x0.transpose();
    Eigen::VectorXd x = x0;
    const Eigen::VectorXd no_control;
    for (Eigen::Index i = 0; i + 1 < t.size(); ++i) {
        const Eigen::VectorXd u = U ? Eigen::VectorXd(U->row(i).transpose()) : no_control;
        const double h = t(i + 1) - t(i);
        const Eigen::VectorXd k1 = f(x, u);
        const Eigen::VectorXd k2 = f(x + 0.5 * h * k1, u);
        const Eigen::VectorXd k3 = f(x + 0.5 * h * k2, u);
        const Eigen::VectorXd k4 = f(x + h * k3, u);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Catch blow-ups before they overflow so divergence is deterministic.
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e8)
            throw Divergence("rollout diverged at step " + std::to_string(i + 1));
        X.row(i + 1) = x.transpose();
    }
    return X;
}

LambdaSelection cross_validate_lambda(const std::vector<LambdaPath>& per_column,
                                      const LearnedModel& shape, const TrajectoryDataset& val) {
    val.validate();
    const int n = shape.state_dim;
    if (static_cast<int>(per_column.size()) != n)
        throw DimensionError("need one lambda path per state column");
    if (val.rows() < 2)
        throw InsufficientData("validation rollout needs at least 2 samples");
    for (const LambdaPath& path : per_column)
        if (path.lambdas.empty() || path.lambdas.size() != path.solutions.size())
            throw InvalidInput("lambda path is empty or misaligned");

    const Eigen::Index p = static_cast<Eigen::Index>(shape.term_names.size());
    LambdaSelection selection;
    selection.lambda_per_column.resize(n);
    selection.xi.resize(p, n);
    // Columns not yet visited start at their sparsest candidate: rollouts
    // stay stable, so early columns are judged in a sane context instead of
    // through the dense small-lambda solutions of the columns after them.
    for (int j = 0; j < n; ++j)
        selection.xi.col(j) = per_column[static_cast<size_t>(j)].solutions.back().xi;

    LearnedModel work = shape;
    const Eigen::VectorXd x0 = val.X.row(0).transpose();
    for (int j = 0; j < n; ++j) {
        const LambdaPath& path = per_column[static_cast<size_t>(j)];
        bool any_finite = false;
        double best_rmse = kInf;
        for (size_t k = 0; k < path.lambdas.size(); ++k) {
            work.xi = selection.xi;
            work.xi.col(j) = path.solutions[k].xi;
            double rmse = kInf;
            try {
                const Eigen::MatrixXd pred = rollout(model_to_dynamics(work), x0, val.t, val.U);
                rmse = std::sqrt((pred.col(j) - val.X.col(j)).squaredNorm() /
                                 static_cast<double>(val.rows()));
            } catch (const Divergence&) {
            }
            if (!std::isfinite(rmse))
                continue;
            // <= so equal scores move to the larger (sparser) lambda.
            if (!any_finite || rmse <= best_rmse) {
                any_finite = true;
                best_rmse = rmse;
                selection.lambda_per_column(j) = path.lambdas[k];
                selection.xi.col(j) = path.solutions[k].xi;
            }
        }
        if (!any_finite)
            throw DivergentModel("every lambda candidate diverged on the validation rollout for "
                                 "column " + std::to_string(j + 1));
    }
    return selection;
}

namespace {

// Shared tail of the fit pipelines: build the model skeleton, then fill the
// coefficients per column with either the fixed lambda or path selection.
LearnedModel assemble_lasso_fit(FitMethod method, const Eigen::MatrixXd& theta_raw,
                                const Eigen::MatrixXd& targets, int state_dim, int control_dim,
                                const TrajectoryDataset& val, const FitOptions& options,
                                std::vector<SmootherColumnSummary> smoother) {
    Eigen::MatrixXd theta = theta_raw;
    std::optional<ColumnScaling> scaling;
    if (options.normalize)
        scaling = normalize_columns(theta);
    LearnedModel model;
    model.method = method;
    model.library = options.library;
    model.term_names = term_names(options.library, state_dim, control_dim);
    model.state_dim = state_dim;
    model.control_dim = control_dim;
    model.smoother = std::move(smoother);
    const auto p = static_cast<Eigen::Index>(model.term_names.size());
    model.xi = Eigen::MatrixXd::Zero(p, state_dim);
    model.lambda_per_column = Eigen::VectorXd::Zero(state_dim);

    if (options.fixed_lambda) {
        for (int j = 0; j < state_dim; ++j) {
            const SparseSolution sol =
                lasso_admm(theta, targets.col(j), *options.fixed_lambda, options.admm);
            model.xi.col(j) = scaling ? rescale_coefficients(*scaling, sol.xi) : sol.xi;
            model.lambda_per_column(j) = *options.fixed_lambda;
        }
    } else {
        std::vector<LambdaPath> paths;
        paths.reserve(static_cast<size_t>(state_dim));
        for (int j = 0; j < state_dim; ++j) {
            LambdaPath path = solve_lambda_path(theta, targets.col(j), options.admm);
            // Rollout-based selection integrates these candidates, so they
            // must act on the unscaled library.
            if (scaling)
                for (SparseSolution& sol : path.solutions)
                    sol.xi = rescale_coefficients(*scaling, sol.xi);
            paths.push_back(std::move(path));
        }
        const LambdaSelection selection = cross_validate_lambda(paths, model, val);
        model.xi = selection.xi;
        model.lambda_per_column = selection.lambda_per_column;
    }
    return model;
}

const Eigen::MatrixXd& require_xdot(const TrajectoryDataset& data, const char* who) {
    if (!data.Xdot)
        throw InvalidInput(std::string(who) +
                           " needs derivative columns (finite-difference the states first)");
    return *data.Xdot;
}

// The measurement grid with factor-1 evenly spaced points added per interval.
Eigen::VectorXd insert_subdivisions(const Eigen::VectorXd& t, int factor) {
    const Eigen::Index r = t.size();
    Eigen::VectorXd out((r - 1) * factor + 1);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i + 1 < r; ++i)
        for (int s = 0; s < factor; ++s)
            out(k++) = t(i) + (t(i + 1) - t(i)) * (static_cast<double>(s) / factor);
    out(k) = t(r - 1);
    return out;
}

// Row-wise linear interpolation of M (sampled at t) onto t_new.
Eigen::MatrixXd interp_rows(const Eigen::VectorXd& t, const Eigen::MatrixXd& M,
                            const Eigen::VectorXd& t_new) {
    Eigen::MatrixXd out(t_new.size(), M.cols());
    Eigen::Index i = 0;
    for (Eigen::Index k = 0; k < t_new.size(); ++k) {
        while (i + 2 < t.size() && t(i + 1) <= t_new(k))
            ++i;
        const double h = t(i + 1) - t(i);
        const double w = h > 0.0 ? (t_new(k) - t(i)) / h : 0.0;
        out.row(k) = (1.0 - w) * M.row(i) + w * M.row(i + 1);
    }
    return out;
}

} // namespace

LearnedModel gpsindy_fit(const TrajectoryDataset& train, const TrajectoryDataset& val,
                         const FitOptions& options) {
    train.validate();
    val.validate();
    const Eigen::MatrixXd& xdot_raw = require_xdot(train, "gpsindy_fit");

    Eigen::MatrixXd X_work = train.X;
    Eigen::MatrixXd xdot_work = xdot_raw;
    StandardizationParams state_params, deriv_params;
    if (options.standardize) {
        std::tie(X_work, state_params) = standardize(train.X);
        std::tie(xdot_work, deriv_params) = standardize(xdot_raw);
    }

    const SmoothResult states = smooth_states(train.t, X_work, options.smoother);

    Eigen::MatrixXd kernel_input;
    switch (options.smoother.derivative_kernel_input) {
    case DerivativeKernelInput::time:
        kernel_input = Eigen::MatrixXd(train.t);
        break;
    case DerivativeKernelInput::smoothed_state:
        kernel_input = states.values;
        break;
    case DerivativeKernelInput::control:
        if (!train.U)
            throw InvalidInput("control kernel input requested but the data has no controls");
        kernel_input = *train.U;
        break;
    }
    const SmoothResult derivs = smooth_derivatives(xdot_work, kernel_input, options.smoother);

    // On sparse captures the smoothed signals can be evaluated between the
    // measurements, handing the regression a denser grid than the data.
    if (options.gp_upsample < 1)
        throw ConfigError("gp_upsample must be >= 1");
    Eigen::MatrixXd X_GP;
    Eigen::MatrixXd xdot_GP;
    std::optional<Eigen::MatrixXd> U_fit = train.U;
    if (options.gp_upsample == 1) {
        X_GP = states.values;
        xdot_GP = derivs.values;
    } else {
        const Eigen::VectorXd t_aug = insert_subdivisions(train.t, options.gp_upsample);
        X_GP = smooth_eval(states, Eigen::MatrixXd(t_aug));
        if (train.U)
            U_fit = interp_rows(train.t, *train.U, t_aug);
        Eigen::MatrixXd kernel_aug;
        switch (options.smoother.derivative_kernel_input) {
        case DerivativeKernelInput::time: kernel_aug = Eigen::MatrixXd(t_aug); break;
        case DerivativeKernelInput::smoothed_state: kernel_aug = X_GP; break;
        case DerivativeKernelInput::control: kernel_aug = *U_fit; break;
        }
        xdot_GP = smooth_eval(derivs, kernel_aug);
    }
    if (options.standardize) {
        X_GP = destandardize(X_GP, state_params);
        xdot_GP = destandardize(xdot_GP, deriv_params);
    }

    std::vector<SmootherColumnSummary> summaries;
    for (Eigen::Index j = 0; j < train.state_dim(); ++j) {
        const GPFit& fit = states.fits[static_cast<size_t>(j)];
        summaries.push_back({"x" + std::to_string(j + 1), fit.spec.family, fit.spec.hyper,
                             fit.nll, fit.jitter});
    }
    for (Eigen::Index j = 0; j < train.state_dim(); ++j) {
        const GPFit& fit = derivs.fits[static_cast<size_t>(j)];
        summaries.push_back({"dx" + std::to_string(j + 1), fit.spec.family, fit.spec.hyper,
                             fit.nll, fit.jitter});
    }

    const LibraryMatrix lib = build_library(options.library, X_GP, U_fit);
    return assemble_lasso_fit(FitMethod::gpsindy, lib.theta, xdot_GP,
                              static_cast<int>(train.state_dim()),
                              static_cast<int>(train.control_dim()), val, options,
                              std::move(summaries));
}

LearnedModel sindy_fit(const TrajectoryDataset& train, const TrajectoryDataset& val,
                       const FitOptions& options) {
    train.validate();
    val.validate();
    const Eigen::MatrixXd& xdot = require_xdot(train, "sindy_fit");
    const LibraryMatrix lib = build_library(options.library, train.X, train.U);
    return assemble_lasso_fit(FitMethod::sindy, lib.theta, xdot,
                              static_cast<int>(train.state_dim()),
                              static_cast<int>(train.control_dim()), val, options, {});
}

namespace {

LearnedModel ssr_fit_common(FitMethod method, const TrajectoryDataset& train,
                            const TrajectoryDataset& val, const FitOptions& options) {
    train.validate();
    val.validate();
    const Eigen::MatrixXd& xdot = require_xdot(train, "SSR fitting");
    const Eigen::MatrixXd& val_xdot = require_xdot(val, "SSR validation");

    const LibraryMatrix lib = build_library(options.library, train.X, train.U);
    const LibraryMatrix val_lib = build_library(options.library, val.X, val.U);

    LearnedModel model;
    model.method = method;
    model.library = options.library;
    model.term_names = lib.names;
    model.state_dim = static_cast<int>(train.state_dim());
    model.control_dim = static_cast<int>(train.control_dim());
    model.xi = Eigen::MatrixXd::Zero(lib.theta.cols(), model.state_dim);
    model.lambda_per_column = Eigen::VectorXd::Zero(model.state_dim);

    for (int j = 0; j < model.state_dim; ++j) {
        if (method == FitMethod::ssr_res) {
            const SparseSolution sol =
                ssr_residual(lib.theta, xdot.col(j), val_lib.theta, val_xdot.col(j));
            model.xi.col(j) = sol.xi;
        } else {
            // Coefficient variant: pick the sequence member with the lowest
            // validation residual, ties to the sparser model.
            const std::vector<SparseSolution> sequence =
                ssr_coefficient(lib.theta, xdot.col(j));
            double best = kInf;
            for (const SparseSolution& sol : sequence) {
                const double val_res =
                    0.5 * (val_lib.theta * sol.xi - val_xdot.col(j)).squaredNorm();
                if (val_res <= best) {
                    best = val_res;
                    model.xi.col(j) = sol.xi;
                }
            }
        }
    }
    return model;
}

} // namespace

LearnedModel ssr_coeff_fit(const TrajectoryDataset& train, const TrajectoryDataset& val,
                           const FitOptions& options) {
    return ssr_fit_common(FitMethod::ssr_coeff, train, val, options);
}

LearnedModel ssr_res_fit(const TrajectoryDataset& train, const TrajectoryDataset& val,
                         const FitOptions& options) {
    return ssr_fit_common(FitMethod::ssr_res, train, val, options);
}

LearnedModel fit_model(FitMethod method, const TrajectoryDataset& train,
                       const TrajectoryDataset& val, const FitOptions& options) {
    switch (method) {
    case FitMethod::sindy: return sindy_fit(train, val, options);
    case FitMethod::gpsindy: return gpsindy_fit(train, val, options);
    case FitMethod::ssr_coeff: return ssr_coeff_fit(train, val, options);
    case FitMethod::ssr_res: return ssr_res_fit(train, val, options);
    }
    throw InvalidInput("unknown fit method enum value");
}

} // namespace gpsindy
