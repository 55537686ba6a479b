#include "gpsindy/gp.hpp"

#include "gpsindy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gpsindy {

const char* to_string(DerivativeKernelInput input) {
    switch (input) {
    case DerivativeKernelInput::time: return "time";
    case DerivativeKernelInput::smoothed_state: return "smoothed_state";
    case DerivativeKernelInput::control: return "control";
    }
    throw InvalidInput("unknown derivative kernel input enum value");
}

DerivativeKernelInput derivative_kernel_input_from_string(const std::string& name) {
    if (name == "time") return DerivativeKernelInput::time;
    if (name == "smoothed_state") return DerivativeKernelInput::smoothed_state;
    if (name == "control") return DerivativeKernelInput::control;
    throw InvalidInput("unknown derivative kernel input '" + name + "'");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836; // log(2*pi)

struct Factorization {
    Eigen::MatrixXd L;
    double jitter = 0.0;
};

// Cholesky of K + sn^2 I; on failure, jitter starts at jitter_base*trace(K)/r
// and grows tenfold up to 1e-4*trace(K)/r before giving up.
Factorization factorize(const Eigen::MatrixXd& K, double noise_sd, double jitter_base) {
    const Eigen::Index r = K.rows();
    const double scale = K.trace() / static_cast<double>(r);
    const double jitter_max = 1e-4 * scale;
    Eigen::MatrixXd Kn = K;
    Kn.diagonal().array() += noise_sd * noise_sd;

    double jitter = 0.0;
    while (true) {
        Eigen::MatrixXd trial = Kn;
        if (jitter > 0.0)
            trial.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0 &&
            llt.matrixLLT().diagonal().allFinite())
            return {Eigen::MatrixXd(llt.matrixL()), jitter};
        const double next = (jitter == 0.0) ? jitter_base * scale : jitter * 10.0;
        if (!(next > 0.0) || next > jitter_max * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "covariance factorization failed for " << r << " points (final jitter "
                << jitter << ", limit " << jitter_max << ")";
            throw IllConditioned(msg.str());
        }
        jitter = next;
    }
}

double nll_from_factorization(const Factorization& fac, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& alpha) {
    const double quad = 0.5 * y.dot(alpha);
    const double logdet = fac.L.diagonal().array().log().sum();
    return quad + logdet + 0.5 * static_cast<double>(y.size()) * kLogTwoPi;
}

// Radical-inverse (van der Corput) value of index i in the given base.
double radical_inverse(unsigned i, unsigned base) {
    double value = 0.0;
    double scale = 1.0 / static_cast<double>(base);
    while (i > 0) {
        value += static_cast<double>(i % base) * scale;
        i /= base;
        scale /= static_cast<double>(base);
    }
    return value;
}

double population_sd(const Eigen::VectorXd& y) {
    const double mean = y.mean();
    return std::sqrt((y.array() - mean).square().mean());
}

// Unpacks an optimizer point into a kernel spec. Layout: [log sf, log l]
// plus log extra for the 4-parameter families, with log sn last.
KernelSpec unpack_point(KernelFamily family, const Eigen::VectorXd& v, double noise_floor) {
    const bool extra = has_extra_param(family);
    Eigen::Vector4d logs;
    logs(0) = v(0);
    logs(1) = v(1);
    logs(2) = extra ? v(2) : 0.0;
    const double sn = std::max(std::exp(v(extra ? 3 : 2)), noise_floor);
    logs(3) = std::log(sn);
    KernelSpec spec;
    spec.family = family;
    spec.hyper = HyperParams::from_log(logs);
    return spec;
}

void check_training_set(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
    if (Z.rows() != y.size())
        throw DimensionError("GP inputs and targets disagree on the number of points");
    if (Z.rows() < 2)
        throw InsufficientData("GP fitting needs at least 2 points");
    if (!Z.allFinite() || !y.allFinite())
        throw InvalidInput("GP inputs and targets must be finite");
}

} // namespace

double nll(const KernelSpec& spec, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
           double jitter_base) {
    check_training_set(Z, y);
    const Eigen::MatrixXd K = gram(spec, Z, Z);
    const Factorization fac = factorize(K, spec.hyper.noise_sd(), jitter_base);
    const Eigen::VectorXd alpha =
        fac.L.transpose().triangularView<Eigen::Upper>().solve(
            fac.L.triangularView<Eigen::Lower>().solve(y));
    return nll_from_factorization(fac, y, alpha);
}

GPFit fit_gp(const KernelSpec& spec, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
             double jitter_base) {
    check_training_set(Z, y);
    GPFit fit;
    fit.spec = spec;
    fit.Z = Z;
    fit.y = y;
    const Eigen::MatrixXd K = gram(spec, Z, Z);
    Factorization fac = factorize(K, spec.hyper.noise_sd(), jitter_base);
    fit.alpha = fac.L.transpose().triangularView<Eigen::Upper>().solve(
        fac.L.triangularView<Eigen::Lower>().solve(y));
    fit.nll = nll_from_factorization(fac, y, fit.alpha);
    fit.chol_lower = std::move(fac.L);
    fit.jitter = fac.jitter;
    return fit;
}

Eigen::VectorXd posterior_mean(const GPFit& fit, const Eigen::MatrixXd& Zstar) {
    if (Zstar.cols() != fit.Z.cols())
        throw DimensionError("posterior_mean query dimension does not match the training inputs");
    return gram(fit.spec, Zstar, fit.Z) * fit.alpha;
}

std::pair<HyperParams, double> fit_hyperparams(KernelFamily family, const Eigen::MatrixXd& Z,
                                               const Eigen::VectorXd& y, int restarts,
                                               double jitter_base, const NelderMeadOptions& nm) {
    check_training_set(Z, y);
    if (restarts < 1)
        throw InvalidInput("fit_hyperparams needs restarts >= 1");

    const double noise_floor = 1e-6 * population_sd(y);
    const int dim = has_extra_param(family) ? 4 : 3;

    auto objective = [&](const Eigen::VectorXd& v) -> double {
        if (v.cwiseAbs().maxCoeff() > 30.0)
            return kInf;
        try {
            return nll(unpack_point(family, v, noise_floor), Z, y, jitter_base);
        } catch (const IllConditioned&) {
            return kInf;
        }
    };

    static const unsigned kBases[4] = {2, 3, 5, 7};
    Eigen::VectorXd best_x;
    double best = kInf;
    // Start -1 is a fixed "all noise" anchor: noise at the data scale and a
    // small signal. Approaching from this side, the optimizer only shrinks
    // sigma_n when structure genuinely supports it, so pure-noise columns
    // settle on the mean instead of interpolating their own noise.
    for (int s = -1; s < restarts; ++s) {
        Eigen::VectorXd start(dim);
        if (s < 0) {
            start.setZero();
            start(0) = -2.0;
        } else {
            for (int d = 0; d < dim; ++d)
                start(d) = -4.0 + 6.0 * radical_inverse(static_cast<unsigned>(s) + 1, kBases[d]);
        }
        const NelderMeadResult run = nelder_mead(objective, start, nm);
        if (run.fval < best) {
            best = run.fval;
            best_x = run.x;
        }
    }
    if (!(best < kInf))
        throw OptimizationFailed("hyperparameter optimization failed from every start");
    return {unpack_point(family, best_x, noise_floor).hyper, best};
}

GPFit select_kernel(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                    const SmootherConfig& config) {
    if (config.candidate_families.empty())
        throw InvalidInput("select_kernel needs at least one candidate family");
    if (config.restarts < 1)
        throw InvalidInput("select_kernel needs restarts >= 1");

    const Eigen::MatrixXd* Z_search = &Z;
    const Eigen::VectorXd* y_search = &y;
    Eigen::MatrixXd Z_subset;
    Eigen::VectorXd y_subset;
    if (config.hyperfit_max_rows > 0 && Z.rows() > config.hyperfit_max_rows) {
        const Eigen::Index cap = config.hyperfit_max_rows;
        const Eigen::Index stride = (Z.rows() + cap - 1) / cap;
        const Eigen::Index rows = (Z.rows() + stride - 1) / stride;
        Z_subset.resize(rows, Z.cols());
        y_subset.resize(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            Z_subset.row(i) = Z.row(i * stride);
            y_subset(i) = y(i * stride);
        }
        Z_search = &Z_subset;
        y_search = &y_subset;
    }

    bool found = false;
    KernelSpec best_spec;
    double best_nll = kInf;
    for (KernelFamily family : config.candidate_families) {
        std::pair<HyperParams, double> fitted;
        try {
            fitted = fit_hyperparams(family, *Z_search, *y_search, config.restarts,
                                     config.jitter_base, config.nm);
        } catch (const OptimizationFailed&) {
            continue;
        } catch (const IllConditioned&) {
            continue;
        }
        const bool better = fitted.second < best_nll ||
                            (fitted.second == best_nll && found && family < best_spec.family);
        if (!found || better) {
            found = true;
            best_spec.family = family;
            best_spec.hyper = fitted.first;
            best_nll = fitted.second;
        }
    }
    if (!found)
        throw OptimizationFailed("every candidate kernel family failed to fit");
    return fit_gp(best_spec, Z, y, config.jitter_base);
}

namespace {

// Shared per-column smoothing: centre and scale the target, fit, evaluate at
// the training inputs, undo the scaling. Constant columns pass through.
SmoothResult smooth_columns(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Y,
                            const SmootherConfig& config) {
    SmoothResult result;
    result.values.resize(Y.rows(), Y.cols());
    result.fits.reserve(static_cast<size_t>(Y.cols()));
    result.target_mean.resize(Y.cols());
    result.target_scale.resize(Y.cols());
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        const Eigen::VectorXd col = Y.col(j);
        const double mean = col.mean();
        double sd = population_sd(col);
        if (!(sd > 1e-12 * (1.0 + std::abs(mean))))
            sd = 1.0; // constant column: fit the (zero) residual, output the mean back
        const Eigen::VectorXd target = (col.array() - mean) / sd;
        GPFit fit = select_kernel(Z, target, config);
        result.values.col(j) = sd * posterior_mean(fit, Z).array() + mean;
        result.fits.push_back(std::move(fit));
        result.target_mean(j) = mean;
        result.target_scale(j) = sd;
    }
    return result;
}

} // namespace

Eigen::MatrixXd smooth_eval(const SmoothResult& result, const Eigen::MatrixXd& Zstar) {
    const auto cols = static_cast<Eigen::Index>(result.fits.size());
    if (cols == 0 || result.target_mean.size() != cols || result.target_scale.size() != cols)
        throw InvalidInput("smooth_eval needs a populated smoothing result");
    Eigen::MatrixXd values(Zstar.rows(), cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        values.col(j) = result.target_scale(j) *
                            posterior_mean(result.fits[static_cast<size_t>(j)], Zstar).array() +
                        result.target_mean(j);
    return values;
}

SmoothResult smooth_states(const Eigen::VectorXd& t, const Eigen::MatrixXd& X,
                           const SmootherConfig& config) {
    if (t.size() != X.rows())
        throw DimensionError("timestamp count does not match the state rows");
    if (X.rows() < 4)
        throw InsufficientData("state smoothing needs at least 4 samples");
    return smooth_columns(Eigen::MatrixXd(t), X, config);
}

SmoothResult smooth_derivatives(const Eigen::MatrixXd& Xdot, const Eigen::MatrixXd& kernel_input,
                                const SmootherConfig& config) {
    if (kernel_input.rows() != Xdot.rows())
        throw DimensionError("kernel input rows do not match the derivative rows");
    if (Xdot.rows() < 4)
        throw InsufficientData("derivative smoothing needs at least 4 samples");
    const double spread =
        (kernel_input.rowwise() - kernel_input.row(0)).cwiseAbs().maxCoeff();
    if (spread == 0.0)
        throw IllConditioned("kernel input rows are all identical; the covariance is rank one "
                             "and no jitter makes the smoother meaningful");
    return smooth_columns(kernel_input, Xdot, config);
}

} // namespace gpsindy
