#include "gpsindy/kernels.hpp"

#include "gpsindy/errors.hpp"

#include <cmath>

namespace gpsindy {

const char* to_string(KernelFamily family) {
    switch (family) {
    case KernelFamily::squared_exponential: return "squared_exponential";
    case KernelFamily::matern12: return "matern12";
    case KernelFamily::matern32: return "matern32";
    case KernelFamily::periodic: return "periodic";
    case KernelFamily::rational_quadratic: return "rational_quadratic";
    }
    throw InvalidInput("unknown kernel family enum value");
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "squared_exponential") return KernelFamily::squared_exponential;
    if (name == "matern12") return KernelFamily::matern12;
    if (name == "matern32") return KernelFamily::matern32;
    if (name == "periodic") return KernelFamily::periodic;
    if (name == "rational_quadratic") return KernelFamily::rational_quadratic;
    throw InvalidInput("unknown kernel family '" + name + "'");
}

bool has_extra_param(KernelFamily family) {
    return family == KernelFamily::periodic || family == KernelFamily::rational_quadratic;
}

HyperParams HyperParams::from_values(double signal_sd, double lengthscale, double extra,
                                     double noise_sd) {
    if (!(signal_sd > 0.0) || !std::isfinite(signal_sd))
        throw InvalidInput("signal_sd must be positive and finite");
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
        throw InvalidInput("lengthscale must be positive and finite");
    if (!(extra > 0.0) || !std::isfinite(extra))
        throw InvalidInput("extra parameter must be positive and finite");
    if (noise_sd < 0.0 || std::isnan(noise_sd) || std::isinf(noise_sd))
        throw InvalidInput("noise_sd must be finite and non-negative");
    HyperParams h;
    h.log_ << std::log(signal_sd), std::log(lengthscale), std::log(extra), std::log(noise_sd);
    return h;
}

HyperParams HyperParams::from_log(const Eigen::Vector4d& log_values) {
    for (int i = 0; i < 4; ++i) {
        if (std::isnan(log_values(i)) || log_values(i) == std::numeric_limits<double>::infinity())
            throw InvalidInput("log hyperparameters must not be NaN or +inf");
    }
    HyperParams h;
    h.log_ = log_values;
    return h;
}

namespace {

// Profiles as a function of squared distance, vectorised over Eigen arrays.
// Families that need plain distance take a sqrt first; the squared
// exponential and rational quadratic avoid it entirely.
template <typename Array>
auto se_profile(const Array& r2, double sf2, double l) {
    return sf2 * (-r2 / (2.0 * l * l)).exp();
}

template <typename Array>
auto matern12_profile(const Array& r2, double sf2, double l) {
    return sf2 * (-r2.sqrt() / l).exp();
}

template <typename Array>
auto matern32_profile(const Array& r2, double sf2, double l) {
    auto s = (std::sqrt(3.0) / l) * r2.sqrt();
    return sf2 * (1.0 + s) * (-s).exp();
}

template <typename Array>
auto periodic_profile(const Array& r2, double sf2, double l, double period) {
    auto u = ((M_PI / period) * r2.sqrt()).sin();
    return sf2 * (-2.0 * u.square() / (l * l)).exp();
}

template <typename Array>
auto rq_profile(const Array& r2, double sf2, double l, double alpha) {
    return sf2 * (1.0 + r2 / (2.0 * alpha * l * l)).pow(-alpha);
}

Eigen::ArrayXXd apply_profile(const KernelSpec& spec, const Eigen::ArrayXXd& r2) {
    const double sf2 = spec.hyper.signal_sd() * spec.hyper.signal_sd();
    const double l = spec.hyper.lengthscale();
    switch (spec.family) {
    case KernelFamily::squared_exponential: return se_profile(r2, sf2, l);
    case KernelFamily::matern12: return matern12_profile(r2, sf2, l);
    case KernelFamily::matern32: return matern32_profile(r2, sf2, l);
    case KernelFamily::periodic: return periodic_profile(r2, sf2, l, spec.hyper.extra());
    case KernelFamily::rational_quadratic: return rq_profile(r2, sf2, l, spec.hyper.extra());
    }
    throw InvalidInput("unknown kernel family enum value");
}

} // namespace

double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw DimensionError("kernel inputs must have equal dimension");
    Eigen::ArrayXXd r2(1, 1);
    r2(0, 0) = (a - b).squaredNorm();
    return apply_profile(spec, r2)(0, 0);
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.cols() != B.cols())
        throw DimensionError("gram inputs must have equal dimension");
    // Squared distances via |a|^2 + |b|^2 - 2 a.b; clamp the tiny negatives
    // the cancellation can produce.
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    Eigen::MatrixXd r2 = -2.0 * A * B.transpose();
    r2.colwise() += a2;
    r2.rowwise() += b2.transpose();
    Eigen::MatrixXd G = apply_profile(spec, r2.array().max(0.0)).matrix();
    if (&A == &B) {
        // Same point set: the diagonal is exactly k(x, x) = sf^2.
        const double sf2 = spec.hyper.signal_sd() * spec.hyper.signal_sd();
        G.diagonal().setConstant(sf2);
    }
    return G;
}

} // namespace gpsindy
