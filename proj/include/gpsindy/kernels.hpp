#ifndef GPSINDY_KERNELS_HPP
#define GPSINDY_KERNELS_HPP

#include <Eigen/Dense>

#include <string>

namespace gpsindy {

/// Stationary covariance families, in tie-break order.
enum class KernelFamily {
    squared_exponential,
    matern12,
    matern32,
    periodic,
    rational_quadratic,
};

[[nodiscard]] const char* to_string(KernelFamily family);
[[nodiscard]] KernelFamily kernel_family_from_string(const std::string& name);

/// True for families with a third shape parameter (period / RQ shape).
[[nodiscard]] bool has_extra_param(KernelFamily family);

/// Kernel hyperparameters, stored in log-space so optimizer round trips are
/// exact. Slots: [signal_sd, lengthscale, extra, noise_sd]; extra is the
/// period (periodic) or shape alpha (rational quadratic), unused otherwise.
class HyperParams {
public:
    HyperParams() = default; // signal 1, lengthscale 1, extra 1, noise 0

    static HyperParams from_values(double signal_sd, double lengthscale, double extra = 1.0,
                                   double noise_sd = 0.0);
    static HyperParams from_log(const Eigen::Vector4d& log_values);

    [[nodiscard]] double signal_sd() const { return std::exp(log_(0)); }
    [[nodiscard]] double lengthscale() const { return std::exp(log_(1)); }
    [[nodiscard]] double extra() const { return std::exp(log_(2)); }
    [[nodiscard]] double noise_sd() const { return std::exp(log_(3)); }
    [[nodiscard]] const Eigen::Vector4d& log_values() const { return log_; }

private:
    Eigen::Vector4d log_{0.0, 0.0, 0.0, -std::numeric_limits<double>::infinity()};
};

struct KernelSpec {
    KernelFamily family = KernelFamily::squared_exponential;
    HyperParams hyper;
};

/// k(a, b) with r = |a - b|. Closed forms:
///   SE        sf^2 exp(-r^2 / (2 l^2))
///   Matern1/2 sf^2 exp(-r / l)
///   Matern3/2 sf^2 (1 + sqrt(3) r / l) exp(-sqrt(3) r / l)
///   Periodic  sf^2 exp(-2 sin^2(pi r / p) / l^2)
///   RQ        sf^2 (1 + r^2 / (2 a l^2))^(-a)
[[nodiscard]] double eval_kernel(const KernelSpec& spec, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& b);

/// Covariance matrix with entry (i, j) = k(A_i, B_j); rows are points.
[[nodiscard]] Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& B);

} // namespace gpsindy

#endif // GPSINDY_KERNELS_HPP
