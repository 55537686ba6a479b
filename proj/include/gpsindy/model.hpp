#ifndef GPSINDY_MODEL_HPP
#define GPSINDY_MODEL_HPP

#include "gpsindy/gp.hpp"
#include "gpsindy/library.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace gpsindy {

enum class FitMethod { sindy, gpsindy, ssr_coeff, ssr_res };

[[nodiscard]] const char* to_string(FitMethod method);
[[nodiscard]] FitMethod fit_method_from_string(const std::string& name);

/// What the smoother chose for one target column, kept for provenance.
struct SmootherColumnSummary {
    std::string target;  ///< "x1".."xn" for states, "dx1".."dxn" for derivatives
    KernelFamily family = KernelFamily::squared_exponential;
    HyperParams hyper;
    double nll = 0.0;
    double jitter = 0.0;
};

/// A fitted sparse dynamics model: column j of xi holds the coefficients
/// of dx_j over the library terms.
struct LearnedModel {
    FitMethod method = FitMethod::sindy;
    LibrarySpec library;
    std::vector<std::string> term_names;
    int state_dim = 0;
    int control_dim = 0;
    Eigen::MatrixXd xi;                ///< p x n
    Eigen::VectorXd lambda_per_column; ///< length n; 0 for penalty-free methods
    std::vector<SmootherColumnSummary> smoother; ///< empty unless GP smoothing ran

    void validate() const;
};

/// Wraps the model as a vector field f(x, u); matches library evaluation
/// plus matrix contraction on batches.
[[nodiscard]] std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
model_to_dynamics(const LearnedModel& model);

/// Plain-text model file, exact round trip (17 significant digits).
void save_model(const LearnedModel& model, const std::string& path);
[[nodiscard]] LearnedModel load_model(const std::string& path);

} // namespace gpsindy

#endif // GPSINDY_MODEL_HPP
