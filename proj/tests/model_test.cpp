#include "gpsindy/errors.hpp"
#include "gpsindy/model.hpp"
#include "gpsindy/random.hpp"
#include "gpsindy/systems.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

using namespace gpsindy;

namespace {

LearnedModel lotka_volterra_truth_model() {
    LearnedModel model;
    model.method = FitMethod::sindy;
    model.library.poly_order = 3;
    model.library.include_sin = true;
    model.library.include_cos = true;
    model.state_dim = 2;
    model.control_dim = 0;
    model.term_names = term_names(model.library, 2, 0);
    model.xi = ground_truth_xi(SystemKind::lotka_volterra, model.library);
    model.lambda_per_column = Eigen::Vector2d(0.1, 0.1);
    return model;
}

LearnedModel random_control_model(std::uint64_t seed) {
    LearnedModel model;
    model.method = FitMethod::gpsindy;
    model.library.poly_order = 2;
    model.library.include_sin = true;
    model.library.include_cos = true;
    model.library.include_cross_trig_products = true;
    model.library.include_control = true;
    model.state_dim = 3;
    model.control_dim = 2;
    model.term_names = term_names(model.library, 3, 2);
    Rng rng(seed);
    model.xi.resize(static_cast<Eigen::Index>(model.term_names.size()), 3);
    for (Eigen::Index i = 0; i < model.xi.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) model.xi(i, j) = rng.normal();
    model.lambda_per_column = Eigen::Vector3d(0.01, 0.1, 1.0);

    SmootherColumnSummary summary;
    summary.target = "x1";
    summary.family = KernelFamily::matern32;
    summary.hyper = HyperParams::from_values(1.2, 0.4, 1.0, 0.05);
    summary.nll = -12.75;
    summary.jitter = 1e-9;
    model.smoother.push_back(summary);
    return model;
}

} // namespace

TEST_SUITE("model") {

TEST_CASE("ground-truth coefficients reproduce the predator-prey field") {
    const LearnedModel model = lotka_volterra_truth_model();
    const auto f = model_to_dynamics(model);
    const Eigen::VectorXd dx = f(Eigen::Vector2d(1.0, 2.0), Eigen::VectorXd());
    CHECK(dx(0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(dx(1) == doctest::Approx(-1.2).epsilon(1e-12));
}

TEST_CASE("zero coefficients give the zero field") {
    LearnedModel model = lotka_volterra_truth_model();
    model.xi.setZero();
    const auto f = model_to_dynamics(model);
    const Eigen::VectorXd dx = f(Eigen::Vector2d(0.7, -0.4), Eigen::VectorXd());
    CHECK(dx.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-sample evaluation matches the batch library product") {
    const LearnedModel model = random_control_model(21);
    const auto f = model_to_dynamics(model);
    Rng rng(22);
    Eigen::MatrixXd X(5, 3), U(5, 2);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
        for (Eigen::Index j = 0; j < 2; ++j) U(i, j) = rng.normal();
    }
    const LibraryMatrix lib = build_library(model.library, X, U);
    const Eigen::MatrixXd batch = lib.theta * model.xi;
    for (Eigen::Index i = 0; i < 5; ++i) {
        const Eigen::VectorXd single = f(X.row(i).transpose(), U.row(i).transpose());
        CHECK((single.transpose() - batch.row(i)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dynamics evaluation enforces the model dimensions") {
    const LearnedModel model = random_control_model(23);
    const auto f = model_to_dynamics(model);
    CHECK_THROWS_AS(f(Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.0, 0.0)), DimensionError);
    CHECK_THROWS_AS(f(Eigen::Vector3d(0.0, 0.0, 0.0), Eigen::VectorXd()), DimensionError);
}

TEST_CASE("model files round trip exactly") {
    const LearnedModel model = random_control_model(24);
    const std::string path = "/tmp/gpsindy_model_test_roundtrip.model";
    save_model(model, path);
    const LearnedModel back = load_model(path);
    std::remove(path.c_str());

    CHECK(back.method == model.method);
    CHECK(back.library.poly_order == model.library.poly_order);
    CHECK(back.library.include_sin == model.library.include_sin);
    CHECK(back.library.include_cos == model.library.include_cos);
    CHECK(back.library.include_cross_trig_products == model.library.include_cross_trig_products);
    CHECK(back.library.include_control == model.library.include_control);
    CHECK(back.term_names == model.term_names);
    CHECK(back.state_dim == model.state_dim);
    CHECK(back.control_dim == model.control_dim);
    CHECK((back.xi - model.xi).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.lambda_per_column - model.lambda_per_column).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.smoother.size() == 1);
    CHECK(back.smoother[0].target == "x1");
    CHECK(back.smoother[0].family == KernelFamily::matern32);
    CHECK((back.smoother[0].hyper.log_values() - model.smoother[0].hyper.log_values())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(back.smoother[0].nll == model.smoother[0].nll);
    CHECK(back.smoother[0].jitter == model.smoother[0].jitter);
}

TEST_CASE("loading rejects missing or malformed files") {
    CHECK_THROWS_AS(load_model("/tmp/gpsindy_model_test_missing.model"), IoError);

    const std::string path = "/tmp/gpsindy_model_test_malformed.model";
    {
        std::ofstream out(path);
        out << "method sindy\nthis line is not a model field\n";
    }
    CHECK_THROWS_AS(load_model(path), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("validation catches inconsistent shapes") {
    LearnedModel model = lotka_volterra_truth_model();
    CHECK_NOTHROW(model.validate());

    LearnedModel wrong_rows = model;
    wrong_rows.xi.conservativeResize(wrong_rows.xi.rows() - 1, Eigen::NoChange);
    CHECK_THROWS_AS(wrong_rows.validate(), DimensionError);

    LearnedModel wrong_lambdas = model;
    wrong_lambdas.lambda_per_column = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(wrong_lambdas.validate(), DimensionError);

    LearnedModel non_finite = model;
    non_finite.xi(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(non_finite.validate(), InvalidInput);
}

TEST_CASE("method names round trip") {
    for (FitMethod method : {FitMethod::sindy, FitMethod::gpsindy, FitMethod::ssr_coeff,
                             FitMethod::ssr_res})
        CHECK(fit_method_from_string(to_string(method)) == method);
    CHECK_THROWS_AS(fit_method_from_string("lasso"), ConfigError);
}

} // TEST_SUITE
