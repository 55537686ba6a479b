#include "gpsindy/errors.hpp"
#include "gpsindy/gp.hpp"
#include "gpsindy/random.hpp"
#include "gpsindy/systems.hpp"
#include "gpsindy/trajectory.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace gpsindy;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

KernelSpec make_spec(KernelFamily family, double sf, double l, double extra, double sn) {
    KernelSpec spec;
    spec.family = family;
    spec.hyper = HyperParams::from_values(sf, l, extra, sn);
    return spec;
}

Eigen::MatrixXd random_points(Eigen::Index r, Eigen::Index d, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd A(r, d);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < d; ++j) A(i, j) = rng.normal();
    return A;
}

/// Direct dense evaluation via explicit inverse and determinant — an
/// independent check on the Cholesky path.
double dense_nll(const KernelSpec& spec, const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
    Eigen::MatrixXd K = gram(spec, Z, Z);
    const double sn = spec.hyper.noise_sd();
    K.diagonal().array() += sn * sn;
    const double quad = 0.5 * y.dot(K.inverse() * y);
    const double logdet = 0.5 * std::log(K.determinant());
    return quad + logdet + 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

/// Two points far enough apart that the SE covariance between them
/// underflows to zero: K + sn^2 I is exactly the identity.
GPFit identity_covariance_fit(const Eigen::VectorXd& y) {
    Eigen::MatrixXd Z(2, 1);
    Z << 0.0, 1e6;
    const KernelSpec spec = make_spec(KernelFamily::squared_exponential, 1e-8, 1.0, 1.0, 1.0);
    return fit_gp(spec, Z, y);
}

} // namespace

TEST_SUITE("gp") {

TEST_CASE("nll closed form on an identity covariance") {
    const GPFit fit = identity_covariance_fit(Eigen::Vector2d(1.0, 2.0));
    // 1/2 * (1 + 4) + 0 + log(2 pi)
    CHECK(fit.nll == doctest::Approx(2.5 + kLog2Pi).epsilon(1e-9));

    const GPFit zero_fit = identity_covariance_fit(Eigen::Vector2d::Zero());
    CHECK(zero_fit.nll == doctest::Approx(kLog2Pi).epsilon(1e-9));
}

TEST_CASE("zero targets leave only the log-det and constant terms") {
    const Eigen::MatrixXd Z = random_points(8, 1, 31);
    const KernelSpec spec = make_spec(KernelFamily::matern32, 1.2, 0.7, 1.0, 0.4);
    const Eigen::VectorXd y = Eigen::VectorXd::Zero(8);
    Eigen::MatrixXd K = gram(spec, Z, Z);
    K.diagonal().array() += 0.4 * 0.4;
    const double expected = 0.5 * std::log(K.determinant()) + 4.0 * kLog2Pi;
    CHECK(nll(spec, Z, y) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("cholesky nll matches the dense formula on random problems") {
    Rng rng(101);
    const KernelFamily families[] = {KernelFamily::squared_exponential, KernelFamily::matern12,
                                     KernelFamily::matern32, KernelFamily::periodic,
                                     KernelFamily::rational_quadratic};
    for (int rep = 0; rep < 20; ++rep) {
        const KernelSpec spec =
            make_spec(families[rep % 5], 0.5 + rng.uniform01(), 0.3 + rng.uniform01(),
                      0.5 + rng.uniform01(), 0.2 + 0.3 * rng.uniform01());
        const Eigen::MatrixXd Z = random_points(10, 2, 200 + rep);
        Eigen::VectorXd y(10);
        for (Eigen::Index i = 0; i < 10; ++i) y(i) = rng.normal();
        CHECK(nll(spec, Z, y) == doctest::Approx(dense_nll(spec, Z, y)).epsilon(1e-8));
    }
}

TEST_CASE("nll is invariant under joint permutation of rows and targets") {
    const Eigen::MatrixXd Z = random_points(12, 2, 41);
    Eigen::VectorXd y(12);
    Rng rng(43);
    for (Eigen::Index i = 0; i < 12; ++i) y(i) = rng.normal();
    const KernelSpec spec = make_spec(KernelFamily::squared_exponential, 1.0, 0.8, 1.0, 0.3);

    Eigen::VectorXi perm(12);
    perm << 7, 3, 11, 0, 5, 9, 1, 10, 2, 8, 4, 6;
    Eigen::MatrixXd Zp(12, 2);
    Eigen::VectorXd yp(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        Zp.row(i) = Z.row(perm(i));
        yp(i) = y(perm(i));
    }
    CHECK(std::abs(nll(spec, Z, y) - nll(spec, Zp, yp)) < 1e-10);
}

TEST_CASE("posterior interpolates the targets as the noise vanishes") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(15, 0.0, 4.2);
    Eigen::VectorXd y(15);
    for (Eigen::Index i = 0; i < 15; ++i) y(i) = std::sin(1.3 * t(i)) + 0.2 * t(i);
    const KernelSpec spec = make_spec(KernelFamily::matern12, 1.0, 1.0, 1.0, 1e-8);
    const GPFit fit = fit_gp(spec, t, y);
    const Eigen::VectorXd mean = posterior_mean(fit, t);
    CHECK((mean - y).norm() / y.norm() < 1e-4);
}

TEST_CASE("posterior mean vanishes with the signal variance") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(10, 0.0, 2.0);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
    const KernelSpec spec = make_spec(KernelFamily::squared_exponential, 1e-8, 1.0, 1.0, 1.0);
    const GPFit fit = fit_gp(spec, t, y);
    const Eigen::VectorXd mean = posterior_mean(fit, t);
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("posterior mean is linear in the targets for a fixed kernel") {
    const Eigen::MatrixXd Z = random_points(20, 1, 53);
    Eigen::VectorXd y1(20), y2(20);
    Rng rng(59);
    for (Eigen::Index i = 0; i < 20; ++i) {
        y1(i) = rng.normal();
        y2(i) = rng.normal();
    }
    const KernelSpec spec = make_spec(KernelFamily::matern32, 1.1, 0.9, 1.0, 0.25);
    const Eigen::MatrixXd Zstar = random_points(7, 1, 61);
    const double a = 2.3, b = -0.7;
    const Eigen::VectorXd combined =
        posterior_mean(fit_gp(spec, Z, a * y1 + b * y2), Zstar);
    const Eigen::VectorXd separate = a * posterior_mean(fit_gp(spec, Z, y1), Zstar) +
                                     b * posterior_mean(fit_gp(spec, Z, y2), Zstar);
    CHECK((combined - separate).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fit caches a consistent factorization and solve") {
    const Eigen::MatrixXd Z = random_points(12, 2, 67);
    Eigen::VectorXd y(12);
    Rng rng(71);
    for (Eigen::Index i = 0; i < 12; ++i) y(i) = rng.normal();
    const KernelSpec spec = make_spec(KernelFamily::squared_exponential, 1.0, 0.7, 1.0, 0.3);
    const GPFit fit = fit_gp(spec, Z, y);

    Eigen::MatrixXd K = gram(spec, Z, Z);
    K.diagonal().array() += 0.3 * 0.3 + fit.jitter;
    CHECK((K * fit.alpha - y).norm() / y.norm() < 1e-8);
    CHECK((fit.chol_lower * fit.chol_lower.transpose() - K).cwiseAbs().maxCoeff() < 1e-8);
    CHECK_THROWS_AS(posterior_mean(fit, random_points(3, 3, 1)), DimensionError);
}

TEST_CASE("hyperparameter search is monotone in the restart count") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(40, 0.0, 6.0);
    Eigen::VectorXd y(40);
    Rng rng(73);
    for (Eigen::Index i = 0; i < 40; ++i) y(i) = std::sin(t(i)) + 0.1 * rng.normal();
    const auto [h1, nll1] = fit_hyperparams(KernelFamily::squared_exponential, t, y, 1);
    const auto [h3, nll3] = fit_hyperparams(KernelFamily::squared_exponential, t, y, 3);
    CHECK(nll3 <= nll1 + 1e-12);
}

TEST_CASE("refitting data generated from a known kernel at least matches the truth") {
    const KernelSpec truth = make_spec(KernelFamily::squared_exponential, 1.0, 0.5, 1.0, 0.1);
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(100, 0.0, 5.0);
    Eigen::MatrixXd K = gram(truth, t, t);
    K.diagonal().array() += 1e-10;
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(K).matrixL();
    Rng rng(79);
    Eigen::VectorXd z(100), w(100);
    for (Eigen::Index i = 0; i < 100; ++i) {
        z(i) = rng.normal();
        w(i) = rng.normal();
    }
    const Eigen::VectorXd y = L * z + 0.1 * w;
    const double truth_nll = nll(truth, t, y);
    const auto [hyper, achieved] = fit_hyperparams(KernelFamily::squared_exponential, t, y, 3);
    CHECK(achieved <= truth_nll + 1e-6);
}

TEST_CASE("constant targets stay finite through the noise floor") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(12, 0.0, 2.0);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(12, 3.0);
    const auto [hyper, achieved] = fit_hyperparams(KernelFamily::squared_exponential, t, y, 1);
    CHECK(std::isfinite(achieved));
    CHECK(std::isfinite(hyper.signal_sd()));
}

TEST_CASE("select_kernel with one candidate returns that family") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(25, 0.0, 3.0);
    Eigen::VectorXd y(25);
    for (Eigen::Index i = 0; i < 25; ++i) y(i) = std::cos(2.0 * t(i));
    SmootherConfig config;
    config.candidate_families = {KernelFamily::matern32};
    config.restarts = 1;
    const GPFit fit = select_kernel(t, y, config);
    CHECK(fit.spec.family == KernelFamily::matern32);
    CHECK(fit.nll == doctest::Approx(nll(fit.spec, t, y)).epsilon(1e-10));
}

TEST_CASE("select_kernel achieves the minimum over its candidates") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(120, 0.0, 6.0 * std::numbers::pi);
    Eigen::VectorXd y(120);
    Rng rng(83);
    for (Eigen::Index i = 0; i < 120; ++i) y(i) = std::sin(t(i)) + 0.01 * rng.normal();
    SmootherConfig config;
    config.restarts = 2;
    const GPFit best = select_kernel(t, y, config);
    for (KernelFamily family : config.candidate_families) {
        const auto [hyper, achieved] =
            fit_hyperparams(family, t, y, config.restarts, config.jitter_base, config.nm);
        CHECK(best.nll <= achieved + 1e-9);
    }
}

TEST_CASE("smoothing a clean line reproduces it closely") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(60, 0.0, 3.0);
    Eigen::MatrixXd X(60, 1);
    X.col(0) = 2.0 * t;
    SmootherConfig config;
    config.restarts = 1;
    const SmoothResult result = smooth_states(t, X, config);
    CHECK((result.values.col(0) - X.col(0)).cwiseAbs().maxCoeff() < 2e-2);
}

TEST_CASE("duplicated columns smooth identically") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(40, 0.0, 4.0);
    Eigen::MatrixXd X(40, 2);
    Rng rng(89);
    for (Eigen::Index i = 0; i < 40; ++i) X(i, 0) = std::sin(t(i)) + 0.05 * rng.normal();
    X.col(1) = X.col(0);
    SmootherConfig config;
    config.candidate_families = {KernelFamily::squared_exponential, KernelFamily::matern32};
    config.restarts = 1;
    const SmoothResult result = smooth_states(t, X, config);
    CHECK((result.values.col(0) - result.values.col(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a constant column passes through unchanged") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(20, 0.0, 2.0);
    Eigen::MatrixXd X(20, 1);
    X.setConstant(7.5);
    SmootherConfig config;
    config.restarts = 1;
    const SmoothResult result = smooth_states(t, X, config);
    CHECK((result.values.col(0).array() - 7.5).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("smooth_states rejects tiny or mismatched input") {
    SmootherConfig config;
    const Eigen::VectorXd t3 = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
    CHECK_THROWS_AS(smooth_states(t3, Eigen::MatrixXd::Zero(3, 1), config), InsufficientData);
    const Eigen::VectorXd t5 = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    CHECK_THROWS_AS(smooth_states(t5, Eigen::MatrixXd::Zero(4, 1), config), DimensionError);
}

TEST_CASE("smooth_derivatives rejects a degenerate kernel input") {
    Eigen::MatrixXd Xdot(10, 1);
    Rng rng(97);
    for (Eigen::Index i = 0; i < 10; ++i) Xdot(i, 0) = rng.normal();
    const Eigen::MatrixXd degenerate = Eigen::MatrixXd::Constant(10, 2, 1.5);
    SmootherConfig config;
    config.restarts = 1;
    CHECK_THROWS_AS(smooth_derivatives(Xdot, degenerate, config), IllConditioned);
}

TEST_CASE("control-indexed smoothing reconstructs the unicycle inputs") {
    // On clean data the speed/heading derivative columns are exactly the
    // controls, so a GP keyed on U must reproduce them almost perfectly.
    const Eigen::VectorXd grid = uniform_grid(12.6, 0.05);
    const TrajectoryDataset data = generate_dataset(
        SystemKind::unicycle, grid, default_initial_state(SystemKind::unicycle), NoiseSpec{0.0, 0});
    REQUIRE(data.Xdot.has_value());
    REQUIRE(data.U.has_value());
    const Eigen::MatrixXd targets = data.Xdot->rightCols(2);
    SmootherConfig config;
    config.derivative_kernel_input = DerivativeKernelInput::control;
    config.candidate_families = {KernelFamily::squared_exponential, KernelFamily::matern32};
    config.restarts = 1;
    const SmoothResult result = smooth_derivatives(targets, *data.U, config);
    for (int j = 0; j < 2; ++j) {
        const double rmse =
            std::sqrt((result.values.col(j) - targets.col(j)).squaredNorm() /
                      static_cast<double>(targets.rows()));
        CHECK(rmse < 1e-2);
    }
}

TEST_CASE("a fit on sparse samples evaluates sensibly on a denser grid") {
    const Eigen::VectorXd coarse = Eigen::VectorXd::LinSpaced(16, 0.0, 3.0);
    Eigen::MatrixXd X(16, 1);
    for (Eigen::Index i = 0; i < 16; ++i) X(i, 0) = std::sin(2.0 * coarse(i));
    SmootherConfig config;
    config.candidate_families = {KernelFamily::squared_exponential};
    config.restarts = 2;
    const SmoothResult result = smooth_states(coarse, X, config);

    Eigen::MatrixXd midpoints(15, 1);
    for (Eigen::Index i = 0; i < 15; ++i) midpoints(i, 0) = 0.5 * (coarse(i) + coarse(i + 1));
    const Eigen::MatrixXd dense = smooth_eval(result, midpoints);
    double max_err = 0.0;
    for (Eigen::Index i = 0; i < 15; ++i)
        max_err = std::max(max_err, std::abs(dense(i, 0) - std::sin(2.0 * midpoints(i, 0))));
    CHECK(max_err < 5e-2);
}

TEST_CASE("smoothing noisy sine data beats the raw measurements") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(200, 0.0, 10.0);
    Eigen::VectorXd clean(200);
    for (Eigen::Index i = 0; i < 200; ++i) clean(i) = std::sin(t(i));
    int improved = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(1000 + seed);
        Eigen::VectorXd y(200);
        for (Eigen::Index i = 0; i < 200; ++i) y(i) = clean(i) + 0.1 * rng.normal();
        const auto [hyper, achieved] = fit_hyperparams(KernelFamily::squared_exponential, t, y, 2);
        KernelSpec spec;
        spec.family = KernelFamily::squared_exponential;
        spec.hyper = hyper;
        const Eigen::VectorXd mean = posterior_mean(fit_gp(spec, t, y), t);
        if ((mean - clean).norm() < (y - clean).norm()) ++improved;
    }
    CHECK(improved >= 19);
}

TEST_CASE("predator-prey smoothing denoises states and derivatives across seeds") {
    const Eigen::VectorXd grid = uniform_grid(30.0, 0.1);
    const TrajectoryDataset clean =
        generate_dataset(SystemKind::lotka_volterra, grid,
                         default_initial_state(SystemKind::lotka_volterra), NoiseSpec{0.0, 0});
    REQUIRE(clean.Xdot.has_value());

    SmootherConfig config; // default five-family search
    int state_wins = 0;
    int deriv_wins = 0;
    const int seeds = 40;
    for (int seed = 0; seed < seeds; ++seed) {
        const TrajectoryDataset noisy =
            add_noise(clean, NoiseSpec{0.1, static_cast<std::uint64_t>(seed)}, true);
        const SmoothResult states = smooth_states(noisy.t, noisy.X, config);
        if ((states.values - clean.X).squaredNorm() < (noisy.X - clean.X).squaredNorm())
            ++state_wins;

        const SmoothResult derivs = smooth_derivatives(*noisy.Xdot, states.values, config);
        const Eigen::MatrixXd fd = central_difference(noisy.X, noisy.t);
        const double gp_err = (derivs.values - *clean.Xdot).squaredNorm();
        const double fd_err = (fd - *clean.Xdot).squaredNorm();
        if (gp_err < fd_err) ++deriv_wins;
    }
    // The denoising claim: better than raw measurements / finite differences
    // in at least 90% of seeds.
    CHECK(state_wins >= 36);
    CHECK(deriv_wins >= 36);
}

} // TEST_SUITE
