#include "gpsindy/optimize.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace gpsindy;

TEST_SUITE("optimize") {

TEST_CASE("finds the minimum of a quadratic bowl") {
    const Eigen::Vector3d target(1.0, 2.0, 3.0);
    const auto objective = [&](const Eigen::VectorXd& x) {
        return (x - target).squaredNorm();
    };
    NelderMeadOptions opts;
    opts.max_iter = 500;
    const NelderMeadResult res = nelder_mead(objective, Eigen::Vector3d::Zero(), opts);
    CHECK(res.converged);
    CHECK((res.x - target).norm() < 1e-3);
    CHECK(res.fval < 1e-6);
    CHECK(res.iterations <= opts.max_iter);
    CHECK(res.evaluations > 0);
}

TEST_CASE("best objective never worsens across iterations") {
    const auto rosenbrock = [](const Eigen::VectorXd& x) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        return a * a + 100.0 * b * b;
    };
    NelderMeadOptions opts;
    opts.max_iter = 300;
    const NelderMeadResult res = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), opts);
    REQUIRE(!res.best_history.empty());
    for (std::size_t i = 1; i < res.best_history.size(); ++i)
        CHECK(res.best_history[i] <= res.best_history[i - 1] + 1e-15);
    CHECK(res.fval == res.best_history.back());
}

TEST_CASE("deterministic: identical calls give identical results") {
    const auto objective = [](const Eigen::VectorXd& x) {
        return std::abs(x(0) - 0.3) + 0.5 * x(1) * x(1);
    };
    const NelderMeadResult a = nelder_mead(objective, Eigen::Vector2d(2.0, -1.0));
    const NelderMeadResult b = nelder_mead(objective, Eigen::Vector2d(2.0, -1.0));
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.fval == b.fval);
    CHECK(a.iterations == b.iterations);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("walks back out of a non-finite region") {
    // The objective is NaN beyond |x| = 10; the start sits near the edge so
    // early simplex moves probe the bad region.
    const auto objective = [](const Eigen::VectorXd& x) {
        if (std::abs(x(0)) > 10.0) return std::numeric_limits<double>::quiet_NaN();
        return x(0) * x(0);
    };
    NelderMeadOptions opts;
    opts.max_iter = 400;
    opts.initial_step = 4.0;
    const NelderMeadResult res =
        nelder_mead(objective, Eigen::VectorXd::Constant(1, 9.5), opts);
    CHECK(std::isfinite(res.fval));
    CHECK(std::abs(res.x(0)) < 1e-2);
}

TEST_CASE("longer budgets make progress on an ill-conditioned valley") {
    const auto rosenbrock = [](const Eigen::VectorXd& x) {
        const double a = 1.0 - x(0);
        const double b = x(1) - x(0) * x(0);
        return a * a + 100.0 * b * b;
    };
    NelderMeadOptions opts;
    opts.max_iter = 2000;
    opts.xtol = 1e-10;
    opts.ftol = 1e-12;
    const NelderMeadResult res = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), opts);
    CHECK(res.fval < 1e-3);
}

} // TEST_SUITE
