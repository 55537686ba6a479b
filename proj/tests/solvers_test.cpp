#include "gpsindy/errors.hpp"
#include "gpsindy/random.hpp"
#include "gpsindy/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace gpsindy;

namespace {

double lasso_objective(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& xi, double lambda) {
    return 0.5 * (theta * xi - y).squaredNorm() + lambda * xi.cwiseAbs().sum();
}

/// Cyclic coordinate descent for the same LASSO objective — written from the
/// closed-form single-coordinate update, sharing no code with the ADMM path.
Eigen::VectorXd cd_lasso(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                         int max_sweeps = 20000, double tol = 1e-12) {
    const Eigen::Index p = theta.cols();
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd residual = y; // y - theta * xi, maintained incrementally
    Eigen::VectorXd col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq(j) = theta.col(j).squaredNorm();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq(j) == 0.0) continue;
            const double old = xi(j);
            const double rho = theta.col(j).dot(residual) + col_sq(j) * old;
            const double sign = rho > 0.0 ? 1.0 : -1.0;
            const double mag = std::abs(rho) - lambda;
            const double next = mag > 0.0 ? sign * mag / col_sq(j) : 0.0;
            if (next != old) {
                residual += theta.col(j) * (old - next);
                xi(j) = next;
                max_change = std::max(max_change, std::abs(next - old));
            }
        }
        if (max_change < tol) break;
    }
    return xi;
}

struct RandomProblem {
    Eigen::MatrixXd theta;
    Eigen::VectorXd y;
};

RandomProblem random_problem(Eigen::Index r, Eigen::Index p, std::uint64_t seed) {
    Rng rng(seed);
    RandomProblem prob;
    prob.theta.resize(r, p);
    prob.y.resize(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) prob.theta(i, j) = rng.normal();
        prob.y(i) = rng.normal();
    }
    return prob;
}

} // namespace

TEST_SUITE("solvers") {

TEST_CASE("soft threshold closed form") {
    CHECK(soft_threshold(1.5, 1.0) == doctest::Approx(0.5));
    CHECK(soft_threshold(-0.3, 0.5) == 0.0);
    CHECK(soft_threshold(-1.5, 1.0) == doctest::Approx(-0.5));
    for (double x : {-2.0, -0.1, 0.0, 0.7, 3.5})
        CHECK(soft_threshold(x, 0.0) == x);
}

TEST_CASE("zero penalty reduces to ordinary least squares") {
    const RandomProblem prob = random_problem(50, 8, 3);
    const Eigen::VectorXd ols = prob.theta.colPivHouseholderQr().solve(prob.y);
    const SparseSolution sol = lasso_admm(prob.theta, prob.y, 0.0);
    CHECK((sol.xi - ols).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(sol.converged);
}

TEST_CASE("penalties above the correlation bound give the exact zero solution") {
    for (int rep = 0; rep < 5; ++rep) {
        const RandomProblem prob = random_problem(30, 6, 100 + rep);
        const double bound = (prob.theta.transpose() * prob.y).cwiseAbs().maxCoeff();
        const SparseSolution sol = lasso_admm(prob.theta, prob.y, bound * 1.001);
        CHECK(sol.xi.cwiseAbs().maxCoeff() == 0.0);
        CHECK(sol.nnz == 0);
    }
}

TEST_CASE("objective matches an independent coordinate-descent solver") {
    const double lambdas[] = {0.01, 0.1, 1.0};
    for (int rep = 0; rep < 20; ++rep) {
        const RandomProblem prob = random_problem(50, 10, 500 + rep);
        const double lambda = lambdas[rep % 3];
        const SparseSolution sol = lasso_admm(prob.theta, prob.y, lambda);
        const Eigen::VectorXd oracle = cd_lasso(prob.theta, prob.y, lambda);
        const double admm_obj = lasso_objective(prob.theta, prob.y, sol.xi, lambda);
        const double cd_obj = lasso_objective(prob.theta, prob.y, oracle, lambda);
        CHECK(std::abs(admm_obj - cd_obj) < 1e-4);
        CHECK(sol.objective == doctest::Approx(admm_obj).epsilon(1e-9));
    }
}

TEST_CASE("final iterate satisfies the lasso optimality conditions") {
    AdmmConfig tight;
    tight.abs_tol = 1e-10;
    tight.rel_tol = 1e-8;
    tight.max_iter = 100000;
    for (int rep = 0; rep < 10; ++rep) {
        const RandomProblem prob = random_problem(40, 8, 900 + rep);
        const double lambda = rep % 2 == 0 ? 0.1 : 1.0;
        const SparseSolution sol = lasso_admm(prob.theta, prob.y, lambda, tight);
        const Eigen::VectorXd grad = prob.theta.transpose() * (prob.theta * sol.xi - prob.y);
        const double tol =
            1e-4 * std::max(1.0, (prob.theta.transpose() * prob.y).cwiseAbs().maxCoeff());
        for (Eigen::Index k = 0; k < 8; ++k) {
            if (sol.xi(k) == 0.0)
                CHECK(std::abs(grad(k)) <= lambda + tol);
            else
                CHECK(std::abs(grad(k) + lambda * (sol.xi(k) > 0 ? 1.0 : -1.0)) <= tol);
        }
    }
}

TEST_CASE("recorded merit history never increases") {
    const RandomProblem prob = random_problem(60, 12, 77);
    AdmmConfig config;
    config.record_history = true;
    const SparseSolution sol = lasso_admm(prob.theta, prob.y, 0.1, config);
    REQUIRE(!sol.history.empty());
    for (std::size_t i = 1; i < sol.history.size(); ++i)
        CHECK(sol.history[i] <= sol.history[i - 1] + 1e-9);
    CHECK(static_cast<int>(sol.history.size()) == sol.iterations);
}

TEST_CASE("warm starts reproduce the cold-start solution") {
    const RandomProblem prob = random_problem(50, 10, 333);
    AdmmState state;
    const SparseSolution first = lasso_admm(prob.theta, prob.y, 0.5, {}, &state);
    CHECK(state.xi.size() == 10);
    const SparseSolution warm = lasso_admm(prob.theta, prob.y, 0.1, {}, &state);
    const SparseSolution cold = lasso_admm(prob.theta, prob.y, 0.1);
    const double warm_obj = lasso_objective(prob.theta, prob.y, warm.xi, 0.1);
    const double cold_obj = lasso_objective(prob.theta, prob.y, cold.xi, 0.1);
    CHECK(std::abs(warm_obj - cold_obj) < 1e-6);
    CHECK(first.converged);
}

TEST_CASE("iteration cap surfaces as converged = false with a usable iterate") {
    const RandomProblem prob = random_problem(40, 8, 55);
    AdmmConfig one_step;
    one_step.max_iter = 1;
    const SparseSolution sol = lasso_admm(prob.theta, prob.y, 0.1, one_step);
    CHECK(!sol.converged);
    CHECK(sol.iterations == 1);
    CHECK(sol.xi.allFinite());
}

TEST_CASE("non-finite inputs are rejected") {
    RandomProblem prob = random_problem(10, 3, 66);
    prob.theta(4, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(lasso_admm(prob.theta, prob.y, 0.1), InvalidInput);
}

TEST_CASE("stlsq recovers a planted sparse model exactly") {
    const RandomProblem base = random_problem(60, 8, 42);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(8);
    truth(1) = 2.0;
    truth(4) = -3.0;
    const Eigen::VectorXd y = base.theta * truth;
    const SparseSolution sol = stlsq(base.theta, y, 0.05);
    CHECK(sol.nnz == 2);
    CHECK((sol.xi - truth).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sol.converged);
}

TEST_CASE("stlsq threshold edge cases") {
    const RandomProblem prob = random_problem(40, 5, 43);
    const Eigen::VectorXd ols = prob.theta.colPivHouseholderQr().solve(prob.y);
    const SparseSolution plain = stlsq(prob.theta, prob.y, 0.0);
    CHECK((plain.xi - ols).cwiseAbs().maxCoeff() < 1e-8);

    const double huge = ols.cwiseAbs().maxCoeff() * 10.0;
    const SparseSolution zero = stlsq(prob.theta, prob.y, huge);
    CHECK(zero.nnz == 0);
    CHECK(zero.converged);
}

TEST_CASE("stlsq is idempotent on its own support") {
    const RandomProblem base = random_problem(50, 8, 44);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(8);
    truth(0) = 1.2;
    truth(3) = -0.8;
    truth(6) = 0.4;
    Rng rng(45);
    Eigen::VectorXd y = base.theta * truth;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.01 * rng.normal();

    const SparseSolution first = stlsq(base.theta, y, 0.1);
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < 8; ++k)
        if (first.xi(k) != 0.0) support.push_back(k);
    REQUIRE(!support.empty());

    Eigen::MatrixXd theta_s(base.theta.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) theta_s.col(k) = base.theta.col(support[k]);
    const SparseSolution second = stlsq(theta_s, y, 0.1);
    for (std::size_t k = 0; k < support.size(); ++k)
        CHECK(second.xi(static_cast<Eigen::Index>(k)) ==
              doctest::Approx(first.xi(support[k])).epsilon(1e-12));
}

TEST_CASE("ssr coefficient sequence walks from dense to single-term") {
    const RandomProblem prob = random_problem(50, 6, 46);
    const std::vector<SparseSolution> seq = ssr_coefficient(prob.theta, prob.y);
    REQUIRE(seq.size() == 6);
    for (std::size_t k = 0; k < seq.size(); ++k)
        CHECK(seq[k].nnz == 6 - static_cast<int>(k));
    // Residual can only grow as columns are removed.
    for (std::size_t k = 1; k < seq.size(); ++k)
        CHECK(seq[k].objective >= seq[k - 1].objective - 1e-12);
}

TEST_CASE("ssr coefficient on one column is plain least squares") {
    const RandomProblem prob = random_problem(30, 1, 47);
    const std::vector<SparseSolution> seq = ssr_coefficient(prob.theta, prob.y);
    REQUIRE(seq.size() == 1);
    const double expected = prob.theta.col(0).dot(prob.y) / prob.theta.col(0).squaredNorm();
    CHECK(seq[0].xi(0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("ssr coefficient finds a planted support at its sparsity level") {
    const RandomProblem base = random_problem(80, 8, 48);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(8);
    truth(2) = 1.5;
    truth(5) = -2.5;
    const Eigen::VectorXd y = base.theta * truth;
    const std::vector<SparseSolution> seq = ssr_coefficient(base.theta, y);
    const SparseSolution& two_active = seq[6]; // sparsity 8 - 6 = 2
    CHECK(two_active.nnz == 2);
    CHECK((two_active.xi - truth).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ssr residual recovers a planted model via held-out selection") {
    const RandomProblem train = random_problem(80, 8, 49);
    const RandomProblem val = random_problem(30, 8, 50);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(8);
    truth(1) = 0.7;
    truth(6) = -1.9;
    const Eigen::VectorXd y_train = train.theta * truth;
    const Eigen::VectorXd y_val = val.theta * truth;
    const SparseSolution sol = ssr_residual(train.theta, y_train, val.theta, y_val);
    CHECK(sol.nnz == 2);
    CHECK((sol.xi - truth).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("ssr residual with validation == training never beats full least squares backwards") {
    const RandomProblem prob = random_problem(60, 7, 51);
    const SparseSolution sol = ssr_residual(prob.theta, prob.y, prob.theta, prob.y);
    const Eigen::VectorXd ols = prob.theta.colPivHouseholderQr().solve(prob.y);
    const double full_residual = 0.5 * (prob.theta * ols - prob.y).squaredNorm();
    const double returned_residual = 0.5 * (prob.theta * sol.xi - prob.y).squaredNorm();
    CHECK(returned_residual <= full_residual + 1e-12);
}

TEST_CASE("ssr residual on a single column is that column's fit") {
    const RandomProblem prob = random_problem(25, 1, 52);
    const SparseSolution sol = ssr_residual(prob.theta, prob.y, prob.theta, prob.y);
    const double expected = prob.theta.col(0).dot(prob.y) / prob.theta.col(0).squaredNorm();
    CHECK(sol.xi(0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rank-deficient fits fall back to ridge and say so") {
    RandomProblem prob = random_problem(40, 6, 53);
    prob.theta.col(5).setZero(); // provably singular normal equations
    const SparseSolution sol = stlsq(prob.theta, prob.y, 0.0);
    CHECK(sol.ridge_fallback);
    CHECK(sol.xi.allFinite());
}

} // TEST_SUITE
