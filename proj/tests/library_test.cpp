#include "gpsindy/errors.hpp"
#include "gpsindy/library.hpp"
#include "gpsindy/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace gpsindy;

TEST_SUITE("library") {

TEST_CASE("single-state quadratic library with trig, evaluated at x = 2") {
    LibrarySpec spec;
    spec.poly_order = 2;
    spec.include_sin = true;
    spec.include_cos = true;
    Eigen::MatrixXd X(1, 1);
    X << 2.0;
    const LibraryMatrix lib = build_library(spec, X);
    const std::vector<std::string> expected = {"1", "x1", "x1*x1", "sin(x1)", "cos(x1)"};
    REQUIRE(lib.names == expected);
    REQUIRE(lib.theta.rows() == 1);
    CHECK(lib.theta(0, 0) == doctest::Approx(1.0));
    CHECK(lib.theta(0, 1) == doctest::Approx(2.0));
    CHECK(lib.theta(0, 2) == doctest::Approx(4.0));
    CHECK(lib.theta(0, 3) == doctest::Approx(0.9092974268256817).epsilon(1e-9));
    CHECK(lib.theta(0, 4) == doctest::Approx(-0.4161468365471424).epsilon(1e-9));
}

TEST_CASE("first-order library lists the constant and the bare states") {
    LibrarySpec spec;
    spec.poly_order = 1;
    const std::vector<std::string> names = term_names(spec, 4, 0);
    const std::vector<std::string> expected = {"1", "x1", "x2", "x3", "x4"};
    CHECK(names == expected);

    LibrarySpec with_controls = spec;
    with_controls.include_control = true;
    const std::vector<std::string> with_u = term_names(with_controls, 4, 2);
    CHECK(with_u.size() == 7);
    CHECK(with_u[5] == "u1");
    CHECK(with_u[6] == "u2");
}

TEST_CASE("order-zero library is a single column of ones") {
    LibrarySpec spec;
    spec.poly_order = 0;
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 3);
    const LibraryMatrix lib = build_library(spec, X);
    REQUIRE(lib.names.size() == 1);
    CHECK(lib.names[0] == "1");
    CHECK((lib.theta.col(0).array() - 1.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two states at third order give ten polynomial terms") {
    LibrarySpec spec;
    spec.poly_order = 3;
    const std::vector<std::string> names = term_names(spec, 2, 0);
    CHECK(names.size() == 10); // 1 + 2 + 3 + 4 monomial multisets
    const std::set<std::string> unique(names.begin(), names.end());
    CHECK(unique.size() == names.size());
    CHECK(std::find(names.begin(), names.end(), "x1*x2") != names.end());
    CHECK(std::find(names.begin(), names.end(), "x2*x1") == names.end());
}

TEST_CASE("term_names matches build_library across random specs") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        LibrarySpec spec;
        spec.poly_order = static_cast<int>(rng.next_u64() % 4);
        spec.include_sin = (rng.next_u64() & 1) != 0;
        spec.include_cos = (rng.next_u64() & 1) != 0;
        spec.include_cross_trig_products =
            (spec.include_sin || spec.include_cos) && (rng.next_u64() & 1) != 0;
        spec.include_control = (rng.next_u64() & 1) != 0;
        const int n = 1 + static_cast<int>(rng.next_u64() % 3);
        const int m = spec.include_control ? 1 + static_cast<int>(rng.next_u64() % 2) : 0;

        Eigen::MatrixXd X(5, n), U(5, std::max(m, 1));
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (int j = 0; j < n; ++j) X(i, j) = rng.normal();
            for (int j = 0; j < std::max(m, 1); ++j) U(i, j) = rng.normal();
        }
        const LibraryMatrix lib = build_library(
            spec, X, spec.include_control ? std::optional<Eigen::MatrixXd>(U.leftCols(m))
                                          : std::nullopt);
        CHECK(lib.names == term_names(spec, n, m));
        CHECK(lib.theta.cols() == static_cast<Eigen::Index>(lib.names.size()));
    }
}

TEST_CASE("evaluation at the origin follows the closed forms") {
    LibrarySpec spec;
    spec.poly_order = 2;
    spec.include_sin = true;
    spec.include_cos = true;
    spec.include_control = true;
    spec.include_cross_trig_products = true;
    const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(1, 2);
    const Eigen::MatrixXd U = Eigen::MatrixXd::Zero(1, 1);
    const LibraryMatrix lib = build_library(spec, X, U);
    for (std::size_t k = 0; k < lib.names.size(); ++k) {
        const std::string& name = lib.names[k];
        const double value = lib.theta(0, static_cast<Eigen::Index>(k));
        if (name == "1") {
            CHECK(value == 1.0);
        } else if (name.rfind("cos(", 0) == 0) {
            CHECK(value == 1.0); // cos(0)
        } else {
            // Monomials of degree >= 1, sin terms, controls, and every cross
            // product contain at least one zero factor.
            CHECK(value == 0.0);
        }
    }
}

TEST_CASE("row permutation of the data permutes the rows of theta") {
    LibrarySpec spec;
    spec.poly_order = 2;
    spec.include_sin = true;
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 2);
    const LibraryMatrix lib = build_library(spec, X);

    Eigen::MatrixXd Xp(6, 2);
    const int perm[6] = {4, 0, 5, 2, 1, 3};
    for (int i = 0; i < 6; ++i) Xp.row(i) = X.row(perm[i]);
    const LibraryMatrix libp = build_library(spec, Xp);
    for (int i = 0; i < 6; ++i)
        CHECK((libp.theta.row(i) - lib.theta.row(perm[i])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cross products pair monomials with trig terms") {
    LibrarySpec spec;
    spec.poly_order = 1;
    spec.include_sin = true;
    spec.include_cos = true;
    spec.include_cross_trig_products = true;
    Eigen::MatrixXd X(1, 2);
    X << 0.7, -0.3;
    const LibraryMatrix lib = build_library(spec, X);
    const auto it = std::find(lib.names.begin(), lib.names.end(), "x1*sin(x2)");
    REQUIRE(it != lib.names.end());
    const auto idx = static_cast<Eigen::Index>(it - lib.names.begin());
    CHECK(lib.theta(0, idx) == doctest::Approx(0.7 * std::sin(-0.3)).epsilon(1e-12));
    // Cross products come after every plain term.
    const auto sin_it = std::find(lib.names.begin(), lib.names.end(), "sin(x1)");
    REQUIRE(sin_it != lib.names.end());
    CHECK(it > sin_it);
}

TEST_CASE("invalid specs and inputs are rejected") {
    LibrarySpec control_without_u;
    control_without_u.include_control = true;
    CHECK_THROWS_AS(control_without_u.validate(2, 0), ConfigError);
    CHECK_THROWS_AS(build_library(control_without_u, Eigen::MatrixXd::Zero(3, 2)), ConfigError);

    LibrarySpec spec;
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
    bad(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(build_library(spec, bad), InvalidInput);
}

TEST_CASE("column normalization round trips coefficients") {
    Rng rng(13);
    Eigen::MatrixXd theta(20, 4);
    for (Eigen::Index i = 0; i < 20; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) theta(i, j) = rng.normal() * (j + 1.0);
    const Eigen::MatrixXd original = theta;
    const ColumnScaling scaling = normalize_columns(theta);
    for (Eigen::Index j = 0; j < 4; ++j)
        CHECK(theta.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));

    Eigen::VectorXd xi_scaled(4);
    xi_scaled << 1.0, -2.0, 0.5, 3.0;
    const Eigen::VectorXd xi = rescale_coefficients(scaling, xi_scaled);
    // theta_scaled * xi_scaled == theta_original * xi by construction.
    CHECK((theta * xi_scaled - original * xi).cwiseAbs().maxCoeff() < 1e-12);

    // Zero columns are left untouched.
    Eigen::MatrixXd with_zero = original;
    with_zero.col(2).setZero();
    const ColumnScaling zs = normalize_columns(with_zero);
    CHECK(with_zero.col(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(zs.norms(2) == doctest::Approx(1.0)); // neutral scale for zero columns
}

} // TEST_SUITE
