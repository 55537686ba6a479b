#ifndef GPSINDY_TRAJECTORY_HPP
#define GPSINDY_TRAJECTORY_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gpsindy {

/// A sampled trajectory: timestamps t (strictly increasing), states X (r x n),
/// optional state derivatives Xdot (r x n) and controls U (r x m).
struct TrajectoryDataset {
    Eigen::VectorXd t;
    Eigen::MatrixXd X;
    std::optional<Eigen::MatrixXd> Xdot;
    std::optional<Eigen::MatrixXd> U;
    std::vector<std::string> state_labels;   // optional; empty means x1..xn
    std::vector<std::string> control_labels; // optional; empty means u1..um

    [[nodiscard]] Eigen::Index rows() const { return t.size(); }
    [[nodiscard]] Eigen::Index state_dim() const { return X.cols(); }
    [[nodiscard]] Eigen::Index control_dim() const { return U ? U->cols() : 0; }

    /// Throws if t is not strictly increasing, row counts disagree, or any
    /// entry is non-finite.
    void validate() const;
};

/// Per-column affine rescaling to zero mean, unit variance.
/// Convention: population standard deviation (divide by r).
struct StandardizationParams {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

/// Additive i.i.d. Gaussian measurement noise, reproducible via the seed.
struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Derivative estimate via three-point stencils exact for quadratics, valid on
/// nonuniform grids: Lagrange central formula in the interior, second-order
/// one-sided formulas at the endpoints.
Eigen::MatrixXd central_difference(const Eigen::MatrixXd& X, const Eigen::VectorXd& t);

/// M + eps with eps ~ N(0, sigma^2) entrywise (row-major draw order).
[[nodiscard]] Eigen::MatrixXd add_noise(const Eigen::MatrixXd& M, const NoiseSpec& spec);

/// Corrupts X (and Xdot when requested) with independent noise streams derived
/// from the spec seed, so toggling noise_on_xdot does not change the X draws.
[[nodiscard]] TrajectoryDataset add_noise(const TrajectoryDataset& data, const NoiseSpec& spec,
                            bool noise_on_xdot);

///// Contiguous-in-time split: first floor(r * train_fraction) rows train,
/// remainder validation.
std::pair<TrajectoryDataset, TrajectoryDataset> train_test_split(const TrajectoryDataset& data,
                                                                 double train_fraction);

/// Keeps rows 0, k, 2k, ... of every field.
TrajectoryDataset downsample(const TrajectoryDataset& data, std::size_t keep_every);

std::pair<Eigen::MatrixXd, StandardizationParams> standardize(const Eigen::MatrixXd& X);
Eigen::MatrixXd standardize_with(const Eigen::MatrixXd& X, const StandardizationParams& params);
Eigen::MatrixXd destandardize(const Eigen::MatrixXd& X_std, const StandardizationParams& params);

///// CSV schema: header row with required column "t", states x1..xn, optional
/// derivatives dx1..dxn, optional controls u1..um; values written with 17
/// significant digits so load(save(d)) is exact.
TrajectoryDataset load_csv(const std::string& path);
void save_csv(const TrajectoryDataset& data, const std::string& path);

} // namespace gpsindy

#endif // GPSINDY_TRAJECTORY_HPP
