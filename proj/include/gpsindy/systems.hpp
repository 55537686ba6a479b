#ifndef GPSINDY_SYSTEMS_HPP
#define GPSINDY_SYSTEMS_HPP

#include "gpsindy/library.hpp"
#include "gpsindy/trajectory.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace gpsindy {

enum class SystemKind { lotka_volterra, unicycle };

[[nodiscard]] const char* to_string(SystemKind system);
[[nodiscard]] SystemKind system_from_string(const std::string& name);

struct LotkaVolterraParams {
    double a = 1.1; ///< prey growth rate
    double b = 0.4; ///< predation rate
    double c = 1.0; ///< predator death rate
    double d = 0.4; ///< predator growth per prey
};

/// dx1 = a x1 - b x1 x2, dx2 = -c x2 + d x1 x2.
[[nodiscard]] Eigen::Vector2d lotka_volterra_deriv(const Eigen::Vector2d& x,
                                                   const LotkaVolterraParams& params = {});

/// State [x, y, speed, heading]: dx1 = x3 cos x4, dx2 = x3 sin x4,
/// dx3 = u1, dx4 = u2.
[[nodiscard]] Eigen::Vector4d unicycle_deriv(const Eigen::Vector4d& x, const Eigen::Vector2d& u);

/// The benchmark's analytic excitation, u = [sin t, cos(t)/2].
[[nodiscard]] Eigen::Vector2d unicycle_controls(double t);

/// Conserved along Lotka-Volterra orbits; used to audit integrator drift.
[[nodiscard]] double lotka_volterra_invariant(const Eigen::Vector2d& x,
                                              const LotkaVolterraParams& params = {});

[[nodiscard]] Eigen::VectorXd default_initial_state(SystemKind system);

/// Uniformly spaced timestamps 0, dt, ..., covering the duration
/// (floor(duration/dt) + 1 samples).
[[nodiscard]] Eigen::VectorXd uniform_grid(double duration, double dt);

/// Time-dependent vector field, x' = f(t, x).
using Dynamics = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Classical fixed-step RK4 across the given timestamps, one step per
/// interval; row i holds the state at t(i).
[[nodiscard]] Eigen::MatrixXd integrate_rk4(const Dynamics& f, const Eigen::VectorXd& x0,
                                            const Eigen::VectorXd& t);

/// Simulates the system on a refine-times-finer internal grid, subsamples
/// to t_grid, stores the true derivatives at the sampled states, then adds
/// measurement noise to X (and to Xdot when noise_on_xdot is set).
/// Controls, when the system has them, are recorded clean.
[[nodiscard]] TrajectoryDataset generate_dataset(SystemKind system, const Eigen::VectorXd& t_grid,
                                                 const Eigen::VectorXd& x0,
                                                 const NoiseSpec& noise,
                                                 bool noise_on_xdot = true, int refine = 10);

/// Synthetic stand-in for the vehicle capture: a unicycle tracking a
/// figure-8 of two tangent circles at constant speed. State is
/// [x, y, speed, heading] with controls [speed rate, heading rate]; the
/// heading is continuous (no wrapping) and the traversal phase at t = 0 is
/// derived from the noise seed so different seeds give different segments.
/// Noise lands on X only; the stored derivatives stay clean.
[[nodiscard]] TrajectoryDataset figure_eight_dataset(double diameter, double lap_time,
                                                     double duration, double rate_hz,
                                                     const NoiseSpec& noise);

/// The true coefficients written in the library's basis; throws
/// IncompatibleLibrary when a needed term is missing.
[[nodiscard]] Eigen::MatrixXd ground_truth_xi(SystemKind system, const LibrarySpec& lib);

} // namespace gpsindy

#endif // GPSINDY_SYSTEMS_HPP
