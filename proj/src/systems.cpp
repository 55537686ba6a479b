#include "gpsindy/systems.hpp"

#include "gpsindy/errors.hpp"
#include "gpsindy/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gpsindy {

const char* to_string(SystemKind system) {
    switch (system) {
    case SystemKind::lotka_volterra: return "lotka_volterra";
    case SystemKind::unicycle: return "unicycle";
    }
    throw InvalidInput("unknown system enum value");
}

SystemKind system_from_string(const std::string& name) {
    if (name == "lotka_volterra") return SystemKind::lotka_volterra;
    if (name == "unicycle") return SystemKind::unicycle;
    throw ConfigError("unknown system '" + name + "'");
}

Eigen::Vector2d lotka_volterra_deriv(const Eigen::Vector2d& x, const LotkaVolterraParams& p) {
    return {p.a * x(0) - p.b * x(0) * x(1), -p.c * x(1) + p.d * x(0) * x(1)};
}

Eigen::Vector4d unicycle_deriv(const Eigen::Vector4d& x, const Eigen::Vector2d& u) {
    return {x(2) * std::cos(x(3)), x(2) * std::sin(x(3)), u(0), u(1)};
}

Eigen::Vector2d unicycle_controls(double t) {
    return {std::sin(t), 0.5 * std::cos(t)};
}

double lotka_volterra_invariant(const Eigen::Vector2d& x, const LotkaVolterraParams& p) {
    return p.d * x(0) - p.c * std::log(x(0)) + p.b * x(1) - p.a * std::log(x(1));
}

Eigen::VectorXd default_initial_state(SystemKind system) {
    switch (system) {
    case SystemKind::lotka_volterra: return Eigen::Vector2d{1.0, 1.0};
    case SystemKind::unicycle: return Eigen::Vector4d{0.0, 0.0, 0.5, 0.5};
    }
    throw InvalidInput("unknown system enum value");
}

Eigen::VectorXd uniform_grid(double duration, double dt) {
    if (!(duration > 0.0) || !(dt > 0.0))
        throw InvalidInput("uniform_grid needs positive duration and step");
    const auto steps = static_cast<Eigen::Index>(std::floor(duration / dt + 1e-9));
    Eigen::VectorXd t(steps + 1);
    for (Eigen::Index i = 0; i <= steps; ++i)
        t(i) = static_cast<double>(i) * dt;
    return t;
}

Eigen::MatrixXd integrate_rk4(const Dynamics& f, const Eigen::VectorXd& x0,
                              const Eigen::VectorXd& t) {
    if (t.size() < 1)
        throw InvalidTimestamps("integration needs at least one timestamp");
    for (Eigen::Index i = 1; i < t.size(); ++i)
        if (!(t(i) > t(i - 1)))
            throw InvalidTimestamps("integration timestamps must be strictly increasing");

    Eigen::MatrixXd X(t.size(), x0.size());
    X.row(0) = x0.transpose();
    Eigen::VectorXd x = x0;
    for (Eigen::Index i = 0; i + 1 < t.size(); ++i) {
        const double h = t(i + 1) - t(i);
        const Eigen::VectorXd k1 = f(t(i), x);
        const Eigen::VectorXd k2 = f(t(i) + 0.5 * h, x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(t(i) + 0.5 * h, x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(t(i) + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite())
            throw Divergence("integration diverged at step " + std::to_string(i + 1));
        X.row(i + 1) = x.transpose();
    }
    return X;
}

namespace {

Dynamics system_dynamics(SystemKind system) {
    switch (system) {
    case SystemKind::lotka_volterra:
        return [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return lotka_volterra_deriv(x.head<2>());
        };
    case SystemKind::unicycle:
        return [](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return unicycle_deriv(x.head<4>(), unicycle_controls(t));
        };
    }
    throw InvalidInput("unknown system enum value");
}

// t_grid refined so each sampling interval is split into `refine` RK4 steps.
Eigen::VectorXd refine_grid(const Eigen::VectorXd& t, int refine) {
    Eigen::VectorXd fine((t.size() - 1) * refine + 1);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i + 1 < t.size(); ++i)
        for (int s = 0; s < refine; ++s)
            fine(k++) = t(i) + (t(i + 1) - t(i)) * (static_cast<double>(s) / refine);
    fine(k) = t(t.size() - 1);
    return fine;
}

} // namespace

TrajectoryDataset generate_dataset(SystemKind system, const Eigen::VectorXd& t_grid,
                                   const Eigen::VectorXd& x0, const NoiseSpec& noise,
                                   bool noise_on_xdot, int refine) {
    if (t_grid.size() < 2)
        throw InvalidTimestamps("dataset generation needs at least two timestamps");
    if (refine < 1)
        throw InvalidInput("refine must be >= 1");
    const Eigen::Index n = x0.size();
    const Eigen::Index expected = system == SystemKind::lotka_volterra ? 2 : 4;
    if (n != expected)
        throw DimensionError("initial state dimension does not match the system");

    const Dynamics f = system_dynamics(system);
    const Eigen::MatrixXd fine = integrate_rk4(f, x0, refine_grid(t_grid, refine));

    TrajectoryDataset data;
    data.t = t_grid;
    data.X.resize(t_grid.size(), n);
    for (Eigen::Index i = 0; i < t_grid.size(); ++i)
        data.X.row(i) = fine.row(i * refine);

    Eigen::MatrixXd xdot(t_grid.size(), n);
    for (Eigen::Index i = 0; i < t_grid.size(); ++i)
        xdot.row(i) = f(t_grid(i), data.X.row(i).transpose()).transpose();
    data.Xdot = xdot;

    if (system == SystemKind::unicycle) {
        Eigen::MatrixXd U(t_grid.size(), 2);
        for (Eigen::Index i = 0; i < t_grid.size(); ++i)
            U.row(i) = unicycle_controls(t_grid(i)).transpose();
        data.U = U;
    }
    for (Eigen::Index j = 0; j < n; ++j)
        data.state_labels.push_back("x" + std::to_string(j + 1));
    if (data.U)
        for (Eigen::Index j = 0; j < data.U->cols(); ++j)
            data.control_labels.push_back("u" + std::to_string(j + 1));

    data = add_noise(data, noise, noise_on_xdot);
    return data;
}

TrajectoryDataset figure_eight_dataset(double diameter, double lap_time, double duration,
                                       double rate_hz, const NoiseSpec& noise) {
    if (!(diameter > 0.0) || !(lap_time > 0.0) || !(duration > 0.0) || !(rate_hz > 0.0))
        throw InvalidInput("figure_eight_dataset needs positive geometry parameters");

    const double radius = 0.5 * diameter;
    const double speed = 2.0 * M_PI * diameter / lap_time; // both circles per lap
    const double omega = speed / radius;
    const double half = 0.5 * lap_time;

    // Right circle counter-clockwise from the origin, then left circle
    // clockwise back to it; heading stays continuous in [-pi/2, 3pi/2].
    auto state_at_phase = [&](double s) {
        Eigen::Vector4d x;
        double heading_rate;
        if (s < half) {
            const double angle = M_PI + omega * s;
            x(0) = radius + radius * std::cos(angle);
            x(1) = radius * std::sin(angle);
            x(3) = -0.5 * M_PI + omega * s;
            heading_rate = omega;
        } else {
            const double tau = s - half;
            x(0) = -radius + radius * std::cos(omega * tau);
            x(1) = -radius * std::sin(omega * tau);
            x(3) = 1.5 * M_PI - omega * tau;
            heading_rate = -omega;
        }
        x(2) = speed;
        return std::pair<Eigen::Vector4d, double>{x, heading_rate};
    };

    Rng phase_rng(derive_seed(noise.seed, 0xF18u));
    const double start_phase = phase_rng.uniform01() * lap_time;

    const auto samples = static_cast<Eigen::Index>(std::floor(duration * rate_hz + 1e-9)) + 1;
    TrajectoryDataset data;
    data.t.resize(samples);
    data.X.resize(samples, 4);
    Eigen::MatrixXd xdot(samples, 4);
    Eigen::MatrixXd U(samples, 2);
    for (Eigen::Index i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / rate_hz;
        data.t(i) = t;
        const double s = std::fmod(start_phase + t, lap_time);
        const auto [x, heading_rate] = state_at_phase(s);
        data.X.row(i) = x.transpose();
        xdot.row(i) = unicycle_deriv(x, {0.0, heading_rate}).transpose();
        U.row(i) = Eigen::RowVector2d{0.0, heading_rate};
    }
    data.Xdot = xdot;
    data.U = U;
    data.state_labels = {"x1", "x2", "x3", "x4"};
    data.control_labels = {"u1", "u2"};

    data = add_noise(data, noise, /*noise_on_xdot=*/false);
    return data;
}

Eigen::MatrixXd ground_truth_xi(SystemKind system, const LibrarySpec& lib) {
    const int n = system == SystemKind::lotka_volterra ? 2 : 4;
    const int m = system == SystemKind::unicycle ? 2 : 0;
    const std::vector<std::string> names = term_names(lib, n, m);

    auto index_of = [&](const std::string& name) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw IncompatibleLibrary("library is missing the true term '" + name + "'");
        return static_cast<Eigen::Index>(it - names.begin());
    };

    Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(names.size()), n);
    if (system == SystemKind::lotka_volterra) {
        const LotkaVolterraParams p;
        xi(index_of("x1"), 0) = p.a;
        xi(index_of("x1*x2"), 0) = -p.b;
        xi(index_of("x2"), 1) = -p.c;
        xi(index_of("x1*x2"), 1) = p.d;
    } else {
        xi(index_of("x3*cos(x4)"), 0) = 1.0;
        xi(index_of("x3*sin(x4)"), 1) = 1.0;
        xi(index_of("u1"), 2) = 1.0;
        xi(index_of("u2"), 3) = 1.0;
    }
    return xi;
}

} // namespace gpsindy
