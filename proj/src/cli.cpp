#include "gpsindy/cli.hpp"

#include "gpsindy/benchmark.hpp"
#include "gpsindy/errors.hpp"
#include "gpsindy/model.hpp"
#include "gpsindy/pipeline.hpp"
#include "gpsindy/systems.hpp"
#include "gpsindy/trajectory.hpp"
#include "format_util.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace gpsindy {

namespace {

// ---------------------------------------------------------------------------
// Config files: INI-style sections, keys addressed as "section.key". Flags
// win over file values; keys nobody consumed are rejected.
// ---------------------------------------------------------------------------

class ConfigFile {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open config '" + path + "'");
        std::string line;
        std::string section;
        int line_number = 0;
        while (std::getline(in, line)) {
            ++line_number;
            const std::string text(detail::trim(line));
            if (text.empty() || text[0] == '#' || text[0] == ';')
                continue;
            if (text.front() == '[') {
                if (text.back() != ']' || text.size() < 3)
                    fail(path, line_number, "malformed section header");
                section = std::string(detail::trim(text.substr(1, text.size() - 2)));
                if (section.empty())
                    fail(path, line_number, "empty section name");
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                fail(path, line_number, "expected 'key = value'");
            const std::string key(detail::trim(text.substr(0, eq)));
            const std::string value(detail::trim(text.substr(eq + 1)));
            if (key.empty())
                fail(path, line_number, "empty key");
            if (section.empty())
                fail(path, line_number, "key '" + key + "' appears outside any [section]");
            const std::string full = section + "." + key;
            if (!values_.emplace(full, value).second)
                fail(path, line_number, "duplicate key '" + full + "'");
        }
        path_ = path;
    }

    [[nodiscard]] bool has(const std::string& key) const {
        used_.insert(key);
        return values_.count(key) != 0;
    }

    [[nodiscard]] const std::string& get(const std::string& key) const {
        used_.insert(key);
        return values_.at(key);
    }

    void reject_unused() const {
        for (const auto& [key, value] : values_)
            if (!used_.count(key))
                throw ConfigError("unknown config key '" + key + "' in " + path_);
    }

private:
    [[noreturn]] static void fail(const std::string& path, int line, const std::string& what) {
        throw ConfigError(path + ":" + std::to_string(line) + ": " + what);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
    std::string path_;
};

double config_number(const ConfigFile& cfg, const std::string& key) {
    double value = 0.0;
    if (!detail::parse_double(cfg.get(key), value))
        throw ConfigError("config key '" + key + "' is not a number: '" + cfg.get(key) + "'");
    return value;
}

long config_integer(const ConfigFile& cfg, const std::string& key) {
    const std::string& text = cfg.get(key);
    try {
        size_t consumed = 0;
        const long value = std::stol(text, &consumed);
        if (consumed != text.size())
            throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: '" + text + "'");
    }
}

bool config_flag(const ConfigFile& cfg, const std::string& key) {
    const std::string& text = cfg.get(key);
    if (text == "1" || text == "true" || text == "yes" || text == "on")
        return true;
    if (text == "0" || text == "false" || text == "no" || text == "off")
        return false;
    throw ConfigError("config key '" + key + "' is not a boolean: '" + text + "'");
}

// Flag beats file beats fallback.
double resolve_number(const CLI::Option* opt, double flag_value, const ConfigFile& cfg,
                      const std::string& key, double fallback) {
    if (opt->count() > 0)
        return flag_value;
    return cfg.has(key) ? config_number(cfg, key) : fallback;
}

long resolve_integer(const CLI::Option* opt, long flag_value, const ConfigFile& cfg,
                     const std::string& key, long fallback) {
    if (opt->count() > 0)
        return flag_value;
    return cfg.has(key) ? config_integer(cfg, key) : fallback;
}

std::string resolve_text(const CLI::Option* opt, const std::string& flag_value,
                         const ConfigFile& cfg, const std::string& key,
                         const std::string& fallback) {
    if (opt->count() > 0)
        return flag_value;
    return cfg.has(key) ? cfg.get(key) : fallback;
}

bool resolve_flag(const CLI::Option* opt, bool flag_value, const ConfigFile& cfg,
                  const std::string& key, bool fallback) {
    if (opt->count() > 0)
        return flag_value;
    return cfg.has(key) ? config_flag(cfg, key) : fallback;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(text);
    while (std::getline(ss, part, ',')) {
        const std::string trimmed(detail::trim(part));
        if (!trimmed.empty())
            parts.push_back(trimmed);
    }
    return parts;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const std::string& part : split_list(text)) {
        double value = 0.0;
        if (!detail::parse_double(part, value))
            throw ConfigError(what + " list has a bad number: '" + part + "'");
        values.push_back(value);
    }
    if (values.empty())
        throw ConfigError(what + " list is empty");
    return values;
}

std::vector<FitMethod> parse_method_list(const std::string& text) {
    std::vector<FitMethod> methods;
    for (const std::string& part : split_list(text))
        methods.push_back(fit_method_from_string(part));
    if (methods.empty())
        throw ConfigError("method list is empty");
    return methods;
}

std::vector<KernelFamily> parse_family_list(const std::string& text) {
    std::vector<KernelFamily> families;
    for (const std::string& part : split_list(text)) {
        try {
            families.push_back(kernel_family_from_string(part));
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
    }
    if (families.empty())
        throw ConfigError("kernel family list is empty");
    return families;
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct LibraryOptions {
    long poly_order = 3;
    bool sin = false, cos = false, cross = false, control = false;
    CLI::Option* poly_opt = nullptr;
    CLI::Option* sin_opt = nullptr;
    CLI::Option* cos_opt = nullptr;
    CLI::Option* cross_opt = nullptr;
    CLI::Option* control_opt = nullptr;

    void attach(CLI::App* cmd) {
        poly_opt = cmd->add_option("--poly-order", poly_order,
                                   "Max monomial degree, 0-3 [config: library.poly_order]");
        sin_opt = cmd->add_flag("--sin,!--no-sin", sin,
                                "Include sin terms [config: library.sin]");
        cos_opt = cmd->add_flag("--cos,!--no-cos", cos,
                                "Include cos terms [config: library.cos]");
        cross_opt = cmd->add_flag("--cross,!--no-cross", cross,
                                  "Include monomial*trig products [config: library.cross]");
        control_opt = cmd->add_flag("--control,!--no-control", control,
                                    "Include control columns [config: library.control]");
    }

    [[nodiscard]] LibrarySpec resolve(const ConfigFile& cfg, const LibrarySpec& fallback) const {
        LibrarySpec spec;
        spec.poly_order = static_cast<int>(
            resolve_integer(poly_opt, poly_order, cfg, "library.poly_order",
                            fallback.poly_order));
        spec.include_sin = resolve_flag(sin_opt, sin, cfg, "library.sin", fallback.include_sin);
        spec.include_cos = resolve_flag(cos_opt, cos, cfg, "library.cos", fallback.include_cos);
        spec.include_cross_trig_products =
            resolve_flag(cross_opt, cross, cfg, "library.cross",
                         fallback.include_cross_trig_products);
        spec.include_control = resolve_flag(control_opt, control, cfg, "library.control",
                                            fallback.include_control);
        return spec;
    }
};

struct SmootherOptions {
    std::string kernel_input = "smoothed_state";
    std::string families;
    long restarts = 2;
    double jitter_base = 1e-10;
    long nm_max_iter = 200;
    CLI::Option* input_opt = nullptr;
    CLI::Option* families_opt = nullptr;
    CLI::Option* restarts_opt = nullptr;
    CLI::Option* jitter_opt = nullptr;
    CLI::Option* nm_opt = nullptr;

    void attach(CLI::App* cmd) {
        input_opt = cmd->add_option(
            "--kernel-input", kernel_input,
            "Derivative-smoothing kernel input: time|smoothed_state|control "
            "[config: smoother.kernel_input]");
        families_opt = cmd->add_option(
            "--families", families,
            "Comma list of candidate kernel families [config: smoother.families]");
        restarts_opt = cmd->add_option("--restarts", restarts,
                                       "Hyperparameter restarts [config: smoother.restarts]");
        jitter_opt = cmd->add_option("--jitter-base", jitter_base,
                                     "Relative starting jitter [config: smoother.jitter_base]");
        nm_opt = cmd->add_option("--nm-max-iter", nm_max_iter,
                                 "Simplex iteration budget [config: smoother.nm_max_iter]");
    }

    [[nodiscard]] SmootherConfig resolve(const ConfigFile& cfg,
                                         const SmootherConfig& fallback) const {
        SmootherConfig config = fallback;
        const std::string input =
            resolve_text(input_opt, kernel_input, cfg, "smoother.kernel_input",
                         to_string(fallback.derivative_kernel_input));
        try {
            config.derivative_kernel_input = derivative_kernel_input_from_string(input);
        } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
        }
        const std::string family_text =
            resolve_text(families_opt, families, cfg, "smoother.families", "");
        if (!family_text.empty())
            config.candidate_families = parse_family_list(family_text);
        config.restarts = static_cast<int>(
            resolve_integer(restarts_opt, restarts, cfg, "smoother.restarts",
                            fallback.restarts));
        config.jitter_base = resolve_number(jitter_opt, jitter_base, cfg,
                                            "smoother.jitter_base", fallback.jitter_base);
        config.nm.max_iter = static_cast<int>(resolve_integer(
            nm_opt, nm_max_iter, cfg, "smoother.nm_max_iter", fallback.nm.max_iter));
        return config;
    }
};

struct AdmmOptions {
    double rho = 1.0, abs_tol = 1e-6, rel_tol = 1e-4;
    long max_iter = 10000;
    CLI::Option* rho_opt = nullptr;
    CLI::Option* abs_opt = nullptr;
    CLI::Option* rel_opt = nullptr;
    CLI::Option* iter_opt = nullptr;

    void attach(CLI::App* cmd) {
        rho_opt = cmd->add_option("--rho", rho, "ADMM penalty parameter [config: admm.rho]");
        abs_opt = cmd->add_option("--abs-tol", abs_tol,
                                  "ADMM absolute tolerance [config: admm.abs_tol]");
        rel_opt = cmd->add_option("--rel-tol", rel_tol,
                                  "ADMM relative tolerance [config: admm.rel_tol]");
        iter_opt = cmd->add_option("--max-iter", max_iter,
                                   "ADMM iteration cap [config: admm.max_iter]");
    }

    [[nodiscard]] AdmmConfig resolve(const ConfigFile& cfg,
                                     const AdmmConfig& fallback = {}) const {
        AdmmConfig config = fallback;
        config.rho = resolve_number(rho_opt, rho, cfg, "admm.rho", config.rho);
        config.abs_tol = resolve_number(abs_opt, abs_tol, cfg, "admm.abs_tol", config.abs_tol);
        config.rel_tol = resolve_number(rel_opt, rel_tol, cfg, "admm.rel_tol", config.rel_tol);
        config.max_iter = static_cast<int>(
            resolve_integer(iter_opt, max_iter, cfg, "admm.max_iter", config.max_iter));
        return config;
    }
};

// fixed lambda vs schedule; fallback differs between commands.
std::optional<double> resolve_lambda(const CLI::Option* lambda_opt, double lambda,
                                     const CLI::Option* schedule_opt, bool schedule,
                                     const ConfigFile& cfg,
                                     const std::optional<double>& fallback) {
    if (resolve_flag(schedule_opt, schedule, cfg, "fit.lambda_schedule", false))
        return std::nullopt;
    if (lambda_opt->count() > 0)
        return lambda;
    if (cfg.has("fit.lambda"))
        return config_number(cfg, "fit.lambda");
    return fallback;
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

void print_dataset_summary(const TrajectoryDataset& data, const std::string& path) {
    std::cout << "wrote " << path << ": " << data.rows() << " rows, " << data.state_dim()
              << " states, " << data.control_dim() << " controls\n";
}

struct SimulateCmd {
    CLI::App* cmd = nullptr;
    std::string config_path, system = "lotka_volterra", output = "dataset.csv";
    double duration = -1.0, dt = 0.1, rate = 50.0, sigma = 0.0;
    double diameter = 3.0, lap_time = 5.5;
    long seed = 0;
    bool noise_on_xdot = true;
    CLI::Option *system_opt{}, *output_opt{}, *duration_opt{}, *dt_opt{}, *rate_opt{},
        *sigma_opt{}, *diameter_opt{}, *lap_opt{}, *seed_opt{}, *noise_xdot_opt{};

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("simulate", "Generate a synthetic trajectory CSV");
        cmd->add_option("--config", config_path, "Config file (INI sections)");
        system_opt = cmd->add_option(
            "--system", system,
            "lotka_volterra|unicycle|figure_eight [config: simulate.system]");
        duration_opt = cmd->add_option(
            "--duration", duration,
            "Seconds to simulate (default 30, figure-8 22.85) [config: simulate.duration]");
        dt_opt = cmd->add_option("--dt", dt, "Sampling interval [config: simulate.dt]");
        rate_opt = cmd->add_option("--rate", rate,
                                   "Figure-8 sample rate in Hz [config: simulate.rate_hz]");
        sigma_opt = cmd->add_option("--sigma", sigma,
                                    "Measurement noise sd [config: simulate.sigma]");
        seed_opt = cmd->add_option("--seed", seed, "Noise seed [config: simulate.seed]");
        noise_xdot_opt = cmd->add_flag(
            "--noise-on-xdot,!--no-noise-on-xdot", noise_on_xdot,
            "Also corrupt the stored derivatives [config: simulate.noise_on_xdot]");
        diameter_opt = cmd->add_option("--diameter", diameter,
                                       "Figure-8 circle diameter [config: simulate.diameter]");
        lap_opt = cmd->add_option("--lap-time", lap_time,
                                  "Figure-8 lap time [config: simulate.lap_time]");
        output_opt = cmd->add_option("--output", output,
                                     "Output CSV path [config: simulate.output]");
    }

    void run(const ConfigFile& cfg) const {
        const std::string sys = resolve_text(system_opt, system, cfg, "simulate.system",
                                             "lotka_volterra");
        const double sig = resolve_number(sigma_opt, sigma, cfg, "simulate.sigma", 0.0);
        const auto noise_seed = static_cast<std::uint64_t>(
            resolve_integer(seed_opt, seed, cfg, "simulate.seed", 0));
        const std::string out = resolve_text(output_opt, output, cfg, "simulate.output",
                                             "dataset.csv");
        const double dur = resolve_number(duration_opt, duration, cfg, "simulate.duration",
                                          -1.0);
        const double step = resolve_number(dt_opt, dt, cfg, "simulate.dt", 0.1);
        const double hz = resolve_number(rate_opt, rate, cfg, "simulate.rate_hz", 50.0);
        const double dia = resolve_number(diameter_opt, diameter, cfg, "simulate.diameter",
                                          3.0);
        const double lap = resolve_number(lap_opt, lap_time, cfg, "simulate.lap_time", 5.5);
        const bool xdot_noise = resolve_flag(noise_xdot_opt, noise_on_xdot, cfg,
                                             "simulate.noise_on_xdot", true);
        cfg.reject_unused();

        TrajectoryDataset data;
        if (sys == "figure_eight") {
            data = figure_eight_dataset(dia, lap, dur > 0 ? dur : 22.85, hz,
                                        {sig, noise_seed});
        } else {
            const SystemKind kind = system_from_string(sys);
            const Eigen::VectorXd grid = uniform_grid(dur > 0 ? dur : 30.0, step);
            data = generate_dataset(kind, grid, default_initial_state(kind),
                                    {sig, noise_seed}, xdot_noise);
        }
        save_csv(data, out);
        print_dataset_summary(data, out);
    }
};

struct FitCmd {
    CLI::App* cmd = nullptr;
    std::string config_path, data_path, method = "gpsindy", output = "model.txt";
    double lambda = 0.1, train_fraction = 0.8;
    long gp_upsample = 1;
    bool fd = false, standardize = false, lambda_schedule = false;
    LibraryOptions library;
    SmootherOptions smoother;
    AdmmOptions admm;
    CLI::Option *data_opt{}, *method_opt{}, *output_opt{}, *fd_opt{}, *std_opt{},
        *lambda_opt{}, *schedule_opt{}, *fraction_opt{}, *upsample_opt{};

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("fit", "Fit a sparse dynamics model to a trajectory CSV");
        cmd->add_option("--config", config_path, "Config file (INI sections)");
        data_opt = cmd->add_option("--data", data_path,
                                   "Input trajectory CSV [config: fit.data]");
        method_opt = cmd->add_option(
            "--method", method, "sindy|gpsindy|ssr_coeff|ssr_res [config: fit.method]");
        output_opt = cmd->add_option("--output", output,
                                     "Model file path [config: fit.output]");
        fd_opt = cmd->add_flag("--fd", fd,
                               "Finite-difference the states when the CSV has no dx columns "
                               "[config: fit.fd]");
        fraction_opt = cmd->add_option(
            "--train-fraction", train_fraction,
            "Leading fraction used for training [config: fit.train_fraction]");
        std_opt = cmd->add_flag("--standardize,!--no-standardize", standardize,
                                "Smooth in standardized units [config: fit.standardize]");
        lambda_opt = cmd->add_option("--lambda", lambda,
                                     "Fixed L1 penalty [config: fit.lambda]");
        schedule_opt = cmd->add_flag(
            "--lambda-schedule", lambda_schedule,
            "Select lambda per column by validation rollout over the canonical schedule "
            "[config: fit.lambda_schedule]");
        upsample_opt = cmd->add_option(
            "--gp-upsample", gp_upsample,
            "Smoothed regression rows per sample interval; 2 adds interval midpoints "
            "[config: fit.gp_upsample]");
        library.attach(cmd);
        smoother.attach(cmd);
        admm.attach(cmd);
    }

    void run(const ConfigFile& cfg) const {
        const std::string data_file = resolve_text(data_opt, data_path, cfg, "fit.data", "");
        if (data_file.empty())
            throw ConfigError("fit needs --data (or config fit.data)");
        const FitMethod fit_method =
            fit_method_from_string(resolve_text(method_opt, method, cfg, "fit.method",
                                                "gpsindy"));
        const std::string out = resolve_text(output_opt, output, cfg, "fit.output",
                                             "model.txt");
        const bool do_fd = resolve_flag(fd_opt, fd, cfg, "fit.fd", false);
        const double fraction = resolve_number(fraction_opt, train_fraction, cfg,
                                               "fit.train_fraction", 0.8);
        FitOptions options;
        options.standardize = resolve_flag(std_opt, standardize, cfg, "fit.standardize",
                                           false);
        options.library = library.resolve(cfg, LibrarySpec{});
        options.smoother = smoother.resolve(cfg, SmootherConfig{});
        options.admm = admm.resolve(cfg);
        options.fixed_lambda = resolve_lambda(lambda_opt, lambda, schedule_opt,
                                              lambda_schedule, cfg, 0.1);
        options.gp_upsample = static_cast<int>(
            resolve_integer(upsample_opt, gp_upsample, cfg, "fit.gp_upsample", 1));
        cfg.reject_unused();

        TrajectoryDataset data = load_csv(data_file);
        if (!data.Xdot) {
            if (!do_fd)
                throw ConfigError("'" + data_file +
                                  "' has no derivative columns; pass --fd to compute them by "
                                  "finite differences");
            data.Xdot = central_difference(data.X, data.t);
        }
        const auto [train, val] = train_test_split(data, fraction);
        const LearnedModel model = fit_model(fit_method, train, val, options);
        save_model(model, out);

        std::cout << "method " << to_string(model.method) << "\n";
        for (int j = 0; j < model.state_dim; ++j) {
            const int nnz =
                static_cast<int>((model.xi.col(j).cwiseAbs().array() > kPruneEps).count());
            std::cout << "  dx" << (j + 1) << ": lambda=" << model.lambda_per_column(j)
                      << " nnz=" << nnz << "\n";
        }
        for (const SmootherColumnSummary& s : model.smoother)
            std::cout << "  kernel " << s.target << ": " << to_string(s.family)
                      << " nll=" << s.nll << "\n";
        std::cout << "wrote " << out << "\n";
    }
};

struct RolloutCmd {
    CLI::App* cmd = nullptr;
    std::string config_path, model_path, data_path, output;
    double start_fraction = 0.8;
    long horizon = 0;
    CLI::Option *model_opt{}, *data_opt{}, *output_opt{}, *fraction_opt{}, *horizon_opt{};

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("rollout",
                                 "Integrate a learned model over a held-out window");
        cmd->add_option("--config", config_path, "Config file (INI sections)");
        model_opt = cmd->add_option("--model", model_path,
                                    "Model file [config: rollout.model]");
        data_opt = cmd->add_option("--data", data_path,
                                   "Trajectory CSV [config: rollout.data]");
        output_opt = cmd->add_option("--output", output,
                                     "Predicted-trajectory CSV [config: rollout.output]");
        fraction_opt = cmd->add_option(
            "--start-fraction", start_fraction,
            "Fraction of rows skipped before the rollout starts (0 = whole file) "
            "[config: rollout.start_fraction]");
        horizon_opt = cmd->add_option("--horizon", horizon,
                                      "Max prediction steps, 0 = to the end "
                                      "[config: rollout.horizon]");
    }

    void run(const ConfigFile& cfg) const {
        const std::string model_file = resolve_text(model_opt, model_path, cfg,
                                                    "rollout.model", "");
        const std::string data_file = resolve_text(data_opt, data_path, cfg, "rollout.data",
                                                   "");
        if (model_file.empty() || data_file.empty())
            throw ConfigError("rollout needs --model and --data");
        const std::string out = resolve_text(output_opt, output, cfg, "rollout.output", "");
        const double fraction = resolve_number(fraction_opt, start_fraction, cfg,
                                               "rollout.start_fraction", 0.8);
        const long max_steps = resolve_integer(horizon_opt, horizon, cfg, "rollout.horizon",
                                               0);
        cfg.reject_unused();
        if (fraction < 0.0 || fraction >= 1.0)
            throw ConfigError("start fraction must be in [0, 1)");

        const LearnedModel model = load_model(model_file);
        const TrajectoryDataset data = load_csv(data_file);
        data.validate();
        const Eigen::Index rows = data.rows();
        auto start = static_cast<Eigen::Index>(
            std::floor(static_cast<double>(rows) * fraction));
        start = std::min(start, rows - 2);

        Eigen::Index count = rows - start;
        if (max_steps > 0 && max_steps + 1 < count) {
            count = max_steps + 1;
        } else if (max_steps > 0 && max_steps + 1 > count) {
            std::cerr << "warning: horizon exceeds the data window; clipped to "
                      << (count - 1) << " steps\n";
        }

        const Eigen::VectorXd t = data.t.segment(start, count);
        const Eigen::MatrixXd truth = data.X.middleRows(start, count);
        std::optional<Eigen::MatrixXd> U;
        if (data.U)
            U = Eigen::MatrixXd(data.U->middleRows(start, count));

        const Eigen::MatrixXd pred =
            rollout(model_to_dynamics(model), truth.row(0).transpose(), t, U);

        for (Eigen::Index j = 0; j < pred.cols(); ++j) {
            const double rmse = std::sqrt((pred.col(j) - truth.col(j)).squaredNorm() /
                                          static_cast<double>(count));
            std::cout << "rmse x" << (j + 1) << " " << rmse << "\n";
        }
        std::cout << "rmse overall " << trajectory_rmse(pred, truth) << "\n";

        if (!out.empty()) {
            TrajectoryDataset predicted;
            predicted.t = t;
            predicted.X = pred;
            for (Eigen::Index j = 0; j < pred.cols(); ++j)
                predicted.state_labels.push_back("x" + std::to_string(j + 1));
            save_csv(predicted, out);
            std::cout << "wrote " << out << "\n";
        }
    }
};

struct BenchmarkCmd {
    CLI::App* cmd = nullptr;
    std::string config_path, sweep = "noise", system = "lotka_volterra";
    std::string sigmas, methods, frequencies, output;
    long seeds = 40, rollouts = 45, root_seed = 0, gp_upsample = 1;
    double duration = -1.0, dt = 0.1, rate = 50.0, diameter = 3.0, lap_time = 5.5;
    double train_fraction = 0.8, lambda = 0.1;
    bool noise_on_xdot = true, measure_time = false, lambda_schedule = false;
    LibraryOptions library;
    SmootherOptions smoother;
    AdmmOptions admm;
    CLI::Option *sweep_opt{}, *system_opt{}, *sigmas_opt{}, *methods_opt{}, *freqs_opt{},
        *output_opt{}, *seeds_opt{}, *rollouts_opt{}, *root_opt{}, *duration_opt{}, *dt_opt{},
        *rate_opt{}, *diameter_opt{}, *lap_opt{}, *fraction_opt{}, *noise_xdot_opt{},
        *time_opt{}, *lambda_opt{}, *schedule_opt{}, *std_opt{}, *upsample_opt{};
    bool standardize = false;

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("benchmark", "Run a noise or frequency sweep");
        cmd->add_option("--config", config_path, "Config file (INI sections)");
        sweep_opt = cmd->add_option("--sweep", sweep,
                                    "noise|frequency [config: benchmark.sweep]");
        system_opt = cmd->add_option(
            "--system", system,
            "Noise-sweep system: lotka_volterra|unicycle [config: benchmark.system]");
        sigmas_opt = cmd->add_option("--sigmas", sigmas,
                                     "Comma list of noise sds [config: benchmark.sigmas]");
        methods_opt = cmd->add_option("--methods", methods,
                                      "Comma list of fit methods [config: benchmark.methods]");
        freqs_opt = cmd->add_option(
            "--frequencies", frequencies,
            "Comma list of Hz for the frequency sweep [config: benchmark.frequencies]");
        seeds_opt = cmd->add_option("--seeds", seeds,
                                    "Noise-sweep trials per sigma [config: benchmark.seeds]");
        rollouts_opt = cmd->add_option(
            "--rollouts", rollouts, "Frequency-sweep trials [config: benchmark.rollouts]");
        root_opt = cmd->add_option("--root-seed", root_seed,
                                   "Root of the seed fan-out [config: benchmark.root_seed]");
        duration_opt = cmd->add_option(
            "--duration", duration,
            "Capture length (default 30, figure-8 one 5.5 s lap) [config: benchmark.duration]");
        dt_opt = cmd->add_option("--dt", dt,
                                 "Noise-sweep sampling interval [config: benchmark.dt]");
        rate_opt = cmd->add_option("--rate", rate,
                                   "Figure-8 base rate in Hz [config: benchmark.rate_hz]");
        diameter_opt = cmd->add_option("--diameter", diameter,
                                       "Figure-8 diameter [config: benchmark.diameter]");
        lap_opt = cmd->add_option("--lap-time", lap_time,
                                  "Figure-8 lap time [config: benchmark.lap_time]");
        fraction_opt = cmd->add_option(
            "--train-fraction", train_fraction,
            "Leading training fraction [config: benchmark.train_fraction]");
        noise_xdot_opt = cmd->add_flag(
            "--noise-on-xdot,!--no-noise-on-xdot", noise_on_xdot,
            "Noise sweep corrupts derivatives too [config: benchmark.noise_on_xdot]");
        time_opt = cmd->add_flag(
            "--measure-time", measure_time,
            "Record wall time per fit (breaks byte-identical reruns) "
            "[config: benchmark.measure_time]");
        lambda_opt = cmd->add_option("--lambda", lambda,
                                     "Fixed L1 penalty [config: fit.lambda]");
        schedule_opt = cmd->add_flag("--lambda-schedule", lambda_schedule,
                                     "Per-column lambda by validation rollout "
                                     "[config: fit.lambda_schedule]");
        std_opt = cmd->add_flag("--standardize,!--no-standardize", standardize,
                                "Smooth in standardized units [config: fit.standardize]");
        upsample_opt = cmd->add_option(
            "--gp-upsample", gp_upsample,
            "Smoothed regression rows per sample interval (frequency-sweep default 2) "
            "[config: fit.gp_upsample]");
        output_opt = cmd->add_option("--output", output,
                                     "Report CSV path [config: benchmark.output]");
        library.attach(cmd);
        smoother.attach(cmd);
        admm.attach(cmd);
    }

    void run(const ConfigFile& cfg) const {
        const std::string sweep_kind = resolve_text(sweep_opt, sweep, cfg, "benchmark.sweep",
                                                    "noise");
        if (sweep_kind != "noise" && sweep_kind != "frequency")
            throw ConfigError("benchmark sweep must be 'noise' or 'frequency'");
        const bool is_noise = sweep_kind == "noise";
        const std::string system_name =
            resolve_text(system_opt, system, cfg, "benchmark.system", "lotka_volterra");

        // Per-sweep defaults mirror the benchmark protocols: the noise sweep
        // uses the fixed lambda, the frequency sweep selects per column.
        const FitOptions freq_defaults = default_frequency_fit();
        LibrarySpec library_fallback;
        library_fallback.include_sin = true;
        library_fallback.include_cos = true;
        library_fallback.include_cross_trig_products = true;
        if (!is_noise)
            library_fallback = freq_defaults.library;
        else if (system_name == "unicycle") {
            library_fallback.poly_order = 1;
            library_fallback.include_control = true;
        }
        SmootherConfig smoother_fallback;
        if (is_noise) {
            smoother_fallback.candidate_families = {KernelFamily::squared_exponential,
                                                    KernelFamily::matern32};
            smoother_fallback.restarts = 1;
            smoother_fallback.nm.max_iter = 120;
        } else {
            smoother_fallback = freq_defaults.smoother;
        }

        // rho far from 1 suits the unnormalized libraries these sweeps solve;
        // the lasso optimum itself does not depend on rho.
        AdmmConfig admm_fallback;
        admm_fallback.rho = 100.0;

        FitOptions fit;
        fit.library = library.resolve(cfg, library_fallback);
        fit.smoother = smoother.resolve(cfg, smoother_fallback);
        fit.admm = admm.resolve(cfg, admm_fallback);
        fit.standardize = resolve_flag(std_opt, standardize, cfg, "fit.standardize",
                                       is_noise && system_name == "lotka_volterra");
        fit.fixed_lambda =
            resolve_lambda(lambda_opt, lambda, schedule_opt, lambda_schedule, cfg,
                           is_noise ? std::optional<double>(0.1) : std::nullopt);
        fit.gp_upsample = static_cast<int>(resolve_integer(
            upsample_opt, gp_upsample, cfg, "fit.gp_upsample", is_noise ? 1 : 2));

        const std::string method_text = resolve_text(
            methods_opt, methods, cfg, "benchmark.methods",
            is_noise ? "sindy,gpsindy" : "sindy,gpsindy,ssr_coeff,ssr_res");
        const std::string sigma_text =
            resolve_text(sigmas_opt, sigmas, cfg, "benchmark.sigmas",
                         is_noise ? "0.05,0.1,0.15,0.2,0.25" : "0,0.05,0.1");
        const std::string freq_text = resolve_text(freqs_opt, frequencies, cfg,
                                                   "benchmark.frequencies", "50,25,10,5");
        const double dur = resolve_number(duration_opt, duration, cfg, "benchmark.duration",
                                          -1.0);
        const double fraction = resolve_number(fraction_opt, train_fraction, cfg,
                                               "benchmark.train_fraction", 0.8);
        const auto root = static_cast<std::uint64_t>(
            resolve_integer(root_opt, root_seed, cfg, "benchmark.root_seed", 0));
        const bool timing = resolve_flag(time_opt, measure_time, cfg,
                                         "benchmark.measure_time", false);
        const long seed_count = resolve_integer(seeds_opt, seeds, cfg, "benchmark.seeds", 40);
        const long rollout_count = resolve_integer(rollouts_opt, rollouts, cfg,
                                                   "benchmark.rollouts", 45);
        const double step = resolve_number(dt_opt, dt, cfg, "benchmark.dt", 0.1);
        const double hz = resolve_number(rate_opt, rate, cfg, "benchmark.rate_hz", 50.0);
        const double dia = resolve_number(diameter_opt, diameter, cfg, "benchmark.diameter",
                                          3.0);
        const double lap = resolve_number(lap_opt, lap_time, cfg, "benchmark.lap_time", 5.5);
        const bool xdot_noise = resolve_flag(noise_xdot_opt, noise_on_xdot, cfg,
                                             "benchmark.noise_on_xdot", true);
        std::string out = resolve_text(output_opt, output, cfg, "benchmark.output", "");
        cfg.reject_unused();

        // Canonical description of the resolved run; hashed into the default
        // file name so identical configs land on identical files.
        std::ostringstream digest;
        digest << sweep_kind << '|' << system_name << '|' << method_text << '|' << sigma_text
               << '|' << freq_text << '|' << seed_count << '|' << rollout_count << '|' << root
               << '|' << dur << '|' << step << '|' << hz << '|' << dia << '|' << lap << '|'
               << fraction << '|' << xdot_noise << '|' << fit.standardize << '|'
               << (fit.fixed_lambda ? *fit.fixed_lambda : -1.0) << '|' << fit.admm.rho << '|'
               << fit.gp_upsample << '|'
               << fit.library.poly_order << fit.library.include_sin << fit.library.include_cos
               << fit.library.include_cross_trig_products << fit.library.include_control;

        BenchmarkReport report;
        if (is_noise) {
            NoiseSweepConfig config;
            config.system = system_from_string(system_name);
            config.methods = parse_method_list(method_text);
            config.sigma_grid = parse_number_list(sigma_text, "sigma");
            config.seeds = static_cast<int>(seed_count);
            config.root_seed = root;
            config.duration = dur > 0 ? dur : 30.0;
            config.dt = step;
            config.train_fraction = fraction;
            config.noise_on_xdot = xdot_noise;
            config.fit = fit;
            config.measure_time = timing;
            if (out.empty())
                out = default_report_name(system_name, "noise", digest.str());
            report = run_noise_sweep(config);
        } else {
            FrequencySweepConfig config;
            config.methods = parse_method_list(method_text);
            config.sigma_grid = parse_number_list(sigma_text, "sigma");
            config.frequencies = parse_number_list(freq_text, "frequency");
            config.rollouts = static_cast<int>(rollout_count);
            config.root_seed = root;
            config.diameter = dia;
            config.lap_time = lap;
            config.duration = dur > 0 ? dur : 5.5;
            config.base_rate_hz = hz;
            config.train_fraction = fraction;
            config.fit = fit;
            config.measure_time = timing;
            if (out.empty())
                out = default_report_name("figure_eight", "frequency", digest.str());
            report = run_frequency_sweep(config);
        }
        emit_report(report, out);
        std::cout << "wrote " << out << ": " << report.rows.size() << " rows\n";
    }
};

struct SummarizeCmd {
    CLI::App* cmd = nullptr;
    std::string config_path, report_path;
    CLI::Option* report_opt{};

    void attach(CLI::App& app) {
        cmd = app.add_subcommand("summarize", "Quantile table from a report CSV");
        cmd->add_option("--config", config_path, "Config file (INI sections)");
        report_opt = cmd->add_option("--report", report_path,
                                     "Report CSV [config: summarize.report]");
    }

    void run(const ConfigFile& cfg) const {
        const std::string path = resolve_text(report_opt, report_path, cfg,
                                              "summarize.report", "");
        if (path.empty())
            throw ConfigError("summarize needs --report");
        cfg.reject_unused();

        const BenchmarkReport report = load_report(path);
        std::cout << "method sigma frequency_hz median q25 q75 divergent count\n";
        for (const ConditionSummary& s : summarize_report(report)) {
            std::cout << s.method << ' ' << s.sigma << ' ' << s.frequency_hz << ' '
                      << s.rmse.median << ' ' << s.rmse.q25 << ' ' << s.rmse.q75 << ' '
                      << s.divergent << ' ' << s.count << "\n";
        }
    }
};

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Sparse dynamics identification with GP-denoised measurements"};
    app.require_subcommand(1);

    SimulateCmd simulate;
    FitCmd fit;
    RolloutCmd rollout_cmd;
    BenchmarkCmd benchmark;
    SummarizeCmd summarize;
    simulate.attach(app);
    fit.attach(app);
    rollout_cmd.attach(app);
    benchmark.attach(app);
    summarize.attach(app);

    try {
        // CLI11 wants argv order reversed for the vector overload.
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        ConfigFile cfg;
        const std::string* config_path = nullptr;
        if (simulate.cmd->parsed())
            config_path = &simulate.config_path;
        else if (fit.cmd->parsed())
            config_path = &fit.config_path;
        else if (rollout_cmd.cmd->parsed())
            config_path = &rollout_cmd.config_path;
        else if (benchmark.cmd->parsed())
            config_path = &benchmark.config_path;
        else if (summarize.cmd->parsed())
            config_path = &summarize.config_path;
        if (config_path && !config_path->empty())
            cfg.load(*config_path);

        if (simulate.cmd->parsed())
            simulate.run(cfg);
        else if (fit.cmd->parsed())
            fit.run(cfg);
        else if (rollout_cmd.cmd->parsed())
            rollout_cmd.run(cfg);
        else if (benchmark.cmd->parsed())
            benchmark.run(cfg);
        else if (summarize.cmd->parsed())
            summarize.run(cfg);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help and friends print through CLI11's own path
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.category()) {
        case ErrorCategory::config: return 2;
        case ErrorCategory::numeric: return 3;
        case ErrorCategory::io: return 4;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace gpsindy
