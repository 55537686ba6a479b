#include "gpsindy/trajectory.hpp"

#include "gpsindy/errors.hpp"
#include "gpsindy/random.hpp"

#include "format_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gpsindy {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* name) {
    if (!M.allFinite())
        throw InvalidInput(std::string(name) + " contains non-finite entries");
}

void require_increasing(const Eigen::VectorXd& t) {
    for (Eigen::Index i = 1; i < t.size(); ++i)
        if (!(t(i) > t(i - 1)))
            throw InvalidTimestamps("timestamps must be strictly increasing (row " +
                                    std::to_string(i) + ")");
}

std::vector<std::string_view> split_csv_line(const std::string& line) {
    std::vector<std::string_view> out;
    std::string_view rest(line);
    while (true) {
        auto pos = rest.find(',');
        if (pos == std::string_view::npos) {
            out.push_back(rest);
            break;
        }
        out.push_back(rest.substr(0, pos));
        rest.remove_prefix(pos + 1);
    }
    return out;
}

} // namespace

void TrajectoryDataset::validate() const {
    const Eigen::Index r = t.size();
    if (X.rows() != r) throw DimensionError("X has " + std::to_string(X.rows()) +
                                            " rows but t has " + std::to_string(r));
    if (Xdot && (Xdot->rows() != r || Xdot->cols() != X.cols()))
        throw DimensionError("Xdot shape does not match X");
    if (U && U->rows() != r) throw DimensionError("U row count does not match t");
    require_increasing(t);
    if (!t.allFinite()) throw InvalidInput("t contains non-finite entries");
    require_finite(X, "X");
    if (Xdot) require_finite(*Xdot, "Xdot");
    if (U) require_finite(*U, "U");
}

Eigen::MatrixXd central_difference(const Eigen::MatrixXd& X, const Eigen::VectorXd& t) {
    const Eigen::Index r = X.rows();
    if (r != t.size()) throw DimensionError("X rows and t length differ");
    if (r < 3) throw InsufficientData("central difference needs at least 3 rows, got " +
                                      std::to_string(r));
    require_increasing(t);

    Eigen::MatrixXd D(r, X.cols());
    // Three-point Lagrange derivative; exact for quadratics even on
    // nonuniform grids.
    for (Eigen::Index i = 1; i + 1 < r; ++i) {
        const double h1 = t(i) - t(i - 1);
        const double h2 = t(i + 1) - t(i);
        D.row(i) = -h2 / (h1 * (h1 + h2)) * X.row(i - 1) +
                   (h2 - h1) / (h1 * h2) * X.row(i) +
                   h1 / (h2 * (h1 + h2)) * X.row(i + 1);
    }
    {
        const double h1 = t(1) - t(0);
        const double h2 = t(2) - t(1);
        D.row(0) = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * X.row(0) +
                   (h1 + h2) / (h1 * h2) * X.row(1) -
                   h1 / (h2 * (h1 + h2)) * X.row(2);
    }
    {
        const double h1 = t(r - 2) - t(r - 3);
        const double h2 = t(r - 1) - t(r - 2);
        D.row(r - 1) = h2 / (h1 * (h1 + h2)) * X.row(r - 3) -
                       (h1 + h2) / (h1 * h2) * X.row(r - 2) +
                       (h1 + 2.0 * h2) / (h2 * (h1 + h2)) * X.row(r - 1);
    }
    return D;
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& M, const NoiseSpec& spec) {
    if (spec.sigma < 0.0) throw InvalidInput("noise sigma must be nonnegative");
    if (spec.sigma == 0.0) return M;
    Rng rng(spec.seed);
    Eigen::MatrixXd out = M;
    // fixed row-major draw order so (sigma, seed, shape) pins the result
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) += spec.sigma * rng.normal();
    return out;
}

TrajectoryDataset add_noise(const TrajectoryDataset& data, const NoiseSpec& spec,
                            bool noise_on_xdot) {
    TrajectoryDataset out = data;
    out.X = add_noise(data.X, {spec.sigma, derive_seed(spec.seed, 0)});
    if (noise_on_xdot && data.Xdot)
        out.Xdot = add_noise(*data.Xdot, {spec.sigma, derive_seed(spec.seed, 1)});
    return out;
}

namespace {

TrajectoryDataset take_rows(const TrajectoryDataset& data, const std::vector<Eigen::Index>& idx) {
    TrajectoryDataset out;
    out.state_labels = data.state_labels;
    out.control_labels = data.control_labels;
    const auto k = static_cast<Eigen::Index>(idx.size());
    out.t.resize(k);
    out.X.resize(k, data.X.cols());
    if (data.Xdot) out.Xdot = Eigen::MatrixXd(k, data.Xdot->cols());
    if (data.U) out.U = Eigen::MatrixXd(k, data.U->cols());
    for (Eigen::Index i = 0; i < k; ++i) {
        out.t(i) = data.t(idx[i]);
        out.X.row(i) = data.X.row(idx[i]);
        if (data.Xdot) out.Xdot->row(i) = data.Xdot->row(idx[i]);
        if (data.U) out.U->row(i) = data.U->row(idx[i]);
    }
    return out;
}

} // namespace

std::pair<TrajectoryDataset, TrajectoryDataset> train_test_split(const TrajectoryDataset& data,
                                                                 double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidFraction("train_fraction must lie strictly in (0, 1), got " +
                              detail::fmt17(train_fraction));
    const auto r = data.rows();
    const auto split = static_cast<Eigen::Index>(std::floor(static_cast<double>(r) * train_fraction));
    if (split < 2 || split >= r)
        throw InvalidFraction("split index " + std::to_string(split) +
                              " leaves too few rows on one side (r = " + std::to_string(r) + ")");
    std::vector<Eigen::Index> head(split), tail(r - split);
    for (Eigen::Index i = 0; i < split; ++i) head[i] = i;
    for (Eigen::Index i = split; i < r; ++i) tail[i - split] = i;
    return {take_rows(data, head), take_rows(data, tail)};
}

TrajectoryDataset downsample(const TrajectoryDataset& data, std::size_t keep_every) {
    if (keep_every == 0) throw InvalidFactor("keep_every must be at least 1");
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < data.rows(); i += static_cast<Eigen::Index>(keep_every))
        idx.push_back(i);
    return take_rows(data, idx);
}

std::pair<Eigen::MatrixXd, StandardizationParams> standardize(const Eigen::MatrixXd& X) {
    const auto r = static_cast<double>(X.rows());
    StandardizationParams params;
    params.mean = X.colwise().mean();
    params.std.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - params.mean(j)).square().sum() / r;
        params.std(j) = std::sqrt(var);
        if (!(params.std(j) > 1e-14 * (1.0 + std::abs(params.mean(j)))))
            throw DegenerateColumn("column " + std::to_string(j) + " has zero variance");
    }
    return {standardize_with(X, params), params};
}

Eigen::MatrixXd standardize_with(const Eigen::MatrixXd& X, const StandardizationParams& params) {
    if (X.cols() != params.mean.size()) throw DimensionError("standardization params mismatch");
    return (X.rowwise() - params.mean.transpose()).array().rowwise() /
           params.std.transpose().array();
}

Eigen::MatrixXd destandardize(const Eigen::MatrixXd& X_std, const StandardizationParams& params) {
    if (X_std.cols() != params.mean.size()) throw DimensionError("standardization params mismatch");
    return (X_std.array().rowwise() * params.std.transpose().array()).matrix().rowwise() +
           params.mean.transpose();
}

void save_csv(const TrajectoryDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    const auto n = data.state_dim();
    const auto m = data.control_dim();
    out << "t";
    for (Eigen::Index j = 0; j < n; ++j) out << ",x" << (j + 1);
    if (data.Xdot)
        for (Eigen::Index j = 0; j < n; ++j) out << ",dx" << (j + 1);
    for (Eigen::Index j = 0; j < m; ++j) out << ",u" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        out << detail::fmt17(data.t(i));
        for (Eigen::Index j = 0; j < n; ++j) out << "," << detail::fmt17(data.X(i, j));
        if (data.Xdot)
            for (Eigen::Index j = 0; j < n; ++j) out << "," << detail::fmt17((*data.Xdot)(i, j));
        for (Eigen::Index j = 0; j < m; ++j) out << "," << detail::fmt17((*data.U)(i, j));
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

TrajectoryDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");

    // column roles from header prefixes
    int t_col = -1;
    std::vector<std::pair<int, int>> x_cols, dx_cols, u_cols; // (index-in-file, 1-based id)
    const auto header = split_csv_line(line);
    auto parse_id = [](std::string_view s, std::string_view prefix, int& id) {
        if (s.size() <= prefix.size() || s.substr(0, prefix.size()) != prefix) return false;
        int v = 0;
        for (char c : s.substr(prefix.size())) {
            if (c < '0' || c > '9') return false;
            v = v * 10 + (c - '0');
        }
        id = v;
        return v >= 1;
    };
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto name = detail::trim(header[c]);
        int id = 0;
        if (name == "t") {
            if (t_col >= 0) throw ParseError(path + ": duplicate t column");
            t_col = static_cast<int>(c);
        } else if (parse_id(name, "dx", id)) {
            dx_cols.emplace_back(static_cast<int>(c), id);
        } else if (parse_id(name, "x", id)) {
            x_cols.emplace_back(static_cast<int>(c), id);
        } else if (parse_id(name, "u", id)) {
            u_cols.emplace_back(static_cast<int>(c), id);
        } else {
            throw ParseError(path + ": unrecognized column \"" + std::string(name) + "\"");
        }
    }
    if (t_col < 0) throw ParseError(path + ": missing required column t");
    auto check_contiguous = [&](std::vector<std::pair<int, int>>& cols, const char* what) {
        std::sort(cols.begin(), cols.end(),
                  [](const auto& a, const auto& b) { return a.second < b.second; });
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (cols[k].second != static_cast<int>(k) + 1)
                throw ParseError(path + ": " + what + " columns must be numbered 1..k");
    };
    check_contiguous(x_cols, "state");
    check_contiguous(dx_cols, "derivative");
    check_contiguous(u_cols, "control");
    if (x_cols.empty()) throw ParseError(path + ": no state columns");
    if (!dx_cols.empty() && dx_cols.size() != x_cols.size())
        throw ParseError(path + ": derivative column count differs from state count");

    std::vector<double> t_vals;
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (!detail::parse_double(cells[c], row[c]))
                throw ParseError(path + ":" + std::to_string(line_no) + ": non-numeric cell \"" +
                                 std::string(cells[c]) + "\"");
        rows.push_back(std::move(row));
    }

    TrajectoryDataset data;
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto n = static_cast<Eigen::Index>(x_cols.size());
    data.t.resize(r);
    data.X.resize(r, n);
    if (!dx_cols.empty()) data.Xdot = Eigen::MatrixXd(r, n);
    if (!u_cols.empty()) data.U = Eigen::MatrixXd(r, static_cast<Eigen::Index>(u_cols.size()));
    for (Eigen::Index i = 0; i < r; ++i) {
        data.t(i) = rows[i][static_cast<std::size_t>(t_col)];
        for (Eigen::Index j = 0; j < n; ++j)
            data.X(i, j) = rows[i][static_cast<std::size_t>(x_cols[static_cast<std::size_t>(j)].first)];
        if (data.Xdot)
            for (Eigen::Index j = 0; j < n; ++j)
                (*data.Xdot)(i, j) =
                    rows[i][static_cast<std::size_t>(dx_cols[static_cast<std::size_t>(j)].first)];
        if (data.U)
            for (Eigen::Index j = 0; j < data.U->cols(); ++j)
                (*data.U)(i, j) =
                    rows[i][static_cast<std::size_t>(u_cols[static_cast<std::size_t>(j)].first)];
    }
    data.validate();
    return data;
}

} // namespace gpsindy
