#include "gpsindy/model.hpp"

#include "gpsindy/errors.hpp"
#include "format_util.hpp"
#include "library_internal.hpp"

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

namespace gpsindy {

using detail::fmt17;
using detail::parse_double;

const char* to_string(FitMethod method) {
    switch (method) {
    case FitMethod::sindy: return "sindy";
    case FitMethod::gpsindy: return "gpsindy";
    case FitMethod::ssr_coeff: return "ssr_coeff";
    case FitMethod::ssr_res: return "ssr_res";
    }
    throw InvalidInput("unknown fit method enum value");
}

FitMethod fit_method_from_string(const std::string& name) {
    if (name == "sindy") return FitMethod::sindy;
    if (name == "gpsindy") return FitMethod::gpsindy;
    if (name == "ssr_coeff") return FitMethod::ssr_coeff;
    if (name == "ssr_res") return FitMethod::ssr_res;
    throw ConfigError("unknown fit method '" + name + "'");
}

void LearnedModel::validate() const {
    if (state_dim < 1 || control_dim < 0)
        throw InvalidInput("model needs state_dim >= 1 and control_dim >= 0");
    if (xi.rows() != static_cast<Eigen::Index>(term_names.size()) || xi.cols() != state_dim)
        throw DimensionError("model coefficient shape does not match terms and state_dim");
    if (lambda_per_column.size() != state_dim)
        throw DimensionError("model needs one lambda per state column");
    if (!xi.allFinite())
        throw InvalidInput("model coefficients must be finite");
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
model_to_dynamics(const LearnedModel& model) {
    model.validate();
    // The term plan is built once here; per-call evaluation is allocation-free
    // so rollouts stay cheap. Non-finite states propagate into the derivative
    // and are detected by the integrator's divergence guard.
    auto plan = std::make_shared<const std::vector<detail::Term>>(
        detail::term_plan(model.library, model.state_dim, model.control_dim));
    return [model, plan](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
        if (x.size() != model.state_dim)
            throw DimensionError("state dimension does not match the model");
        if (model.library.include_control && u.size() != model.control_dim)
            throw DimensionError("control dimension does not match the model");
        Eigen::RowVectorXd row(static_cast<Eigen::Index>(plan->size()));
        detail::eval_plan_row(*plan, x, u, row);
        return (row * model.xi).transpose();
    };
}

void save_model(const LearnedModel& model, const std::string& path) {
    model.validate();
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");

    out << "gpsindy-model v1\n";
    out << "method " << to_string(model.method) << "\n";
    out << "state_dim " << model.state_dim << "\n";
    out << "control_dim " << model.control_dim << "\n";
    out << "poly_order " << model.library.poly_order << "\n";
    out << "include_sin " << int{model.library.include_sin} << "\n";
    out << "include_cos " << int{model.library.include_cos} << "\n";
    out << "include_cross_trig_products " << int{model.library.include_cross_trig_products}
        << "\n";
    out << "include_control " << int{model.library.include_control} << "\n";

    out << "terms " << model.term_names.size() << "\n";
    for (const std::string& name : model.term_names)
        out << name << "\n";

    out << "lambda";
    for (Eigen::Index j = 0; j < model.lambda_per_column.size(); ++j)
        out << ' ' << fmt17(model.lambda_per_column(j));
    out << "\n";

    out << "xi " << model.xi.rows() << ' ' << model.xi.cols() << "\n";
    for (Eigen::Index i = 0; i < model.xi.rows(); ++i) {
        for (Eigen::Index j = 0; j < model.xi.cols(); ++j)
            out << (j ? " " : "") << fmt17(model.xi(i, j));
        out << "\n";
    }

    out << "smoother " << model.smoother.size() << "\n";
    for (const SmootherColumnSummary& s : model.smoother) {
        const Eigen::Vector4d& logs = s.hyper.log_values();
        out << s.target << ' ' << to_string(s.family);
        for (int k = 0; k < 4; ++k)
            out << ' ' << fmt17(logs(k));
        out << ' ' << fmt17(s.nll) << ' ' << fmt17(s.jitter) << "\n";
    }
    out << "end\n";
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

namespace {

class LineReader {
public:
    LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    std::string next() {
        std::string line;
        if (!std::getline(in_, line))
            fail("unexpected end of file");
        ++line_number_;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return line;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path_ + ":" + std::to_string(line_number_) + ": " + what);
    }

private:
    std::istream& in_;
    std::string path_;
    int line_number_ = 0;
};

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> parts;
    std::string part;
    while (ss >> part)
        parts.push_back(part);
    return parts;
}

long expect_keyed_int(LineReader& reader, const std::string& key) {
    const auto parts = split_ws(reader.next());
    if (parts.size() != 2 || parts[0] != key)
        reader.fail("expected '" + key + " <value>'");
    try {
        return std::stol(parts[1]);
    } catch (const std::exception&) {
        reader.fail("bad integer for '" + key + "'");
    }
}

double parse_double_or_fail(LineReader& reader, const std::string& text) {
    double value = 0.0;
    if (!parse_double(text, value))
        reader.fail("bad number '" + text + "'");
    return value;
}

} // namespace

LearnedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    LineReader reader(in, path);

    if (reader.next() != "gpsindy-model v1")
        reader.fail("not a model file (bad magic line)");

    LearnedModel model;
    {
        const auto parts = split_ws(reader.next());
        if (parts.size() != 2 || parts[0] != "method")
            reader.fail("expected 'method <name>'");
        model.method = fit_method_from_string(parts[1]);
    }
    model.state_dim = static_cast<int>(expect_keyed_int(reader, "state_dim"));
    model.control_dim = static_cast<int>(expect_keyed_int(reader, "control_dim"));
    model.library.poly_order = static_cast<int>(expect_keyed_int(reader, "poly_order"));
    model.library.include_sin = expect_keyed_int(reader, "include_sin") != 0;
    model.library.include_cos = expect_keyed_int(reader, "include_cos") != 0;
    model.library.include_cross_trig_products =
        expect_keyed_int(reader, "include_cross_trig_products") != 0;
    model.library.include_control = expect_keyed_int(reader, "include_control") != 0;

    const long term_count = expect_keyed_int(reader, "terms");
    if (term_count < 1)
        reader.fail("model needs at least one term");
    for (long i = 0; i < term_count; ++i)
        model.term_names.push_back(reader.next());

    {
        const auto parts = split_ws(reader.next());
        if (parts.empty() || parts[0] != "lambda")
            reader.fail("expected 'lambda <values>'");
        model.lambda_per_column.resize(static_cast<Eigen::Index>(parts.size()) - 1);
        for (size_t k = 1; k < parts.size(); ++k)
            model.lambda_per_column(static_cast<Eigen::Index>(k - 1)) =
                parse_double_or_fail(reader, parts[k]);
    }

    {
        const auto parts = split_ws(reader.next());
        if (parts.size() != 3 || parts[0] != "xi")
            reader.fail("expected 'xi <rows> <cols>'");
        const long rows = std::stol(parts[1]);
        const long cols = std::stol(parts[2]);
        if (rows != term_count || cols != model.state_dim)
            reader.fail("coefficient shape disagrees with terms/state_dim");
        model.xi.resize(rows, cols);
        for (long i = 0; i < rows; ++i) {
            const auto row = split_ws(reader.next());
            if (static_cast<long>(row.size()) != cols)
                reader.fail("coefficient row has the wrong number of values");
            for (long j = 0; j < cols; ++j)
                model.xi(i, j) = parse_double_or_fail(reader, row[static_cast<size_t>(j)]);
        }
    }

    const long smoother_count = expect_keyed_int(reader, "smoother");
    for (long i = 0; i < smoother_count; ++i) {
        const auto parts = split_ws(reader.next());
        if (parts.size() != 8)
            reader.fail("smoother line needs target, family, 4 log values, nll, jitter");
        SmootherColumnSummary s;
        s.target = parts[0];
        s.family = kernel_family_from_string(parts[1]);
        Eigen::Vector4d logs;
        for (int k = 0; k < 4; ++k)
            logs(k) = parse_double_or_fail(reader, parts[static_cast<size_t>(2 + k)]);
        s.hyper = HyperParams::from_log(logs);
        s.nll = parse_double_or_fail(reader, parts[6]);
        s.jitter = parse_double_or_fail(reader, parts[7]);
        model.smoother.push_back(std::move(s));
    }
    if (reader.next() != "end")
        reader.fail("expected trailing 'end'");

    model.validate();
    const auto expected_names =
        term_names(model.library, model.state_dim, model.control_dim);
    if (expected_names != model.term_names)
        reader.fail("term names do not match the library specification");
    return model;
}

} // namespace gpsindy
