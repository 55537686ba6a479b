#include "gpsindy/library.hpp"

#include "library_internal.hpp"

#include "gpsindy/errors.hpp"

#include <cmath>

namespace gpsindy {

namespace {

using detail::Term;

std::string monomial_name(const std::vector<int>& monomial) {
    std::string name;
    for (size_t k = 0; k < monomial.size(); ++k) {
        if (k > 0)
            name += '*';
        name += 'x' + std::to_string(monomial[k] + 1);
    }
    return name;
}

// Non-decreasing index tuples of the given length, in lexicographic order.
void append_multisets(int state_dim, int degree, std::vector<int>& prefix,
                      std::vector<std::vector<int>>& out) {
    if (static_cast<int>(prefix.size()) == degree) {
        out.push_back(prefix);
        return;
    }
    const int lo = prefix.empty() ? 0 : prefix.back();
    for (int i = lo; i < state_dim; ++i) {
        prefix.push_back(i);
        append_multisets(state_dim, degree, prefix, out);
        prefix.pop_back();
    }
}

} // namespace

namespace detail {

std::string term_name(const Term& term) {
    if (term.linear_control)
        return 'u' + std::to_string(term.control_index + 1);
    std::string name = monomial_name(term.monomial);
    if (term.trig != Term::Trig::none) {
        const bool is_sin = term.trig == Term::Trig::sin_x || term.trig == Term::Trig::sin_u;
        const bool is_state = term.trig == Term::Trig::sin_x || term.trig == Term::Trig::cos_x;
        std::string trig = std::string(is_sin ? "sin(" : "cos(") +
                           (is_state ? 'x' : 'u') + std::to_string(term.trig_index + 1) + ')';
        name = name.empty() ? trig : name + '*' + trig;
    }
    return name.empty() ? "1" : name;
}

std::vector<Term> term_plan(const LibrarySpec& spec, int state_dim, int control_dim) {
    spec.validate(state_dim, control_dim);
    std::vector<Term> plan;

    plan.push_back({}); // constant

    std::vector<std::vector<int>> monomials;
    for (int degree = 1; degree <= spec.poly_order; ++degree) {
        std::vector<int> prefix;
        append_multisets(state_dim, degree, prefix, monomials);
    }
    for (const auto& monomial : monomials)
        plan.push_back({.monomial = monomial});

    std::vector<Term> trig_terms;
    if (spec.include_sin)
        for (int i = 0; i < state_dim; ++i)
            trig_terms.push_back({.monomial = {}, .trig = Term::Trig::sin_x, .trig_index = i});
    if (spec.include_cos)
        for (int i = 0; i < state_dim; ++i)
            trig_terms.push_back({.monomial = {}, .trig = Term::Trig::cos_x, .trig_index = i});
    plan.insert(plan.end(), trig_terms.begin(), trig_terms.end());

    if (spec.include_control) {
        for (int j = 0; j < control_dim; ++j) {
            Term term;
            term.linear_control = true;
            term.control_index = j;
            plan.push_back(term);
        }
        std::vector<Term> control_trig;
        if (spec.include_sin)
            for (int j = 0; j < control_dim; ++j)
                control_trig.push_back({.monomial = {}, .trig = Term::Trig::sin_u, .trig_index = j});
        if (spec.include_cos)
            for (int j = 0; j < control_dim; ++j)
                control_trig.push_back({.monomial = {}, .trig = Term::Trig::cos_u, .trig_index = j});
        plan.insert(plan.end(), control_trig.begin(), control_trig.end());
        trig_terms.insert(trig_terms.end(), control_trig.begin(), control_trig.end());
    }

    if (spec.include_cross_trig_products) {
        for (const auto& monomial : monomials) {
            for (const Term& trig : trig_terms) {
                Term cross = trig;
                cross.monomial = monomial;
                plan.push_back(cross);
            }
        }
    }
    return plan;
}

} // namespace detail

namespace {
using detail::term_name;
using detail::term_plan;
} // namespace

void LibrarySpec::validate(int state_dim, int control_dim) const {
    if (poly_order < 0 || poly_order > 3)
        throw ConfigError("poly_order must be between 0 and 3");
    if (state_dim < 1)
        throw ConfigError("the library needs at least one state dimension");
    if (include_control && control_dim < 1)
        throw ConfigError("include_control requires at least one control column");
}

std::vector<std::string> term_names(const LibrarySpec& spec, int state_dim, int control_dim) {
    std::vector<std::string> names;
    for (const Term& term : term_plan(spec, state_dim, control_dim))
        names.push_back(term_name(term));
    return names;
}

LibraryMatrix build_library(const LibrarySpec& spec, const Eigen::MatrixXd& X,
                            const std::optional<Eigen::MatrixXd>& U) {
    const int n = static_cast<int>(X.cols());
    const int m = U ? static_cast<int>(U->cols()) : 0;
    if (spec.include_control && !U)
        throw ConfigError("include_control requires control data");
    if (U && U->rows() != X.rows())
        throw DimensionError("state and control row counts differ");
    if (!X.allFinite() || (U && !U->allFinite()))
        throw InvalidInput("library inputs must be finite");

    const std::vector<Term> plan = term_plan(spec, n, m);
    const Eigen::Index r = X.rows();

    LibraryMatrix lib;
    lib.theta.resize(r, static_cast<Eigen::Index>(plan.size()));
    lib.names.reserve(plan.size());
    for (size_t c = 0; c < plan.size(); ++c) {
        const Term& term = plan[c];
        lib.names.push_back(term_name(term));
        Eigen::ArrayXd col = Eigen::ArrayXd::Ones(r);
        if (term.linear_control) {
            col = U->col(term.control_index).array();
        } else {
            for (int idx : term.monomial)
                col *= X.col(idx).array();
            switch (term.trig) {
            case Term::Trig::none: break;
            case Term::Trig::sin_x: col *= X.col(term.trig_index).array().sin(); break;
            case Term::Trig::cos_x: col *= X.col(term.trig_index).array().cos(); break;
            case Term::Trig::sin_u: col *= U->col(term.trig_index).array().sin(); break;
            case Term::Trig::cos_u: col *= U->col(term.trig_index).array().cos(); break;
            }
        }
        lib.theta.col(static_cast<Eigen::Index>(c)) = col.matrix();
    }
    return lib;
}

ColumnScaling normalize_columns(Eigen::MatrixXd& theta) {
    ColumnScaling scaling;
    scaling.norms = theta.colwise().norm();
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
        if (scaling.norms(j) > 0.0)
            theta.col(j) /= scaling.norms(j);
        else
            scaling.norms(j) = 1.0;
    }
    return scaling;
}

Eigen::VectorXd rescale_coefficients(const ColumnScaling& scaling,
                                     const Eigen::VectorXd& xi_scaled) {
    if (xi_scaled.size() != scaling.norms.size())
        throw DimensionError("coefficient length does not match the recorded column count");
    return xi_scaled.array() / scaling.norms.array();
}

} // namespace gpsindy
