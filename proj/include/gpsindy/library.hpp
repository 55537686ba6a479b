#ifndef GPSINDY_LIBRARY_HPP
#define GPSINDY_LIBRARY_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace gpsindy {

/// Which candidate functions enter the regression library.
struct LibrarySpec {
    int poly_order = 3;                      ///< monomials in X up to this total degree
    bool include_sin = false;                ///< sin(x_i) columns
    bool include_cos = false;                ///< cos(x_i) columns
    bool include_cross_trig_products = false; ///< monomial * trig columns
    bool include_control = false;            ///< u_j columns plus their sin/cos when enabled

    /// Checks the flag set against the data dimensions (n states, m controls).
    void validate(int state_dim, int control_dim) const;
};

struct LibraryMatrix {
    Eigen::MatrixXd theta;          ///< r x p, rows are samples
    std::vector<std::string> names; ///< length p, e.g. "1", "x1*x2", "x1*sin(u1)"
};

/// Column names in library order without evaluating any data:
/// constant; X monomials by total degree then lexicographic; sin(x_i);
/// cos(x_i); u_j; sin(u_j); cos(u_j); monomial-times-trig products last.
[[nodiscard]] std::vector<std::string> term_names(const LibrarySpec& spec, int state_dim,
                                                  int control_dim);

/// Evaluates the library at every sample row.
[[nodiscard]] LibraryMatrix build_library(const LibrarySpec& spec, const Eigen::MatrixXd& X,
                                          const std::optional<Eigen::MatrixXd>& U = std::nullopt);

/// Optional conditioning aid: rescales each column to unit Euclidean norm
/// (zero columns are left alone) and returns the norms so coefficients can
/// be mapped back to the original column scaling.
struct ColumnScaling {
    Eigen::VectorXd norms;
};

ColumnScaling normalize_columns(Eigen::MatrixXd& theta);
[[nodiscard]] Eigen::VectorXd rescale_coefficients(const ColumnScaling& scaling,
                                                   const Eigen::VectorXd& xi_scaled);

} // namespace gpsindy

#endif // GPSINDY_LIBRARY_HPP
