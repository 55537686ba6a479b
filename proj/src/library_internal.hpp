#ifndef GPSINDY_SRC_LIBRARY_INTERNAL_HPP
#define GPSINDY_SRC_LIBRARY_INTERNAL_HPP

#include "gpsindy/library.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace gpsindy::detail {

/// One candidate column: a monomial over X (possibly empty = constant) times
/// at most one trig factor over a state or control variable.
struct Term {
    std::vector<int> monomial;   // sorted state indices, one per degree
    enum class Trig { none, sin_x, cos_x, sin_u, cos_u } trig = Trig::none;
    int trig_index = -1;         // state or control index of the trig argument
    bool linear_control = false; // plain u_j column
    int control_index = -1;
};

std::vector<Term> term_plan(const LibrarySpec& spec, int state_dim, int control_dim);

std::string term_name(const Term& term);

/// One theta row evaluated without allocation; non-finite values propagate
/// (rollout integrators detect them as divergence after the step). out must
/// already have plan.size() entries.
inline void eval_plan_row(const std::vector<Term>& plan, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u, Eigen::RowVectorXd& out) {
    for (size_t c = 0; c < plan.size(); ++c) {
        const Term& term = plan[c];
        double v;
        if (term.linear_control) {
            v = u(term.control_index);
        } else {
            v = 1.0;
            for (int idx : term.monomial)
                v *= x(idx);
            switch (term.trig) {
            case Term::Trig::none: break;
            case Term::Trig::sin_x: v *= std::sin(x(term.trig_index)); break;
            case Term::Trig::cos_x: v *= std::cos(x(term.trig_index)); break;
            case Term::Trig::sin_u: v *= std::sin(u(term.trig_index)); break;
            case Term::Trig::cos_u: v *= std::cos(u(term.trig_index)); break;
            }
        }
        out(static_cast<Eigen::Index>(c)) = v;
    }
}

} // namespace gpsindy::detail

#endif // GPSINDY_SRC_LIBRARY_INTERNAL_HPP
