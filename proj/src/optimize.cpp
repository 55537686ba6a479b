#include "gpsindy/optimize.hpp"

#include "gpsindy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gpsindy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& opts) {
    const Eigen::Index dim = x0.size();
    if (dim == 0)
        throw InvalidInput("nelder_mead needs at least one dimension");

    NelderMeadResult result;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : kInf;
    };

    // Vertex 0 is x0; vertex i+1 steps along axis i.
    std::vector<Eigen::VectorXd> verts(static_cast<size_t>(dim) + 1, x0);
    std::vector<double> fvals(verts.size());
    for (size_t i = 0; i < verts.size(); ++i) {
        if (i > 0)
            verts[i](static_cast<Eigen::Index>(i) - 1) += opts.initial_step;
        fvals[i] = eval(verts[i]);
    }

    std::vector<size_t> order(verts.size());
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return fvals[a] < fvals[b]; });
    };
    sort_vertices();

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        const size_t best = order.front();
        const size_t worst = order.back();
        const size_t second_worst = order[order.size() - 2];

        // Convergence: simplex collapsed in both position and value.
        double diameter = 0.0;
        for (size_t i = 1; i < order.size(); ++i)
            diameter = std::max(diameter,
                                (verts[order[i]] - verts[best]).cwiseAbs().maxCoeff());
        const double spread = fvals[worst] - fvals[best];
        if (std::isfinite(fvals[best]) && diameter <= opts.xtol && spread <= opts.ftol) {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
        for (size_t i = 0; i + 1 < order.size(); ++i)
            centroid += verts[order[i]];
        centroid /= static_cast<double>(dim);

        const Eigen::VectorXd reflected = centroid + (centroid - verts[worst]);
        const double f_reflected = eval(reflected);

        if (f_reflected < fvals[best]) {
            const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - verts[worst]);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                verts[worst] = expanded;
                fvals[worst] = f_expanded;
            } else {
                verts[worst] = reflected;
                fvals[worst] = f_reflected;
            }
        } else if (f_reflected < fvals[second_worst]) {
            verts[worst] = reflected;
            fvals[worst] = f_reflected;
        } else {
            const bool outside = f_reflected < fvals[worst];
            const Eigen::VectorXd& toward = outside ? reflected : verts[worst];
            const Eigen::VectorXd contracted = centroid + 0.5 * (toward - centroid);
            const double f_contracted = eval(contracted);
            if (f_contracted < std::min(f_reflected, fvals[worst])) {
                verts[worst] = contracted;
                fvals[worst] = f_contracted;
            } else {
                // Shrink everything toward the best vertex.
                for (size_t i = 1; i < order.size(); ++i) {
                    const size_t v = order[i];
                    verts[v] = verts[best] + 0.5 * (verts[v] - verts[best]);
                    fvals[v] = eval(verts[v]);
                }
            }
        }

        sort_vertices();
        ++result.iterations;
        result.best_history.push_back(fvals[order.front()]);
    }

    const size_t best = order.front();
    result.x = verts[best];
    result.fval = fvals[best];
    return result;
}

} // namespace gpsindy
