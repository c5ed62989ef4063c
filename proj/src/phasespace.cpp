#include "qho/phasespace.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qho/io.hpp"

namespace qho {

void GridSpec::validate() const {
    if (!(q_max > q_min) || !(p_max > p_min))
        throw std::invalid_argument("GridSpec: max must exceed min on both axes");
    if (nq < 2 || np < 2) throw std::invalid_argument("GridSpec: need at least 2x2 points");
}

double GridSpec::q_at(std::size_t i) const {
    return q_min + (q_max - q_min) * static_cast<double>(i) / static_cast<double>(nq - 1);
}

double GridSpec::p_at(std::size_t j) const {
    return p_min + (p_max - p_min) * static_cast<double>(j) / static_cast<double>(np - 1);
}

double husimi_gaussian_at(const GaussianState& st, double q_over_q0, double p_over_p0,
                          double hbar) {
    Eigen::Matrix2d sig = st.cov;
    sig(0, 0) += 0.5 * st.q0 * st.q0;
    sig(1, 1) += 0.5 * st.p0 * st.p0;
    const double det = sig(0, 0) * sig(1, 1) - sig(0, 1) * sig(1, 0);
    Eigen::Vector2d delta(q_over_q0 * st.q0 - st.mean(0), p_over_p0 * st.p0 - st.mean(1));
    const double quad = (delta(0) * delta(0) * sig(1, 1) - 2.0 * delta(0) * delta(1) * sig(0, 1) +
                         delta(1) * delta(1) * sig(0, 0)) /
                        det;
    const double q = hbar / (std::numbers::pi * std::sqrt(det)) * std::exp(-0.5 * quad);
    return q < 0.0 ? 0.0 : q;
}

HusimiField husimi_gaussian(const GaussianState& st, const GridSpec& grid, double hbar) {
    grid.validate();
    HusimiField field{grid, {}};
    field.values.resize(grid.nq * grid.np);
    for (std::size_t j = 0; j < grid.np; ++j)
        for (std::size_t i = 0; i < grid.nq; ++i)
            field.values[j * grid.nq + i] =
                husimi_gaussian_at(st, grid.q_at(i), grid.p_at(j), hbar);
    return field;
}

double husimi_normalization(const HusimiField& field) {
    const GridSpec& g = field.grid;
    // Grid coordinates are dimensionless, so dq dp / (2 hbar) reduces to
    // dgq dgp / 2.
    const double dq = (g.q_max - g.q_min) / static_cast<double>(g.nq - 1);
    const double dp = (g.p_max - g.p_min) / static_cast<double>(g.np - 1);
    double acc = 0.0;
    for (std::size_t j = 0; j < g.np; ++j) {
        const double wj = (j == 0 || j + 1 == g.np) ? 0.5 : 1.0;
        for (std::size_t i = 0; i < g.nq; ++i) {
            const double wi = (i == 0 || i + 1 == g.nq) ? 0.5 : 1.0;
            acc += wi * wj * field.at(i, j);
        }
    }
    return acc * dq * dp * 0.5;
}

void export_husimi(std::ostream& out, const HusimiField& field) {
    out << "q_over_q0,p_over_p0,Q\n";
    const GridSpec& g = field.grid;
    for (std::size_t j = 0; j < g.np; ++j)
        for (std::size_t i = 0; i < g.nq; ++i)
            out << io::format_double(g.q_at(i)) << ',' << io::format_double(g.p_at(j)) << ','
                << io::format_double(field.at(i, j)) << '\n';
}

nlohmann::json husimi_sidecar(const HusimiField& field, const GaussianState& st,
                              const std::string& label, double omega0_t) {
    const GridSpec& g = field.grid;
    return {{"label", label},
            {"time", omega0_t},
            {"grid",
             {{"q_min", g.q_min},
              {"q_max", g.q_max},
              {"p_min", g.p_min},
              {"p_max", g.p_max},
              {"nq", g.nq},
              {"np", g.np}}},
            {"state",
             {{"mean_q", st.mean(0)},
              {"mean_p", st.mean(1)},
              {"cov", {st.cov(0, 0), st.cov(0, 1), st.cov(1, 1)}},
              {"phase", st.phase},
              {"q0", st.q0},
              {"p0", st.p0}}},
            {"normalization", husimi_normalization(field)}};
}

} // namespace qho
