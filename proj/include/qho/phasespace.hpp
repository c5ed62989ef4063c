#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qho/liegroup.hpp"

namespace qho {

// Rectangular phase-space grid in units of (q0, p0), row-major over p rows.
struct GridSpec {
    double q_min = -6.0, q_max = 6.0;
    double p_min = -6.0, p_max = 6.0;
    std::size_t nq = 121, np = 121;

    void validate() const;
    double q_at(std::size_t i) const;
    double p_at(std::size_t j) const;
};

struct HusimiField {
    GridSpec grid;
    std::vector<double> values; // nq * np, index j * nq + i

    double at(std::size_t i, std::size_t j) const { return values[j * grid.nq + i]; }
};

// Closed-form Husimi function of a Gaussian state: a normalised Gaussian in
// (q, p) with covariance cov + diag(q0^2/2, p0^2/2), scaled so the coherent
// peak is 1/pi.  Point evaluation takes grid coordinates in (q0, p0) units.
double husimi_gaussian_at(const GaussianState& st, double q_over_q0, double p_over_p0,
                          double hbar);
HusimiField husimi_gaussian(const GaussianState& st, const GridSpec& grid, double hbar);

// Trapezoid quadrature of Q dq dp / (2 hbar); close to 1 when the grid
// window holds the bulk of the state.
double husimi_normalization(const HusimiField& field);

// Writes `q_over_q0,p_over_p0,Q` rows plus a JSON sidecar describing grid,
// state, and time tag.
void export_husimi(std::ostream& out, const HusimiField& field);
nlohmann::json husimi_sidecar(const HusimiField& field, const GaussianState& st,
                              const std::string& label, double omega0_t);

} // namespace qho
