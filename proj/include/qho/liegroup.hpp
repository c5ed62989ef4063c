#pragma once

#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "qho/dynamics.hpp"

namespace qho {

// Heisenberg-picture action of a factor unitary on (q, p): linear part M
// with det M = 1 plus an offset d.
struct AffineSymplectic {
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
    Eigen::Vector2d d = Eigen::Vector2d::Zero();

    Eigen::Vector2d apply(const Eigen::Vector2d& x) const { return M * x + d; }
};

// outer after inner: x -> outer.M * (inner.M x + inner.d) + outer.d
AffineSymplectic compose(const AffineSymplectic& outer, const AffineSymplectic& inner);

// D(beta_q, beta_p): q -> q + beta_q, p -> p - beta_p.
AffineSymplectic displacement_map(double beta_q, double beta_p);

// R(c_q, c_p) generated by c_q q^2 + c_p p^2, coefficients signed.  Written
// via sinc of the invariant 4 c_q c_p so the shear (c_p -> 0), mirror
// (c_q -> 0), and hyperbolic (c_q c_p < 0) limits all come out exact.
AffineSymplectic rotation_map(double c_q, double c_p);

// S(r): q -> q e^{2r}, p -> p e^{-2r}.
AffineSymplectic squeeze_map(double r);

// Gaussian state in (q, p): mean vector, symmetric covariance, accumulated
// phase, and the scales q0, p0 it was prepared with.
struct GaussianState {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
    double phase = 0.0;
    double q0 = 1.0;
    double p0 = 1.0;

    static GaussianState vacuum(const OscillatorConfig& cfg);
};

// Factor parameters of the evolution operator at one instant:
//   exp(-i L / hbar) D(beta_q, beta_p) R(theta_q, 0) S(r) R(phi_q^2, phi_p^2) D(beta_q_lead, 0)
// with R(c_q, c_p) as in rotation_map: theta_q is itself the q^2 coefficient
// of the shear factor, while the rotation coefficients are the squares of
// the stored phi_q, phi_p.
struct LieFactors {
    double beta_q = 0.0;
    double beta_p = 0.0;
    double theta_q = 0.0;
    double r = 0.0;
    double phi_q = 0.0;
    double phi_p = 0.0;
    double phase_integral = 0.0; // L(t)
    double beta_q_lead = 0.0;    // initial-time displacement, nonzero only if Omega(0) != 0
};

LieFactors assemble_factorization(const ErmakovSolution& erm, const DriveSolution& drv,
                                  const OscillatorConfig& cfg, double t);

// Product of the factor maps, initial displacement innermost.
AffineSymplectic total_map(const LieFactors& f);

// Pushes a Gaussian state through the factor maps; phase picks up -L/hbar.
GaussianState propagate_gaussian(const GaussianState& in, const LieFactors& f, double hbar);

// Scalar closed forms for the evolved first moments.  Independent of the
// matrix route above; kept separate on purpose so the two can be checked
// against each other.
struct Moments {
    double mean_q = 0.0;
    double mean_p = 0.0;
};
Moments expectation_qp(const LieFactors& f, double mean_q0, double mean_p0);

// Writes `t,beta_q,beta_p,theta_q,r,phi_q,phi_p,L` rows with t as w0*t.
void export_factors(std::ostream& out, const ErmakovSolution& erm, const DriveSolution& drv,
                    const OscillatorConfig& cfg, const std::vector<double>& times);

} // namespace qho
