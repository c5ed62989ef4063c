#pragma once

#include <complex>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qho/liegroup.hpp"
#include "qho/phasespace.hpp"

namespace qho::fock {

// Number-basis matrices of the five algebra elements, built directly from
// ladder coefficients (not from products of truncated factors).
struct FockBasis {
    std::size_t n = 0;
    double hbar = 1.0, q0 = 1.0, p0 = 1.0;
    Eigen::MatrixXcd q, p, q2, p2, qp_anti; // qp_anti = qp + pq
    Eigen::MatrixXd q_re, q2_re, p2_re;     // real symmetric views for stepping
};

FockBasis build_basis(std::size_t n, double hbar, double q0, double p0);
FockBasis build_basis(std::size_t n, const OscillatorConfig& cfg);

class TruncationError : public std::runtime_error {
public:
    TruncationError(double t, std::size_t level, double population);
    double time;
    std::size_t level;
    double population;
};

struct EvolveOptions {
    double steps_per_period = 200.0; // base dt = 2 pi / (steps_per_period * w_max)
    double dt_scale = 1.0;           // > 1 coarsens the step on purpose
    double truncation_threshold = 1e-8;
};

struct FockTrajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXcd> states;
};

// Direct Schrodinger integration in the truncated basis.  Uses a 4th-order
// commutator-free two-exponential step on Gauss nodes; every exponential is
// applied through an orthogonal eigendecomposition, so each step is unitary
// to round-off.  Steps land exactly on each requested sample time, and the
// top tenth of the basis is monitored for truncation leakage.
FockTrajectory evolve(const FockBasis& basis, const OscillatorConfig& cfg,
                      const Eigen::VectorXcd& psi0, const std::vector<double>& sample_times,
                      const EvolveOptions& opt = {});

Eigen::VectorXcd ground_state(const FockBasis& basis);

struct FockMoments {
    double mean_q = 0.0, mean_p = 0.0;
    double var_q = 0.0, var_p = 0.0, cov_qp = 0.0;
};
FockMoments moments(const FockBasis& basis, const Eigen::VectorXcd& psi);
double mean_energy(const FockBasis& basis, const OscillatorConfig& cfg,
                   const Eigen::VectorXcd& psi, double t);

double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

// psi <- exp(-i A) psi for Hermitian A, via eigendecomposition.
Eigen::VectorXcd apply_exp_neg_i(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& psi);

// Builds the factorized Gaussian state in the number basis by applying the
// factor unitaries to the vacuum.  Global phase is not meaningful here.
Eigen::VectorXcd state_from_factors(const FockBasis& basis, const LieFactors& f);

// Husimi values on the grid from the Fock amplitudes, Q = |<alpha|psi>|^2/pi.
HusimiField husimi_fock(const FockBasis& basis, const Eigen::VectorXcd& psi,
                        const GridSpec& grid);
double husimi_fock_at(const Eigen::VectorXcd& psi, double q_over_q0, double p_over_p0);

// Writes `t,mean_q,mean_p,var_q,var_p,cov_qp,fidelity_vs_factorized` rows.
void export_oracle_trajectory(std::ostream& out, const FockBasis& basis,
                              const FockTrajectory& traj,
                              const std::vector<Eigen::VectorXcd>& factorized,
                              double omega0);

} // namespace qho::fock
