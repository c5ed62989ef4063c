#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qho/ode.hpp"
#include "qho/signals.hpp"

namespace qho {

// Driven oscillator H = p^2/2m + m w(t)^2 q^2/2 + Omega(t) cos(w_d t + phi) q.
// Defaults give the dimensionless convention hbar = m = omega(0) = 1.
struct OscillatorConfig {
    double mass = 1.0;
    double hbar = 1.0;
    ScalarSignal omega = ScalarSignal::constant(1.0);
    ScalarSignal drive = ScalarSignal::constant(0.0); // Omega(t)
    double drive_frequency = 0.0;                     // w_d
    double drive_phase = 0.0;                         // phi

    double omega0() const { return omega.value(0.0); }
    double q_scale() const; // sqrt(hbar / (m w0))
    double p_scale() const; // sqrt(hbar m w0)
    void validate() const;

    nlohmann::json to_json() const;
    static OscillatorConfig from_json(const nlohmann::json& j);
};

// Auxiliary Ermakov flow rho'' + w(t)^2 rho = 1/(m^2 rho^3) started from the
// w(0) equilibrium, plus the accumulated quadrature of rho^-2.  All factor
// angles of the evolution operator derive from it.
class ErmakovSolution {
public:
    ErmakovSolution(ode::Solution sol, double mass, double omega_init);

    double rho(double t) const { return sol_.eval(t, 0); }
    double rho_dot(double t) const { return sol_.eval(t, 1); }
    double quad_rho(double t) const { return sol_.eval(t, 2); } // int_0^t rho^-2

    double r(double t) const;       // squeeze parameter
    double theta_q(double t) const; // shear strength
    double phi_q2(double t) const;  // rotation angle parameters, squared form
    double phi_p2(double t) const;

    double t_begin() const { return sol_.t_begin(); }
    double t_end() const { return sol_.t_end(); }
    double mass() const { return mass_; }
    double omega_init() const { return omega_init_; }

    // RMS of rho'' + w^2 rho - 1/(m^2 rho^3) over a uniform grid, with rho''
    // taken from the interpolant derivative rather than the right-hand side.
    double residual_rms(const OscillatorConfig& cfg, std::size_t samples = 2000) const;

    const ode::Solution& raw() const { return sol_; }

private:
    ode::Solution sol_;
    double mass_;
    double omega_init_;
};

// Classical driven-oscillator response beta_q and its induced momentum
// shift beta_p = -m beta_q', plus the running phase integral L.
class DriveSolution {
public:
    DriveSolution(ode::Solution sol, double mass);

    double beta_q(double t) const { return sol_.eval(t, 0); }
    double beta_p(double t) const { return -mass_ * sol_.eval(t, 1); }
    double phase_integral(double t) const { return sol_.eval(t, 2); } // L(t)

    double t_begin() const { return sol_.t_begin(); }
    double t_end() const { return sol_.t_end(); }

    const ode::Solution& raw() const { return sol_; }

private:
    ode::Solution sol_;
    double mass_;
};

ErmakovSolution solve_ermakov(const OscillatorConfig& cfg, double t_end,
                              const ode::Tolerances& tol = {});
DriveSolution solve_drive(const OscillatorConfig& cfg, double t_end,
                          const ode::Tolerances& tol = {});

enum class EventKind {
    RhoDotZero, // any sign change of rho'
    RhoMax,     // rho' changes + to -
    RhoMin,     // rho' changes - to +
    ThetaQZero, // sign change of theta_q
};

struct EventResult {
    std::vector<double> times;
    bool degenerate = false; // event function below noise over whole window
};

EventResult find_events(const ErmakovSolution& erm, EventKind kind, double t_lo, double t_hi);

// Writes `t,rho,rho_dot,r,theta_q,phi_q2,phi_p2,beta_q,beta_p,L` rows, with
// times reported as w0*t.
void export_trajectory(std::ostream& out, const ErmakovSolution& erm, const DriveSolution& drv,
                       const std::vector<double>& times, double omega0);

} // namespace qho
