#include "qho/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qho/io.hpp"

namespace qho {

double OscillatorConfig::q_scale() const { return std::sqrt(hbar / (mass * omega0())); }

double OscillatorConfig::p_scale() const { return std::sqrt(hbar * mass * omega0()); }

void OscillatorConfig::validate() const {
    if (!(mass > 0.0)) throw std::invalid_argument("OscillatorConfig.mass must be positive");
    if (!(hbar > 0.0)) throw std::invalid_argument("OscillatorConfig.hbar must be positive");
    if (!(omega0() > 0.0))
        throw std::invalid_argument("OscillatorConfig.omega must be positive at t = 0");
}

nlohmann::json OscillatorConfig::to_json() const {
    return {{"m", mass},
            {"hbar", hbar},
            {"omega", omega.to_json()},
            {"Omega", drive.to_json()},
            {"omega_d", drive_frequency},
            {"phi", drive_phase}};
}

OscillatorConfig OscillatorConfig::from_json(const nlohmann::json& j) {
    OscillatorConfig cfg;
    cfg.mass = j.value("m", 1.0);
    cfg.hbar = j.value("hbar", 1.0);
    if (j.contains("omega")) cfg.omega = ScalarSignal::from_json(j.at("omega"));
    if (j.contains("Omega")) cfg.drive = ScalarSignal::from_json(j.at("Omega"));
    cfg.drive_frequency = j.value("omega_d", 0.0);
    cfg.drive_phase = j.value("phi", 0.0);
    cfg.validate();
    return cfg;
}

ErmakovSolution::ErmakovSolution(ode::Solution sol, double mass, double omega_init)
    : sol_(std::move(sol)), mass_(mass), omega_init_(omega_init) {}

double ErmakovSolution::r(double t) const {
    return 0.5 * std::log(std::sqrt(mass_ * omega_init_) * rho(t));
}

double ErmakovSolution::theta_q(double t) const {
    return -0.5 * mass_ * rho_dot(t) / rho(t);
}

double ErmakovSolution::phi_q2(double t) const { return 0.5 * omega_init_ * quad_rho(t); }

double ErmakovSolution::phi_p2(double t) const {
    return quad_rho(t) / (2.0 * mass_ * mass_ * omega_init_);
}

double ErmakovSolution::residual_rms(const OscillatorConfig& cfg, std::size_t samples) const {
    const double t0 = t_begin(), t1 = t_end();
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = t0 + (t1 - t0) * (static_cast<double>(i) + 0.5) /
                                  static_cast<double>(samples);
        const double w = cfg.omega.value(t);
        const double rh = rho(t);
        const double rdd = sol_.eval_derivative(t, 1);
        const double res = rdd + w * w * rh - 1.0 / (mass_ * mass_ * rh * rh * rh);
        acc += res * res;
    }
    return std::sqrt(acc / static_cast<double>(samples));
}

DriveSolution::DriveSolution(ode::Solution sol, double mass)
    : sol_(std::move(sol)), mass_(mass) {}

namespace {

// The dense-output derivative is one order less accurate than the solution
// itself, so the interpolated rho'' would miss the 1e-8 residual contract if
// steps were sized by the requested tolerance alone.  Two measures keep it
// honest: a step cap tied to the fastest oscillation period, and internal
// stepping at a fraction of the requested tolerance (derivative error goes
// as tol^(4/5), so /100 buys roughly 40x).
ode::Tolerances stepping_tol(const ode::Tolerances& tol) {
    return {std::max(tol.rtol / 100.0, 1e-13), std::max(tol.atol / 100.0, 1e-15)};
}

double oscillation_step_cap(const ScalarSignal& omega, double t_end) {
    double w_max = 0.0;
    const int n = 2048;
    for (int i = 0; i <= n; ++i)
        w_max = std::max(w_max, omega.value(t_end * static_cast<double>(i) / n));
    for (const PulseSpec& p : omega.pulses()) {
        w_max = std::max(w_max, omega.value(0.5 * (p.ramp_mid_rise() + p.ramp_mid_fall())));
    }
    return std::numbers::pi / (150.0 * std::max(w_max, 1e-300));
}

} // namespace

ErmakovSolution solve_ermakov(const OscillatorConfig& cfg, double t_end,
                              const ode::Tolerances& tol) {
    cfg.validate();
    const double m = cfg.mass;
    const double w0 = cfg.omega0();

    ode::Rhs rhs = [&cfg, m](double t, const double* y, double* dydt) {
        const double w = cfg.omega.value(t);
        if (!(w > 0.0)) throw ode::SolverError("omega(t) must stay positive", t);
        const double rho = y[0];
        dydt[0] = y[1];
        dydt[1] = 1.0 / (m * m * rho * rho * rho) - w * w * rho;
        dydt[2] = 1.0 / (rho * rho);
    };

    ode::IntegrateOptions opt;
    opt.tol = stepping_tol(tol);
    opt.clamps = cfg.omega.ramp_windows();
    opt.max_step = oscillation_step_cap(cfg.omega, t_end);
    const std::vector<double> y0{1.0 / std::sqrt(m * w0), 0.0, 0.0};
    return ErmakovSolution(ode::integrate(rhs, y0, 0.0, t_end, opt), m, w0);
}

DriveSolution solve_drive(const OscillatorConfig& cfg, double t_end,
                          const ode::Tolerances& tol) {
    cfg.validate();
    const double m = cfg.mass;
    const double w0 = cfg.omega0();

    ode::Rhs rhs = [&cfg, m](double t, const double* y, double* dydt) {
        const double w = cfg.omega.value(t);
        const double f = cfg.drive.value(t) *
                         std::cos(cfg.drive_frequency * t + cfg.drive_phase);
        const double bq = y[0];
        const double bp = -m * y[1];
        dydt[0] = y[1];
        dydt[1] = -w * w * bq - f / m;
        // ell(t) = beta_p^2/2m + m w^2 beta_q^2 / 2 + f beta_q
        dydt[2] = bp * bp / (2.0 * m) + 0.5 * m * w * w * bq * bq + f * bq;
    };

    ode::IntegrateOptions opt;
    opt.tol = stepping_tol(tol);
    opt.clamps = cfg.omega.ramp_windows();
    for (const RampWindow& w : cfg.drive.ramp_windows()) opt.clamps.push_back(w);
    opt.max_step = std::min(oscillation_step_cap(cfg.omega, t_end),
                            std::numbers::pi / (150.0 * std::max(std::abs(cfg.drive_frequency),
                                                                 1e-300)));
    const double beta_q0 =
        -cfg.drive.value(0.0) * std::cos(cfg.drive_phase) / (m * w0 * w0);
    const std::vector<double> y0{beta_q0, 0.0, 0.0};
    return DriveSolution(ode::integrate(rhs, y0, 0.0, t_end, opt), m);
}

namespace {

constexpr double kDegenerate = 1e-12;
constexpr double kRefineTol = 1e-12;

double bisect(const std::function<double(double)>& f, double a, double b, double fa) {
    for (int i = 0; i < 200 && (b - a) > kRefineTol * std::max(1.0, std::abs(b)); ++i) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

EventResult find_events(const ErmakovSolution& erm, EventKind kind, double t_lo, double t_hi) {
    t_lo = std::max(t_lo, erm.t_begin());
    t_hi = std::min(t_hi, erm.t_end());
    if (!(t_hi > t_lo)) throw std::invalid_argument("find_events: empty window");

    std::function<double(double)> g;
    switch (kind) {
        case EventKind::ThetaQZero:
            g = [&erm](double t) { return erm.theta_q(t); };
            break;
        default:
            g = [&erm](double t) { return erm.rho_dot(t); };
            break;
    }

    // Sample densely enough that no half-oscillation of rho' fits between
    // neighbouring points, then bisect each bracketed sign change.
    const std::size_t samples =
        std::max<std::size_t>(64, static_cast<std::size_t>((t_hi - t_lo) / 0.02) + 2);
    std::vector<double> ts(samples), gs(samples);
    double gmax = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        ts[i] = t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
        gs[i] = g(ts[i]);
        gmax = std::max(gmax, std::abs(gs[i]));
    }

    EventResult out;
    if (gmax < kDegenerate) {
        out.degenerate = true;
        return out;
    }

    for (std::size_t i = 0; i + 1 < samples; ++i) {
        if (!(gs[i] * gs[i + 1] < 0.0)) continue;
        const bool falling = gs[i] > 0.0;
        if (kind == EventKind::RhoMax && !falling) continue;
        if (kind == EventKind::RhoMin && falling) continue;
        out.times.push_back(bisect(g, ts[i], ts[i + 1], gs[i]));
    }
    return out;
}

void export_trajectory(std::ostream& out, const ErmakovSolution& erm, const DriveSolution& drv,
                       const std::vector<double>& times, double omega0) {
    out << "t,rho,rho_dot,r,theta_q,phi_q2,phi_p2,beta_q,beta_p,L\n";
    for (double t : times) {
        out << io::format_double(omega0 * t) << ',' << io::format_double(erm.rho(t)) << ','
            << io::format_double(erm.rho_dot(t)) << ',' << io::format_double(erm.r(t)) << ','
            << io::format_double(erm.theta_q(t)) << ',' << io::format_double(erm.phi_q2(t))
            << ',' << io::format_double(erm.phi_p2(t)) << ','
            << io::format_double(drv.beta_q(t)) << ',' << io::format_double(drv.beta_p(t))
            << ',' << io::format_double(drv.phase_integral(t)) << '\n';
    }
}

} // namespace qho
