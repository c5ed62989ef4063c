#include "qho/protocols.hpp"

#include <numbers>
#include <stdexcept>

namespace qho {

namespace {

constexpr double kPi = std::numbers::pi;

OscillatorConfig base_config(const Units& u) {
    OscillatorConfig cfg;
    cfg.mass = u.mass;
    cfg.hbar = u.hbar;
    cfg.omega = ScalarSignal::constant(u.omega0);
    return cfg;
}

// omega(t) = [1 + amplitude * sum_j Theta_j] * omega0
ScalarSignal omega_with_pulses(const Units& u, double amplitude,
                               const std::vector<PulseSpec>& pulses) {
    std::vector<std::pair<double, ScalarSignal>> terms;
    terms.reserve(pulses.size());
    for (const PulseSpec& p : pulses)
        terms.emplace_back(amplitude * u.omega0, ScalarSignal::pulse(p));
    return ScalarSignal::scaled_sum(u.omega0, std::move(terms));
}

nlohmann::json predicate_json(const SuccessPredicate& p) {
    return {{"fidelity_min", p.fidelity_min}, {"mean_tol", p.mean_tol}, {"cov_tol", p.cov_tol}};
}

SuccessPredicate predicate_from_json(const nlohmann::json& j) {
    SuccessPredicate p;
    p.fidelity_min = j.value("fidelity_min", 0.999);
    p.mean_tol = j.value("mean_tol", 1e-3);
    p.cov_tol = j.value("cov_tol", 1e-3);
    return p;
}

} // namespace

nlohmann::json Protocol::to_json() const {
    return {{"name", name},
            {"epsilon", epsilon},
            {"config", cfg.to_json()},
            {"t_end", t_end},
            {"t_m", std::isnan(t_m) ? nlohmann::json() : nlohmann::json(t_m)},
            {"checkpoints", checkpoints},
            {"predicate", predicate_json(predicate)}};
}

Protocol Protocol::from_json(const nlohmann::json& j) {
    Protocol p;
    p.name = j.at("name").get<std::string>();
    p.epsilon = j.at("epsilon").get<double>();
    p.cfg = OscillatorConfig::from_json(j.at("config"));
    p.t_end = j.at("t_end").get<double>();
    if (j.contains("t_m") && !j.at("t_m").is_null()) p.t_m = j.at("t_m").get<double>();
    p.checkpoints = j.value("checkpoints", std::vector<double>{});
    if (j.contains("predicate")) p.predicate = predicate_from_json(j.at("predicate"));
    return p;
}

double optimize_mirror_time(const OscillatorConfig& half_cfg, double last_edge_mid,
                            const ode::Tolerances& tol) {
    const double w0 = half_cfg.omega0();
    const double span = 2.0 * kPi / w0;
    const ErmakovSolution erm = solve_ermakov(half_cfg, last_edge_mid + span + 1.0 / w0, tol);
    const EventResult ev = find_events(erm, EventKind::RhoMax, last_edge_mid, last_edge_mid + span);
    if (ev.degenerate)
        throw std::runtime_error(
            "optimize_mirror_time: rho' is flat over the search window (degenerate event "
            "function); nothing to mirror");
    if (ev.times.empty())
        throw std::runtime_error("optimize_mirror_time: no rho maximum inside search window");
    return ev.times.back();
}

Protocol displacement_protocol(double epsilon, const Units& units,
                               const ode::Tolerances& tol) {
    (void)tol;
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const double w0 = units.omega0;
    const double p0 = std::sqrt(units.hbar * units.mass * w0);

    const PulseSpec up = pulse_from_midpoints(kPi / w0, 2.0 * kPi / w0, epsilon);
    const PulseSpec down = pulse_from_midpoints(3.0 * kPi / w0, 4.0 * kPi / w0, epsilon);

    Protocol p;
    p.name = "displacement";
    p.epsilon = epsilon;
    p.cfg = base_config(units);
    p.cfg.drive = ScalarSignal::scaled_sum(
        0.0, {{2.0 * p0 * w0, ScalarSignal::pulse(up)},
              {-2.0 * p0 * w0, ScalarSignal::pulse(down)}});
    p.cfg.drive_frequency = w0;
    p.cfg.drive_phase = kPi / 2.0;
    p.t_end = (4.0 * kPi + 8.0 / epsilon + 0.5) / w0;
    p.checkpoints = {kPi, 1.5 * kPi, 2.5 * kPi, 3.5 * kPi};
    return p;
}

Protocol squeeze_protocol(double epsilon, const Units& units, const ode::Tolerances& tol) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const double w0 = units.omega0;
    const bool slow = epsilon < 100.0;
    const double rise_mid = (slow ? 0.9 * kPi : 7.0 * kPi / 8.0) / w0;
    const double fall_mid = (slow ? 2.1 * kPi : 17.0 * kPi / 8.0) / w0;

    const PulseSpec first = pulse_from_midpoints(rise_mid, fall_mid, epsilon);
    OscillatorConfig half = base_config(units);
    half.omega = omega_with_pulses(units, 1.0, {first});

    const double t_m = optimize_mirror_time(half, fall_mid, tol);

    const PulseSpec second =
        pulse_from_midpoints(2.0 * t_m - fall_mid, 2.0 * t_m - rise_mid, epsilon);

    Protocol p;
    p.name = "squeeze";
    p.epsilon = epsilon;
    p.cfg = base_config(units);
    p.cfg.omega = omega_with_pulses(units, 1.0, {first, second});
    p.t_m = t_m;
    p.t_end = 2.0 * t_m + 0.5 / w0;
    p.checkpoints = {w0 * rise_mid, w0 * fall_mid, w0 * t_m, w0 * (2.0 * t_m - rise_mid)};
    return p;
}

Protocol single_pulse_return(double epsilon, double amplitude, const Units& units,
                             const ode::Tolerances& tol) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const double w0 = units.omega0;
    const bool slow = epsilon < 100.0;
    const double rise_mid = (slow ? 0.9 * kPi : 7.0 * kPi / 8.0) / w0;

    // rho' at the pulse centre as a function of the midpoint separation;
    // by the pulse's own symmetry a zero here returns rho to equilibrium.
    auto centre_rho_dot = [&](double sep) {
        const PulseSpec pulse = pulse_from_midpoints(rise_mid, rise_mid + sep, epsilon);
        OscillatorConfig cfg = base_config(units);
        cfg.omega = omega_with_pulses(units, amplitude, {pulse});
        const double centre = rise_mid + 0.5 * sep;
        const ErmakovSolution erm = solve_ermakov(cfg, centre + 0.1 / w0, tol);
        return erm.rho_dot(centre);
    };

    const double scan_lo = 0.2 / w0, scan_hi = 2.0 * kPi / w0, step = 0.02 / w0;
    double sep = std::numeric_limits<double>::quiet_NaN();
    double prev_s = scan_lo, prev_g = centre_rho_dot(scan_lo), gmax = std::abs(prev_g);
    for (double s = scan_lo + step; s <= scan_hi; s += step) {
        const double g = centre_rho_dot(s);
        gmax = std::max(gmax, std::abs(g));
        if (prev_g * g < 0.0) {
            double a = prev_s, b = s, fa = prev_g;
            while (b - a > 1e-12) {
                const double mid = 0.5 * (a + b);
                const double fm = centre_rho_dot(mid);
                if (fm == 0.0) {
                    a = b = mid;
                    break;
                }
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            sep = 0.5 * (a + b);
            break;
        }
        prev_s = s;
        prev_g = g;
    }
    if (gmax < 1e-12)
        throw std::runtime_error(
            "single_pulse_return: rho' vanishes for every candidate duration (degenerate "
            "event function); the frequency never leaves its base value");
    if (std::isnan(sep))
        throw std::runtime_error("single_pulse_return: no return duration inside scan window");

    const PulseSpec pulse = pulse_from_midpoints(rise_mid, rise_mid + sep, epsilon);
    Protocol p;
    p.name = "single-pulse";
    p.epsilon = epsilon;
    p.cfg = base_config(units);
    p.cfg.omega = omega_with_pulses(units, amplitude, {pulse});
    p.t_end = rise_mid + sep + (6.0 / epsilon + 0.5 * kPi) / w0;
    p.checkpoints = {w0 * rise_mid, w0 * (rise_mid + 0.5 * sep), w0 * (rise_mid + sep)};
    return p;
}

Protocol train_protocol(double epsilon, const Units& units, const ode::Tolerances& tol) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const double w0 = units.omega0;
    const double amplitude = 0.1;
    const double span = 2.0 * kPi / w0;

    std::vector<PulseSpec> placed;
    double rise_mid = kPi / w0;
    double last_fall = 0.0;

    for (int j = 0; j < 5; ++j) {
        if (j > 0) {
            // next rho maximum after the previous pulse closed
            OscillatorConfig frozen = base_config(units);
            frozen.omega = omega_with_pulses(units, amplitude, placed);
            const ErmakovSolution erm = solve_ermakov(frozen, last_fall + span + 1.0 / w0, tol);
            const EventResult ev =
                find_events(erm, EventKind::RhoMax, last_fall + 1e-3 / w0, last_fall + span);
            if (ev.times.empty())
                throw std::runtime_error("train_protocol: no rho maximum for pulse start");
            rise_mid = ev.times.front();
        }

        // provisional long pulse; its fall is then moved onto the first
        // rho minimum past the rise
        std::vector<PulseSpec> trial = placed;
        trial.push_back(pulse_from_midpoints(rise_mid, rise_mid + 2.0 * span, epsilon));
        OscillatorConfig probe = base_config(units);
        probe.omega = omega_with_pulses(units, amplitude, trial);
        const ErmakovSolution erm = solve_ermakov(probe, rise_mid + span + 1.0 / w0, tol);
        const EventResult ev =
            find_events(erm, EventKind::RhoMin, rise_mid + 1e-3 / w0, rise_mid + span);
        if (ev.times.empty())
            throw std::runtime_error("train_protocol: no rho minimum for pulse end");
        const double fall_mid = ev.times.front();

        placed.push_back(pulse_from_midpoints(rise_mid, fall_mid, epsilon));
        last_fall = fall_mid;
    }

    OscillatorConfig half = base_config(units);
    half.omega = omega_with_pulses(units, amplitude, placed);
    const double t_m = optimize_mirror_time(half, last_fall, tol);

    std::vector<PulseSpec> all = placed;
    for (auto it = placed.rbegin(); it != placed.rend(); ++it)
        all.push_back(pulse_from_midpoints(2.0 * t_m - it->ramp_mid_fall(),
                                           2.0 * t_m - it->ramp_mid_rise(), epsilon));

    Protocol p;
    p.name = "train";
    p.epsilon = epsilon;
    p.cfg = base_config(units);
    p.cfg.omega = omega_with_pulses(units, amplitude, all);
    p.t_m = t_m;
    p.t_end = std::max(2.0 * t_m + 0.5 / w0, 9.2 * kPi / w0);
    p.checkpoints = {kPi, 3.363 * kPi, 5.772 * kPi, 9.136 * kPi};
    return p;
}

} // namespace qho
