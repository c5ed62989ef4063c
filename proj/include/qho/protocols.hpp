#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "qho/dynamics.hpp"

namespace qho {

struct Units {
    double mass = 1.0;
    double hbar = 1.0;
    double omega0 = 1.0;
};

struct SuccessPredicate {
    double fidelity_min = 0.999;
    double mean_tol = 1e-3;  // in q0 / p0 units
    double cov_tol = 1e-3;   // relative to vacuum scale
};

// A ready-to-run pulse sequence: oscillator signals, evaluation window, the
// mirror point when one exists, and display checkpoints in w0*t.
struct Protocol {
    std::string name;
    double epsilon = 1.0;
    OscillatorConfig cfg;
    double t_end = 0.0;
    double t_m = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> checkpoints;
    SuccessPredicate predicate;

    nlohmann::json to_json() const;
    static Protocol from_json(const nlohmann::json& j);
};

// Two opposite-sign resonant drive pulses with ramp midpoints at
// w0 t = pi, 2pi, 3pi, 4pi; the state is kicked to ~pi p0 and kicked back.
Protocol displacement_protocol(double epsilon, const Units& units = {},
                               const ode::Tolerances& tol = {});

// Frequency doubled over one pulse, mirrored second pulse about t_m.  The
// first-pulse ramp midpoints follow the slow convention (9pi/10, 21pi/10)
// below epsilon = 100 and the fast one (7pi/8, 17pi/8) at or above it.
Protocol squeeze_protocol(double epsilon, const Units& units = {},
                          const ode::Tolerances& tol = {});

// One frequency pulse whose duration is tuned so squeezing created on the
// way in is taken back on the way out: rho' vanishes at the pulse centre.
Protocol single_pulse_return(double epsilon, double amplitude = 1.0,
                             const Units& units = {}, const ode::Tolerances& tol = {});

// Ten weak pulses (amplitude 0.1): five placed greedily with rises on rho
// maxima and falls on rho minima, then five mirrored about t_m.
Protocol train_protocol(double epsilon, const Units& units = {},
                        const ode::Tolerances& tol = {});

// Last rho maximum within one period past the last placed pulse edge; the
// second protocol half is reflected about this time.  Maxima recur every
// pi/omega0 once the frequency settles, so the window boundary is never
// ambiguous the way a raw rho'-zero (pi/2 spacing) would be.
double optimize_mirror_time(const OscillatorConfig& half_cfg, double last_edge_mid,
                            const ode::Tolerances& tol = {});

} // namespace qho
