#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qho {

// Smoothed rectangular window built from two error-function ramps.  The
// ramp midpoints sit at t_start + 3/epsilon and t_end - 3/epsilon, so the
// window saturates to 1 on the plateau between them and to 0 outside.
struct PulseSpec {
    double t_start = 0.0;
    double t_end = 0.0;
    double epsilon = 1.0;

    double ramp_mid_rise() const { return t_start + 3.0 / epsilon; }
    double ramp_mid_fall() const { return t_end - 3.0 / epsilon; }
    void validate() const; // throws std::invalid_argument naming the bad field
};

// Convenience builder: pulse whose ramp midpoints are placed at the given
// times, i.e. t_start = mid_rise - 3/epsilon, t_end = mid_fall + 3/epsilon.
PulseSpec pulse_from_midpoints(double mid_rise, double mid_fall, double epsilon);

double theta(double t, const PulseSpec& spec);
double theta_derivative(double t, const PulseSpec& spec);

// Time interval on which the integrators cap their step size to resolve a
// steep ramp.
struct RampWindow {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double max_dt = 0.0;
};

// Immutable scalar function of time: a constant, a pulse, or a scaled sum
// offset + sum_j coeff_j * term_j.  Copies share structure.
class ScalarSignal {
public:
    ScalarSignal(); // constant 0

    static ScalarSignal constant(double value);
    static ScalarSignal pulse(const PulseSpec& spec);
    static ScalarSignal scaled_sum(double offset,
                                   std::vector<std::pair<double, ScalarSignal>> terms);

    double value(double t) const;
    double derivative(double t) const;

    // One window per ramp of every pulse in the tree, widened to 6/epsilon
    // on each side of the pulse edge, with max_dt = 0.1/epsilon.
    std::vector<RampWindow> ramp_windows() const;

    // All pulses in the tree, in traversal order.
    std::vector<PulseSpec> pulses() const;

    nlohmann::json to_json() const;
    static ScalarSignal from_json(const nlohmann::json& j);

    struct Node;

private:
    explicit ScalarSignal(std::shared_ptr<const Node> root);
    std::shared_ptr<const Node> root_;
};

} // namespace qho
