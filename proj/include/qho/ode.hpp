#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "qho/signals.hpp"

namespace qho::ode {

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time;
};

using Rhs = std::function<void(double t, const double* y, double* dydt)>;

// Dense trajectory from an adaptive Dormand-Prince 5(4) run.  Each accepted
// step stores the quartic interpolant coefficients, so any time inside the
// window can be evaluated without re-integrating.
class Solution {
public:
    Solution(std::size_t dim, double t_begin);

    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    std::size_t dim() const { return dim_; }
    std::size_t steps() const { return t0_.size(); }

    // Throws SolverError when t lies outside [t_begin, t_end] beyond a
    // small rounding slack.
    double eval(double t, std::size_t comp) const;
    double eval_derivative(double t, std::size_t comp) const;

    void append_segment(double t0, double h, const std::vector<double>& rcont);
    void set_t_end(double t) { t_end_ = t; }

private:
    std::size_t locate(double t) const;

    std::size_t dim_;
    double t_begin_;
    double t_end_;
    std::vector<double> t0_;    // per segment
    std::vector<double> h_;     // per segment
    std::vector<double> rcont_; // 5 * dim per segment
};

struct IntegrateOptions {
    Tolerances tol;
    std::vector<RampWindow> clamps; // step caps around steep ramps
    double max_step = 0.0;          // 0 = no global cap
    std::size_t max_steps = 20'000'000;
};

Solution integrate(const Rhs& rhs, const std::vector<double>& y0, double t0, double t1,
                   const IntegrateOptions& opt = {});

} // namespace qho::ode
