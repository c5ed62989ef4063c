#include "qho/ode.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace qho::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;

constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

// Error coefficients (5th order solution minus embedded 4th order).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// Dense output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kSafe = 0.9, kFacMin = 0.2, kFacMax = 10.0;

// Limits a proposed step so the solver never leaps over a ramp window and
// respects the per-window cap once inside it.
double apply_clamps(double t, double h, const std::vector<RampWindow>& clamps) {
    for (const RampWindow& w : clamps) {
        if (t >= w.t_lo && t < w.t_hi) {
            h = std::min(h, w.max_dt);
        } else if (t < w.t_lo && t + h > w.t_lo) {
            // Land on the window edge, or enter with a capped step when the
            // remaining gap is already smaller than the cap.
            h = std::min(h, std::max(w.t_lo - t, w.max_dt));
        }
    }
    return h;
}

bool finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace

Solution::Solution(std::size_t dim, double t_begin)
    : dim_(dim), t_begin_(t_begin), t_end_(t_begin) {}

void Solution::append_segment(double t0, double h, const std::vector<double>& rcont) {
    t0_.push_back(t0);
    h_.push_back(h);
    rcont_.insert(rcont_.end(), rcont.begin(), rcont.end());
}

std::size_t Solution::locate(double t) const {
    const double slack = 1e-9 * std::max(1.0, std::max(std::abs(t_begin_), std::abs(t_end_)));
    if (t < t_begin_ - slack || t > t_end_ + slack)
        throw SolverError("time outside integrated window", t);
    auto it = std::upper_bound(t0_.begin(), t0_.end(), t);
    if (it == t0_.begin()) return 0;
    return static_cast<std::size_t>(it - t0_.begin()) - 1;
}

double Solution::eval(double t, std::size_t comp) const {
    const std::size_t seg = locate(t);
    const double theta = std::clamp((t - t0_[seg]) / h_[seg], 0.0, 1.0);
    const double* r = rcont_.data() + 5 * dim_ * seg + 5 * comp;
    const double th1 = 1.0 - theta;
    return r[0] + theta * (r[1] + th1 * (r[2] + theta * (r[3] + th1 * r[4])));
}

double Solution::eval_derivative(double t, std::size_t comp) const {
    const std::size_t seg = locate(t);
    const double theta = std::clamp((t - t0_[seg]) / h_[seg], 0.0, 1.0);
    const double* r = rcont_.data() + 5 * dim_ * seg + 5 * comp;
    const double du = r[1] + (1.0 - 2.0 * theta) * r[2] + theta * (2.0 - 3.0 * theta) * r[3] +
                      2.0 * theta * (1.0 - theta) * (1.0 - 2.0 * theta) * r[4];
    return du / h_[seg];
}

Solution integrate(const Rhs& rhs, const std::vector<double>& y0, double t0, double t1,
                   const IntegrateOptions& opt) {
    const std::size_t n = y0.size();
    if (!(t1 > t0)) throw SolverError("integration window must satisfy t1 > t0", t0);

    std::vector<double> y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n),
                        ynew(n), rcont(5 * n);
    Solution sol(n, t0);

    double t = t0;
    rhs(t, y.data(), k1.data());
    if (!finite(k1)) throw SolverError("non-finite derivative at initial time", t);

    // Derivative-aware initial step guess (Hairer's hinit, simplified).
    double h;
    {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = opt.tol.atol + opt.tol.rtol * std::abs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        h = std::min(h, 0.1 * (t1 - t0));
    }

    double facmax = kFacMax;
    std::size_t nsteps = 0;

    while (t < t1) {
        if (++nsteps > opt.max_steps) throw SolverError("step limit exceeded", t);

        if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
        double h_try = apply_clamps(t, h, opt.clamps);
        bool last = false;
        if (t + h_try >= t1) {
            h_try = t1 - t;
            last = true;
        }
        if (!(h_try > std::abs(t) * 1e-15 + 1e-300))
            throw SolverError("step size underflow", t);

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h_try * a21 * k1[i];
        rhs(t + c2 * h_try, ytmp.data(), k2.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h_try * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h_try, ytmp.data(), k3.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h_try * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h_try, ytmp.data(), k4.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h_try * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h_try, ytmp.data(), k5.data());
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h_try * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                      a65 * k5[i]);
        rhs(t + h_try, ytmp.data(), k6.data());
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h_try * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                      a76 * k6[i]);
        rhs(t + h_try, ynew.data(), k7.data());

        bool ok = finite(ynew) && finite(k7);
        double err = 0.0;
        if (ok) {
            for (std::size_t i = 0; i < n; ++i) {
                const double ei = h_try * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                           e6 * k6[i] + e7 * k7[i]);
                const double sk =
                    opt.tol.atol + opt.tol.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                err += (ei / sk) * (ei / sk);
            }
            err = std::sqrt(err / static_cast<double>(n));
        } else {
            err = 2.0; // force rejection
        }

        if (err <= 1.0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double dy = ynew[i] - y[i];
                const double bspl = h_try * k1[i] - dy;
                double* r = rcont.data() + 5 * i;
                r[0] = y[i];
                r[1] = dy;
                r[2] = bspl;
                r[3] = dy - h_try * k7[i] - bspl;
                r[4] = h_try * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                                d7 * k7[i]);
            }
            sol.append_segment(t, h_try, rcont);
            t += h_try;
            y.swap(ynew);
            k1.swap(k7); // FSAL
            const double fac =
                (err == 0.0) ? facmax
                             : std::min(facmax, std::max(kFacMin, kSafe * std::pow(err, -0.2)));
            h = h_try * fac;
            facmax = kFacMax;
            if (last) break;
        } else {
            const double fac = std::max(kFacMin, kSafe * std::pow(err, -0.2));
            h = h_try * fac;
            facmax = 1.0;
        }
    }

    sol.set_t_end(t1);
    return sol;
}

} // namespace qho::ode
