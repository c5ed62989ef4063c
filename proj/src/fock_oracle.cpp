#include "qho/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qho/io.hpp"

namespace qho::fock {

using std::complex;
using namespace std::complex_literals;

FockBasis build_basis(std::size_t n, double hbar, double q0, double p0) {
    if (n < 2) throw std::invalid_argument("FockBasis needs n >= 2");
    FockBasis b;
    b.n = n;
    b.hbar = hbar;
    b.q0 = q0;
    b.p0 = p0;
    b.q = Eigen::MatrixXcd::Zero(n, n);
    b.p = Eigen::MatrixXcd::Zero(n, n);
    b.q2 = Eigen::MatrixXcd::Zero(n, n);
    b.p2 = Eigen::MatrixXcd::Zero(n, n);
    b.qp_anti = Eigen::MatrixXcd::Zero(n, n);

    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double root = std::sqrt(static_cast<double>(k + 1));
        b.q(k, k + 1) = q0 * root / std::numbers::sqrt2;
        b.q(k + 1, k) = b.q(k, k + 1);
        b.p(k + 1, k) = 1i * p0 * root / std::numbers::sqrt2;
        b.p(k, k + 1) = -b.p(k + 1, k);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double np = 2.0 * static_cast<double>(k) + 1.0;
        b.q2(k, k) = 0.5 * q0 * q0 * np;
        b.p2(k, k) = 0.5 * p0 * p0 * np;
    }
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const double root = std::sqrt(static_cast<double>((k + 1) * (k + 2)));
        b.q2(k, k + 2) = 0.5 * q0 * q0 * root;
        b.q2(k + 2, k) = b.q2(k, k + 2);
        b.p2(k, k + 2) = -0.5 * p0 * p0 * root;
        b.p2(k + 2, k) = b.p2(k, k + 2);
        b.qp_anti(k + 2, k) = 1i * hbar * root;
        b.qp_anti(k, k + 2) = -b.qp_anti(k + 2, k);
    }

    b.q_re = b.q.real();
    b.q2_re = b.q2.real();
    b.p2_re = b.p2.real();
    return b;
}

FockBasis build_basis(std::size_t n, const OscillatorConfig& cfg) {
    return build_basis(n, cfg.hbar, cfg.q_scale(), cfg.p_scale());
}

TruncationError::TruncationError(double t, std::size_t lvl, double pop)
    : std::runtime_error("truncated basis breached at t = " + io::format_double(t) +
                         ", population above level " + std::to_string(lvl) + " is " +
                         io::format_double(pop)),
      time(t),
      level(lvl),
      population(pop) {}

namespace {

// One eigendecomposition, reused while the step generator stays bitwise
// identical (plateaus of the signals).
struct StepCache {
    double c = std::numeric_limits<double>::quiet_NaN();
    double l = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd vec;
    Eigen::VectorXd val;
};

void apply_real_generator(const FockBasis& b, double c, double l, double dt_over_hbar,
                          double mass, Eigen::VectorXcd& psi, StepCache& cache) {
    if (!(c == cache.c) || !(l == cache.l)) {
        Eigen::MatrixXd h = b.p2_re / (2.0 * mass) + (0.5 * mass * c) * b.q2_re + l * b.q_re;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        cache.vec = es.eigenvectors();
        cache.val = es.eigenvalues();
        cache.c = c;
        cache.l = l;
    }
    Eigen::VectorXcd w = cache.vec.transpose() * psi;
    for (Eigen::Index k = 0; k < w.size(); ++k)
        w(k) *= std::exp(complex<double>(0.0, -cache.val(k) * dt_over_hbar));
    psi = cache.vec * w;
}

double signal_max_on(const ScalarSignal& s, double t0, double t1) {
    double m = 0.0;
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) {
        const double t = t0 + (t1 - t0) * i / static_cast<double>(samples);
        m = std::max(m, std::abs(s.value(t)));
    }
    // Plateau values can slip between samples for steep ramps; pulse
    // midpoints pin them down.
    for (const PulseSpec& p : s.pulses()) {
        const double mid = 0.5 * (p.t_start + p.t_end);
        if (mid > t0 && mid < t1) m = std::max(m, std::abs(s.value(mid)));
    }
    return m;
}

double clamp_step(double t, double dt, const std::vector<RampWindow>& windows) {
    for (const RampWindow& w : windows) {
        if (t >= w.t_lo && t < w.t_hi)
            dt = std::min(dt, w.max_dt);
        else if (t < w.t_lo && t + dt > w.t_lo)
            dt = std::min(dt, std::max(w.t_lo - t, w.max_dt));
    }
    return dt;
}

} // namespace

FockTrajectory evolve(const FockBasis& basis, const OscillatorConfig& cfg,
                      const Eigen::VectorXcd& psi0, const std::vector<double>& sample_times,
                      const EvolveOptions& opt) {
    cfg.validate();
    if (sample_times.empty()) throw std::invalid_argument("evolve: no sample times");
    for (std::size_t i = 0; i + 1 < sample_times.size(); ++i)
        if (!(sample_times[i] < sample_times[i + 1]))
            throw std::invalid_argument("evolve: sample times must increase");
    if (!(sample_times.front() >= 0.0))
        throw std::invalid_argument("evolve: sample times must be >= 0");

    const double t_final = sample_times.back();
    const double w_max = std::max(signal_max_on(cfg.omega, 0.0, t_final), cfg.omega0());
    const double base_dt =
        opt.dt_scale * 2.0 * std::numbers::pi / (opt.steps_per_period * w_max);

    std::vector<RampWindow> windows = cfg.omega.ramp_windows();
    for (const RampWindow& w : cfg.drive.ramp_windows()) windows.push_back(w);
    for (RampWindow& w : windows) w.max_dt *= opt.dt_scale;

    const double m = cfg.mass;
    const double hbar = cfg.hbar;
    // Gauss-Legendre nodes and the 4th-order commutator-free pair weights.
    const double node = std::numbers::sqrt3 / 6.0;
    const double x1 = (3.0 - 2.0 * std::numbers::sqrt3) / 12.0;
    const double x2 = (3.0 + 2.0 * std::numbers::sqrt3) / 12.0;

    // at least two levels so even-parity states cannot hide in an odd top slot
    const std::size_t monitor_from = basis.n - std::max<std::size_t>(basis.n / 10, 2);

    auto drive_at = [&cfg](double t) {
        return cfg.drive.value(t) * std::cos(cfg.drive_frequency * t + cfg.drive_phase);
    };

    FockTrajectory traj;
    Eigen::VectorXcd psi = psi0;
    StepCache cache;
    double t = 0.0;
    std::size_t next_sample = 0;

    while (next_sample < sample_times.size() && sample_times[next_sample] <= t) {
        traj.times.push_back(sample_times[next_sample]);
        traj.states.push_back(psi);
        ++next_sample;
    }

    while (next_sample < sample_times.size()) {
        const double target = sample_times[next_sample];
        double dt = clamp_step(t, base_dt, windows);
        bool landing = false;
        if (t + dt >= target - 1e-14) {
            dt = target - t;
            landing = true;
        }

        const double ta = t + (0.5 - node) * dt;
        const double tb = t + (0.5 + node) * dt;
        const double wa = cfg.omega.value(ta), wb = cfg.omega.value(tb);
        const double la = drive_at(ta), lb = drive_at(tb);

        // Right exponential first, then left; each carries half the step.
        apply_real_generator(basis, 2.0 * (x2 * wa * wa + x1 * wb * wb),
                             2.0 * (x2 * la + x1 * lb), 0.5 * dt / hbar, m, psi, cache);
        apply_real_generator(basis, 2.0 * (x1 * wa * wa + x2 * wb * wb),
                             2.0 * (x1 * la + x2 * lb), 0.5 * dt / hbar, m, psi, cache);
        t = landing ? target : t + dt;

        double tail = 0.0;
        for (std::size_t k = monitor_from; k < basis.n; ++k) tail += std::norm(psi(k));
        if (tail > opt.truncation_threshold) throw TruncationError(t, monitor_from, tail);

        if (landing) {
            traj.times.push_back(target);
            traj.states.push_back(psi);
            ++next_sample;
        }
    }
    return traj;
}

Eigen::VectorXcd ground_state(const FockBasis& basis) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(basis.n);
    psi(0) = 1.0;
    return psi;
}

FockMoments moments(const FockBasis& basis, const Eigen::VectorXcd& psi) {
    FockMoments m;
    m.mean_q = std::real(psi.dot(basis.q * psi));
    m.mean_p = std::real(psi.dot(basis.p * psi));
    const double q2 = std::real(psi.dot(basis.q2 * psi));
    const double p2 = std::real(psi.dot(basis.p2 * psi));
    const double anti = std::real(psi.dot(basis.qp_anti * psi));
    m.var_q = q2 - m.mean_q * m.mean_q;
    m.var_p = p2 - m.mean_p * m.mean_p;
    m.cov_qp = 0.5 * anti - m.mean_q * m.mean_p;
    return m;
}

double mean_energy(const FockBasis& basis, const OscillatorConfig& cfg,
                   const Eigen::VectorXcd& psi, double t) {
    const double w = cfg.omega.value(t);
    const double f = cfg.drive.value(t) * std::cos(cfg.drive_frequency * t + cfg.drive_phase);
    const double p2 = std::real(psi.dot(basis.p2 * psi));
    const double q2 = std::real(psi.dot(basis.q2 * psi));
    const double q1 = std::real(psi.dot(basis.q * psi));
    return p2 / (2.0 * cfg.mass) + 0.5 * cfg.mass * w * w * q2 + f * q1;
}

double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return std::abs(a.dot(b));
}

Eigen::VectorXcd apply_exp_neg_i(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& psi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    Eigen::VectorXcd w = es.eigenvectors().adjoint() * psi;
    for (Eigen::Index k = 0; k < w.size(); ++k)
        w(k) *= std::exp(complex<double>(0.0, -es.eigenvalues()(k)));
    return es.eigenvectors() * w;
}

Eigen::VectorXcd state_from_factors(const FockBasis& basis, const LieFactors& f) {
    const double hbar = basis.hbar;
    Eigen::VectorXcd psi = ground_state(basis);
    if (f.beta_q_lead != 0.0)
        psi = apply_exp_neg_i(basis.p * (f.beta_q_lead / hbar), psi);
    psi = apply_exp_neg_i(
        (basis.q2 * (f.phi_q * f.phi_q) + basis.p2 * (f.phi_p * f.phi_p)) / hbar, psi);
    if (f.r != 0.0) psi = apply_exp_neg_i(basis.qp_anti * (f.r / hbar), psi);
    if (f.theta_q != 0.0) psi = apply_exp_neg_i(basis.q2 * (f.theta_q / hbar), psi);
    if (f.beta_q != 0.0 || f.beta_p != 0.0)
        psi = apply_exp_neg_i((basis.q * f.beta_p + basis.p * f.beta_q) / hbar, psi);
    return psi;
}

double husimi_fock_at(const Eigen::VectorXcd& psi, double q_over_q0, double p_over_p0) {
    const complex<double> alpha_bar(q_over_q0 / std::numbers::sqrt2,
                                    -p_over_p0 / std::numbers::sqrt2);
    const double a2 = std::norm(alpha_bar);
    complex<double> term = std::exp(-0.5 * a2);
    complex<double> overlap = term * psi(0);
    for (Eigen::Index k = 1; k < psi.size(); ++k) {
        term *= alpha_bar / std::sqrt(static_cast<double>(k));
        overlap += term * psi(k);
    }
    return std::norm(overlap) / std::numbers::pi;
}

HusimiField husimi_fock(const FockBasis& basis, const Eigen::VectorXcd& psi,
                        const GridSpec& grid) {
    (void)basis;
    grid.validate();
    HusimiField field{grid, {}};
    field.values.resize(grid.nq * grid.np);
    for (std::size_t j = 0; j < grid.np; ++j)
        for (std::size_t i = 0; i < grid.nq; ++i)
            field.values[j * grid.nq + i] = husimi_fock_at(psi, grid.q_at(i), grid.p_at(j));
    return field;
}

void export_oracle_trajectory(std::ostream& out, const FockBasis& basis,
                              const FockTrajectory& traj,
                              const std::vector<Eigen::VectorXcd>& factorized,
                              double omega0) {
    out << "t,mean_q,mean_p,var_q,var_p,cov_qp,fidelity_vs_factorized\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const FockMoments m = moments(basis, traj.states[i]);
        const double fid =
            factorized.empty() ? 0.0 : fidelity(traj.states[i], factorized[i]);
        out << io::format_double(omega0 * traj.times[i]) << ',' << io::format_double(m.mean_q)
            << ',' << io::format_double(m.mean_p) << ',' << io::format_double(m.var_q) << ','
            << io::format_double(m.var_p) << ',' << io::format_double(m.cov_qp) << ','
            << io::format_double(fid) << '\n';
    }
}

} // namespace qho::fock
