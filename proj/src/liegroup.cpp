#include "qho/liegroup.hpp"

#include <cmath>

#include "qho/io.hpp"

namespace qho {

namespace {

// cos(sqrt(s)) and sin(sqrt(s))/sqrt(s) continued through s <= 0, where they
// turn hyperbolic; series branch near zero keeps both smooth.
double cos_sqrt(double s) {
    if (std::abs(s) < 1e-8) return 1.0 - s / 2.0 + s * s / 24.0;
    if (s > 0.0) return std::cos(std::sqrt(s));
    return std::cosh(std::sqrt(-s));
}

double sinc_sqrt(double s) {
    if (std::abs(s) < 1e-8) return 1.0 - s / 6.0 + s * s / 120.0;
    if (s > 0.0) {
        const double x = std::sqrt(s);
        return std::sin(x) / x;
    }
    const double x = std::sqrt(-s);
    return std::sinh(x) / x;
}

} // namespace

AffineSymplectic compose(const AffineSymplectic& outer, const AffineSymplectic& inner) {
    AffineSymplectic out;
    out.M = outer.M * inner.M;
    out.d = outer.M * inner.d + outer.d;
    return out;
}

AffineSymplectic displacement_map(double beta_q, double beta_p) {
    AffineSymplectic out;
    out.d << beta_q, -beta_p;
    return out;
}

AffineSymplectic rotation_map(double c_q, double c_p) {
    const double s = 4.0 * c_q * c_p;
    const double c = cos_sqrt(s);
    const double sc = sinc_sqrt(s);
    AffineSymplectic out;
    out.M << c, 2.0 * c_p * sc, -2.0 * c_q * sc, c;
    return out;
}

AffineSymplectic squeeze_map(double r) {
    AffineSymplectic out;
    out.M << std::exp(2.0 * r), 0.0, 0.0, std::exp(-2.0 * r);
    return out;
}

GaussianState GaussianState::vacuum(const OscillatorConfig& cfg) {
    GaussianState st;
    st.q0 = cfg.q_scale();
    st.p0 = cfg.p_scale();
    st.cov << 0.5 * st.q0 * st.q0, 0.0, 0.0, 0.5 * st.p0 * st.p0;
    return st;
}

LieFactors assemble_factorization(const ErmakovSolution& erm, const DriveSolution& drv,
                                  const OscillatorConfig& cfg, double t) {
    LieFactors f;
    f.beta_q = drv.beta_q(t);
    f.beta_p = drv.beta_p(t);
    f.theta_q = erm.theta_q(t);
    f.r = erm.r(t);
    f.phi_q = std::sqrt(erm.phi_q2(t));
    f.phi_p = std::sqrt(erm.phi_p2(t));
    f.phase_integral = drv.phase_integral(t);
    const double w0 = cfg.omega0();
    f.beta_q_lead =
        cfg.drive.value(0.0) * std::cos(cfg.drive_phase) / (cfg.mass * w0 * w0);
    return f;
}

AffineSymplectic total_map(const LieFactors& f) {
    AffineSymplectic map = displacement_map(f.beta_q_lead, 0.0);
    map = compose(rotation_map(f.phi_q * f.phi_q, f.phi_p * f.phi_p), map);
    map = compose(squeeze_map(f.r), map);
    map = compose(rotation_map(f.theta_q, 0.0), map);
    map = compose(displacement_map(f.beta_q, f.beta_p), map);
    return map;
}

GaussianState propagate_gaussian(const GaussianState& in, const LieFactors& f, double hbar) {
    const AffineSymplectic map = total_map(f);
    GaussianState out = in;
    out.mean = map.apply(in.mean);
    out.cov = map.M * in.cov * map.M.transpose();
    out.phase = in.phase - f.phase_integral / hbar;
    return out;
}

Moments expectation_qp(const LieFactors& f, double mean_q0, double mean_p0) {
    // Scalar transcription of the factored Heisenberg action; no matrix
    // algebra shared with total_map.
    const double q_in = mean_q0 + f.beta_q_lead;
    const double p_in = mean_p0;
    const double x = 2.0 * f.phi_q * f.phi_p;
    const double c = std::cos(x);
    const double s = std::sin(x);
    const double e2r = std::exp(2.0 * f.r);
    const double em2r = std::exp(-2.0 * f.r);
    const double ratio_pq = (std::abs(f.phi_q) > 1e-12) ? (f.phi_p / f.phi_q) * s
                                                        : 2.0 * f.phi_p * f.phi_p;
    const double ratio_qp = (std::abs(f.phi_p) > 1e-12) ? (f.phi_q / f.phi_p) * s
                                                        : 2.0 * f.phi_q * f.phi_q;
    const double shear = 2.0 * f.theta_q;

    Moments out;
    out.mean_q = (c * q_in + ratio_pq * p_in) * e2r + f.beta_q;
    out.mean_p = (c * em2r - shear * ratio_pq * e2r) * p_in -
                 (ratio_qp * em2r + shear * c * e2r) * q_in - f.beta_p;
    return out;
}

void export_factors(std::ostream& out, const ErmakovSolution& erm, const DriveSolution& drv,
                    const OscillatorConfig& cfg, const std::vector<double>& times) {
    const double w0 = cfg.omega0();
    out << "t,beta_q,beta_p,theta_q,r,phi_q,phi_p,L\n";
    for (double t : times) {
        const LieFactors f = assemble_factorization(erm, drv, cfg, t);
        out << io::format_double(w0 * t) << ',' << io::format_double(f.beta_q) << ','
            << io::format_double(f.beta_p) << ',' << io::format_double(f.theta_q) << ','
            << io::format_double(f.r) << ',' << io::format_double(f.phi_q) << ','
            << io::format_double(f.phi_p) << ',' << io::format_double(f.phase_integral)
            << '\n';
    }
}

} // namespace qho
