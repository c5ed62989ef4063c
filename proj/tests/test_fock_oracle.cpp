#include <cmath>
#include <complex>

#include <doctest.h>

#include "qho/fock_oracle.hpp"
#include "qho/liegroup.hpp"
#include "qho/protocols.hpp"

using namespace qho;
using fock::FockBasis;

TEST_CASE("ladder matrices reproduce the two-level position operator") {
    OscillatorConfig cfg;
    const FockBasis basis = fock::build_basis(2, cfg);
    const double v = cfg.q_scale() / std::numbers::sqrt2;
    CHECK(std::abs(basis.q(0, 1) - v) <= 1e-15);
    CHECK(std::abs(basis.q(1, 0) - v) <= 1e-15);
    CHECK(std::abs(basis.q(0, 0)) <= 1e-15);
    CHECK(std::abs(basis.p(0, 1) - std::complex<double>(0.0, -cfg.p_scale() / std::numbers::sqrt2)) <=
          1e-15);
}

TEST_CASE("ground-state second moments carry the vacuum widths") {
    OscillatorConfig cfg;
    cfg.mass = 1.7;
    const FockBasis basis = fock::build_basis(64, cfg);
    const Eigen::VectorXcd g = fock::ground_state(basis);
    const fock::FockMoments m = fock::moments(basis, g);
    CHECK(m.mean_q == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(m.mean_p == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(m.var_q == doctest::Approx(0.5 * cfg.q_scale() * cfg.q_scale()).epsilon(1e-13));
    CHECK(m.var_p == doctest::Approx(0.5 * cfg.p_scale() * cfg.p_scale()).epsilon(1e-13));
    CHECK(m.cov_qp == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fock::mean_energy(basis, cfg, g, 0.0) ==
          doctest::Approx(0.5 * cfg.hbar * cfg.omega0()).epsilon(1e-13));
}

TEST_CASE("canonical commutators hold on the leading block") {
    OscillatorConfig cfg;
    const std::size_t n = 64;
    const FockBasis basis = fock::build_basis(n, cfg);
    const double q0 = cfg.q_scale(), p0 = cfg.p_scale(), hbar = cfg.hbar, w0 = cfg.omega0();

    Eigen::MatrixXcd a(n, n), num(n, n), h0(n, n);
    a = (basis.q / q0 + std::complex<double>(0.0, 1.0) * basis.p / p0) / std::numbers::sqrt2;
    const Eigen::MatrixXcd ad = a.adjoint();
    num = ad * a;
    h0 = basis.p2 / (2.0 * cfg.mass) + 0.5 * cfg.mass * w0 * w0 * basis.q2;

    auto comm = [](const Eigen::MatrixXcd& x, const Eigen::MatrixXcd& y) {
        return (x * y - y * x).eval();
    };
    const std::size_t lead = n / 2;
    auto check_block = [&](const Eigen::MatrixXcd& got, const Eigen::MatrixXcd& want) {
        const double err =
            (got.topLeftCorner(lead, lead) - want.topLeftCorner(lead, lead)).cwiseAbs().maxCoeff();
        CHECK(err <= 1e-10);
    };
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
    const std::complex<double> i1(0.0, 1.0);

    check_block(comm(basis.q, basis.p), i1 * hbar * id);
    check_block(comm(a, ad), id);
    check_block(comm(num, a), -a);
    check_block(comm(num, ad), ad);
    check_block(comm(basis.q2, basis.p), 2.0 * i1 * hbar * basis.q);
    check_block(comm(basis.p2, basis.q), -2.0 * i1 * hbar * basis.p);
    check_block(comm(h0, a), -hbar * w0 * a);
    check_block(comm(h0, ad), hbar * w0 * ad);
}

TEST_CASE("ground state is stationary under the propagator") {
    OscillatorConfig cfg;
    const FockBasis basis = fock::build_basis(32, cfg);
    const Eigen::VectorXcd g = fock::ground_state(basis);
    const fock::FockTrajectory traj = fock::evolve(basis, cfg, g, {2.5, 10.0});
    for (const Eigen::VectorXcd& psi : traj.states) {
        CHECK(fock::fidelity(psi, g) >= 1.0 - 1e-10);
        CHECK(std::abs(psi.norm() - 1.0) <= 1e-10);
    }
}

TEST_CASE("driven mean position tracks the classical response") {
    OscillatorConfig cfg;
    cfg.drive = ScalarSignal::constant(0.25);
    cfg.drive_frequency = 1.0;
    const double t_end = 4.0 * std::numbers::pi;
    const FockBasis basis = fock::build_basis(96, cfg);
    std::vector<double> ts;
    for (int k = 0; k <= 32; ++k) ts.push_back(t_end * k / 32.0);
    const fock::FockTrajectory traj = fock::evolve(basis, cfg, fock::ground_state(basis), ts);
    const DriveSolution drv = solve_drive(cfg, t_end);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const fock::FockMoments m = fock::moments(basis, traj.states[k]);
        // mean follows beta_q up to the frozen initial offset beta_q(0)
        const double ref = drv.beta_q(ts[k]) - drv.beta_q(0.0) * std::cos(ts[k]);
        CHECK(std::abs(m.mean_q - ref) <= 1e-6 * cfg.q_scale());
    }
}

TEST_CASE("squeezed vacuum overlap takes the closed form") {
    OscillatorConfig cfg;
    const FockBasis basis = fock::build_basis(128, cfg);
    LieFactors f;
    f.r = 0.25;
    const Eigen::VectorXcd sq = fock::state_from_factors(basis, f);
    CHECK(fock::fidelity(fock::ground_state(basis), sq) ==
          doctest::Approx(0.9417106158316757).epsilon(1e-10));
    // even levels only
    CHECK(std::abs(sq(1)) <= 1e-14);
    CHECK(std::abs(sq(3)) <= 1e-14);
    f.r = 0.5 * std::log(2.0);
    CHECK(fock::fidelity(fock::ground_state(basis), fock::state_from_factors(basis, f)) ==
          doctest::Approx(0.8944271909999159).epsilon(1e-10));
}

TEST_CASE("norm and energy stay put across a full protocol evolution") {
    const Protocol p = squeeze_protocol(1000.0);
    const FockBasis basis = fock::build_basis(128, p.cfg);
    std::vector<double> ts;
    for (int k = 0; k <= 24; ++k) ts.push_back(p.t_end * k / 24.0);
    const fock::FockTrajectory traj = fock::evolve(basis, p.cfg, fock::ground_state(basis), ts);
    for (const Eigen::VectorXcd& psi : traj.states) CHECK(std::abs(psi.norm() - 1.0) <= 1e-10);
    // pulse undone: back to the ground-state energy
    const double e_end = fock::mean_energy(basis, p.cfg, traj.states.back(), p.t_end);
    CHECK(std::abs(e_end - 0.5) <= 2e-3);
    CHECK(fock::fidelity(traj.states.back(), fock::ground_state(basis)) >= 0.999);
}

TEST_CASE("a too-small basis trips the truncation monitor") {
    const Protocol p = squeeze_protocol(1000.0);
    const FockBasis basis = fock::build_basis(16, p.cfg);
    std::vector<double> ts{0.0, p.t_end};
    CHECK_THROWS_AS(fock::evolve(basis, p.cfg, fock::ground_state(basis), ts),
                    fock::TruncationError);
    try {
        fock::evolve(basis, p.cfg, fock::ground_state(basis), ts);
    } catch (const fock::TruncationError& e) {
        CHECK(e.level == 14);
        CHECK(e.population > 1e-8);
        CHECK(e.time > 0.0);
    }
}

TEST_CASE("oracle export writes the pinned header") {
    OscillatorConfig cfg;
    const FockBasis basis = fock::build_basis(16, cfg);
    const Eigen::VectorXcd g = fock::ground_state(basis);
    const fock::FockTrajectory traj = fock::evolve(basis, cfg, g, {0.0, 1.0});
    std::ostringstream out;
    fock::export_oracle_trajectory(out, basis, traj, {g, g}, cfg.omega0());
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,mean_q,mean_p,var_q,var_p,cov_qp,fidelity_vs_factorized");
}
