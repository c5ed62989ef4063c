#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qho/dynamics.hpp"
#include "qho/fock_oracle.hpp"
#include "qho/io.hpp"
#include "qho/liegroup.hpp"
#include "qho/phasespace.hpp"
#include "qho/protocols.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// exit codes: 0 ok, 2 config, 3 solver, 4 out-of-window time, 5 threshold
// breach, 6 truncation breach
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kWindowError = 4;
constexpr int kThresholdError = 5;
constexpr int kTruncationError = 6;

struct CommonOpts {
    std::string protocol;
    double epsilon = 2.0;
    std::string config_path;
    std::string out_dir;
    double rtol = 1e-10;
    double atol = 1e-12;
    double sample_dt = 0.1; // in omega0*t units
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--protocol", o.protocol, "displacement|squeeze|single-pulse|train");
    cmd->add_option("--epsilon", o.epsilon, "ramp steepness");
    cmd->add_option("--config", o.config_path, "protocol JSON instead of --protocol");
    cmd->add_option("--out", o.out_dir, "output directory (default $QHO_OUT_DIR or .)");
    cmd->add_option("--rtol", o.rtol, "solver relative tolerance");
    cmd->add_option("--atol", o.atol, "solver absolute tolerance");
    cmd->add_option("--sample-dt", o.sample_dt, "output sample spacing in w0*t");
}

fs::path resolve_out_dir(const CommonOpts& o) {
    std::string dir = o.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("QHO_OUT_DIR")) dir = env;
        if (dir.empty()) dir = ".";
    }
    fs::create_directories(dir);
    return dir;
}

qho::Protocol resolve_protocol(const CommonOpts& o) {
    if (!o.config_path.empty()) {
        qho::Protocol p = qho::Protocol::from_json(json::parse(qho::io::read_file(o.config_path)));
        p.cfg.validate();
        return p;
    }
    const qho::ode::Tolerances tol{o.rtol, o.atol};
    if (o.protocol == "displacement") return qho::displacement_protocol(o.epsilon, {}, tol);
    if (o.protocol == "squeeze") return qho::squeeze_protocol(o.epsilon, {}, tol);
    if (o.protocol == "single-pulse") return qho::single_pulse_return(o.epsilon, 1.0, {}, tol);
    if (o.protocol == "train") return qho::train_protocol(o.epsilon, {}, tol);
    throw std::invalid_argument("protocol must be one of displacement|squeeze|single-pulse|train "
                                "(or pass --config)");
}

std::vector<double> sample_times(const qho::Protocol& p, double sample_dt) {
    const double w0 = p.cfg.omega0();
    std::vector<double> ts;
    const double step = sample_dt / w0;
    for (double t = 0.0; t < p.t_end; t += step) ts.push_back(t);
    ts.push_back(p.t_end);
    return ts;
}

json pulses_json(const qho::ScalarSignal& sig) {
    json arr = json::array();
    for (const qho::PulseSpec& ps : sig.pulses())
        arr.push_back({{"t_start", ps.t_start},
                       {"t_end", ps.t_end},
                       {"epsilon", ps.epsilon},
                       {"ramp_mid_rise", ps.ramp_mid_rise()},
                       {"ramp_mid_fall", ps.ramp_mid_fall()}});
    return arr;
}

struct ArtifactWriter {
    fs::path dir;
    std::map<std::string, std::string> hashes;

    void write(const std::string& name, std::string_view data) {
        qho::io::write_file((dir / name).string(), data);
        hashes[name] = qho::io::fnv1a64_hex(data);
    }

    json hashes_json() const {
        json j = json::object();
        for (const auto& [k, v] : hashes) j[k] = v;
        return j;
    }
};

json manifest_base(const std::string& command, const qho::Protocol& p, const CommonOpts& o) {
    return {{"command", command},
            {"protocol", p.to_json()},
            {"epsilon", p.epsilon},
            {"tolerances", {{"rtol", o.rtol}, {"atol", o.atol}}},
            {"resolved_pulses",
             {{"omega", pulses_json(p.cfg.omega)}, {"drive", pulses_json(p.cfg.drive)}}},
            {"t_m", std::isnan(p.t_m) ? json() : json(p.t_m)},
            {"t_end", p.t_end}};
}

int cmd_simulate(const CommonOpts& o) {
    const qho::Protocol p = resolve_protocol(o);
    const qho::ode::Tolerances tol{o.rtol, o.atol};
    const qho::ErmakovSolution erm = qho::solve_ermakov(p.cfg, p.t_end, tol);
    const qho::DriveSolution drv = qho::solve_drive(p.cfg, p.t_end, tol);
    const std::vector<double> ts = sample_times(p, o.sample_dt);

    ArtifactWriter out{resolve_out_dir(o)};
    {
        std::ostringstream csv;
        qho::export_trajectory(csv, erm, drv, ts, p.cfg.omega0());
        out.write("trajectory.csv", csv.str());
    }
    {
        std::ostringstream csv;
        qho::export_factors(csv, erm, drv, p.cfg, ts);
        out.write("factors.csv", csv.str());
    }
    json manifest = manifest_base("simulate", p, o);
    manifest["samples"] = ts.size();
    manifest["sample_dt"] = o.sample_dt;
    manifest["artifacts"] = out.hashes_json();
    out.write("manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (out.dir / "manifest.json").string() << "\n";
    return kOk;
}

int cmd_husimi(const CommonOpts& o, std::vector<double> times_w0t, const std::string& grid_str) {
    qho::GridSpec grid;
    if (!grid_str.empty()) {
        std::istringstream in(grid_str);
        char c = ',';
        long nq = 0, np = 0;
        if (!(in >> grid.q_min >> c >> grid.q_max >> c >> grid.p_min >> c >> grid.p_max >> c >>
              nq >> c >> np) ||
            nq < 2 || np < 2)
            throw std::invalid_argument("grid must be qmin,qmax,pmin,pmax,nq,np with nq,np >= 2");
        grid.nq = static_cast<std::size_t>(nq);
        grid.np = static_cast<std::size_t>(np);
    }
    grid.validate();

    const qho::Protocol p = resolve_protocol(o);
    const double w0 = p.cfg.omega0();
    if (times_w0t.empty()) times_w0t = p.checkpoints;
    for (double wt : times_w0t) {
        if (wt < 0.0 || wt > w0 * p.t_end + 1e-12) {
            std::cerr << "time w0*t = " << wt << " outside protocol window [0, " << w0 * p.t_end
                      << "]\n";
            return kWindowError;
        }
    }

    const qho::ode::Tolerances tol{o.rtol, o.atol};
    const qho::ErmakovSolution erm = qho::solve_ermakov(p.cfg, p.t_end, tol);
    const qho::DriveSolution drv = qho::solve_drive(p.cfg, p.t_end, tol);

    ArtifactWriter out{resolve_out_dir(o)};
    json manifest = manifest_base("husimi", p, o);
    json snaps = json::array();
    for (double wt : times_w0t) {
        const double t = wt / w0;
        const qho::LieFactors f = qho::assemble_factorization(erm, drv, p.cfg, t);
        const qho::GaussianState st =
            qho::propagate_gaussian(qho::GaussianState::vacuum(p.cfg), f, p.cfg.hbar);
        const qho::HusimiField field = qho::husimi_gaussian(st, grid, p.cfg.hbar);

        std::ostringstream label;
        label << "husimi_t" << qho::io::format_double(wt);
        std::ostringstream csv;
        qho::export_husimi(csv, field);
        out.write(label.str() + ".csv", csv.str());
        const json sidecar = qho::husimi_sidecar(field, st, p.name, wt);
        out.write(label.str() + ".json", sidecar.dump(2) + "\n");
        snaps.push_back({{"w0_t", wt},
                         {"csv", label.str() + ".csv"},
                         {"normalization", sidecar.at("normalization")}});
    }
    manifest["snapshots"] = snaps;
    manifest["artifacts"] = out.hashes_json();
    out.write("manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << snaps.size() << " Husimi fields to " << out.dir.string() << "\n";
    return kOk;
}

struct VerifyThresholds {
    double mean_tol = 1e-4;     // in q0/p0 units
    double cov_rel_tol = 1e-3;  // relative to oracle variance scale
    double fidelity_min = 0.999;
};

int cmd_verify(const CommonOpts& o, std::size_t fock_n, double dt_scale,
               const VerifyThresholds& th) {
    const qho::Protocol p = resolve_protocol(o);
    const double w0 = p.cfg.omega0();
    const qho::ode::Tolerances tol{o.rtol, o.atol};
    const qho::ErmakovSolution erm = qho::solve_ermakov(p.cfg, p.t_end, tol);
    const qho::DriveSolution drv = qho::solve_drive(p.cfg, p.t_end, tol);
    const std::vector<double> ts = sample_times(p, o.sample_dt);

    const qho::fock::FockBasis basis = qho::fock::build_basis(fock_n, p.cfg);
    const Eigen::VectorXcd psi0 = qho::fock::ground_state(basis);

    std::vector<qho::LieFactors> factors;
    std::vector<qho::GaussianState> gaussians;
    std::vector<Eigen::VectorXcd> fstates;
    factors.reserve(ts.size());
    for (double t : ts) {
        factors.push_back(qho::assemble_factorization(erm, drv, p.cfg, t));
        gaussians.push_back(
            qho::propagate_gaussian(qho::GaussianState::vacuum(p.cfg), factors.back(), p.cfg.hbar));
        fstates.push_back(qho::fock::state_from_factors(basis, factors.back()));
    }

    ArtifactWriter out{resolve_out_dir(o)};
    qho::fock::EvolveOptions eopt;
    eopt.dt_scale = dt_scale;
    qho::fock::FockTrajectory traj;
    try {
        traj = qho::fock::evolve(basis, p.cfg, psi0, ts, eopt);
    } catch (const qho::fock::TruncationError& e) {
        json summary = manifest_base("verify", p, o);
        summary["truncation_breach"] = {
            {"time", e.time}, {"level", e.level}, {"population", e.population}};
        out.write("verify_summary.json", summary.dump(2) + "\n");
        std::cerr << e.what() << "\n";
        return kTruncationError;
    }

    const double q0 = p.cfg.q_scale(), p0 = p.cfg.p_scale();
    double max_dq = 0.0, max_dp = 0.0, max_cov = 0.0;
    std::ostringstream deltas;
    deltas << "t,delta_mean_q,delta_mean_p,delta_var_q_rel,delta_var_p_rel,delta_cov_qp_rel\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const qho::fock::FockMoments m = qho::fock::moments(basis, traj.states[i]);
        const qho::GaussianState& g = gaussians[i];
        const double dq = std::abs(g.mean(0) - m.mean_q) / q0;
        const double dp = std::abs(g.mean(1) - m.mean_p) / p0;
        const double dvq = std::abs(g.cov(0, 0) - m.var_q) / m.var_q;
        const double dvp = std::abs(g.cov(1, 1) - m.var_p) / m.var_p;
        const double dcqp = std::abs(g.cov(0, 1) - m.cov_qp) / std::sqrt(m.var_q * m.var_p);
        max_dq = std::max(max_dq, dq);
        max_dp = std::max(max_dp, dp);
        max_cov = std::max({max_cov, dvq, dvp, dcqp});
        deltas << qho::io::format_double(w0 * ts[i]) << ',' << qho::io::format_double(dq) << ','
               << qho::io::format_double(dp) << ',' << qho::io::format_double(dvq) << ','
               << qho::io::format_double(dvp) << ',' << qho::io::format_double(dcqp) << '\n';
    }
    out.write("deltas.csv", deltas.str());
    {
        std::ostringstream csv;
        qho::fock::export_oracle_trajectory(csv, basis, traj, fstates, w0);
        out.write("oracle_trajectory.csv", csv.str());
    }

    const double end_fidelity = qho::fock::fidelity(traj.states.back(), psi0);
    const double end_fidelity_factorized =
        qho::fock::fidelity(traj.states.back(), fstates.back());
    const bool pass = max_dq <= th.mean_tol && max_dp <= th.mean_tol &&
                      max_cov <= th.cov_rel_tol && end_fidelity >= th.fidelity_min;

    json summary = manifest_base("verify", p, o);
    summary["fock_n"] = fock_n;
    summary["dt_scale"] = dt_scale;
    summary["max_mean_delta_q"] = max_dq;
    summary["max_mean_delta_p"] = max_dp;
    summary["max_cov_rel_delta"] = max_cov;
    summary["end_fidelity_vs_ground"] = end_fidelity;
    summary["end_fidelity_vs_factorized"] = end_fidelity_factorized;
    summary["thresholds"] = {{"mean_tol", th.mean_tol},
                             {"cov_rel_tol", th.cov_rel_tol},
                             {"fidelity_min", th.fidelity_min}};
    summary["pass"] = pass;
    summary["artifacts"] = out.hashes_json();
    out.write("verify_summary.json", summary.dump(2) + "\n");
    std::cout << (pass ? "PASS" : "BREACH") << "  mean(" << max_dq << ", " << max_dp << ") cov("
              << max_cov << ") fidelity(" << end_fidelity << ")\n";
    return pass ? kOk : kThresholdError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"factorized driven-oscillator evolution toolkit"};
    app.require_subcommand(1);

    CommonOpts so, ho, vo;
    std::vector<double> times;
    std::string grid_str;
    std::size_t fock_n = 128;
    double dt_scale = 1.0;
    VerifyThresholds th;

    CLI::App* sim = app.add_subcommand("simulate", "solve and export trajectory + factors");
    add_common(sim, so);

    CLI::App* hus = app.add_subcommand("husimi", "export Husimi fields at checkpoint times");
    add_common(hus, ho);
    hus->add_option("--times", times, "w0*t values (default: protocol checkpoints)")
        ->delimiter(',');
    hus->add_option("--grid", grid_str, "qmin,qmax,pmin,pmax,nq,np");

    CLI::App* ver = app.add_subcommand("verify", "factorized vs Fock-oracle comparison");
    add_common(ver, vo);
    ver->add_option("--fock-n", fock_n, "truncated basis dimension");
    ver->add_option("--dt-scale", dt_scale, "oracle step multiplier (>1 coarsens)");
    ver->add_option("--mean-tol", th.mean_tol, "mean delta threshold in q0/p0");
    ver->add_option("--cov-tol", th.cov_rel_tol, "relative covariance threshold");
    ver->add_option("--fidelity-min", th.fidelity_min, "end-state fidelity threshold");

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(so);
        if (hus->parsed()) return cmd_husimi(ho, times, grid_str);
        if (ver->parsed()) return cmd_verify(vo, fock_n, dt_scale, th);
        return kConfigError;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    } catch (const qho::fock::TruncationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTruncationError;
    } catch (const qho::ode::SolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kSolverError;
    }
}
