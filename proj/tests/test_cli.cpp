#include <cstdlib>
#include <filesystem>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "qho/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(QHO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_out") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("simulate writes trajectory, factors and a manifest that hashes them") {
    const fs::path dir = fresh_dir("sim");
    CHECK(run("simulate --protocol displacement --epsilon 2 --out " + dir.string()) == 0);
    REQUIRE(fs::exists(dir / "trajectory.csv"));
    REQUIRE(fs::exists(dir / "factors.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    const json manifest = json::parse(qho::io::read_file((dir / "manifest.json").string()));
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("epsilon") == 2.0);
    CHECK(manifest.at("t_m").is_null());
    CHECK(manifest.at("resolved_pulses").at("drive").size() == 2);
    CHECK(manifest.at("resolved_pulses").at("omega").empty());
    for (const std::string name : {"trajectory.csv", "factors.csv"}) {
        const std::string body = qho::io::read_file((dir / name).string());
        CHECK(manifest.at("artifacts").at(name) == qho::io::fnv1a64_hex(body));
    }
}

TEST_CASE("reruns and manifest round trips are byte identical") {
    const fs::path a = fresh_dir("rerun_a");
    const fs::path b = fresh_dir("rerun_b");
    const fs::path c = fresh_dir("rerun_c");
    REQUIRE(run("simulate --protocol squeeze --epsilon 1000 --out " + a.string()) == 0);
    REQUIRE(run("simulate --protocol squeeze --epsilon 1000 --out " + b.string()) == 0);
    CHECK(qho::io::read_file((a / "trajectory.csv").string()) ==
          qho::io::read_file((b / "trajectory.csv").string()));
    CHECK(qho::io::read_file((a / "factors.csv").string()) ==
          qho::io::read_file((b / "factors.csv").string()));

    // extract the resolved protocol from the manifest and replay it
    const json manifest = json::parse(qho::io::read_file((a / "manifest.json").string()));
    const fs::path cfg = c / "protocol.json";
    qho::io::write_file(cfg.string(), manifest.at("protocol").dump());
    REQUIRE(run("simulate --config " + cfg.string() + " --out " + c.string()) == 0);
    CHECK(qho::io::read_file((a / "trajectory.csv").string()) ==
          qho::io::read_file((c / "trajectory.csv").string()));
}

TEST_CASE("husimi emits one field and sidecar per checkpoint") {
    // the displaced checkpoints reach |p|/p0 ~ pi, so the window follows the
    // mean out to five Husimi widths
    const fs::path dir = fresh_dir("husimi");
    CHECK(run("husimi --protocol displacement --epsilon 2 --grid -6,6,-9,9,61,61 --out " +
              dir.string()) == 0);
    const json manifest = json::parse(qho::io::read_file((dir / "manifest.json").string()));
    REQUIRE(manifest.at("snapshots").size() == 4);
    for (const json& snap : manifest.at("snapshots")) {
        CHECK(fs::exists(dir / snap.at("csv").get<std::string>()));
        CHECK(std::abs(snap.at("normalization").get<double>() - 1.0) <= 1e-5);
    }
}

TEST_CASE("config errors exit with code 2") {
    CHECK(run("simulate --protocol bogus --out cli_out/none") == 2);
    CHECK(run("simulate --protocol squeeze --epsilon 0 --out cli_out/none") == 2);
    CHECK(run("husimi --protocol squeeze --epsilon 2 --grid 1,2 --out cli_out/none") == 2);
    CHECK(run("simulate") == 2); // no protocol and no config
}

TEST_CASE("out-of-window husimi time exits with code 4") {
    CHECK(run("husimi --protocol displacement --epsilon 2 --times 1e6 --out cli_out/none") == 4);
}

TEST_CASE("threshold breach exits with code 5 but still writes the report") {
    const fs::path dir = fresh_dir("breach");
    CHECK(run("verify --protocol single-pulse --epsilon 1000 --fock-n 64 --sample-dt 2.0 "
              "--cov-tol 1e-14 --out " +
              dir.string()) == 5);
    REQUIRE(fs::exists(dir / "verify_summary.json"));
    REQUIRE(fs::exists(dir / "deltas.csv"));
    const json summary = json::parse(qho::io::read_file((dir / "verify_summary.json").string()));
    CHECK(summary.at("pass") == false);
    CHECK(summary.at("max_cov_rel_delta").get<double>() > 1e-14);
}

TEST_CASE("basis truncation breach exits with code 6 and names the level") {
    const fs::path dir = fresh_dir("trunc");
    CHECK(run("verify --protocol squeeze --epsilon 1000 --fock-n 16 --sample-dt 2.0 --out " +
              dir.string()) == 6);
    const json summary = json::parse(qho::io::read_file((dir / "verify_summary.json").string()));
    CHECK(summary.at("truncation_breach").at("level") == 14);
    CHECK(summary.at("truncation_breach").at("population").get<double>() > 1e-8);
}

TEST_CASE("verify passes on an adequate basis and records the deltas") {
    const fs::path dir = fresh_dir("pass");
    CHECK(run("verify --protocol displacement --epsilon 2 --fock-n 64 --sample-dt 1.0 --out " +
              dir.string()) == 0);
    const json summary = json::parse(qho::io::read_file((dir / "verify_summary.json").string()));
    CHECK(summary.at("pass") == true);
    CHECK(summary.at("max_mean_delta_q").get<double>() <= 1e-4);
    CHECK(summary.at("max_mean_delta_p").get<double>() <= 1e-4);
    CHECK(summary.at("max_cov_rel_delta").get<double>() <= 1e-3);
    CHECK(summary.at("end_fidelity_vs_ground").get<double>() >= 0.999);
    REQUIRE(fs::exists(dir / "oracle_trajectory.csv"));
}

TEST_CASE("the out directory can come from the environment") {
    const fs::path dir = fresh_dir("env");
    const std::string cmd = "QHO_OUT_DIR=" + dir.string() + " " + QHO_CLI_PATH +
                            " simulate --protocol displacement --epsilon 2 > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(fs::exists(dir / "manifest.json"));
}
