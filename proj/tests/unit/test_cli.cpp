#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "mflab/mass_algebra.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
    json j() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = mflab::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mflab_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("masses") {
    const auto r = run({"masses", "--a", "0.5"});
    REQUIRE(r.code == 0);
    const json j = r.j();
    CHECK(j["eta_interval"][0].get<double>() == doctest::Approx(4.0));
    CHECK(j["eta_interval"][1].get<double>() == doctest::Approx(8.0));
    CHECK(j["rho2_threshold_over_pi"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));

    const auto c = run({"masses", "--a", "0.4", "--classify", "2,16.513"});
    REQUIRE(c.code == 0);
    CHECK(c.j()["classification"]["kind"] == "FullLimit");

    // m = 1 roots of 0.16 x^2 - 0.8 x are 0 and 5
    const auto g = run({"masses", "--a", "0.4", "--gamma-m", "1"});
    REQUIRE(g.code == 0);
    const auto roots = g.j()["gamma_m"]["roots"];
    REQUIRE(roots.size() == 2);
    const double r0 = roots[0].get<double>();
    const double r1 = roots[1].get<double>();
    CHECK(std::min(std::abs(r0), std::abs(r1)) < 1e-12);
    CHECK(std::max(r0, r1) == doctest::Approx(5.0).epsilon(1e-12));

    const auto s = run({"masses", "--atoms", "1:1"});
    REQUIRE(s.code == 0);
    CHECK(s.j()["sharp_threshold_over_pi"].get<double>() == doctest::Approx(8.0));
    CHECK(run({"masses", "--atoms", "1:0.5,0.25:0.5"}).j()["sharp_threshold_over_pi"].get<double>() ==
          doctest::Approx(16.0));
}

TEST_CASE("validation errors exit with 2") {
    CHECK(run({"masses", "--a", "0.4", "--classify", "2,16.5", "--tol", "-1"}).code == 2);
    CHECK(run({"masses", "--a", "1.5"}).code == 2);
    CHECK(run({"masses"}).code == 2);
    CHECK(run({"nosuch"}).code == 2);
    CHECK(run({"solve", "--n", "48"}).code == 2);
    CHECK(run({"shoot", "--rtol", "0.5"}).code == 2);

    const fs::path dir = scratch("invalid");
    CHECK(run({"solve", "--n", "64", "--ball-radius", "0.4", "--output-dir", dir.string()}).code == 2);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("shoot writes a profile") {
    const fs::path dir = scratch("shoot");
    const auto r = run({"shoot", "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    const json j = r.j();
    CHECK(j["status"] == "converged");
    CHECK(j["final_eta"].get<double>() == doctest::Approx(4.0).epsilon(1e-4));
    CHECK(fs::exists(dir / "profile.csv"));
    CHECK(fs::exists(dir / "run.cfg"));
    fs::remove_all(dir);
}

TEST_CASE("sweep stays inside the admissible interval") {
    const fs::path dir = scratch("sweep");
    const auto r = run({"sweep", "--a", "0.45", "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.j()["all_converged_inside"] == true);
    CHECK(r.j()["cells"] == 25);
    fs::remove_all(dir);
}

TEST_CASE("solve coercive demo") {
    const fs::path dir = scratch("solve");
    const auto r = run({"solve", "--coercive-demo", "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    const json j = r.j();
    CHECK(j["status"] == "converged");
    CHECK(j["residual_norm"].get<double>() < 1e-10);
    CHECK(j["J"].get<double>() <= j["J_initial"].get<double>());
    CHECK(j["diagnostics"]["peaks"].empty());
    for (const char* f : {"config.txt", "u.bin", "h1.bin", "h2.bin", "diagnostics.csv", "run.cfg"}) {
        CHECK(fs::exists(dir / f));
    }

    const fs::path d2 = scratch("diagnose");
    const auto dr = run({"diagnose", "--field", (dir / "u.bin").string(), "--output-dir", d2.string()});
    REQUIRE(dr.code == 0);
    CHECK(dr.j()["peaks"].empty());
    fs::remove_all(dir);
    fs::remove_all(d2);
}

TEST_CASE("diagnose synthetic bubbles") {
    const fs::path dir = scratch("synth");
    const auto r = run({"diagnose", "--synthetic", "2", "--n", "256", "--h1-amp", "0", "--rho1-over-pi", "16",
                        "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.j()["peaks"].size() == 2);
    CHECK(r.j()["bookkeeping_error"].get<double>() < 1e-6);
    fs::remove_all(dir);
}

TEST_CASE("mtcheck slope is negative above the family threshold") {
    const fs::path dir = scratch("mt");
    const auto r = run({"mtcheck", "--k", "1", "--rho1-over-pi", "20", "--n", "256", "--lambda-max", "64",
                        "--count", "6", "--output-dir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.j()["sign"] == "negative");
    CHECK(run({"mtcheck", "--n", "256", "--lambda-max", "100"}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("config file values yield to command line flags") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream cfg(dir / "c.cfg");
        cfg << "# shoot settings\nrho1_over_pi = 2\nr_max = 5000\nfit_lo = 500\n";
    }
    const auto from_file = run({"shoot", "--config", (dir / "c.cfg").string(), "--output-dir", (dir / "a").string()});
    REQUIRE(from_file.code == 0);
    CHECK(from_file.j()["final_eta"].get<double>() == doctest::Approx(4.0).epsilon(1e-3));
    const std::string snap = slurp(dir / "a" / "run.cfg");
    CHECK(snap.find("r_max = 5000") != std::string::npos);

    const auto override = run({"shoot", "--config", (dir / "c.cfg").string(), "--r-max", "2000", "--output-dir",
                               (dir / "b").string()});
    REQUIRE(override.code == 0);
    CHECK(slurp(dir / "b" / "run.cfg").find("r_max = 2000") != std::string::npos);
    CHECK(run({"shoot", "--config", (dir / "missing.cfg").string()}).code != 0);
    fs::remove_all(dir);
}

TEST_CASE("runs are deterministic") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    for (const auto& d : {a, b}) {
        REQUIRE(run({"solve", "--n", "64", "--init-amp", "0.5", "--seed", "7", "--output-dir", d.string()}).code == 0);
    }
    CHECK(slurp(a / "u.bin") == slurp(b / "u.bin"));
    CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("continuation logs records and events") {
    const fs::path dir = scratch("cont");
    const auto r = run({"continue", "--n", "64", "--path", "2:1,6:1", "--step-over-pi", "1", "--output-dir",
                        dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.j()["records"] == 5);
    CHECK(r.j()["path_stuck"] == false);
    CHECK(fs::exists(dir / "records.csv"));
    CHECK(fs::exists(dir / "events.csv"));
    CHECK(run({"continue", "--n", "64", "--path", "8:1"}).code == 2);
    fs::remove_all(dir);
}
