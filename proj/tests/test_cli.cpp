#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "fbamp/analytics.hpp"
#include "fbamp/cli.hpp"
#include "fbamp/csv.hpp"
#include "fbamp/experiments.hpp"

using namespace fbamp;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = "/tmp/" + name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    return path;
}

const char* passthrough_netlist =
    "mode b0 vacuum\n"
    "mode S idler\n"
    "comp RA amp gain=1.2\n"
    "comp TAP bs t=0\n"
    "comp PZT phase phi=0\n"
    "comp ATT loss l=0.5\n"
    "link b0 -> TAP.in2\n"
    "link RA.out -> TAP.in1\n"
    "link TAP.out2 -> PZT.in\n"
    "link PZT.out -> ATT.in\n"
    "link ATT.out -> RA.in\n"
    "link S -> RA.idler_in\n"
    "out TAP.out1 as b_out\n";

}  // namespace

TEST_CASE("solve prints the pass-through coefficient") {
    const auto path = write_temp("fbamp_cli_passthrough.net", passthrough_netlist);
    const auto r = run_cli({"solve", path});
    CHECK(r.code == 0);
    CHECK(r.out.find("mode b0 alpha 1 0") != std::string::npos);
    CHECK(r.out.find("variance 1") != std::string::npos);
    CHECK(r.out.find("stability stable") != std::string::npos);
}

TEST_CASE("solve emits stable JSON") {
    const auto path = write_temp("fbamp_cli_passthrough.net", passthrough_netlist);
    const auto r = run_cli({"solve", path, "--json"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    const auto& b_out = doc.at("outputs").at("b_out");
    CHECK(b_out.at("variance").get<double>() == doctest::Approx(1.0));
    bool saw_b0 = false;
    for (const auto& c : b_out.at("coefficients")) {
        if (c.at("mode") == "b0") {
            saw_b0 = true;
            CHECK(c.at("alpha").at("re").get<double>() == doctest::Approx(1.0));
            CHECK(c.at("alpha").at("im").get<double>() == 0.0);
        }
    }
    CHECK(saw_b0);
    CHECK(doc.at("stability") == "stable");
}

TEST_CASE("solve reports diagnostics with exit 1") {
    const auto path = write_temp("fbamp_cli_bad.net", "mode b0 vacuum\nfrobnicate\n");
    const auto r = run_cli({"solve", path});
    CHECK(r.code == 1);
    CHECK(r.err.find("2:1: error") != std::string::npos);
}

TEST_CASE("missing file is a runtime failure") {
    const auto r = run_cli({"solve", "/tmp/does_not_exist_fbamp.net"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("usage errors exit with 64") {
    CHECK(run_cli({}).code == 64);
    CHECK(run_cli({"sweep"}).code == 64);                       // missing --param
    CHECK(run_cli({"sweep", "--param", "bogus"}).code == 64);   // bad choice
    CHECK(run_cli({"fit", "x.csv"}).code == 64);                // missing --model
    CHECK(run_cli({"sweep", "--param", "gqn", "--t", "1"}).code == 64);  // no range
}

TEST_CASE("help is not an error") {
    const auto r = run_cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("solve") != std::string::npos);
}

TEST_CASE("high-gain phase sweep reaches -6 dB") {
    const auto r = run_cli({"sweep", "--param", "phi", "--t", "0.999", "--l", "0",
                            "--gqn-db", "33"});
    CHECK(r.code == 0);
    const auto series = io::read_csv(r.out);
    REQUIRE(series.points.size() == 1000);
    double min_y = 1e300;
    for (const auto& pt : series.points)
        if (pt.y) min_y = std::min(min_y, *pt.y);
    CHECK(min_y <= -6.0);
}

TEST_CASE("sweep writes CSV files") {
    const std::string path = "/tmp/fbamp_cli_sweep.csv";
    const auto r = run_cli({"sweep", "--param", "l", "--t", "0.25", "--gqn-db", "18",
                            "--points", "51", "--csv", path});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    const auto series = io::read_csv_file(path);
    CHECK(series.points.size() == 51);
}

TEST_CASE("nonzero fixed phase on a reduction sweep is refused") {
    const auto r = run_cli({"sweep", "--param", "l", "--t", "0.25", "--gqn-db", "18",
                            "--phi", "1.0"});
    CHECK(r.code == 64);
}

TEST_CASE("fringe emits a periodic intensity curve") {
    const auto r = run_cli({"fringe", "--t", "0.8", "--l", "0.1", "--gqn-db", "6",
                            "--seed-re", "0.5", "--seed-im", "0", "--points", "128"});
    CHECK(r.code == 0);
    const auto series = io::read_csv(r.out);
    REQUIRE(series.points.size() == 128);
    CHECK(series.y_scale == experiments::Scale::Linear);
}

TEST_CASE("fit round-trips a synthetic curve") {
    experiments::DataSeries data;
    data.x_label = "gqn_db";
    data.y_label = "reduction";
    for (int i = 0; i < 20; ++i) {
        const double x = 10.0 + i;
        data.points.push_back({x,
                               analytics::noise_reduction_unity_transmission(
                                   analytics::gain_from_qn_db(x), 31.6),
                               std::nullopt});
    }
    const std::string path = "/tmp/fbamp_cli_fit.csv";
    io::write_csv_file(path, data);

    const auto r = run_cli({"fit", path, "--model", "eq11", "--init", "gth=25", "--json"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("converged").get<bool>());
    CHECK(doc.at("params").at("gth").get<double>() == doctest::Approx(31.6).epsilon(1e-5));
}

TEST_CASE("fit rejects bad --init syntax") {
    const auto r = run_cli({"fit", "/tmp/whatever.csv", "--model", "eq11", "--init",
                            "gth:25"});
    CHECK(r.code == 64);
}

TEST_CASE("verify passes and is byte-deterministic") {
    const std::vector<std::string> args{"verify", "--samples", "20000", "--seed", "42",
                                        "--cases", "6", "--workers", "2"};
    const auto first = run_cli(args);
    CHECK(first.code == 0);
    CHECK(first.out.find("all cases passed") != std::string::npos);
    const auto second = run_cli(args);
    CHECK(second.out == first.out);
    CHECK(second.err == first.err);
}
