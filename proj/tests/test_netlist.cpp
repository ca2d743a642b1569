#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "fbamp/analytics.hpp"
#include "fbamp/netlist.hpp"
#include "fbamp/network.hpp"
#include "support/generators.hpp"

using namespace fbamp;
using namespace fbamp::netlist;

namespace {

const char* canonical_text = R"(# tapped feedback loop
mode b0 vacuum
mode S idler
comp RA amp gain_db=33
comp TAP bs t=0.999
comp PZT phase phi=0
comp ATT loss l=0
link b0 -> TAP.in2
link RA.out -> TAP.in1
link TAP.out2 -> PZT.in
link PZT.out -> ATT.in
link ATT.out -> RA.in
link S -> RA.idler_in
out TAP.out1 as b_out
)";

bool has_error_at(const ParseResult& r, int line) {
    for (const auto& d : r.diagnostics)
        if (d.severity == Severity::Error && d.line == line) return true;
    return false;
}

}  // namespace

TEST_CASE("canonical netlist parses and matches the closed form") {
    const auto parsed = parse_netlist(canonical_text);
    REQUIRE(parsed.ok());
    CHECK(parsed.diagnostics.empty());

    const auto solved = net::solve(*parsed.spec);
    const double g = analytics::gain_from_qn_db(33.0);
    const auto closed = net::canonical_feedback(0.999, 0.0, g, 0.0);
    CHECK(max_coeff_delta(solved.outputs.at("b_out"),
                          closed.outputs.at(net::canonical_output)) < 1e-12);
    CHECK(std::abs(solved.loop_gain - closed.loop_gain) < 1e-12);
}

TEST_CASE("gain_db converts exactly once") {
    const auto parsed = parse_netlist("mode b0 vacuum\n"
                                      "comp A amp gain_db=18\n"
                                      "mode S idler\n"
                                      "link b0 -> A.in\n"
                                      "link S -> A.idler_in\n"
                                      "out A.out as o\n");
    REQUIRE(parsed.ok());
    CHECK(parsed.spec->components[0].param ==
          doctest::Approx(analytics::gain_from_qn_db(18.0)).epsilon(1e-15));
}

TEST_CASE("empty input yields an empty-network diagnostic") {
    const auto parsed = parse_netlist("");
    CHECK_FALSE(parsed.ok());
    REQUIRE(parsed.diagnostics.size() == 1);
    CHECK(parsed.diagnostics[0].message == "empty network");
}

TEST_CASE("syntax diagnostics carry line and column") {
    SUBCASE("unknown directive") {
        const auto r = parse_netlist("mode b0 vacuum\nfrob x y\n");
        CHECK_FALSE(r.ok());
        REQUIRE(!r.diagnostics.empty());
        CHECK(r.diagnostics[0].line == 2);
        CHECK(r.diagnostics[0].column == 1);
    }
    SUBCASE("bad number") {
        const auto r = parse_netlist("comp A bs t=banana\n");
        CHECK_FALSE(r.ok());
        CHECK(r.diagnostics[0].line == 1);
        CHECK(r.diagnostics[0].column >= 11);
    }
    SUBCASE("missing arrow") {
        const auto r = parse_netlist("mode a vacuum\nmode b vacuum\nlink a b\n");
        CHECK(has_error_at(r, 3));
    }
    SUBCASE("trailing junk") {
        const auto r = parse_netlist("mode a vacuum extra\n");
        CHECK(has_error_at(r, 1));
    }
}

TEST_CASE("semantic diagnostics point at the offending statement") {
    SUBCASE("unknown port on a link") {
        const auto r = parse_netlist("mode b0 vacuum\n"
                                     "comp P phase phi=0\n"
                                     "link b0 -> P.input\n"
                                     "out P.out as o\n");
        CHECK_FALSE(r.ok());
        CHECK(has_error_at(r, 3));
    }
    SUBCASE("unconnected input points at the component") {
        const auto r = parse_netlist("mode b0 vacuum\ncomp P phase phi=0\nout P.out as o\n");
        CHECK_FALSE(r.ok());
        CHECK(has_error_at(r, 2));
    }
    SUBCASE("duplicate driver points at the second link") {
        const auto r = parse_netlist("mode a vacuum\n"
                                     "mode b vacuum\n"
                                     "comp P phase phi=0\n"
                                     "link a -> P.in\n"
                                     "link b -> P.in\n"
                                     "out P.out as o\n");
        CHECK_FALSE(r.ok());
        CHECK(has_error_at(r, 5));
    }
    SUBCASE("unknown source mode") {
        const auto r = parse_netlist("comp P phase phi=0\nlink ghost -> P.in\n");
        CHECK_FALSE(r.ok());
        CHECK(has_error_at(r, 2));
    }
}

TEST_CASE("direct amplifier cycle parses and solves") {
    const auto r = parse_netlist("mode S idler\n"
                                 "comp RA amp gain=3\n"
                                 "link RA.out -> RA.in\n"
                                 "link S -> RA.idler_in\n"
                                 "out RA.idler_out as s_out\n");
    REQUIRE(r.ok());
    const auto solved = net::solve(*r.spec);
    CHECK(solved.loop_gain == doctest::Approx(3.0));
    CHECK(solved.stability == net::Stability::PositiveFeedbackUnstable);
}

TEST_CASE("round trip is idempotent") {
    SUBCASE("canonical netlist") {
        const auto first = parse_netlist(canonical_text);
        REQUIRE(first.ok());
        const auto second = parse_netlist(serialize_netlist(*first.spec));
        REQUIRE(second.ok());
        CHECK(*first.spec == *second.spec);
    }
    SUBCASE("coherent amplitudes survive to full precision") {
        net::NetworkSpec spec;
        spec.sources.push_back(
            {"seed", ModeKind::Coherent, Complex{1.0 / 3.0, std::sqrt(2.0)}});
        spec.components.push_back({"P", net::ComponentKind::Phase, 0.12345678901234567});
        spec.links.push_back({{"", "seed"}, {"P", "in"}});
        spec.outputs.push_back({{"P", "out"}, "o"});
        const auto back = parse_netlist(serialize_netlist(spec));
        REQUIRE(back.ok());
        CHECK(*back.spec == spec);
    }
    SUBCASE("50-component random network") {
        std::mt19937_64 rng(40);
        const auto spec = testgen::random_network(rng, 46, 1);
        REQUIRE(spec.components.size() >= 50);
        const auto back = parse_netlist(serialize_netlist(spec));
        REQUIRE(back.ok());
        CHECK(*back.spec == spec);
    }
}

TEST_CASE("comments survive a document round trip") {
    const std::string text = "# top note\nmode b0 vacuum # the input\n\ncomp P phase phi=1 # shifter\nlink b0 -> P.in\nout P.out as o\n";
    const auto parsed = parse_netlist(text);
    REQUIRE(parsed.ok());
    const std::string out = serialize_document(parsed.document);
    CHECK(out.find("# top note") != std::string::npos);
    CHECK(out.find("# the input") != std::string::npos);
    CHECK(out.find("# shifter") != std::string::npos);
    const auto reparsed = parse_netlist(out);
    REQUIRE(reparsed.ok());
    CHECK(*reparsed.spec == *parsed.spec);
}

TEST_CASE("parser survives arbitrary byte input") {
    std::mt19937_64 rng(0xfeed);
    std::uniform_int_distribution<int> len(0, 256);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 10000; ++i) {
        std::string text;
        const int n = len(rng);
        text.reserve(n);
        for (int k = 0; k < n; ++k) text.push_back(static_cast<char>(byte(rng)));
        const auto r = parse_netlist(text);
        CHECK((r.ok() || !r.diagnostics.empty()));
    }
}
