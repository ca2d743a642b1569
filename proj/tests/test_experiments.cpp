#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "fbamp/analytics.hpp"
#include "fbamp/errors.hpp"
#include "fbamp/experiments.hpp"
#include "fbamp/network.hpp"
#include "support/generators.hpp"

using namespace fbamp;
using namespace fbamp::experiments;

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

TEST_CASE("phase scan is flat at full transmissivity") {
    const auto s = phase_scan(1.0, 0.0, 3.0, 64);
    REQUIRE(s.points.size() == 64);
    for (const auto& pt : s.points) {
        REQUIRE(pt.y.has_value());
        CHECK(std::abs(*pt.y) < 1e-12);
    }
}

TEST_CASE("phase scan minimum sits at the zero-phase grid point") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 25; ++i) {
        const auto p = testgen::stable_point(rng);
        const auto s = phase_scan(p.t, p.l, p.g, 128);
        REQUIRE(s.points[0].y.has_value());
        const double at_zero = *s.points[0].y;
        for (const auto& pt : s.points) {
            if (!pt.y) continue;
            CHECK(at_zero <= *pt.y + 1e-12);
        }
    }
}

TEST_CASE("high-gain phase scan reaches -6 dB and diverges near pi") {
    const double g = analytics::gain_from_qn_db(33.0);
    const auto s = phase_scan(1.0 - 1e-3, 0.0, g, 1000);
    REQUIRE(s.points[0].y.has_value());
    CHECK(*s.points[0].y <= -6.0);
    double peak = -1e300;
    for (const auto& pt : s.points) {
        if (std::abs(pt.x - std::numbers::pi) > 0.1) continue;
        if (pt.y) peak = std::max(peak, *pt.y);
    }
    CHECK(peak > 40.0);  // divergent neighborhood
}

TEST_CASE("exact-threshold phases are emitted as gap records") {
    // G = G_th: the pi grid point is singular and must become a gap, not a value
    const double gth = net::threshold_gain(0.5, 0.2);
    const auto s = phase_scan(0.5, 0.2, gth, 1000);
    REQUIRE(s.points.size() == 1000);
    const auto& at_pi = s.points[500];
    CHECK(std::abs(at_pi.x - std::numbers::pi) < 1e-12);
    CHECK_FALSE(at_pi.y.has_value());
    int gaps = 0;
    for (const auto& pt : s.points) gaps += !pt.y.has_value();
    CHECK(gaps >= 1);
    CHECK(gaps < 10);  // the singularity is narrow
}

TEST_CASE("every phase-scan point equals the direct closed-form call") {
    const double t = 0.8, l = 0.2, g = 2.0;
    const auto s = phase_scan(t, l, g, 257);
    const double ref = analytics::reference_variance(t, g);
    for (int i = 0; i < 257; ++i) {
        const double phi = two_pi * i / 257;
        CHECK(s.points[i].x == phi);
        REQUIRE(s.points[i].y.has_value());
        const double direct =
            analytics::db(analytics::feedback_variance(t, l, g, phi) / ref);
        CHECK(std::abs(*s.points[i].y - direct) <= 1e-13 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("gain scan") {
    SUBCASE("zero quantum gain gives zero reduction") {
        const auto s = gain_scan(0.9, 0.0, 0.0, 10.0, 11);
        REQUIRE(s.points[0].y.has_value());
        CHECK(std::abs(*s.points[0].y) < 1e-12);
    }
    SUBCASE("monotone decreasing toward -6 dB at high transmissivity") {
        const double t = 1.0 - 1e-3;
        const double gth = net::threshold_gain(t, 0.0);
        const double end_db = analytics::db(analytics::quantum_noise_gain(0.9999 * gth));
        const auto s = gain_scan(t, 0.0, 0.0, end_db, 200);
        for (std::size_t i = 1; i < s.points.size(); ++i)
            CHECK(*s.points[i].y < *s.points[i - 1].y);
        CHECK(*s.points.back().y == doctest::Approx(-6.01).epsilon(0.01));
    }
}

TEST_CASE("loss scan") {
    const auto s = loss_scan(0.25, 18.0, 101);
    REQUIRE(s.points.size() == 101);
    CHECK(s.points.back().x == 1.0);
    CHECK(std::abs(*s.points.back().y) < 1e-12);  // R(L=1) = 0 dB
    for (const auto& pt : s.points) {
        if (pt.x <= 0.75) CHECK(*pt.y < -3.0);
    }
}

TEST_CASE("transmittance scan endpoints carry no reduction") {
    const auto s = transmittance_scan(0.01, 23.0, 101);
    CHECK(std::abs(*s.points.front().y) < 1e-12);
    CHECK(std::abs(*s.points.back().y) < 1e-12);
}

TEST_CASE("optimal transmissivity") {
    SUBCASE("dominates a uniform grid") {
        const double g = analytics::gain_from_qn_db(23.0);
        const auto best = optimal_transmittance(0.01, g);
        for (int i = 1; i <= 99; ++i) {
            const double t = 0.01 * i;
            CHECK(best.reduction <=
                  analytics::noise_reduction_factor(t, 0.01, g) + 1e-12);
        }
    }
    SUBCASE("interior optimum strictly beats the edges") {
        const double g = analytics::gain_from_qn_db(23.0);
        const auto best = optimal_transmittance(0.01, g);
        CHECK(best.transmissivity > 0.05);
        CHECK(best.transmissivity < 0.95);
        CHECK(best.reduction < analytics::noise_reduction_factor(0.05, 0.01, g));
        CHECK(best.reduction < analytics::noise_reduction_factor(0.95, 0.01, g));
    }
    SUBCASE("unit gain is flat") {
        const auto best = optimal_transmittance(0.3, 1.0);
        CHECK(best.reduction == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("reduction is loss-insensitive at fixed loop ratio") {
    // G/G_th = 0.9 with T G^2 >= 100: R within 10% of 1/(1.9)^2 at every loss
    const double expected = 1.0 / (1.9 * 1.9);
    for (double l : {0.0, 0.25, 0.5, 0.75}) {
        const double t = 0.999;
        const double g = 0.9 * net::threshold_gain(t, l);
        REQUIRE(t * g * g >= 100.0);
        const double r = analytics::noise_reduction_factor(t, l, g);
        CHECK(std::abs(r - expected) < 0.1 * expected);
    }
}

TEST_CASE("fringes") {
    SUBCASE("zero seed gives zero intensity") {
        const auto s = fringe_scan(0.7, 0.1, 1.5, Complex{0.0, 0.0}, 64);
        for (const auto& pt : s.points) CHECK(*pt.y == 0.0);
    }
    SUBCASE("intensity depends on cos(phi) only") {
        for (double phi : {0.3, 1.1, 2.9}) {
            const double a = fringe_intensity(0.7, 0.1, 1.5, phi, Complex{0.5, 0.2});
            const double b = fringe_intensity(0.7, 0.1, 1.5, two_pi - phi, Complex{0.5, 0.2});
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
    SUBCASE("periodic with period 2 pi") {
        for (double phi : {0.0, 0.4, 2.2, 5.0}) {
            const double a = fringe_intensity(0.6, 0.2, 1.8, phi, Complex{1.0, 0.0});
            const double b = fringe_intensity(0.6, 0.2, 1.8, phi + two_pi, Complex{1.0, 0.0});
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
        }
    }
    SUBCASE("visibility lies in (0, 1] below threshold") {
        std::mt19937_64 rng(6);
        for (int i = 0; i < 30; ++i) {
            auto p = testgen::stable_point(rng);
            if (p.g <= 1.0) p.g = 1.01;
            if (p.t >= 0.999) p.t = 0.99;
            const auto s = fringe_scan(p.t, p.l, p.g, Complex{0.8, -0.1}, 256);
            double lo = 1e300, hi = -1e300;
            for (const auto& pt : s.points) {
                REQUIRE(pt.y.has_value());
                lo = std::min(lo, *pt.y);
                hi = std::max(hi, *pt.y);
            }
            const double vis = (hi - lo) / (hi + lo);
            CHECK(vis > 0.0);
            CHECK(vis <= 1.0 + 1e-12);
        }
    }
    SUBCASE("matches the mean field of a seeded network solve") {
        const double t = 0.8, l = 0.15, g = 1.6;
        const Complex seed{0.4, 0.7};
        auto spec = net::canonical_network(t, l, g, 0.0);
        for (int k = 0; k < 8; ++k) {
            const double phi = two_pi * k / 8.0;
            spec.components[2].param = phi;  // PZT
            auto mutated = spec;
            mutated.sources[0].kind = ModeKind::Coherent;
            mutated.sources[0].amplitude = seed;
            const auto res = net::solve(mutated);
            const Complex mean = mean_field(res.outputs.at("b_out"), res.modes);
            CHECK(std::norm(mean) ==
                  doctest::Approx(fringe_intensity(t, l, g, phi, seed)).epsilon(1e-10));
        }
    }
}

TEST_CASE("run_sweep matches the named scans and honors explicit ranges") {
    SweepConfig cfg;
    cfg.param = SweepConfig::Param::Loss;
    cfg.points = 11;
    cfg.transmissivity = 0.25;
    cfg.gqn_db = 18.0;
    const auto named = loss_scan(0.25, 18.0, 11);
    const auto swept = run_sweep(cfg);
    REQUIRE(named.points.size() == swept.points.size());
    for (std::size_t i = 0; i < named.points.size(); ++i)
        CHECK(*named.points[i].y == *swept.points[i].y);

    cfg.from = 0.2;
    cfg.to = 0.4;
    const auto windowed = run_sweep(cfg);
    CHECK(windowed.points.front().x == 0.2);
    CHECK(windowed.points.back().x == 0.4);
}

namespace {

DataSeries synthetic_unity_series(double gth, int points, double noise_frac,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    DataSeries s;
    s.y_scale = Scale::Linear;
    for (int i = 0; i < points; ++i) {
        const double x = 10.0 + (33.0 - 10.0) * i / (points - 1);
        const double y = analytics::noise_reduction_unity_transmission(
            analytics::gain_from_qn_db(x), gth);
        s.points.push_back({x, y * (1.0 + noise_frac * n(rng)), std::nullopt});
    }
    return s;
}

}  // namespace

TEST_CASE("fit recovers the threshold gain") {
    const double gth_true = 31.6;
    SUBCASE("noiseless data from the exact initial guess") {
        const auto data = synthetic_unity_series(gth_true, 20, 0.0, 1);
        const auto fit = fit_noise_reduction(data, FitModel::UnityTransmission,
                                             {{"gth", gth_true}});
        CHECK(fit.converged);
        CHECK(std::abs(fit.params.at("gth") - gth_true) < 1e-8);
        CHECK(fit.rss < 1e-16);
    }
    SUBCASE("noiseless data from perturbed initial guesses") {
        const auto data = synthetic_unity_series(gth_true, 20, 0.0, 2);
        for (double factor : {0.8, 0.9, 1.1, 1.2}) {
            const auto fit = fit_noise_reduction(data, FitModel::UnityTransmission,
                                                 {{"gth", factor * gth_true}});
            CHECK(fit.converged);
            CHECK(std::abs(fit.params.at("gth") - gth_true) < 1e-6);
        }
    }
    SUBCASE("1% multiplicative noise stays within 5%") {
        for (std::uint64_t seed : {3u, 4u, 5u}) {
            const auto data = synthetic_unity_series(gth_true, 20, 0.01, seed);
            for (double factor : {0.8, 1.2}) {
                const auto fit = fit_noise_reduction(data, FitModel::UnityTransmission,
                                                     {{"gth", factor * gth_true}});
                CHECK(fit.converged);
                CHECK(std::abs(fit.params.at("gth") - gth_true) < 0.05 * gth_true);
            }
        }
    }
    SUBCASE("dB-scale data works the same way") {
        auto data = synthetic_unity_series(gth_true, 20, 0.0, 6);
        for (auto& pt : data.points) pt.y = analytics::db(*pt.y);
        data.y_scale = Scale::Db;
        const auto fit = fit_noise_reduction(data, FitModel::UnityTransmission,
                                             {{"gth", 0.85 * gth_true}});
        CHECK(fit.converged);
        CHECK(std::abs(fit.params.at("gth") - gth_true) < 1e-6);
    }
}

TEST_CASE("fit recovers T and L of the full reduction model") {
    const double t_true = 0.4, l_true = 0.2;
    DataSeries data;
    data.y_scale = Scale::Linear;
    for (int i = 0; i < 25; ++i) {
        const double x = 5.0 + i;
        data.points.push_back(
            {x,
             analytics::noise_reduction_factor(t_true, l_true,
                                               analytics::gain_from_qn_db(x)),
             std::nullopt});
    }
    const auto fit = fit_noise_reduction(data, FitModel::FullReduction,
                                         {{"t", 0.48}, {"l", 0.17}});
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.at("t") - t_true) < 1e-5);
    CHECK(std::abs(fit.params.at("l") - l_true) < 1e-4);
}

TEST_CASE("degenerate fits are rejected") {
    SUBCASE("constant series has no curvature") {
        DataSeries data;
        for (int i = 0; i < 10; ++i) data.points.push_back({double(i), 0.5, std::nullopt});
        CHECK_THROWS_AS(fit_noise_reduction(data, FitModel::FullReduction,
                                            {{"t", 0.5}, {"l", 0.1}}),
                        DegenerateData);
    }
    SUBCASE("fewer points than parameters") {
        DataSeries data;
        data.points.push_back({1.0, 0.5, std::nullopt});
        CHECK_THROWS_AS(fit_noise_reduction(data, FitModel::FullReduction,
                                            {{"t", 0.5}, {"l", 0.1}}),
                        DegenerateData);
    }
    SUBCASE("no free parameters") {
        DataSeries data;
        for (int i = 0; i < 5; ++i) data.points.push_back({double(i), 0.5, std::nullopt});
        CHECK_THROWS_AS(fit_noise_reduction(data, FitModel::UnityTransmission, {}),
                        DegenerateData);
    }
}

TEST_CASE("iteration budget is enforced") {
    const auto data = synthetic_unity_series(31.6, 20, 0.0, 9);
    FitOptions options;
    options.max_iterations = 1;
    CHECK_THROWS_AS(fit_noise_reduction(data, FitModel::UnityTransmission,
                                        {{"gth", 60.0}}, options),
                    NonConvergence);
}
