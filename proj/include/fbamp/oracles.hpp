#pragma once

#include <cstdint>
#include <optional>

#include "fbamp/operator_expr.hpp"

namespace fbamp::oracles {

struct McConfig {
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    double theta = 0.0;
    int workers = 1;  // partitioning is a pure function of (seed, workers)
};

struct McEstimate {
    double variance;
    double std_error;
};

/// Semiclassical Monte-Carlo estimate of the quadrature variance: each input
/// mode draws an independent complex amplitude v = (x + i p)/2 with
/// x, p ~ N(0,1), and the sample is
///     s = 2 Re[ e^{-i theta} (sum ann_k v_k + sum cre_k conj(v_k)) ].
/// Reproduces quantum quadrature variances exactly (in expectation) for all
/// linear maps on vacuum. Deterministic for a fixed (seed, workers) pair.
McEstimate mc_variance(const OperatorExpr& expr, const McConfig& cfg);

/// Finite unrolling of the canonical feedback loop: starts from the cut-loop
/// (round-trip gain 0) solution and applies the round-trip recursion
/// `iterations` times. Returns the detector-port expression; its coefficient
/// error against the closed form decays as r^n with r = G sqrt((1-T)(1-L)).
/// Throws DivergentUnroll when r >= 1.
OperatorExpr unrolled_solve(double transmissivity, double loss, double gain, double phase,
                            int iterations);

struct CrossCheckReport {
    double analytic = 0.0;
    double network = 0.0;
    McEstimate monte_carlo{0.0, 0.0};
    std::optional<double> unrolled;
    bool analytic_network_ok = false;
    bool monte_carlo_ok = false;
    bool unrolled_ok = false;
    bool pass = false;
};

inline constexpr double crosscheck_network_rtol = 1e-10;
inline constexpr double crosscheck_unrolled_rtol = 1e-8;
inline constexpr double crosscheck_mc_sigmas = 5.0;

/// Runs all four variance routes on one canonical parameter point and
/// compares them pairwise: closed form vs generic network solve (relative
/// 1e-10), Monte-Carlo (5 standard errors), and, below threshold, loop
/// unrolling (relative 1e-8).
CrossCheckReport crosscheck(double transmissivity, double loss, double gain, double phase,
                            const McConfig& cfg);

}  // namespace fbamp::oracles
