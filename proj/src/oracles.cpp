#include "fbamp/oracles.hpp"

#include <cmath>
#include <future>
#include <random>
#include <vector>

#include "fbamp/analytics.hpp"
#include "fbamp/errors.hpp"
#include "fbamp/network.hpp"

namespace fbamp::oracles {

namespace {

struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    // parallel-variance combination
    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double d = o.mean - mean;
        const double nt = static_cast<double>(n + o.n);
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
        mean += d * static_cast<double>(o.n) / nt;
        n += o.n;
    }
};

std::uint64_t worker_seed(std::uint64_t seed, int worker) {
    // splitmix64 over (seed, worker) so the partition is a pure function of both
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(worker + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Moments sample_chunk(const std::vector<Complex>& ann, const std::vector<Complex>& cre,
                     double theta, std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Complex rot = std::polar(1.0, -theta);
    const std::size_t n_modes = ann.size();
    Moments mom;
    for (std::size_t i = 0; i < count; ++i) {
        Complex acc{0.0, 0.0};
        for (std::size_t k = 0; k < n_modes; ++k) {
            const double x = normal(rng);
            const double p = normal(rng);
            const Complex v{0.5 * x, 0.5 * p};
            acc += ann[k] * v + cre[k] * std::conj(v);
        }
        mom.push(2.0 * std::real(rot * acc));
    }
    return mom;
}

}  // namespace

McEstimate mc_variance(const OperatorExpr& expr, const McConfig& cfg) {
    if (cfg.samples < 1) throw ParamOutOfRange("sample count must be >= 1");
    if (cfg.workers < 1) throw ParamOutOfRange("worker count must be >= 1");

    // fixed mode order: sorted union of the coefficient maps
    std::vector<Complex> ann, cre;
    {
        std::map<std::string, std::pair<Complex, Complex>> modes;
        for (const auto& [m, v] : expr.ann) modes[m].first = v;
        for (const auto& [m, v] : expr.cre) modes[m].second = v;
        for (const auto& [m, pair] : modes) {
            ann.push_back(pair.first);
            cre.push_back(pair.second);
        }
    }

    const int workers = cfg.workers;
    std::vector<std::size_t> counts(workers, cfg.samples / workers);
    for (std::size_t i = 0; i < cfg.samples % workers; ++i) ++counts[i];

    std::vector<Moments> parts(workers);
    if (workers == 1) {
        parts[0] = sample_chunk(ann, cre, cfg.theta, worker_seed(cfg.seed, 0), counts[0]);
    } else {
        std::vector<std::future<Moments>> futures;
        futures.reserve(workers);
        for (int wkr = 0; wkr < workers; ++wkr) {
            futures.push_back(std::async(std::launch::async, sample_chunk, std::cref(ann),
                                         std::cref(cre), cfg.theta,
                                         worker_seed(cfg.seed, wkr), counts[wkr]));
        }
        for (int wkr = 0; wkr < workers; ++wkr) parts[wkr] = futures[wkr].get();
    }
    Moments total;
    for (const auto& part : parts) total.merge(part);

    McEstimate est;
    if (total.n < 2) {
        est.variance = 0.0;
        est.std_error = 0.0;
        return est;
    }
    est.variance = total.m2 / static_cast<double>(total.n - 1);
    // s is Gaussian, so Var(s^2 estimate) = 2 sigma^4 / (n - 1)
    est.std_error = est.variance * std::sqrt(2.0 / static_cast<double>(total.n - 1));
    return est;
}

OperatorExpr unrolled_solve(double transmissivity, double loss, double gain, double phase,
                            int iterations) {
    if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
        throw ParamOutOfRange("transmissivity must lie in [0,1]");
    if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0)
        throw ParamOutOfRange("loss must lie in [0,1]");
    if (!std::isfinite(gain) || gain < 1.0)
        throw GainOutOfRange("amplitude gain must be finite and >= 1");
    if (iterations < 0) throw ParamOutOfRange("iteration count must be >= 0");

    const double g = std::sqrt(gain * gain - 1.0);
    const double root = std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    const double r = gain * root;
    if (r >= 1.0)
        throw DivergentUnroll("round-trip gain " + std::to_string(r) +
                              " >= 1, loop unrolling diverges");

    const Complex rot = std::polar(1.0, phase);
    // amp-output coefficients on (b0, c0, S^dag); every round trip multiplies
    // all three by q and re-adds the direct drive
    const Complex q = -gain * rot * root;
    const Complex drive_b0 = gain * rot * std::sqrt((1.0 - loss) * transmissivity);
    const Complex drive_c0 = gain * std::sqrt(loss);
    const Complex drive_s = g;

    Complex a_b0 = drive_b0, a_c0 = drive_c0, a_s = drive_s;
    for (int i = 0; i < iterations; ++i) {
        a_b0 = q * a_b0 + drive_b0;
        a_c0 = q * a_c0 + drive_c0;
        a_s = q * a_s + drive_s;
    }

    const double t = std::sqrt(transmissivity);
    const double rfl = std::sqrt(1.0 - transmissivity);
    OperatorExpr b_out;
    const Complex c_b0 = t * a_b0 + rfl;
    if (c_b0 != Complex{0.0, 0.0}) b_out.ann[net::canonical_input_mode] = c_b0;
    if (t * a_c0 != Complex{0.0, 0.0}) b_out.ann[net::canonical_loss_ancilla] = t * a_c0;
    if (t * a_s != Complex{0.0, 0.0}) b_out.cre[net::canonical_idler_mode] = t * a_s;
    return b_out;
}

CrossCheckReport crosscheck(double transmissivity, double loss, double gain, double phase,
                            const McConfig& cfg) {
    CrossCheckReport rep;
    rep.analytic = analytics::feedback_variance(transmissivity, loss, gain, phase);

    const net::SolveResult solved =
        net::solve(net::canonical_network(transmissivity, loss, gain, phase));
    const OperatorExpr& b_out = solved.outputs.at(net::canonical_output);
    rep.network = quadrature_variance(b_out, cfg.theta);
    rep.analytic_network_ok =
        std::abs(rep.network - rep.analytic) <= crosscheck_network_rtol * rep.analytic;

    rep.monte_carlo = mc_variance(b_out, cfg);
    rep.monte_carlo_ok = std::abs(rep.monte_carlo.variance - rep.analytic) <=
                         crosscheck_mc_sigmas * rep.monte_carlo.std_error;

    const double r = gain * std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    rep.unrolled_ok = true;
    if (r < 1.0) {
        // enough round trips for the geometric tail to clear the tolerance
        int n = 64;
        if (r > 0.0) {
            n = static_cast<int>(std::ceil(std::log(1e-10 * (1.0 - r)) / std::log(r)));
            n = std::clamp(n, 1, 20000);
        }
        rep.unrolled =
            quadrature_variance(unrolled_solve(transmissivity, loss, gain, phase, n),
                                cfg.theta);
        rep.unrolled_ok =
            std::abs(*rep.unrolled - rep.analytic) <= crosscheck_unrolled_rtol * rep.analytic;
    }

    rep.pass = rep.analytic_network_ok && rep.monte_carlo_ok && rep.unrolled_ok;
    return rep;
}

}  // namespace fbamp::oracles
