#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbamp/operator_expr.hpp"

namespace fbamp::experiments {

enum class Scale { Linear, Db };

struct DataPoint {
    double x = 0.0;
    std::optional<double> y;  // empty = gap (near-oscillation sample)
    std::optional<double> yerr;
};

struct DataSeries {
    std::vector<DataPoint> points;  // x strictly increasing
    std::string x_label;
    std::string y_label;
    Scale y_scale = Scale::Linear;
    std::map<std::string, std::string> metadata;
};

inline constexpr int default_sweep_points = 1000;

/// Output noise vs feedback phase over [0, 2pi), in dB relative to the
/// no-feedback reference level. Near-oscillation phases become gap records.
DataSeries phase_scan(double transmissivity, double loss, double gain, int points);

/// Noise reduction factor R (dB) vs quantum noise gain (dB) at phi = 0.
DataSeries gain_scan(double transmissivity, double loss, double from_db, double to_db,
                     int points);

/// R (dB) vs feedback loss L in [0, 1] at fixed T and quantum gain.
DataSeries loss_scan(double transmissivity, double gqn_db, int points);

/// R (dB) vs tap transmissivity T in [0, 1] at fixed L and quantum gain.
DataSeries transmittance_scan(double loss, double gqn_db, int points);

struct OptimalTransmittance {
    double transmissivity;
    double reduction;  // R at the optimum, linear scale
};

/// Minimizer of R over T in [0,1] at fixed loss and gain (coarse grid plus
/// golden-section refinement, 1e-6 tolerance in T).
OptimalTransmittance optimal_transmittance(double loss, double gain);

/// Seeded output intensity |mean|^2 at one feedback phase; the seed enters at
/// the b0 port. Throws NearThreshold at the loop singularity.
double fringe_intensity(double transmissivity, double loss, double gain, double phase,
                        Complex seed_amplitude);

/// Interference fringe |mean|^2 vs feedback phase over [0, 2pi).
DataSeries fringe_scan(double transmissivity, double loss, double gain,
                       Complex seed_amplitude, int points);

/// Generic sweep used by the CLI when explicit ranges are requested; the
/// per-point arithmetic is identical to the named scans above.
struct SweepConfig {
    enum class Param { Phi, Loss, Transmissivity, GainDb };
    Param param;
    std::optional<double> from;  // absent: the named scan's default range
    std::optional<double> to;
    int points = default_sweep_points;
    // fixed parameters (the swept one is ignored)
    double transmissivity = 1.0;
    double loss = 0.0;
    double gqn_db = 0.0;
    double phi = 0.0;
};
DataSeries run_sweep(const SweepConfig& cfg);

// ---- model fitting ----------------------------------------------------

enum class FitModel {
    FullReduction,       // R(T, L, G): free subset of {t, l, gqn_db, amp}
    UnityTransmission,   // high-T limit R(G; G_th): free subset of {gth, amp}
};

enum class FitXAxis { GainDb, Loss, Transmissivity };

struct FitOptions {
    int max_iterations = 500;
    FitXAxis x_axis = FitXAxis::GainDb;
    std::map<std::string, double> fixed;  // parameters held constant
};

struct FitResult {
    std::map<std::string, double> params;
    double rss = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Evaluates a fit model at one x for a given parameter set (free + fixed
/// merged), in the scale of the data series.
double eval_fit_model(FitModel model, FitXAxis x_axis, double x,
                      const std::map<std::string, double>& params, Scale y_scale);

/// Nonlinear least squares (Levenberg-Marquardt with numeric Jacobian). Free
/// parameters are the keys of `initial`; per-point standard errors in the
/// series are used as weights when present. Throws DegenerateData when the
/// data cannot constrain the parameters and NonConvergence past
/// max_iterations.
FitResult fit_noise_reduction(const DataSeries& data, FitModel model,
                              const std::map<std::string, double>& initial,
                              const FitOptions& options = {});

}  // namespace fbamp::experiments
