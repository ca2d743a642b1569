#include "fbamp/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbamp/analytics.hpp"
#include "fbamp/errors.hpp"
#include "fbamp/network.hpp"

namespace fbamp::experiments {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void set_meta(DataSeries& s, const std::string& key, double value) {
    char buf[32];
    snprintf(buf, sizeof(buf), "%.17g", value);
    s.metadata[key] = buf;
}

}  // namespace

DataSeries phase_scan(double transmissivity, double loss, double gain, int points) {
    if (points < 2) throw ParamOutOfRange("a sweep needs at least 2 points");
    const double ref = analytics::reference_variance(transmissivity, gain);
    DataSeries s;
    s.x_label = "phi";
    s.y_label = "noise_rel_db";
    s.y_scale = Scale::Db;
    set_meta(s, "t", transmissivity);
    set_meta(s, "l", loss);
    set_meta(s, "gain", gain);
    s.metadata["gaps"] = "near_oscillation";
    for (int i = 0; i < points; ++i) {
        const double phi = two_pi * i / points;
        DataPoint pt;
        pt.x = phi;
        try {
            pt.y = analytics::db(
                analytics::feedback_variance(transmissivity, loss, gain, phi) / ref);
        } catch (const NearThreshold&) {
            // divergent sample, emitted as a gap
        }
        s.points.push_back(pt);
    }
    return s;
}

DataSeries gain_scan(double transmissivity, double loss, double from_db, double to_db,
                     int points) {
    if (points < 2) throw ParamOutOfRange("a sweep needs at least 2 points");
    if (from_db > to_db) throw ParamOutOfRange("sweep range must satisfy from <= to");
    DataSeries s;
    s.x_label = "gqn_db";
    s.y_label = "reduction_db";
    s.y_scale = Scale::Db;
    set_meta(s, "t", transmissivity);
    set_meta(s, "l", loss);
    for (int i = 0; i < points; ++i) {
        const double x = from_db + (to_db - from_db) * i / (points - 1);
        const double gain = analytics::gain_from_qn_db(x);
        s.points.push_back(
            {x, analytics::db(analytics::noise_reduction_factor(transmissivity, loss, gain)),
             std::nullopt});
    }
    return s;
}

DataSeries loss_scan(double transmissivity, double gqn_db, int points) {
    if (points < 2) throw ParamOutOfRange("a sweep needs at least 2 points");
    const double gain = analytics::gain_from_qn_db(gqn_db);
    DataSeries s;
    s.x_label = "l";
    s.y_label = "reduction_db";
    s.y_scale = Scale::Db;
    set_meta(s, "t", transmissivity);
    set_meta(s, "gqn_db", gqn_db);
    for (int i = 0; i < points; ++i) {
        const double l = static_cast<double>(i) / (points - 1);
        s.points.push_back(
            {l, analytics::db(analytics::noise_reduction_factor(transmissivity, l, gain)),
             std::nullopt});
    }
    return s;
}

DataSeries transmittance_scan(double loss, double gqn_db, int points) {
    if (points < 2) throw ParamOutOfRange("a sweep needs at least 2 points");
    const double gain = analytics::gain_from_qn_db(gqn_db);
    DataSeries s;
    s.x_label = "t";
    s.y_label = "reduction_db";
    s.y_scale = Scale::Db;
    set_meta(s, "l", loss);
    set_meta(s, "gqn_db", gqn_db);
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        s.points.push_back(
            {t, analytics::db(analytics::noise_reduction_factor(t, loss, gain)),
             std::nullopt});
    }
    return s;
}

OptimalTransmittance optimal_transmittance(double loss, double gain) {
    auto r_of_t = [&](double t) {
        return analytics::noise_reduction_factor(t, loss, gain);
    };
    // coarse grid to bracket the minimum, then golden-section refinement
    const int grid = 1024;
    int best = 0;
    double best_r = r_of_t(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double r = r_of_t(static_cast<double>(i) / grid);
        if (r < best_r) {
            best_r = r;
            best = i;
        }
    }
    double lo = std::max(0.0, static_cast<double>(best - 1) / grid);
    double hi = std::min(1.0, static_cast<double>(best + 1) / grid);
    constexpr double inv_phi = 0.6180339887498949;
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = r_of_t(a), fb = r_of_t(b);
    while (hi - lo > 1e-6) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = r_of_t(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = r_of_t(b);
        }
    }
    const double t_star = 0.5 * (lo + hi);
    return {t_star, r_of_t(t_star)};
}

double fringe_intensity(double transmissivity, double loss, double gain, double phase,
                        Complex seed_amplitude) {
    if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
        throw ParamOutOfRange("transmissivity must lie in [0,1]");
    if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0)
        throw ParamOutOfRange("loss must lie in [0,1]");
    if (!std::isfinite(gain) || gain < 1.0)
        throw GainOutOfRange("amplitude gain must be finite and >= 1");
    const Complex rot = std::polar(1.0, phase);
    const Complex denom =
        1.0 + gain * rot * std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    if (std::abs(denom) < analytics::osc_epsilon)
        throw NearThreshold("feedback loop at oscillation threshold");
    const Complex coeff =
        (std::sqrt(1.0 - transmissivity) + gain * rot * std::sqrt(1.0 - loss)) / denom;
    return std::norm(coeff * seed_amplitude);
}

DataSeries fringe_scan(double transmissivity, double loss, double gain,
                       Complex seed_amplitude, int points) {
    if (points < 2) throw ParamOutOfRange("a sweep needs at least 2 points");
    DataSeries s;
    s.x_label = "phi";
    s.y_label = "intensity";
    s.y_scale = Scale::Linear;
    set_meta(s, "t", transmissivity);
    set_meta(s, "l", loss);
    set_meta(s, "gain", gain);
    set_meta(s, "seed_re", seed_amplitude.real());
    set_meta(s, "seed_im", seed_amplitude.imag());
    s.metadata["gaps"] = "near_oscillation";
    for (int i = 0; i < points; ++i) {
        const double phi = two_pi * i / points;
        DataPoint pt;
        pt.x = phi;
        try {
            pt.y = fringe_intensity(transmissivity, loss, gain, phi, seed_amplitude);
        } catch (const NearThreshold&) {
        }
        s.points.push_back(pt);
    }
    return s;
}

DataSeries run_sweep(const SweepConfig& cfg) {
    if (cfg.points < 2) throw ParamOutOfRange("a sweep needs at least 2 points");
    const bool has_range = cfg.from && cfg.to;
    if (has_range && *cfg.from > *cfg.to)
        throw ParamOutOfRange("sweep range must satisfy from <= to");
    const double gain = analytics::gain_from_qn_db(cfg.gqn_db);

    auto grid_x = [&](int i) {
        return *cfg.from + (*cfg.to - *cfg.from) * i / (cfg.points - 1);
    };

    switch (cfg.param) {
        case SweepConfig::Param::Phi: {
            if (!has_range) return phase_scan(cfg.transmissivity, cfg.loss, gain, cfg.points);
            DataSeries s = phase_scan(cfg.transmissivity, cfg.loss, gain, 2);
            s.points.clear();
            const double ref = analytics::reference_variance(cfg.transmissivity, gain);
            for (int i = 0; i < cfg.points; ++i) {
                DataPoint pt;
                pt.x = grid_x(i);
                try {
                    pt.y = analytics::db(
                        analytics::feedback_variance(cfg.transmissivity, cfg.loss, gain,
                                                     pt.x) /
                        ref);
                } catch (const NearThreshold&) {
                }
                s.points.push_back(pt);
            }
            return s;
        }
        case SweepConfig::Param::Loss: {
            if (!has_range) return loss_scan(cfg.transmissivity, cfg.gqn_db, cfg.points);
            DataSeries s = loss_scan(cfg.transmissivity, cfg.gqn_db, 2);
            s.points.clear();
            for (int i = 0; i < cfg.points; ++i) {
                const double l = grid_x(i);
                s.points.push_back(
                    {l,
                     analytics::db(
                         analytics::noise_reduction_factor(cfg.transmissivity, l, gain)),
                     std::nullopt});
            }
            return s;
        }
        case SweepConfig::Param::Transmissivity: {
            if (!has_range) return transmittance_scan(cfg.loss, cfg.gqn_db, cfg.points);
            DataSeries s = transmittance_scan(cfg.loss, cfg.gqn_db, 2);
            s.points.clear();
            for (int i = 0; i < cfg.points; ++i) {
                const double t = grid_x(i);
                s.points.push_back(
                    {t,
                     analytics::db(analytics::noise_reduction_factor(t, cfg.loss, gain)),
                     std::nullopt});
            }
            return s;
        }
        case SweepConfig::Param::GainDb:
            if (!has_range)
                throw ParamOutOfRange("a gain sweep needs explicit --from/--to bounds");
            return gain_scan(cfg.transmissivity, cfg.loss, *cfg.from, *cfg.to, cfg.points);
    }
    throw ParamOutOfRange("unknown sweep parameter");
}

// ---- fitting -----------------------------------------------------------

namespace {

double lookup(const std::map<std::string, double>& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end())
        throw DegenerateData("fit model needs parameter '" + key +
                             "' (free or fixed) but none was given");
    return it->second;
}

// keep trial parameters inside their physical domains
double clamp_param(const std::string& name, double v) {
    if (name == "t" || name == "l") return std::clamp(v, 0.0, 1.0);
    if (name == "gth") return std::max(v, 1.0 + 1e-9);
    if (name == "gqn_db") return std::max(v, 0.0);
    if (name == "amp") return std::max(v, 1e-12);
    return v;
}

}  // namespace

double eval_fit_model(FitModel model, FitXAxis x_axis, double x,
                      const std::map<std::string, double>& params, Scale y_scale) {
    const double amp = params.count("amp") ? params.at("amp") : 1.0;
    double value = 0.0;
    switch (model) {
        case FitModel::UnityTransmission: {
            const double gain = x_axis == FitXAxis::GainDb
                                    ? analytics::gain_from_qn_db(x)
                                    : analytics::gain_from_qn_db(lookup(params, "gqn_db"));
            value = amp * analytics::noise_reduction_unity_transmission(
                              gain, lookup(params, "gth"));
            break;
        }
        case FitModel::FullReduction: {
            const double t =
                x_axis == FitXAxis::Transmissivity ? x : lookup(params, "t");
            const double l = x_axis == FitXAxis::Loss ? x : lookup(params, "l");
            const double gain = x_axis == FitXAxis::GainDb
                                    ? analytics::gain_from_qn_db(x)
                                    : analytics::gain_from_qn_db(lookup(params, "gqn_db"));
            value = amp * analytics::noise_reduction_factor(t, l, gain);
            break;
        }
    }
    return y_scale == Scale::Db ? analytics::db(value) : value;
}

FitResult fit_noise_reduction(const DataSeries& data, FitModel model,
                              const std::map<std::string, double>& initial,
                              const FitOptions& options) {
    std::vector<std::string> names;
    for (const auto& [k, v] : initial) names.push_back(k);
    const int k = static_cast<int>(names.size());
    if (k == 0) throw DegenerateData("no free parameters to fit");

    std::vector<double> xs, ys, ws;
    for (const auto& pt : data.points) {
        if (!pt.y || !std::isfinite(*pt.y)) continue;
        xs.push_back(pt.x);
        ys.push_back(*pt.y);
        ws.push_back(pt.yerr && *pt.yerr > 0.0 ? 1.0 / *pt.yerr : 1.0);
    }
    const int m = static_cast<int>(xs.size());
    if (m < k)
        throw DegenerateData("fewer finite data points than free parameters");
    const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    if (*ymax - *ymin == 0.0)
        throw DegenerateData("constant data series cannot constrain fit parameters");

    Eigen::VectorXd p(k);
    for (int j = 0; j < k; ++j) p(j) = clamp_param(names[j], initial.at(names[j]));

    auto pack = [&](const Eigen::VectorXd& v) {
        std::map<std::string, double> all = options.fixed;
        for (int j = 0; j < k; ++j) all[names[j]] = v(j);
        return all;
    };
    auto residuals = [&](const Eigen::VectorXd& v) {
        const auto all = pack(v);
        Eigen::VectorXd r(m);
        for (int i = 0; i < m; ++i)
            r(i) = ws[i] * (ys[i] - eval_fit_model(model, options.x_axis, xs[i], all,
                                                   data.y_scale));
        return r;
    };

    Eigen::VectorXd r = residuals(p);
    double rss = r.squaredNorm();
    double lambda = 1e-3;
    FitResult result;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        result.iterations = iter;
        // central-difference Jacobian of the residual vector
        Eigen::MatrixXd jac(m, k);
        for (int j = 0; j < k; ++j) {
            const double h = 1e-6 * std::max(std::abs(p(j)), 1e-3);
            Eigen::VectorXd lo = p, hi = p;
            lo(j) = clamp_param(names[j], p(j) - h);
            hi(j) = clamp_param(names[j], p(j) + h);
            const double span = hi(j) - lo(j);
            if (span == 0.0) {
                jac.col(j).setZero();
                continue;
            }
            jac.col(j) = (residuals(hi) - residuals(lo)) / span;
        }
        Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;

        if (iter == 1) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
            const double emax = eig.eigenvalues().cwiseAbs().maxCoeff();
            const double emin = eig.eigenvalues().cwiseAbs().minCoeff();
            if (emax <= 0.0 || emin / emax < 1e-14)
                throw DegenerateData("fit parameters are not identifiable from the data");
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 25 && !accepted; ++attempt) {
            Eigen::MatrixXd damped = normal;
            for (int j = 0; j < k; ++j)
                damped(j, j) += lambda * std::max(normal(j, j), 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            Eigen::VectorXd trial = p + step;
            for (int j = 0; j < k; ++j) trial(j) = clamp_param(names[j], trial(j));
            const Eigen::VectorXd r_trial = residuals(trial);
            const double rss_trial = r_trial.squaredNorm();
            if (rss_trial <= rss) {
                double max_step = 0.0;
                for (int j = 0; j < k; ++j)
                    max_step = std::max(max_step, std::abs(trial(j) - p(j)) /
                                                      std::max(1.0, std::abs(p(j))));
                const double drop = rss - rss_trial;
                p = trial;
                r = r_trial;
                rss = rss_trial;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                if (drop < 1e-10 * std::max(rss, 1e-300) || max_step < 1e-10) {
                    result.converged = true;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) result.converged = true;  // no descent direction left
        if (result.converged) break;
    }

    if (!result.converged)
        throw NonConvergence("fit did not converge within " +
                             std::to_string(options.max_iterations) + " iterations");
    for (int j = 0; j < k; ++j) result.params[names[j]] = p(j);
    result.rss = rss;
    return result;
}

}  // namespace fbamp::experiments
