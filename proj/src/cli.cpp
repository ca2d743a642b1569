#include "fbamp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fbamp/analytics.hpp"
#include "fbamp/csv.hpp"
#include "fbamp/errors.hpp"
#include "fbamp/experiments.hpp"
#include "fbamp/netlist.hpp"
#include "fbamp/network.hpp"
#include "fbamp/oracles.hpp"

namespace fbamp::cli {

namespace {

using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_verify_failed = 2;
constexpr int exit_usage = 64;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_diagnostics(const std::vector<netlist::Diagnostic>& diags, std::ostream& err) {
    for (const auto& d : diags) {
        err << d.line << ':' << d.column << ": "
            << (d.severity == netlist::Severity::Error ? "error" : "warning") << ": "
            << d.message << '\n';
    }
}

void emit_series(const experiments::DataSeries& series, const std::string& csv_path,
                 std::ostream& out) {
    if (csv_path.empty())
        out << io::write_csv(series);
    else
        io::write_csv_file(csv_path, series);
}

json complex_json(const Complex& c) {
    return json{{"re", c.real()}, {"im", c.imag()}};
}

int run_solve(const std::string& path, bool as_json, double theta, std::ostream& out,
              std::ostream& err) {
    const auto parsed = netlist::parse_netlist(read_file(path));
    if (!parsed.ok()) {
        print_diagnostics(parsed.diagnostics, err);
        return exit_failure;
    }
    const net::SolveResult res = net::solve(*parsed.spec);

    if (as_json) {
        json doc;
        doc["outputs"] = json::object();
        for (const auto& [name, expr] : res.outputs) {
            json coeffs = json::array();
            std::set<std::string> modes;
            for (const auto& [m, v] : expr.ann) modes.insert(m);
            for (const auto& [m, v] : expr.cre) modes.insert(m);
            for (const auto& m : modes) {
                coeffs.push_back(json{{"mode", m},
                                      {"alpha", complex_json(expr.ann_coeff(m))},
                                      {"beta", complex_json(expr.cre_coeff(m))}});
            }
            doc["outputs"][name] = json{{"coefficients", coeffs},
                                        {"variance", quadrature_variance(expr, theta)}};
        }
        doc["loop_gain"] = res.loop_gain;
        doc["denom_mag"] = res.denom_mag;
        doc["stability"] = net::to_string(res.stability);
        out << doc.dump(2) << '\n';
        return exit_ok;
    }

    for (const auto& [name, expr] : res.outputs) {
        out << "output " << name << '\n';
        std::set<std::string> modes;
        for (const auto& [m, v] : expr.ann) modes.insert(m);
        for (const auto& [m, v] : expr.cre) modes.insert(m);
        for (const auto& m : modes) {
            const Complex a = expr.ann_coeff(m);
            const Complex b = expr.cre_coeff(m);
            out << "  mode " << m << " alpha " << io::format_double(a.real()) << ' '
                << io::format_double(a.imag()) << " beta " << io::format_double(b.real())
                << ' ' << io::format_double(b.imag()) << '\n';
        }
        out << "  variance " << io::format_double(quadrature_variance(expr, theta))
            << '\n';
    }
    out << "loop_gain " << io::format_double(res.loop_gain) << '\n';
    out << "denom_mag " << io::format_double(res.denom_mag) << '\n';
    out << "stability " << net::to_string(res.stability) << '\n';
    return exit_ok;
}

bool parse_key_value(const std::string& text, std::string& key, double& value) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) return false;
    key = text.substr(0, eq);
    const std::string v = text.substr(eq + 1);
    char* end = nullptr;
    value = std::strtod(v.c_str(), &end);
    return !v.empty() && end == v.c_str() + v.size();
}

int run_verify(std::size_t samples, std::uint64_t seed, int cases, int workers,
               std::ostream& out) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int failures = 0;
    for (int i = 0; i < cases; ++i) {
        const double t = 0.05 + 0.949 * u(rng);
        const double l = 0.9 * u(rng);
        const double g_cap = std::max(std::min(0.95 * net::threshold_gain(t, l), 20.0), 1.0);
        const double g = 1.0 + (g_cap - 1.0) * u(rng);
        const double phi = 2.0 * std::numbers::pi * u(rng);

        oracles::McConfig cfg;
        cfg.samples = samples;
        cfg.seed = seed + 0x9e3779b9ULL * static_cast<std::uint64_t>(i + 1);
        cfg.workers = workers;
        const auto rep = oracles::crosscheck(t, l, g, phi, cfg);
        if (!rep.pass) ++failures;

        char line[256];
        snprintf(line, sizeof(line),
                 "case %3d  t=%.4f l=%.4f g=%.4f phi=%.4f  analytic=%.6g network=%s "
                 "mc=%.6g+-%.2g(%s) unrolled=%s  %s",
                 i + 1, t, l, g, phi, rep.analytic,
                 rep.analytic_network_ok ? "ok" : "FAIL", rep.monte_carlo.variance,
                 rep.monte_carlo.std_error, rep.monte_carlo_ok ? "ok" : "FAIL",
                 rep.unrolled ? (rep.unrolled_ok ? "ok" : "FAIL") : "skipped",
                 rep.pass ? "PASS" : "FAIL");
        out << line << '\n';
    }
    out << (failures == 0 ? "verify: all cases passed" : "verify: FAILURES") << " ("
        << cases - failures << '/' << cases << ")\n";
    return failures == 0 ? exit_ok : exit_verify_failed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"coherent-feedback amplifier network simulator"};
    app.require_subcommand(1);

    // solve
    std::string netlist_path;
    bool solve_json = false;
    double theta = 0.0;
    auto* solve_cmd = app.add_subcommand("solve", "solve a netlist and print the outputs");
    solve_cmd->add_option("netlist", netlist_path, "netlist file")->required();
    solve_cmd->add_flag("--json", solve_json, "JSON output");
    solve_cmd->add_option("--theta", theta, "homodyne quadrature angle (radians)");

    // sweep
    std::string sweep_param;
    experiments::SweepConfig sweep_cfg;
    double sweep_from = 0.0, sweep_to = 0.0;
    bool has_from = false, has_to = false;
    double sweep_phi = 0.0;
    std::string sweep_csv;
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep, CSV output");
    sweep_cmd->add_option("--param", sweep_param, "swept parameter: phi|l|t|gqn")
        ->required()
        ->check(CLI::IsMember({"phi", "l", "t", "gqn"}));
    sweep_cmd->add_option("--from", sweep_from, "sweep start");
    sweep_cmd->add_option("--to", sweep_to, "sweep end");
    sweep_cmd->add_option("--points", sweep_cfg.points, "grid points");
    sweep_cmd->add_option("--t", sweep_cfg.transmissivity, "tap transmissivity");
    sweep_cmd->add_option("--l", sweep_cfg.loss, "feedback loss");
    sweep_cmd->add_option("--gqn-db", sweep_cfg.gqn_db, "quantum noise gain (dB)");
    sweep_cmd->add_option("--phi", sweep_phi, "feedback phase (radians)");
    sweep_cmd->add_option("--csv", sweep_csv, "write CSV to file instead of stdout");

    // fringe
    double fr_t = 0.999, fr_l = 0.0, fr_gqn = 0.0, fr_re = 0.0, fr_im = 0.0;
    int fr_points = experiments::default_sweep_points;
    std::string fringe_csv;
    auto* fringe_cmd = app.add_subcommand("fringe", "seeded interference fringe");
    fringe_cmd->add_option("--t", fr_t, "tap transmissivity")->required();
    fringe_cmd->add_option("--l", fr_l, "feedback loss")->required();
    fringe_cmd->add_option("--gqn-db", fr_gqn, "quantum noise gain (dB)")->required();
    fringe_cmd->add_option("--seed-re", fr_re, "seed amplitude, real part")->required();
    fringe_cmd->add_option("--seed-im", fr_im, "seed amplitude, imaginary part")
        ->required();
    fringe_cmd->add_option("--points", fr_points, "grid points");
    fringe_cmd->add_option("--csv", fringe_csv, "write CSV to file instead of stdout");

    // fit
    std::string fit_csv_path, fit_model_name, fit_x = "gqn";
    std::vector<std::string> fit_inits, fit_fixes;
    bool fit_json = false;
    auto* fit_cmd = app.add_subcommand("fit", "least-squares fit of a reduction curve");
    fit_cmd->add_option("csv", fit_csv_path, "input CSV")->required();
    fit_cmd->add_option("--model", fit_model_name, "model: eq10|eq11")
        ->required()
        ->check(CLI::IsMember({"eq10", "eq11"}));
    fit_cmd->add_option("--init", fit_inits, "initial guess, name=value (repeatable)");
    fit_cmd->add_option("--fix", fit_fixes, "fixed parameter, name=value (repeatable)");
    fit_cmd->add_option("--x", fit_x, "x axis: gqn|l|t")
        ->check(CLI::IsMember({"gqn", "l", "t"}));
    fit_cmd->add_flag("--json", fit_json, "JSON output");

    // verify
    std::size_t vf_samples = 200000;
    std::uint64_t vf_seed = 1;
    int vf_cases = 20, vf_workers = 1;
    auto* verify_cmd =
        app.add_subcommand("verify", "cross-check oracles on random stable points");
    verify_cmd->add_option("--samples", vf_samples, "Monte-Carlo samples per case");
    verify_cmd->add_option("--seed", vf_seed, "RNG seed");
    verify_cmd->add_option("--cases", vf_cases, "number of random parameter points");
    verify_cmd->add_option("--workers", vf_workers, "Monte-Carlo worker partitions");

    std::vector<const char*> argv;
    argv.push_back("fbamp");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
    has_from = sweep_cmd->count("--from") > 0;
    has_to = sweep_cmd->count("--to") > 0;

    try {
        if (*solve_cmd) return run_solve(netlist_path, solve_json, theta, out, err);

        if (*sweep_cmd) {
            if (sweep_phi != 0.0) {
                err << "usage error: reduction sweeps are defined at the optimum phase "
                       "(phi = 0)\n";
                return exit_usage;
            }
            if (has_from != has_to) {
                err << "usage error: --from and --to must be given together\n";
                return exit_usage;
            }
            if (sweep_param == "gqn" && !has_from) {
                err << "usage error: a gain sweep needs explicit --from/--to bounds\n";
                return exit_usage;
            }
            if (sweep_param == "phi")
                sweep_cfg.param = experiments::SweepConfig::Param::Phi;
            else if (sweep_param == "l")
                sweep_cfg.param = experiments::SweepConfig::Param::Loss;
            else if (sweep_param == "t")
                sweep_cfg.param = experiments::SweepConfig::Param::Transmissivity;
            else
                sweep_cfg.param = experiments::SweepConfig::Param::GainDb;
            if (has_from) {
                sweep_cfg.from = sweep_from;
                sweep_cfg.to = sweep_to;
            }
            emit_series(experiments::run_sweep(sweep_cfg), sweep_csv, out);
            return exit_ok;
        }

        if (*fringe_cmd) {
            const double gain = analytics::gain_from_qn_db(fr_gqn);
            emit_series(experiments::fringe_scan(fr_t, fr_l, gain, Complex{fr_re, fr_im},
                                                 fr_points),
                        fringe_csv, out);
            return exit_ok;
        }

        if (*fit_cmd) {
            const bool unity = fit_model_name == "eq11";
            const auto model = unity ? experiments::FitModel::UnityTransmission
                                     : experiments::FitModel::FullReduction;
            experiments::FitOptions options;
            if (fit_x == "l")
                options.x_axis = experiments::FitXAxis::Loss;
            else if (fit_x == "t")
                options.x_axis = experiments::FitXAxis::Transmissivity;

            std::map<std::string, double> initial;
            for (const auto& s : fit_inits) {
                std::string key;
                double value;
                if (!parse_key_value(s, key, value)) {
                    err << "usage error: bad --init '" << s << "' (expected name=value)\n";
                    return exit_usage;
                }
                initial[key] = value;
            }
            for (const auto& s : fit_fixes) {
                std::string key;
                double value;
                if (!parse_key_value(s, key, value)) {
                    err << "usage error: bad --fix '" << s << "' (expected name=value)\n";
                    return exit_usage;
                }
                options.fixed[key] = value;
            }
            if (initial.empty()) {
                if (unity)
                    initial["gth"] = 10.0;
                else {
                    initial["t"] = 0.5;
                    initial["l"] = 0.1;
                }
            }

            const auto data = io::read_csv_file(fit_csv_path);
            const auto result =
                experiments::fit_noise_reduction(data, model, initial, options);
            if (fit_json) {
                json doc;
                doc["params"] = result.params;
                doc["rss"] = result.rss;
                doc["iterations"] = result.iterations;
                doc["converged"] = result.converged;
                out << doc.dump(2) << '\n';
            } else {
                for (const auto& [k, v] : result.params)
                    out << k << ' ' << io::format_double(v) << '\n';
                out << "rss " << io::format_double(result.rss) << '\n';
                out << "iterations " << result.iterations << '\n';
                out << "converged " << (result.converged ? "true" : "false") << '\n';
            }
            return exit_ok;
        }

        if (*verify_cmd) return run_verify(vf_samples, vf_seed, vf_cases, vf_workers, out);
    } catch (const CsvError& e) {
        err << "error: line " << e.line << ": " << e.what() << '\n';
        return exit_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }

    err << "usage error: missing subcommand\n";
    return exit_usage;
}

}  // namespace fbamp::cli
