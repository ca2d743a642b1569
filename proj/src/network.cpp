#include "fbamp/network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <set>

#include "fbamp/analytics.hpp"
#include "fbamp/errors.hpp"

namespace fbamp::net {

namespace {

const std::vector<std::string>& input_ports(ComponentKind k) {
    static const std::vector<std::string> amp{"in", "idler_in"};
    static const std::vector<std::string> bs{"in1", "in2"};
    static const std::vector<std::string> unary{"in"};
    switch (k) {
        case ComponentKind::Amplifier: return amp;
        case ComponentKind::BeamSplitter: return bs;
        default: return unary;
    }
}

const std::vector<std::string>& output_ports(ComponentKind k) {
    static const std::vector<std::string> amp{"out", "idler_out"};
    static const std::vector<std::string> bs{"out1", "out2"};
    static const std::vector<std::string> unary{"out"};
    switch (k) {
        case ComponentKind::Amplifier: return amp;
        case ComponentKind::BeamSplitter: return bs;
        default: return unary;
    }
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string ancilla_name(const std::string& loss_id) { return loss_id + ".vac"; }

Stability classify(double loop_gain, double denom_mag) {
    if (denom_mag < analytics::osc_epsilon) return Stability::NearOscillation;
    if (loop_gain >= 1.0) return Stability::PositiveFeedbackUnstable;
    return Stability::Stable;
}

}  // namespace

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::NearOscillation: return "near_oscillation";
        case Stability::PositiveFeedbackUnstable: return "positive_feedback_unstable";
    }
    return "?";
}

std::vector<Violation> NetworkSpec::check() const {
    std::vector<Violation> out;
    auto add = [&out](Violation::Code code, std::string msg) -> Violation& {
        Violation v;
        v.code = code;
        v.message = std::move(msg);
        out.push_back(std::move(v));
        return out.back();
    };

    std::map<std::string, const ComponentSpec*> comp_by_id;
    for (const auto& c : components) {
        if (!comp_by_id.emplace(c.id, &c).second) {
            add(Violation::Code::DuplicateComponentId,
                "duplicate component id '" + c.id + "'")
                .component = c.id;
            continue;
        }
        bool ok = std::isfinite(c.param);
        switch (c.kind) {
            case ComponentKind::Amplifier: ok = ok && c.param >= 1.0; break;
            case ComponentKind::BeamSplitter:
            case ComponentKind::Loss: ok = ok && c.param >= 0.0 && c.param <= 1.0; break;
            case ComponentKind::Phase: break;
        }
        if (!ok) {
            add(Violation::Code::BadParam,
                "component '" + c.id + "' parameter out of range")
                .component = c.id;
        }
    }

    std::set<std::string> mode_names;
    for (const auto& m : sources) {
        if (!mode_names.insert(m.name).second) {
            add(Violation::Code::DuplicateModeName, "duplicate mode '" + m.name + "'")
                .mode = m.name;
        }
        if (m.kind == ModeKind::Coherent &&
            (!m.amplitude || !std::isfinite(m.amplitude->real()) ||
             !std::isfinite(m.amplitude->imag()))) {
            add(Violation::Code::BadParam,
                "coherent mode '" + m.name + "' needs a finite amplitude")
                .mode = m.name;
        }
    }
    for (const auto& c : components) {
        if (c.kind == ComponentKind::Loss && mode_names.count(ancilla_name(c.id))) {
            add(Violation::Code::DuplicateModeName,
                "mode '" + ancilla_name(c.id) + "' collides with the loss ancilla of '" +
                    c.id + "'")
                .component = c.id;
        }
    }

    // endpoint resolution
    auto resolve_comp = [&](const std::string& id) -> const ComponentSpec* {
        auto it = comp_by_id.find(id);
        return it == comp_by_id.end() ? nullptr : it->second;
    };

    std::map<std::pair<std::string, std::string>, int> input_driver_count;
    std::map<std::string, int> source_use;
    std::map<std::pair<std::string, std::string>, int> output_use;

    for (int i = 0; i < static_cast<int>(links.size()); ++i) {
        const Link& l = links[i];
        bool from_ok = true;
        if (l.from.is_mode()) {
            if (!mode_names.count(l.from.port)) {
                add(Violation::Code::UnknownMode,
                    "unknown source mode '" + l.from.port + "'")
                    .link_index = i;
                from_ok = false;
            }
        } else {
            const ComponentSpec* c = resolve_comp(l.from.component);
            if (!c) {
                add(Violation::Code::UnknownComponent,
                    "unknown component '" + l.from.component + "'")
                    .link_index = i;
                from_ok = false;
            } else if (!contains(output_ports(c->kind), l.from.port)) {
                if (contains(input_ports(c->kind), l.from.port)) {
                    add(Violation::Code::LinkFromInputPort,
                        "link source '" + l.from.component + "." + l.from.port +
                            "' is an input port")
                        .link_index = i;
                } else {
                    add(Violation::Code::UnknownPort,
                        "component '" + l.from.component + "' has no port '" +
                            l.from.port + "'")
                        .link_index = i;
                }
                from_ok = false;
            }
        }

        bool to_ok = true;
        if (l.to.is_mode()) {
            add(Violation::Code::LinkIntoOutputPort,
                "link target must be a component input port")
                .link_index = i;
            to_ok = false;
        } else {
            const ComponentSpec* c = resolve_comp(l.to.component);
            if (!c) {
                add(Violation::Code::UnknownComponent,
                    "unknown component '" + l.to.component + "'")
                    .link_index = i;
                to_ok = false;
            } else if (!contains(input_ports(c->kind), l.to.port)) {
                if (contains(output_ports(c->kind), l.to.port)) {
                    add(Violation::Code::LinkIntoOutputPort,
                        "link target '" + l.to.component + "." + l.to.port +
                            "' is an output port")
                        .link_index = i;
                } else {
                    add(Violation::Code::UnknownPort,
                        "component '" + l.to.component + "' has no port '" + l.to.port +
                            "'")
                        .link_index = i;
                }
                to_ok = false;
            }
        }

        if (from_ok) {
            if (l.from.is_mode()) {
                if (++source_use[l.from.port] > 1) {
                    add(Violation::Code::SourceReused,
                        "mode '" + l.from.port + "' drives more than one input")
                        .link_index = i;
                }
            } else {
                if (++output_use[{l.from.component, l.from.port}] > 1) {
                    add(Violation::Code::OutputPortReused,
                        "output port '" + l.from.component + "." + l.from.port +
                            "' used more than once")
                        .link_index = i;
                }
            }
        }
        if (to_ok) {
            if (++input_driver_count[{l.to.component, l.to.port}] > 1) {
                add(Violation::Code::DuplicateDriver,
                    "input '" + l.to.component + "." + l.to.port +
                        "' driven by more than one link")
                    .link_index = i;
            }
        }
    }

    for (const auto& c : components) {
        for (const auto& p : input_ports(c.kind)) {
            if (!input_driver_count.count({c.id, p})) {
                add(Violation::Code::UnconnectedInput,
                    "input '" + c.id + "." + p + "' is not driven")
                    .component = c.id;
            }
        }
    }

    std::set<std::string> output_names;
    for (int i = 0; i < static_cast<int>(outputs.size()); ++i) {
        const OutputDecl& o = outputs[i];
        const ComponentSpec* c = resolve_comp(o.port.component);
        if (!c) {
            add(Violation::Code::UnknownComponent,
                "unknown component '" + o.port.component + "'")
                .output_index = i;
        } else if (!contains(output_ports(c->kind), o.port.port)) {
            add(Violation::Code::UnknownPort,
                "component '" + o.port.component + "' has no output port '" + o.port.port +
                    "'")
                .output_index = i;
        } else if (++output_use[{o.port.component, o.port.port}] > 1) {
            add(Violation::Code::OutputPortReused,
                "output port '" + o.port.component + "." + o.port.port +
                    "' used more than once")
                .output_index = i;
        }
        if (!output_names.insert(o.name).second) {
            add(Violation::Code::DuplicateOutputName,
                "duplicate output name '" + o.name + "'")
                .output_index = i;
        }
    }

    return out;
}

void NetworkSpec::validate() const {
    auto violations = check();
    if (!violations.empty()) throw MalformedNetwork(violations.front().message);
}

namespace {

using Eigen::MatrixXcd;
using PortId = std::pair<int, std::string>;  // component index, output port name

struct Compiled {
    std::vector<std::string> mode_names;
    ModeTable table;
    std::map<std::string, int> mode_index;
    std::vector<PortId> ports;
    std::map<PortId, int> port_index;

    struct Driver {
        bool from_mode;
        int index;  // mode index or port index
    };
    std::map<PortId, Driver> driver;  // keyed by (component, input port)
};

Compiled compile(const NetworkSpec& net) {
    Compiled c;
    for (const auto& m : net.sources) {
        c.mode_index[m.name] = static_cast<int>(c.mode_names.size());
        c.mode_names.push_back(m.name);
        c.table[m.name] = m;
    }
    for (const auto& comp : net.components) {
        if (comp.kind == ComponentKind::Loss) {
            const std::string anc = ancilla_name(comp.id);
            c.mode_index[anc] = static_cast<int>(c.mode_names.size());
            c.mode_names.push_back(anc);
            c.table[anc] = Mode{anc, ModeKind::Vacuum, std::nullopt};
        }
    }
    std::map<std::string, int> comp_index;
    for (int i = 0; i < static_cast<int>(net.components.size()); ++i) {
        comp_index[net.components[i].id] = i;
        for (const auto& p : output_ports(net.components[i].kind)) {
            c.port_index[{i, p}] = static_cast<int>(c.ports.size());
            c.ports.push_back({i, p});
        }
    }
    for (const auto& l : net.links) {
        const int ci = comp_index.at(l.to.component);
        Compiled::Driver d{};
        if (l.from.is_mode()) {
            d.from_mode = true;
            d.index = c.mode_index.at(l.from.port);
        } else {
            d.from_mode = false;
            d.index = c.port_index.at({comp_index.at(l.from.component), l.from.port});
        }
        c.driver[{ci, l.to.port}] = d;
    }
    return c;
}

// One coefficient of a component's input-output relation: `input` feeds
// `target` output with complex weight, through a dagger when the coupling
// conjugates (amplifier idler terms).
struct Coupling {
    std::string input;
    std::string target;
    Complex weight;
    bool daggered;
};

std::vector<Coupling> couplings(const ComponentSpec& comp) {
    std::vector<Coupling> out;
    switch (comp.kind) {
        case ComponentKind::Amplifier: {
            const double gain = comp.param;
            const double g = std::sqrt(gain * gain - 1.0);
            out.push_back({"in", "out", gain, false});
            out.push_back({"idler_in", "out", g, true});
            out.push_back({"idler_in", "idler_out", gain, false});
            out.push_back({"in", "idler_out", g, true});
            break;
        }
        case ComponentKind::BeamSplitter: {
            const double t = std::sqrt(comp.param);
            const double r = std::sqrt(1.0 - comp.param);
            out.push_back({"in1", "out1", t, false});
            out.push_back({"in2", "out1", r, false});
            out.push_back({"in2", "out2", t, false});
            out.push_back({"in1", "out2", -r, false});
            break;
        }
        case ComponentKind::Phase:
            out.push_back({"in", "out", std::polar(1.0, comp.param), false});
            break;
        case ComponentKind::Loss:
            out.push_back({"in", "out", std::sqrt(1.0 - comp.param), false});
            break;
    }
    std::erase_if(out, [](const Coupling& c) { return c.weight == Complex{0.0, 0.0}; });
    return out;
}

}  // namespace

SolveResult solve(const NetworkSpec& net) {
    net.validate();
    const Compiled c = compile(net);
    const int n_ports = static_cast<int>(c.ports.size());
    const int n_modes = static_cast<int>(c.mode_names.size());
    const int dim = 2 * n_ports;

    MatrixXcd m = MatrixXcd::Zero(dim, dim);
    MatrixXcd src = MatrixXcd::Zero(dim, n_modes);
    // port adjacency for cycle detection: port -> ports of the consuming component
    std::vector<std::set<int>> adj(n_ports);

    for (int ci = 0; ci < static_cast<int>(net.components.size()); ++ci) {
        const ComponentSpec& comp = net.components[ci];
        for (const Coupling& cp : couplings(comp)) {
            const int q = c.port_index.at({ci, cp.target});
            const auto& drv = c.driver.at({ci, cp.input});
            if (drv.from_mode) {
                if (cp.daggered)
                    src(2 * q + 1, drv.index) += std::conj(cp.weight);
                else
                    src(2 * q, drv.index) += cp.weight;
            } else {
                const int p = drv.index;
                if (cp.daggered) {
                    m(2 * q, 2 * p + 1) += cp.weight;
                    m(2 * q + 1, 2 * p) += std::conj(cp.weight);
                } else {
                    m(2 * q, 2 * p) += cp.weight;
                    m(2 * q + 1, 2 * p + 1) += std::conj(cp.weight);
                }
                adj[p].insert(q);
            }
        }
        if (comp.kind == ComponentKind::Loss) {
            const int q = c.port_index.at({ci, "out"});
            const double amp = std::sqrt(comp.param);
            if (amp != 0.0) src(2 * q, c.mode_index.at(ancilla_name(comp.id))) += amp;
        }
    }

    // Feedback cut: DFS back edges identify the inputs to sever. Removing
    // every edge carried by those inputs leaves the port graph acyclic.
    std::vector<int> color(n_ports, 0);  // 0 white, 1 on stack, 2 done
    std::set<int> cut_ports;             // source ports of cut edges
    {
        std::vector<std::pair<int, std::set<int>::const_iterator>> stack;
        for (int start = 0; start < n_ports; ++start) {
            if (color[start] != 0) continue;
            color[start] = 1;
            stack.push_back({start, adj[start].begin()});
            while (!stack.empty()) {
                auto& [p, it] = stack.back();
                if (it == adj[p].end()) {
                    color[p] = 2;
                    stack.pop_back();
                    continue;
                }
                const int q = *it;
                ++it;
                if (cut_ports.count(p)) continue;  // already severed at p
                if (color[q] == 1) {
                    cut_ports.insert(p);
                } else if (color[q] == 0) {
                    color[q] = 1;
                    stack.push_back({q, adj[q].begin()});
                }
            }
        }
    }

    const std::vector<int> cuts(cut_ports.begin(), cut_ports.end());
    const int n_cuts = static_cast<int>(cuts.size());

    // Severed coupling columns become injection vectors of the return map.
    MatrixXcd m_cut = m;
    MatrixXcd inject = MatrixXcd::Zero(dim, 2 * n_cuts);
    for (int k = 0; k < n_cuts; ++k) {
        const int p = cuts[k];
        inject.col(2 * k) = m.col(2 * p);          // unit u signal at the cut
        inject.col(2 * k + 1) = m.col(2 * p + 1);  // unit w signal at the cut
        m_cut.col(2 * p).setZero();
        m_cut.col(2 * p + 1).setZero();
    }

    SolveResult res;
    res.modes = c.table;

    // loop gain: spectral radius of the round-trip return map at the cut
    if (n_cuts > 0) {
        MatrixXcd acyclic = MatrixXcd::Identity(dim, dim) - m_cut;
        MatrixXcd response = acyclic.partialPivLu().solve(inject);
        MatrixXcd ret(2 * n_cuts, 2 * n_cuts);
        for (int k = 0; k < n_cuts; ++k) {
            ret.row(2 * k) = response.row(2 * cuts[k]);
            ret.row(2 * k + 1) = response.row(2 * cuts[k] + 1);
        }
        Eigen::ComplexEigenSolver<MatrixXcd> eig(ret, /*computeEigenvectors=*/false);
        res.loop_gain = eig.eigenvalues().cwiseAbs().maxCoeff();
    }

    double denom_mag = 1.0;
    MatrixXcd solution;
    if (n_ports > 0) {
        const MatrixXcd sys = MatrixXcd::Identity(dim, dim) - m;
        Eigen::PartialPivLU<MatrixXcd> lu(sys);
        double log_det = 0.0;
        bool exact_zero = false;
        for (int i = 0; i < dim; ++i) {
            const double piv = std::abs(lu.matrixLU()(i, i));
            if (piv == 0.0) {
                exact_zero = true;
                break;
            }
            log_det += std::log(piv);
        }
        denom_mag = exact_zero ? 0.0 : std::exp(0.5 * log_det);
        solution = lu.solve(src);
        if (!solution.allFinite())
            throw SingularLoop("network loop system is singular (denominator magnitude " +
                               std::to_string(denom_mag) + ")");
    }
    res.denom_mag = denom_mag;
    res.stability = classify(res.loop_gain, denom_mag);

    for (const auto& o : net.outputs) {
        int ci = 0;
        for (; ci < static_cast<int>(net.components.size()); ++ci)
            if (net.components[ci].id == o.port.component) break;
        const int p = c.port_index.at({ci, o.port.port});
        OperatorExpr expr;
        for (int j = 0; j < n_modes; ++j) {
            const Complex u = solution(2 * p, j);
            const Complex w = solution(2 * p + 1, j);
            if (u != Complex{0.0, 0.0}) expr.ann[c.mode_names[j]] = u;
            if (w != Complex{0.0, 0.0}) expr.cre[c.mode_names[j]] = std::conj(w);
        }
        res.outputs[o.name] = std::move(expr);
    }
    return res;
}

NetworkSpec canonical_network(double transmissivity, double loss, double gain,
                              double phase) {
    NetworkSpec net;
    net.sources.push_back({canonical_input_mode, ModeKind::Vacuum, std::nullopt});
    net.sources.push_back({canonical_idler_mode, ModeKind::Idler, std::nullopt});
    net.components.push_back({"RA", ComponentKind::Amplifier, gain});
    net.components.push_back({"TAP", ComponentKind::BeamSplitter, transmissivity});
    net.components.push_back({"PZT", ComponentKind::Phase, phase});
    net.components.push_back({"ATT", ComponentKind::Loss, loss});
    net.links.push_back({{"", canonical_input_mode}, {"TAP", "in2"}});
    net.links.push_back({{"RA", "out"}, {"TAP", "in1"}});
    net.links.push_back({{"TAP", "out2"}, {"PZT", "in"}});
    net.links.push_back({{"PZT", "out"}, {"ATT", "in"}});
    net.links.push_back({{"ATT", "out"}, {"RA", "in"}});
    net.links.push_back({{"", canonical_idler_mode}, {"RA", "idler_in"}});
    net.outputs.push_back({{"TAP", "out1"}, canonical_output});
    return net;
}

SolveResult canonical_feedback(double transmissivity, double loss, double gain,
                               double phase) {
    if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
        throw ParamOutOfRange("transmissivity must lie in [0,1]");
    if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0)
        throw ParamOutOfRange("loss must lie in [0,1]");
    if (!std::isfinite(gain) || gain < 1.0)
        throw GainOutOfRange("amplitude gain must be finite and >= 1");

    const double g = std::sqrt(gain * gain - 1.0);
    const Complex rot = std::polar(1.0, phase);
    const double root = std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    const Complex denom = 1.0 + gain * rot * root;

    SolveResult res;
    res.loop_gain = gain * root;
    res.denom_mag = std::abs(denom);
    res.stability = classify(res.loop_gain, res.denom_mag);
    res.modes[canonical_input_mode] = {canonical_input_mode, ModeKind::Vacuum, std::nullopt};
    res.modes[canonical_idler_mode] = {canonical_idler_mode, ModeKind::Idler, std::nullopt};
    res.modes[canonical_loss_ancilla] = {canonical_loss_ancilla, ModeKind::Vacuum,
                                         std::nullopt};

    OperatorExpr b_out;
    const Complex a = (std::sqrt(1.0 - transmissivity) + gain * rot * std::sqrt(1.0 - loss)) /
                      denom;
    const Complex b = gain * std::sqrt(transmissivity * loss) / denom;
    const Complex cc = g * std::sqrt(transmissivity) / denom;
    if (a != Complex{0.0, 0.0}) b_out.ann[canonical_input_mode] = a;
    if (b != Complex{0.0, 0.0}) b_out.ann[canonical_loss_ancilla] = b;
    if (cc != Complex{0.0, 0.0}) b_out.cre[canonical_idler_mode] = cc;
    res.outputs[canonical_output] = std::move(b_out);
    return res;
}

double threshold_gain(double transmissivity, double loss) {
    if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
        throw ParamOutOfRange("transmissivity must lie in [0,1]");
    if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0)
        throw ParamOutOfRange("loss must lie in [0,1]");
    const double prod = (1.0 - transmissivity) * (1.0 - loss);
    if (prod == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(prod);
}

StabilityReport stability_report(double transmissivity, double loss, double gain,
                                 double phase) {
    if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
        throw ParamOutOfRange("transmissivity must lie in [0,1]");
    if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0)
        throw ParamOutOfRange("loss must lie in [0,1]");
    if (!std::isfinite(gain) || gain < 1.0)
        throw GainOutOfRange("amplitude gain must be finite and >= 1");
    const double r = gain * std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    const double denom_mag = std::abs(1.0 + r * std::polar(1.0, phase));
    return {classify(r, denom_mag), r, denom_mag};
}

}  // namespace fbamp::net
