#pragma once

#include <map>
#include <string>
#include <vector>

#include "fbamp/operator_expr.hpp"

namespace fbamp::net {

enum class ComponentKind { Amplifier, BeamSplitter, Phase, Loss };

/// One network element. `param` is the amplitude gain G for amplifiers, the
/// transmissivity T for beam splitters, the phase in radians for phase
/// shifters and the loss fraction L for loss elements.
///
/// Ports per kind:
///   amplifier    in, out, idler_in, idler_out
///   beamsplitter in1, in2, out1, out2
///   phase        in, out
///   loss         in, out
struct ComponentSpec {
    std::string id;
    ComponentKind kind;
    double param = 0.0;
    bool operator==(const ComponentSpec&) const = default;
};

struct PortRef {
    std::string component;
    std::string port;
    bool operator==(const PortRef&) const = default;
};

/// A link endpoint: either a source mode (component empty, port = mode name)
/// or a component port.
struct Endpoint {
    std::string component;
    std::string port;
    bool is_mode() const { return component.empty(); }
    bool operator==(const Endpoint&) const = default;
};

struct Link {
    Endpoint from;
    Endpoint to;
    bool operator==(const Link&) const = default;
};

struct OutputDecl {
    PortRef port;
    std::string name;
    bool operator==(const OutputDecl&) const = default;
};

/// Structured validation finding, mapped to positioned diagnostics by the
/// netlist layer and to MalformedNetwork by validate().
struct Violation {
    enum class Code {
        DuplicateComponentId,
        DuplicateModeName,
        BadParam,
        UnknownComponent,
        UnknownPort,
        UnknownMode,
        LinkFromInputPort,
        LinkIntoOutputPort,
        UnconnectedInput,
        DuplicateDriver,
        SourceReused,
        OutputPortReused,
        DuplicateOutputName,
    };
    Code code;
    std::string message;
    int link_index = -1;    // offending link, when applicable
    int output_index = -1;  // offending output declaration, when applicable
    std::string component;  // offending component id, when applicable
    std::string mode;       // offending mode name, when applicable
};

struct NetworkSpec {
    std::vector<Mode> sources;
    std::vector<ComponentSpec> components;
    std::vector<Link> links;
    std::vector<OutputDecl> outputs;

    std::vector<Violation> check() const;
    /// Throws MalformedNetwork carrying the first violation message.
    void validate() const;

    bool operator==(const NetworkSpec&) const = default;
};

enum class Stability { Stable, NearOscillation, PositiveFeedbackUnstable };

const char* to_string(Stability s);

struct SolveResult {
    std::map<std::string, OperatorExpr> outputs;
    ModeTable modes;  // declared sources plus loss ancillas
    double loop_gain = 0.0;
    double denom_mag = 1.0;
    Stability stability = Stability::Stable;
};

/// Steady-state solve of the network's port expressions x = M x + s over
/// doubled (ann, conj-cre) coordinates, so dagger couplings through amplifier
/// idlers are exact. Cycles are allowed; the result is returned with a
/// stability flag even above the positive-feedback threshold. Throws
/// SingularLoop when the linear system is singular, MalformedNetwork on an
/// invalid spec.
SolveResult solve(const NetworkSpec& net);

/// Canonical single-loop topology: amplifier RA, tap beam splitter TAP
/// (in1 = amplifier output, in2 = input mode b0), feedback branch
/// TAP.out2 -> PZT (phase) -> ATT (loss) -> RA.in, idler source S,
/// detector port TAP.out1 declared as output "b_out".
NetworkSpec canonical_network(double transmissivity, double loss, double gain, double phase);

/// Closed-form solution of the canonical topology:
///   b_out = [(sqrt(1-T) + G e^{i phi} sqrt(1-L)) b0
///            + G sqrt(T L) c0 + g sqrt(T) S^dag] / D,
///   D = 1 + G e^{i phi} sqrt((1-T)(1-L)),
/// with c0 the loss ancilla "ATT.vac". Independent of solve(); the two
/// routes are cross-checked in tests.
SolveResult canonical_feedback(double transmissivity, double loss, double gain, double phase);

/// Oscillation threshold gain 1/sqrt((1-T)(1-L)); +infinity when T = 1 or
/// L = 1 (no feedback path).
double threshold_gain(double transmissivity, double loss);

struct StabilityReport {
    Stability stability;
    double loop_gain;
    double denom_mag;
};

/// Closed-form stability diagnostics for the canonical loop: round-trip gain
/// r = G sqrt((1-T)(1-L)) and |1 + r e^{i phi}|.
StabilityReport stability_report(double transmissivity, double loss, double gain, double phase);

/// Canonical names used by canonical_network / canonical_feedback.
inline constexpr const char* canonical_input_mode = "b0";
inline constexpr const char* canonical_idler_mode = "S";
inline constexpr const char* canonical_loss_ancilla = "ATT.vac";
inline constexpr const char* canonical_output = "b_out";

}  // namespace fbamp::net
