#include "fbamp/elements.hpp"

#include <cmath>

#include "fbamp/errors.hpp"

namespace fbamp {

AmplifierOutputs amplifier_map(double gain, const OperatorExpr& signal_in,
                               const OperatorExpr& idler_in) {
    if (!std::isfinite(gain) || gain < 1.0)
        throw GainOutOfRange("amplitude gain must be finite and >= 1, got " +
                             std::to_string(gain));
    const double g = std::sqrt(gain * gain - 1.0);
    AmplifierOutputs out;
    out.signal_out.add_scaled(signal_in, gain);
    out.signal_out.add_scaled(dagger(idler_in), g);
    out.idler_out.add_scaled(idler_in, gain);
    out.idler_out.add_scaled(dagger(signal_in), g);
    return out;
}

BeamSplitterOutputs beam_splitter_map(double transmissivity, const OperatorExpr& in1,
                                      const OperatorExpr& in2) {
    if (!std::isfinite(transmissivity) || transmissivity < 0.0 || transmissivity > 1.0)
        throw ParamOutOfRange("beam splitter transmissivity must lie in [0,1]");
    const double t = std::sqrt(transmissivity);
    const double rfl = std::sqrt(1.0 - transmissivity);
    BeamSplitterOutputs out;
    out.out1.add_scaled(in1, t);
    out.out1.add_scaled(in2, rfl);
    out.out2.add_scaled(in2, t);
    out.out2.add_scaled(in1, -rfl);
    return out;
}

OperatorExpr phase_shift_map(double phase, const OperatorExpr& in) {
    if (!std::isfinite(phase)) throw ParamOutOfRange("phase must be finite");
    if (phase == 0.0) return in;
    return std::polar(1.0, phase) * in;
}

OperatorExpr loss_map(double loss, const OperatorExpr& in, const std::string& vacuum_mode) {
    if (!std::isfinite(loss) || loss < 0.0 || loss > 1.0)
        throw ParamOutOfRange("loss must lie in [0,1]");
    if (in.references(vacuum_mode))
        throw ModeReuse("loss ancilla '" + vacuum_mode + "' already appears in the input");
    OperatorExpr out;
    out.add_scaled(in, std::sqrt(1.0 - loss));
    out.add_scaled(OperatorExpr::annihilator(vacuum_mode), std::sqrt(loss));
    return out;
}

}  // namespace fbamp
