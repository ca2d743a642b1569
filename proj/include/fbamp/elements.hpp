#pragma once

#include <string>

#include "fbamp/operator_expr.hpp"

namespace fbamp {

struct AmplifierOutputs {
    OperatorExpr signal_out;
    OperatorExpr idler_out;
};

/// Phase-insensitive amplifier with amplitude gain G >= 1:
///   signal_out = G * signal_in + g * dagger(idler_in),   g = sqrt(G^2 - 1)
///   idler_out  = G * idler_in  + g * dagger(signal_in)
/// The pair is the symmetric Bogoliubov counterpart, so both outputs keep
/// commutator norm 1 when the inputs are independent unit modes.
AmplifierOutputs amplifier_map(double gain, const OperatorExpr& signal_in,
                               const OperatorExpr& idler_in);

struct BeamSplitterOutputs {
    OperatorExpr out1;
    OperatorExpr out2;
};

/// Beam splitter with transmissivity T in [0,1]:
///   out1 = sqrt(T) in1 + sqrt(1-T) in2
///   out2 = sqrt(T) in2 - sqrt(1-T) in1
BeamSplitterOutputs beam_splitter_map(double transmissivity, const OperatorExpr& in1,
                                      const OperatorExpr& in2);

/// Propagation phase: multiplies the expression (ann, cre and mean) by
/// e^{i phi}, i.e. the annihilation operator of the propagating field picks
/// up the phase as a whole.
OperatorExpr phase_shift_map(double phase, const OperatorExpr& in);

/// Loss L in [0,1] as a beam splitter against a fresh vacuum mode:
///   out = sqrt(1-L) in + sqrt(L) vac
/// Throws ModeReuse if vac already appears in the input expression.
OperatorExpr loss_map(double loss, const OperatorExpr& in, const std::string& vacuum_mode);

}  // namespace fbamp
