#pragma once

namespace fbamp::analytics {

/// Denominator magnitudes below this are treated as oscillation-threshold
/// singularities. Far below any physical parameter resolution, far above
/// double-precision noise.
inline constexpr double osc_epsilon = 1e-9;

/// Output variance 2G^2 - 1 of a bare amplifier fed vacuum at both ports.
double quantum_noise_gain(double gain);

/// Inverse of quantum_noise_gain in dB: G = sqrt((10^{db/10} + 1) / 2).
double gain_from_qn_db(double db);

/// No-feedback reference level: amplifier output through a beam splitter of
/// transmissivity T, i.e. T(2G^2 - 1) + 1 - T.
double reference_variance(double transmissivity, double gain);

/// Output quadrature variance of the canonical feedback loop at feedback
/// phase phi. Throws NearThreshold when |1 + G e^{i phi} sqrt((1-T)(1-L))|
/// falls below osc_epsilon.
double feedback_variance(double transmissivity, double loss, double gain, double phase);

/// Noise reduction factor R = feedback variance / reference variance at the
/// optimum feedback phase (phi = 0).
double noise_reduction_factor(double transmissivity, double loss, double gain);

/// R in the T -> 1 limit, parameterized by the threshold gain directly.
/// Approaches 1/4 (-6 dB) as G -> G_th with G_th large.
double noise_reduction_unity_transmission(double gain, double threshold_gain);

/// High-gain approximation R ~ 1 / (1 + G/G_th)^2, valid when T G^2 >> 1.
double asymptotic_reduction(double gain, double threshold_gain);

/// Power decibels: 10 log10(x), and its inverse 10^{d/10}.
double db(double x);
double from_db(double d);

}  // namespace fbamp::analytics
