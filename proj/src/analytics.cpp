#include "fbamp/analytics.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "fbamp/errors.hpp"

namespace fbamp::analytics {

namespace {

void check_unit_interval(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw ParamOutOfRange(std::string(name) + " must lie in [0,1]");
}

void check_gain(double gain) {
    if (!std::isfinite(gain) || gain < 1.0)
        throw GainOutOfRange("amplitude gain must be finite and >= 1");
}

}  // namespace

double quantum_noise_gain(double gain) {
    check_gain(gain);
    return 2.0 * gain * gain - 1.0;
}

double gain_from_qn_db(double db_value) {
    if (!std::isfinite(db_value) || db_value < 0.0)
        throw ParamOutOfRange("quantum noise gain in dB must be >= 0");
    return std::sqrt((std::pow(10.0, db_value / 10.0) + 1.0) / 2.0);
}

double reference_variance(double transmissivity, double gain) {
    check_unit_interval(transmissivity, "transmissivity");
    check_gain(gain);
    return transmissivity * (2.0 * gain * gain - 1.0) + 1.0 - transmissivity;
}

double feedback_variance(double transmissivity, double loss, double gain, double phase) {
    check_unit_interval(transmissivity, "transmissivity");
    check_unit_interval(loss, "loss");
    check_gain(gain);
    const double g2 = gain * gain - 1.0;
    const std::complex<double> rot = std::polar(1.0, phase);
    const std::complex<double> denom =
        1.0 + gain * rot * std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    const double denom_mag = std::abs(denom);
    if (denom_mag < osc_epsilon)
        throw NearThreshold("feedback loop at oscillation threshold, |denominator| = " +
                            std::to_string(denom_mag));
    const double numer =
        std::norm(std::sqrt(1.0 - transmissivity) + gain * rot * std::sqrt(1.0 - loss)) +
        gain * gain * transmissivity * loss + g2 * transmissivity;
    return numer / std::norm(denom);
}

double noise_reduction_factor(double transmissivity, double loss, double gain) {
    check_unit_interval(transmissivity, "transmissivity");
    check_unit_interval(loss, "loss");
    check_gain(gain);
    // ratio of loop gain to threshold gain, G / G_th = G sqrt((1-T)(1-L))
    const double loop = gain * std::sqrt((1.0 - transmissivity) * (1.0 - loss));
    const double d2 = (1.0 + loop) * (1.0 + loop);
    const double numer = 2.0 * transmissivity * (gain * gain - 1.0) + d2;
    const double denom =
        d2 * (2.0 * transmissivity * gain * gain + 1.0 - 2.0 * transmissivity);
    return numer / denom;
}

double noise_reduction_unity_transmission(double gain, double threshold_gain) {
    check_gain(gain);
    if (!(threshold_gain > 1.0))
        throw ParamOutOfRange("threshold gain must exceed 1");
    const double ratio = gain / threshold_gain;
    const double d2 = (1.0 + ratio) * (1.0 + ratio);
    return (2.0 * gain * gain - 2.0 + d2) / (d2 * (2.0 * gain * gain - 1.0));
}

double asymptotic_reduction(double gain, double threshold_gain) {
    if (!(threshold_gain > 0.0)) throw ParamOutOfRange("threshold gain must be positive");
    const double ratio = gain / threshold_gain;
    return 1.0 / ((1.0 + ratio) * (1.0 + ratio));
}

double db(double x) {
    if (!(x > 0.0)) throw ParamOutOfRange("dB conversion requires a positive value");
    return 10.0 * std::log10(x);
}

double from_db(double d) { return std::pow(10.0, d / 10.0); }

}  // namespace fbamp::analytics
