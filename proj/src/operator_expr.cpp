#include "fbamp/operator_expr.hpp"

#include <cmath>
#include <set>

#include "fbamp/errors.hpp"

namespace fbamp {

OperatorExpr OperatorExpr::annihilator(const std::string& mode) {
    OperatorExpr e;
    e.ann[mode] = 1.0;
    return e;
}

OperatorExpr OperatorExpr::creator(const std::string& mode) {
    OperatorExpr e;
    e.cre[mode] = 1.0;
    return e;
}

Complex OperatorExpr::ann_coeff(const std::string& mode) const {
    auto it = ann.find(mode);
    return it == ann.end() ? Complex{0.0, 0.0} : it->second;
}

Complex OperatorExpr::cre_coeff(const std::string& mode) const {
    auto it = cre.find(mode);
    return it == cre.end() ? Complex{0.0, 0.0} : it->second;
}

bool OperatorExpr::references(const std::string& mode) const {
    return ann.count(mode) > 0 || cre.count(mode) > 0;
}

void OperatorExpr::add_scaled(const OperatorExpr& src, Complex c) {
    if (c == Complex{0.0, 0.0}) return;
    for (const auto& [m, v] : src.ann) ann[m] += c * v;
    for (const auto& [m, v] : src.cre) cre[m] += c * v;
    mean += c * src.mean;
}

OperatorExpr operator*(Complex c, const OperatorExpr& e) {
    OperatorExpr out;
    out.add_scaled(e, c);
    return out;
}

OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b) {
    OperatorExpr out = a;
    out.add_scaled(b, 1.0);
    return out;
}

OperatorExpr dagger(const OperatorExpr& e) {
    OperatorExpr out;
    for (const auto& [m, v] : e.ann) out.cre[m] = std::conj(v);
    for (const auto& [m, v] : e.cre) out.ann[m] = std::conj(v);
    out.mean = std::conj(e.mean);
    return out;
}

double commutator_norm(const OperatorExpr& e) {
    double s = 0.0;
    for (const auto& [m, v] : e.ann) s += std::norm(v);
    for (const auto& [m, v] : e.cre) s -= std::norm(v);
    return s;
}

double quadrature_variance(const OperatorExpr& e, double theta) {
    const Complex rot = std::polar(1.0, -theta);
    std::set<std::string> modes;
    for (const auto& [m, v] : e.ann) modes.insert(m);
    for (const auto& [m, v] : e.cre) modes.insert(m);
    double var = 0.0;
    for (const auto& m : modes) {
        const Complex c = e.ann_coeff(m) * rot + std::conj(e.cre_coeff(m) * rot);
        var += std::norm(c);
    }
    return var;
}

Complex mean_field(const OperatorExpr& e, const ModeTable& modes) {
    Complex total = e.mean;
    std::set<std::string> names;
    for (const auto& [m, v] : e.ann) names.insert(m);
    for (const auto& [m, v] : e.cre) names.insert(m);
    for (const auto& name : names) {
        auto it = modes.find(name);
        if (it == modes.end())
            throw UnassignedAmplitude("mode '" + name + "' not present in mode table");
        const Mode& mode = it->second;
        if (mode.kind != ModeKind::Coherent) continue;
        if (!mode.amplitude)
            throw UnassignedAmplitude("coherent mode '" + name + "' has no amplitude");
        total += e.ann_coeff(name) * *mode.amplitude;
        total += e.cre_coeff(name) * std::conj(*mode.amplitude);
    }
    return total;
}

double max_coeff_delta(const OperatorExpr& a, const OperatorExpr& b) {
    std::set<std::string> modes;
    for (const auto& [m, v] : a.ann) modes.insert(m);
    for (const auto& [m, v] : a.cre) modes.insert(m);
    for (const auto& [m, v] : b.ann) modes.insert(m);
    for (const auto& [m, v] : b.cre) modes.insert(m);
    double d = std::abs(a.mean - b.mean);
    for (const auto& m : modes) {
        d = std::max(d, std::abs(a.ann_coeff(m) - b.ann_coeff(m)));
        d = std::max(d, std::abs(a.cre_coeff(m) - b.cre_coeff(m)));
    }
    return d;
}

}  // namespace fbamp
