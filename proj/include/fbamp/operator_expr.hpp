#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>

namespace fbamp {

using Complex = std::complex<double>;

enum class ModeKind { Vacuum, Idler, Coherent };

/// An input mode of a network. Idler modes are statistically vacuum (atoms in
/// the ground state); coherent modes carry vacuum fluctuations plus a mean
/// amplitude that only affects mean-field calculations.
struct Mode {
    std::string name;
    ModeKind kind = ModeKind::Vacuum;
    std::optional<Complex> amplitude;  // coherent modes only
    bool operator==(const Mode&) const = default;
};

using ModeTable = std::map<std::string, Mode>;

/// A bosonic operator written as a linear (Bogoliubov) combination of input
/// mode operators plus a c-number displacement:
///
///     expr = sum_k ann[k] * a_k  +  sum_k cre[k] * a_k^dag  +  mean
///
/// Modes absent from a map have coefficient exactly zero. Quadrature units:
/// X = a + a^dag, so a bare vacuum mode has variance 1.
struct OperatorExpr {
    std::map<std::string, Complex> ann;
    std::map<std::string, Complex> cre;
    Complex mean{0.0, 0.0};

    static OperatorExpr annihilator(const std::string& mode);
    static OperatorExpr creator(const std::string& mode);

    Complex ann_coeff(const std::string& mode) const;
    Complex cre_coeff(const std::string& mode) const;
    bool references(const std::string& mode) const;

    /// dst += c * src, skipping exact-zero scale factors so identity maps
    /// leave expressions untouched.
    void add_scaled(const OperatorExpr& src, Complex c);
};

OperatorExpr operator*(Complex c, const OperatorExpr& e);
OperatorExpr operator+(const OperatorExpr& a, const OperatorExpr& b);

/// Hermitian conjugate: swaps ann/cre maps with entrywise conjugation and
/// conjugates the mean.
OperatorExpr dagger(const OperatorExpr& e);

/// sum |ann|^2 - sum |cre|^2. Equals 1 for any expression that is a valid
/// bosonic mode operator (symplectic consistency check).
double commutator_norm(const OperatorExpr& e);

/// Variance of X_theta = e * e^{-i theta} + h.c. over vacuum-statistics
/// inputs, grouping ann and cre contributions of the same mode before
/// squaring. Vacuum convention: variance 1.
double quadrature_variance(const OperatorExpr& e, double theta);

/// Mean field <expr>: expr.mean plus the coherent-mode contributions
/// sum ann[k]*amp_k + sum cre[k]*conj(amp_k). Vacuum and idler modes
/// contribute nothing. Throws UnassignedAmplitude for a referenced mode
/// that is missing from the table or declared coherent without amplitude.
Complex mean_field(const OperatorExpr& e, const ModeTable& modes);

/// Largest absolute coefficient difference between two expressions over the
/// union of their modes (absent coefficients count as zero). Used by
/// equivalence checks between solver routes.
double max_coeff_delta(const OperatorExpr& a, const OperatorExpr& b);

}  // namespace fbamp
