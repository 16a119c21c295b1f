#pragma once

namespace wsnc::special {

/// Upper incomplete gamma function Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt.
///
/// Defined for every real `a` when x > 0; negative non-integer and
/// non-positive integer `a` are both supported. Relative accuracy is about
/// 1e-13 over a ∈ [-50, 50], x ∈ [1e-12, 1e3].
///
/// Throws DomainError for non-finite input, x < 0, or x == 0 with a <= 0.
double upper_incomplete_gamma(double a, double x);

/// log Γ(a, x), evaluated without forming Γ(a, x) where it would under- or
/// overflow (large x, or large negative a).
double log_upper_incomplete_gamma(double a, double x);

}  // namespace wsnc::special
