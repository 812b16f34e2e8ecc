#pragma once

namespace cad {

/// Digamma function psi(x), x > 0. Recurrence shifts the argument above 6,
/// then the asymptotic (Bernoulli) series is applied; absolute error is
/// below 1e-10 over the whole domain. Throws std::domain_error for x <= 0.
double digamma(double x);

/// Trigamma function psi'(x), x > 0.
double trigamma(double x);

/// Inverse of digamma: the unique x > 0 with psi(x) = y. Newton iteration
/// from the standard asymptotic initializer.
double inv_digamma(double y);

} // namespace cad
