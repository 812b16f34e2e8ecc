#pragma once

#include <cstdint>
#include <vector>

#include "cad/correlation.hpp"
#include "cad/feature_matrix.hpp"

namespace cad {

struct EigenOptions {
    double tol = 1e-6;          // relative residual target
    std::size_t max_iter = 300; // matvec budget
    std::uint64_t seed = 0x5eed; // start-vector jitter
};

struct EigenResult {
    double lambda1 = 0.0;
    std::vector<double> v1; // unit norm; largest-magnitude entry positive
    std::size_t iterations = 0;
    double residual = 0.0; // ||P v - lambda v||_2
    bool converged = false;
};

/// Top eigenpair of a correlation matrix. Power iteration for n <= 64,
/// Lanczos with full reorthogonalization above that. The start vector is
/// normalized all-ones plus seeded jitter, which cannot be orthogonal to
/// the Perron vector of a nonnegative matrix.
EigenResult top_eigenpair(const CorrelationMatrix& P, const EigenOptions& opts = {});

/// rho = lambda1 / n.
double principal_score(const CorrelationMatrix& P, const EigenOptions& opts = {});

struct MembershipResult {
    std::vector<double> scores; // per column, in [0,1]
    bool degenerate = false;    // principal-component series had zero variance
};

/// score(i) = |pearson(x_i, t)| with t = X * v1, the principal-component
/// series over the rows.
MembershipResult membership_scores(const FeatureMatrix& X, const EigenResult& eig);

} // namespace cad
