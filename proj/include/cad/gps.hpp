#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cad/correlation.hpp"
#include "cad/rps.hpp"

namespace cad {

struct GpsConfig {
    std::size_t ell = 2;     // number of anomaly sets
    double alpha = 0.75;     // anomaly-group mean floor, in (0.5, 1)
    std::size_t max_iter = 100;
    double ll_tol = 1e-6;    // relative log-likelihood change at convergence
    double eps = 1e-6;       // correlation clamp before any log
    std::uint64_t seed = 0;
};

/// Beta-mixture over correlation entries: ell anomaly groups plus one
/// background group (label value = ell). Anomaly groups keep mean >= alpha,
/// the background keeps mean <= 0.5, and every pair satisfies a + b >= 1.
struct GpsModel {
    std::vector<double> a, b;       // ell + 1 shape pairs; background last
    std::vector<std::uint32_t> z;   // per-column labels in [0, ell]
    double loglik = 0.0;
    bool params_capped = false;     // some shape hit the 1e4 cap (degenerate stats)
};

/// Per-group pair statistics: counts and log-moment sums of the
/// correlations each group owns. Group g < ell owns the within-group pairs
/// of its members; the background owns every other pair.
struct GroupStats {
    std::vector<std::size_t> m;       // pairs per group
    std::vector<double> sum_ln;       // sum ln w
    std::vector<double> sum_ln1m;     // sum ln(1 - w)
    std::vector<double> sum_w;        // sum w (used for initialization)
    std::vector<std::size_t> members; // columns per group
};

GroupStats group_stats(const CorrelationMatrix& P, std::span<const std::uint32_t> z,
                       std::size_t ell, double eps);

double log_likelihood(const GroupStats& stats, std::span<const double> a,
                      std::span<const double> b);
double log_likelihood(const CorrelationMatrix& P, const GpsModel& model, const GpsConfig& cfg);

/// Unconstrained beta MLE by the inverse-digamma fixed point, from the
/// log-moments of the sample. Returns (a, b).
std::pair<double, double> beta_mle_fixed_point(double mean_ln, double mean_ln1m,
                                               double a0 = 1.0, double b0 = 1.0,
                                               double tol = 1e-10, std::size_t max_steps = 500);

/// One constrained refit of every non-empty group: inverse-digamma
/// fixed-point steps with constraint projection after each step, run to
/// inner tolerance 1e-8 or 50 steps. Empty groups keep their parameters.
void update_beta_params(GpsModel& model, const GroupStats& stats, const GpsConfig& cfg);

/// One argmax sweep over the labels using delta scores that touch only the
/// correlations incident to each column (O(n) per column, O(n^2) per
/// sweep). Ties break toward the background. Returns the number of moved
/// labels.
std::size_t update_labels(const CorrelationMatrix& P, GpsModel& model, const GpsConfig& cfg);

struct GpsFit {
    GpsModel model;
    std::vector<Detection> detections;           // one per non-trivial anomaly set
    std::vector<std::vector<std::size_t>> sets;  // column indices per detection
    std::size_t iterations = 0;
    double initial_loglik = 0.0;
    double final_loglik = 0.0;
    bool converged = false;
};

/// Alternate update_beta_params / update_labels until the labels are
/// stable and the log-likelihood change falls under ll_tol (or max_iter).
/// `init_sets` seeds the anomaly groups (typically the rPS detection);
/// without it, groups are seeded from the columns with the highest row
/// sums plus their neighbors correlated above 0.7. Each returned set's
/// score is the principal score of its sub-correlation-matrix; strength
/// uses `col_norm_mass` when given, otherwise the count fraction.
GpsFit gps_fit(const CorrelationMatrix& P, const GpsConfig& cfg,
               const std::vector<std::vector<std::size_t>>& init_sets = {},
               std::span<const double> col_norm_mass = {});

} // namespace cad
