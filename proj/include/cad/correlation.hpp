#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cad/feature_matrix.hpp"

namespace cad {

enum class CorrMode { absolute, positive_only, negative_only };

/// Symmetric nonnegative correlation matrix with unit diagonal. Entries
/// live in [0,1]; set() maintains symmetry.
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    CorrelationMatrix(std::size_t n, CorrMode mode, std::vector<std::string> col_ids = {})
        : n_(n), mode_(mode), col_ids_(std::move(col_ids)), entries_(n * n, 0.0) {
        for (std::size_t i = 0; i < n_; ++i) entries_[i * n_ + i] = 1.0;
    }

    std::size_t n() const { return n_; }
    CorrMode mode() const { return mode_; }
    const std::vector<std::string>& col_ids() const { return col_ids_; }

    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(entries_).subspan(i * n_, n_);
    }

    void set(std::size_t i, std::size_t j, double v) {
        entries_[i * n_ + j] = v;
        entries_[j * n_ + i] = v;
    }

    /// Principal submatrix over `indices` (order preserved).
    CorrelationMatrix submatrix(std::span<const std::size_t> indices) const;

    double min_row_sum() const;
    double max_row_sum() const;

private:
    std::size_t n_ = 0;
    CorrMode mode_ = CorrMode::absolute;
    std::vector<std::string> col_ids_;
    std::vector<double> entries_; // row-major, n*n
};

/// Pearson coefficient in [-1, 1]. Zero variance on either side returns 0
/// by convention. Throws std::invalid_argument on length mismatch or
/// fewer than 2 observations.
double pearson(std::span<const double> x, std::span<const double> y);

/// Correlation matrix of the columns of X under the given sign mode:
/// absolute -> |r|, positive_only -> max(r, 0), negative_only -> max(-r, 0).
/// Diagonal is 1 in every mode.
CorrelationMatrix build_correlation_matrix(const FeatureMatrix& X, CorrMode mode);

struct SlideOutcome;

/// Sufficient statistics for incremental correlation maintenance across
/// window slides with a mostly-shared row set (per-column sums, squared
/// sums, pairwise cross products, plus the current window values needed
/// to subtract departing rows).
class PairStats {
public:
    PairStats() = default;
    explicit PairStats(const FeatureMatrix& X);

    std::size_t cols() const { return col_ids_.size(); }
    const std::vector<std::string>& col_ids() const { return col_ids_; }

    /// Correlations reconstructed from the current statistics.
    CorrelationMatrix correlations(CorrMode mode) const;

    /// True when `next` can be absorbed incrementally: the rows shared with
    /// the current window carry identical values for every surviving column
    /// and at least 2 rows survive.
    bool can_slide_to(const FeatureMatrix& next) const;

private:
    friend SlideOutcome update_correlation_incremental(PairStats&, const FeatureMatrix&, CorrMode);
    void rebuild(const FeatureMatrix& X);

    std::vector<std::string> row_ids_;
    std::vector<std::string> col_ids_;
    std::vector<double> values_; // column-major copy of the current window
    std::vector<double> sum_, sumsq_;
    std::vector<double> cross_; // n*n, sum over rows of x_i * x_j
};

struct SlideOutcome {
    CorrelationMatrix corr;
    bool incremental = false;     // false -> full recompute fallback was taken
    std::size_t fresh_columns = 0; // columns recomputed from scratch
};

/// Slide the statistics to the `next` window and return its correlation
/// matrix. Surviving column pairs are updated in O(changed rows) each;
/// new columns are computed fresh. A row-space change that breaks the
/// incremental precondition falls back to a full recompute and reports it.
SlideOutcome update_correlation_incremental(PairStats& stats, const FeatureMatrix& next,
                                            CorrMode mode);

} // namespace cad
