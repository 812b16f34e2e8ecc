#include "cad/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace cad {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double apply_mode(double r, CorrMode mode) {
    switch (mode) {
    case CorrMode::absolute: return clamp01(std::abs(r));
    case CorrMode::positive_only: return clamp01(std::max(r, 0.0));
    case CorrMode::negative_only: return clamp01(std::max(-r, 0.0));
    }
    return 0.0;
}

// Correlation from sufficient statistics; zero variance yields 0.
double corr_from_stats(double m, double sx, double sy, double sxx, double syy, double sxy) {
    const double vx = m * sxx - sx * sx;
    const double vy = m * syy - sy * sy;
    if (vx <= 0.0 || vy <= 0.0) return 0.0;
    return (m * sxy - sx * sy) / std::sqrt(vx * vy);
}

} // namespace

CorrelationMatrix CorrelationMatrix::submatrix(std::span<const std::size_t> indices) const {
    std::vector<std::string> ids;
    if (!col_ids_.empty()) {
        ids.reserve(indices.size());
        for (std::size_t j : indices) ids.push_back(col_ids_[j]);
    }
    CorrelationMatrix out(indices.size(), mode_, std::move(ids));
    for (std::size_t a = 0; a < indices.size(); ++a)
        for (std::size_t b = a + 1; b < indices.size(); ++b)
            out.set(a, b, (*this)(indices[a], indices[b]));
    return out;
}

double CorrelationMatrix::min_row_sum() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (double v : row(i)) s += v;
        best = std::min(best, s);
    }
    return best;
}

double CorrelationMatrix::max_row_sum() const {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (double v : row(i)) s += v;
        best = std::max(best, s);
    }
    return best;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 observations");
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double r = corr_from_stats(m, sx, sy, sxx, syy, sxy);
    return std::min(1.0, std::max(-1.0, r));
}

CorrelationMatrix build_correlation_matrix(const FeatureMatrix& X, CorrMode mode) {
    const std::size_t n = X.cols();
    const std::size_t m = X.rows();
    if (n < 2 || m < 2)
        throw std::invalid_argument("build_correlation_matrix: need >=2 columns and >=2 rows");

    // Standardize columns once; correlations are then plain dot products.
    // A zero-variance column standardizes to the zero vector, which makes
    // its correlation with everything 0 by the stated convention.
    std::vector<double> z(n * m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = X.col(j);
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const double d = col[r] - mean;
            z[j * m + r] = d;
            ss += d * d;
        }
        if (ss > 0.0) {
            const double inv = 1.0 / std::sqrt(ss);
            for (std::size_t r = 0; r < m; ++r) z[j * m + r] *= inv;
        } else {
            std::fill(z.begin() + static_cast<std::ptrdiff_t>(j * m),
                      z.begin() + static_cast<std::ptrdiff_t>((j + 1) * m), 0.0);
        }
    }

    CorrelationMatrix P(n, mode, X.col_ids);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = z.data() + i * m;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* zj = z.data() + j * m;
            double dot = 0.0;
            for (std::size_t r = 0; r < m; ++r) dot += zi[r] * zj[r];
            P.set(i, j, apply_mode(dot, mode));
        }
    }
    return P;
}

PairStats::PairStats(const FeatureMatrix& X) { rebuild(X); }

void PairStats::rebuild(const FeatureMatrix& X) {
    row_ids_ = X.row_ids;
    col_ids_ = X.col_ids;
    values_ = X.data;
    const std::size_t n = X.cols();
    const std::size_t m = X.rows();
    sum_.assign(n, 0.0);
    sumsq_.assign(n, 0.0);
    cross_.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = X.col(j);
        for (double v : col) {
            sum_[j] += v;
            sumsq_[j] += v * v;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = values_.data() + i * m;
        cross_[i * n + i] = sumsq_[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* xj = values_.data() + j * m;
            double s = 0.0;
            for (std::size_t r = 0; r < m; ++r) s += xi[r] * xj[r];
            cross_[i * n + j] = cross_[j * n + i] = s;
        }
    }
}

CorrelationMatrix PairStats::correlations(CorrMode mode) const {
    const std::size_t n = cols();
    const double m = static_cast<double>(row_ids_.size());
    CorrelationMatrix P(n, mode, col_ids_);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = corr_from_stats(m, sum_[i], sum_[j], sumsq_[i], sumsq_[j],
                                             cross_[i * n + j]);
            P.set(i, j, apply_mode(r, mode));
        }
    return P;
}

bool PairStats::can_slide_to(const FeatureMatrix& next) const {
    if (col_ids_.empty()) return false;
    std::unordered_map<std::string_view, std::size_t> next_rows;
    for (std::size_t r = 0; r < next.rows(); ++r) next_rows.emplace(next.row_ids[r], r);
    std::unordered_map<std::string_view, std::size_t> next_cols;
    for (std::size_t c = 0; c < next.cols(); ++c) next_cols.emplace(next.col_ids[c], c);

    std::size_t shared_rows = 0;
    const std::size_t m_old = row_ids_.size();
    for (std::size_t r = 0; r < m_old; ++r) {
        const auto it = next_rows.find(row_ids_[r]);
        if (it == next_rows.end()) continue;
        ++shared_rows;
        for (std::size_t c = 0; c < col_ids_.size(); ++c) {
            const auto jc = next_cols.find(col_ids_[c]);
            if (jc == next_cols.end()) continue;
            if (values_[c * m_old + r] != next.at(it->second, jc->second)) return false;
        }
    }
    return shared_rows >= 2;
}

SlideOutcome update_correlation_incremental(PairStats& stats, const FeatureMatrix& next,
                                            CorrMode mode) {
    if (!stats.can_slide_to(next)) {
        stats.rebuild(next);
        return SlideOutcome{stats.correlations(mode), false, next.cols()};
    }

    const std::size_t m_old = stats.row_ids_.size();
    const std::size_t m_new = next.rows();

    std::unordered_map<std::string_view, std::size_t> old_rows, old_cols;
    for (std::size_t r = 0; r < m_old; ++r) old_rows.emplace(stats.row_ids_[r], r);
    for (std::size_t c = 0; c < stats.col_ids_.size(); ++c) old_cols.emplace(stats.col_ids_[c], c);

    std::vector<std::size_t> departing; // row indices in the old window
    {
        std::unordered_map<std::string_view, std::size_t> next_rows;
        for (std::size_t r = 0; r < m_new; ++r) next_rows.emplace(next.row_ids[r], r);
        for (std::size_t r = 0; r < m_old; ++r)
            if (!next_rows.contains(stats.row_ids_[r])) departing.push_back(r);
    }
    std::vector<std::size_t> arriving; // row indices in the new window
    for (std::size_t r = 0; r < m_new; ++r)
        if (!old_rows.contains(next.row_ids[r])) arriving.push_back(r);

    const std::size_t n = next.cols();
    std::vector<std::ptrdiff_t> prev_of(n, -1); // new col index -> old col index
    std::size_t fresh = 0;
    for (std::size_t c = 0; c < n; ++c) {
        const auto it = old_cols.find(next.col_ids[c]);
        if (it != old_cols.end())
            prev_of[c] = static_cast<std::ptrdiff_t>(it->second);
        else
            ++fresh;
    }

    std::vector<double> sum(n, 0.0), sumsq(n, 0.0), cross(n * n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        if (prev_of[c] >= 0) {
            const auto pc = static_cast<std::size_t>(prev_of[c]);
            double s = stats.sum_[pc], ss = stats.sumsq_[pc];
            for (std::size_t r : departing) {
                const double v = stats.values_[pc * m_old + r];
                s -= v;
                ss -= v * v;
            }
            for (std::size_t r : arriving) {
                const double v = next.at(r, c);
                s += v;
                ss += v * v;
            }
            sum[c] = s;
            sumsq[c] = ss;
        } else {
            const auto col = next.col(c);
            for (double v : col) {
                sum[c] += v;
                sumsq[c] += v * v;
            }
        }
    }

    const std::size_t n_old = stats.col_ids_.size();
    for (std::size_t i = 0; i < n; ++i) {
        cross[i * n + i] = sumsq[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            double s;
            if (prev_of[i] >= 0 && prev_of[j] >= 0) {
                const auto pi = static_cast<std::size_t>(prev_of[i]);
                const auto pj = static_cast<std::size_t>(prev_of[j]);
                s = stats.cross_[pi * n_old + pj];
                for (std::size_t r : departing)
                    s -= stats.values_[pi * m_old + r] * stats.values_[pj * m_old + r];
                for (std::size_t r : arriving) s += next.at(r, i) * next.at(r, j);
            } else {
                s = 0.0;
                for (std::size_t r = 0; r < m_new; ++r) s += next.at(r, i) * next.at(r, j);
            }
            cross[i * n + j] = cross[j * n + i] = s;
        }
    }

    stats.row_ids_ = next.row_ids;
    stats.col_ids_ = next.col_ids;
    stats.values_ = next.data;
    stats.sum_ = std::move(sum);
    stats.sumsq_ = std::move(sumsq);
    stats.cross_ = std::move(cross);
    return SlideOutcome{stats.correlations(mode), true, fresh};
}

} // namespace cad
