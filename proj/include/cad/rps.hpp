#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cad/feature_matrix.hpp"
#include "cad/rng.hpp"

namespace cad {

struct RpsConfig {
    double p = 1.4;         // norm order, >= 1
    double ratio = 0.2;     // sampling ratio r in (0, 1]
    double threshold = 0.7; // membership cutoff
    std::uint64_t seed = 0;
};

enum class Algo { direct, rps, gps };

const char* algo_name(Algo a);

/// One algorithm's verdict for one window.
struct Detection {
    std::size_t window_id = 0;
    Algo algorithm = Algo::direct;
    double score = 0.0;                 // principal score of the evaluated matrix
    std::vector<std::string> anomalies; // column ids, sorted, deduplicated
    double strength = 0.0;              // phi of the set in the full window
    bool degenerate = false;
};

/// p-norm of every column of X.
std::vector<double> column_pnorms(const FeatureMatrix& X, double p);

/// phi(A): p-norm mass of the columns in A over total mass. All-zero X
/// yields 0 by convention.
double anomaly_strength(std::span<const std::size_t> set, const FeatureMatrix& X, double p);

/// ceil(r*n) draws (at least 2) with replacement, each column drawn with
/// probability ||x||_p / sum ||x_i||_p. Throws std::invalid_argument when
/// no column has positive norm.
std::vector<std::size_t> sample_columns(std::span<const double> pnorms, const RpsConfig& cfg,
                                        Rng& rng);

/// Randomized principal score: p-norm-weighted sample of the columns,
/// principal score + membership on the deduplicated sample, anomaly ids
/// mapped back to the window, strength over the full window. The RNG
/// stream is derived from (seed, window_id), so detections are
/// reproducible per window regardless of processing order.
Detection rps_detect(const FeatureMatrix& X, const RpsConfig& cfg);

} // namespace cad
