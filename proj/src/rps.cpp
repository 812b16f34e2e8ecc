#include "cad/rps.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cad/spectral.hpp"

namespace cad {

const char* algo_name(Algo a) {
    switch (a) {
    case Algo::direct: return "direct";
    case Algo::rps: return "rps";
    case Algo::gps: return "gps";
    }
    return "?";
}

std::vector<double> column_pnorms(const FeatureMatrix& X, double p) {
    if (p < 1.0) throw std::invalid_argument("column_pnorms: p must be >= 1");
    std::vector<double> norms(X.cols(), 0.0);
    for (std::size_t j = 0; j < X.cols(); ++j) {
        double s = 0.0;
        for (double v : X.col(j)) s += std::pow(std::abs(v), p);
        norms[j] = std::pow(s, 1.0 / p);
    }
    return norms;
}

double anomaly_strength(std::span<const std::size_t> set, const FeatureMatrix& X, double p) {
    const auto norms = column_pnorms(X, p);
    double total = 0.0;
    for (double v : norms) total += v;
    if (total <= 0.0) return 0.0;
    double mass = 0.0;
    for (std::size_t j : set) mass += norms.at(j);
    return mass / total;
}

std::vector<std::size_t> sample_columns(std::span<const double> pnorms, const RpsConfig& cfg,
                                        Rng& rng) {
    if (cfg.ratio <= 0.0 || cfg.ratio > 1.0)
        throw std::invalid_argument("sample_columns: ratio must be in (0, 1]");
    std::vector<double> cumulative(pnorms.size());
    double total = 0.0;
    for (std::size_t j = 0; j < pnorms.size(); ++j) {
        total += pnorms[j];
        cumulative[j] = total;
    }
    if (!(total > 0.0))
        throw std::invalid_argument("sample_columns: all column norms are zero");

    const auto n = static_cast<double>(pnorms.size());
    const std::size_t draws =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(cfg.ratio * n)));
    std::vector<std::size_t> out;
    out.reserve(draws);
    for (std::size_t i = 0; i < draws; ++i) out.push_back(sample_cumulative(cumulative, rng));
    return out;
}

Detection rps_detect(const FeatureMatrix& X, const RpsConfig& cfg) {
    Detection det;
    det.window_id = X.window_id;
    det.algorithm = Algo::rps;

    const auto norms = column_pnorms(X, cfg.p);
    Rng rng = Rng::for_window(cfg.seed, X.window_id);
    const auto draws = sample_columns(norms, cfg, rng);

    // Duplicate draws collapse to one column each: self-correlation is 1
    // and repeated copies would inflate the sampled score.
    std::vector<std::size_t> sampled = draws;
    std::sort(sampled.begin(), sampled.end());
    sampled.erase(std::unique(sampled.begin(), sampled.end()), sampled.end());
    if (sampled.size() < 2) {
        det.degenerate = true;
        return det;
    }

    const FeatureMatrix Xs = X.select_columns(sampled);
    const CorrelationMatrix Ps = build_correlation_matrix(Xs, CorrMode::absolute);
    const EigenResult eig = top_eigenpair(Ps);
    det.score = eig.lambda1 / static_cast<double>(Ps.n());

    const MembershipResult membership = membership_scores(Xs, eig);
    if (membership.degenerate) det.degenerate = true;
    std::vector<std::size_t> flagged;
    for (std::size_t s = 0; s < sampled.size(); ++s)
        if (membership.scores[s] > cfg.threshold) flagged.push_back(sampled[s]);

    det.anomalies.reserve(flagged.size());
    for (std::size_t j : flagged) det.anomalies.push_back(X.col_ids[j]);
    det.strength = anomaly_strength(flagged, X, cfg.p);
    return det;
}

} // namespace cad
