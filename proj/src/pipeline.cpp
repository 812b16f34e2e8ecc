#include "cad/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "cad/spectral.hpp"

namespace cad {

const char* suppress_reason_name(SuppressReason r) {
    switch (r) {
    case SuppressReason::below_threshold: return "below_threshold";
    case SuppressReason::below_strength: return "below_strength";
    case SuppressReason::empty_set: return "empty_set";
    }
    return "?";
}

void SuppressionCounts::add(SuppressReason r) {
    switch (r) {
    case SuppressReason::below_threshold: ++below_threshold; break;
    case SuppressReason::below_strength: ++below_strength; break;
    case SuppressReason::empty_set: ++empty_set; break;
    }
}

GateResult gate_alert(const Detection& det, const PipelineConfig& cfg, std::int64_t start,
                      std::int64_t end) {
    GateResult out;
    if (!(det.score > cfg.threshold)) {
        out.reason = SuppressReason::below_threshold;
        return out;
    }
    if (det.strength < cfg.strength_floor) {
        out.reason = SuppressReason::below_strength;
        return out;
    }
    if (det.anomalies.empty()) {
        out.reason = SuppressReason::empty_set;
        return out;
    }
    Alert alert;
    alert.window_id = det.window_id;
    alert.start = start;
    alert.end = end;
    alert.algorithm = algo_name(det.algorithm);
    alert.score = det.score;
    alert.strength = det.strength;
    alert.anomalies = det.anomalies;
    out.alert = std::move(alert);
    return out;
}

MergedSets merge_detections(const Detection* rps_det, std::span<const Detection> gps_dets) {
    std::set<std::string> rps_ids, gps_ids;
    if (rps_det) rps_ids.insert(rps_det->anomalies.begin(), rps_det->anomalies.end());
    for (const Detection& d : gps_dets) gps_ids.insert(d.anomalies.begin(), d.anomalies.end());

    MergedSets out;
    // gPS finds are core (including gPS-only ones); rPS-only finds are
    // the suspicious ones that further analysis would revisit.
    out.core.assign(gps_ids.begin(), gps_ids.end());
    for (const auto& id : rps_ids)
        if (!gps_ids.contains(id)) out.suspicious.push_back(id);
    std::set<std::string> all = gps_ids;
    all.insert(rps_ids.begin(), rps_ids.end());
    out.anomalies.assign(all.begin(), all.end());
    return out;
}

WindowResult run_window(const FeatureMatrix& X, const PipelineConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    WindowResult res;
    res.window_id = X.window_id;

    RpsConfig rps_cfg = cfg.rps;
    rps_cfg.seed = cfg.seed;
    GpsConfig gps_cfg = cfg.gps;
    gps_cfg.seed = cfg.seed;

    std::optional<CorrelationMatrix> P;
    const auto ensure_corr = [&]() -> const CorrelationMatrix& {
        if (!P) P = build_correlation_matrix(X, CorrMode::absolute);
        return *P;
    };

    std::optional<Detection> direct_det, rps_det;
    std::vector<Detection> gps_dets;
    std::vector<std::vector<std::size_t>> gps_sets;

    if (cfg.enable_direct) {
        try {
            Detection det;
            det.window_id = X.window_id;
            det.algorithm = Algo::direct;
            const EigenResult eig = top_eigenpair(ensure_corr());
            det.score = eig.lambda1 / static_cast<double>(X.cols());
            const MembershipResult mem = membership_scores(X, eig);
            det.degenerate = mem.degenerate;
            std::vector<std::size_t> flagged;
            for (std::size_t j = 0; j < X.cols(); ++j)
                if (mem.scores[j] > cfg.membership_threshold) flagged.push_back(j);
            det.anomalies.reserve(flagged.size());
            for (std::size_t j : flagged) det.anomalies.push_back(X.col_ids[j]);
            det.strength = anomaly_strength(flagged, X, rps_cfg.p);
            direct_det = std::move(det);
        } catch (const std::exception& e) {
            res.errors.push_back(std::string("direct: ") + e.what());
        }
    }

    if (cfg.enable_rps) {
        try {
            rps_det = rps_detect(X, rps_cfg);
        } catch (const std::exception& e) {
            res.errors.push_back(std::string("rps: ") + e.what());
        }
    }

    if (cfg.enable_gps) {
        try {
            std::vector<std::vector<std::size_t>> init;
            if (cfg.enable_rps && rps_det) {
                // rPS detections seed the first anomaly group, even when
                // empty: an empty seed leaves gPS background-only, which
                // is the conservative reading of "initialize from rPS".
                std::vector<std::size_t> seed_set;
                std::set<std::string> ids(rps_det->anomalies.begin(), rps_det->anomalies.end());
                for (std::size_t j = 0; j < X.cols(); ++j)
                    if (ids.contains(X.col_ids[j])) seed_set.push_back(j);
                init.push_back(std::move(seed_set));
            }
            const auto norms = column_pnorms(X, rps_cfg.p);
            GpsFit fit = gps_fit(ensure_corr(), gps_cfg, init, norms);
            for (std::size_t i = 0; i < fit.detections.size(); ++i) {
                fit.detections[i].window_id = X.window_id;
                gps_dets.push_back(std::move(fit.detections[i]));
                gps_sets.push_back(std::move(fit.sets[i]));
            }
        } catch (const std::exception& e) {
            res.errors.push_back(std::string("gps: ") + e.what());
        }
    }

    const Detection* gated_rps = nullptr;
    std::vector<Detection> gated_gps;
    const auto gate = [&](const Detection& det) -> bool {
        GateResult g = gate_alert(det, cfg, X.start, X.end);
        if (g.alert) {
            ++res.gated_by_algorithm[algo_name(det.algorithm)];
            if (!cfg.merged_alerts) res.alerts.push_back(std::move(*g.alert));
            return true;
        }
        res.suppressed.add(*g.reason);
        return false;
    };

    if (direct_det) {
        res.detections.push_back(*direct_det);
        gate(*direct_det);
    }
    if (rps_det) {
        res.detections.push_back(*rps_det);
        if (gate(*rps_det)) gated_rps = &*rps_det;
    }
    std::vector<std::size_t> gated_gps_union;
    for (std::size_t i = 0; i < gps_dets.size(); ++i) {
        res.detections.push_back(gps_dets[i]);
        if (gate(gps_dets[i])) {
            gated_gps.push_back(gps_dets[i]);
            gated_gps_union.insert(gated_gps_union.end(), gps_sets[i].begin(), gps_sets[i].end());
        }
    }

    if (cfg.merged_alerts && (gated_rps || !gated_gps.empty())) {
        MergedSets merged = merge_detections(gated_rps, gated_gps);
        Alert alert;
        alert.window_id = X.window_id;
        alert.start = X.start;
        alert.end = X.end;
        alert.algorithm = "rps+gps";
        alert.score = gated_rps ? gated_rps->score : 0.0;
        for (const Detection& d : gated_gps) alert.score = std::max(alert.score, d.score);
        std::vector<std::size_t> union_idx = gated_gps_union;
        if (gated_rps) {
            std::set<std::string> ids(gated_rps->anomalies.begin(), gated_rps->anomalies.end());
            for (std::size_t j = 0; j < X.cols(); ++j)
                if (ids.contains(X.col_ids[j])) union_idx.push_back(j);
        }
        std::sort(union_idx.begin(), union_idx.end());
        union_idx.erase(std::unique(union_idx.begin(), union_idx.end()), union_idx.end());
        alert.strength = anomaly_strength(union_idx, X, rps_cfg.p);
        alert.anomalies = std::move(merged.anomalies);
        alert.core = std::move(merged.core);
        alert.suspicious = std::move(merged.suspicious);
        res.alerts.push_back(std::move(alert));
    }

    res.runtime_ms = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - t0).count();
    return res;
}

StreamSummary run_stream(std::span<const FeatureMatrix> windows, const PipelineConfig& cfg,
                         const std::function<void(const Alert&)>& sink) {
    std::vector<WindowResult> results(windows.size());
    const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
    if (jobs == 1 || windows.size() <= 1) {
        for (std::size_t i = 0; i < windows.size(); ++i) results[i] = run_window(windows[i], cfg);
    } else {
        std::atomic<std::size_t> next{0};
        const std::size_t workers = std::min(jobs, windows.size());
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= windows.size()) return;
                    results[i] = run_window(windows[i], cfg);
                }
            });
        for (auto& t : pool) t.join();
    }

    // Emission happens strictly in window order no matter how the pool
    // scheduled the work.
    StreamSummary summary;
    for (const WindowResult& r : results) {
        ++summary.windows;
        for (const Alert& a : r.alerts) {
            ++summary.alerts;
            if (sink) sink(a);
        }
        for (const auto& [name, count] : r.gated_by_algorithm)
            summary.gated_by_algorithm[name] += count;
        summary.suppressed.below_threshold += r.suppressed.below_threshold;
        summary.suppressed.below_strength += r.suppressed.below_strength;
        summary.suppressed.empty_set += r.suppressed.empty_set;
        summary.mean_runtime_ms += r.runtime_ms;
        summary.max_runtime_ms = std::max(summary.max_runtime_ms, r.runtime_ms);
        summary.errors += r.errors.size();
    }
    if (!results.empty()) summary.mean_runtime_ms /= static_cast<double>(results.size());
    return summary;
}

} // namespace cad
