#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cad/feature_matrix.hpp"
#include "cad/gps.hpp"
#include "cad/rps.hpp"

namespace cad {

struct PipelineConfig {
    double threshold = 0.7;              // alert threshold rho~; strict inequality
    double strength_floor = 0.001;       // 0.1% of the window's p-norm mass
    double membership_threshold = 0.7;   // direct-PS anomaly cutoff
    bool enable_direct = true;
    bool enable_rps = true;
    bool enable_gps = true;
    bool merged_alerts = true;           // false -> one alert per gated detection
    RpsConfig rps;
    GpsConfig gps;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
};

enum class SuppressReason { below_threshold, below_strength, empty_set };
const char* suppress_reason_name(SuppressReason r);

struct Alert {
    std::size_t window_id = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::string algorithm;
    double score = 0.0;
    double strength = 0.0;
    std::vector<std::string> anomalies;
    std::vector<std::string> core;       // detected by gPS (and rPS)
    std::vector<std::string> suspicious; // detected by rPS only
};

struct GateResult {
    std::optional<Alert> alert;
    std::optional<SuppressReason> reason;
};

/// Alert iff score > threshold AND strength >= floor AND the anomaly set
/// is nonempty; otherwise the suppression reason.
GateResult gate_alert(const Detection& det, const PipelineConfig& cfg, std::int64_t start = 0,
                      std::int64_t end = 0);

struct MergedSets {
    std::vector<std::string> anomalies;
    std::vector<std::string> core;
    std::vector<std::string> suspicious;
};

/// Union of the detections' anomaly ids. Core ids are those in any gPS
/// set (the high-precision arm); suspicious ids are rPS-only finds.
MergedSets merge_detections(const Detection* rps_det, std::span<const Detection> gps_dets);

struct SuppressionCounts {
    std::size_t below_threshold = 0;
    std::size_t below_strength = 0;
    std::size_t empty_set = 0;

    void add(SuppressReason r);
    std::size_t total() const { return below_threshold + below_strength + empty_set; }
};

struct WindowResult {
    std::size_t window_id = 0;
    std::vector<Detection> detections; // everything produced, gated or not
    std::vector<Alert> alerts;         // what the pipeline emits
    SuppressionCounts suppressed;
    std::map<std::string, std::size_t> gated_by_algorithm;
    double runtime_ms = 0.0;
    std::vector<std::string> errors; // per-algorithm failures, window not fatal
};

/// Run the enabled algorithms (direct -> rPS -> gPS, gPS initialized from
/// the rPS detection when both run), gate, and merge.
WindowResult run_window(const FeatureMatrix& X, const PipelineConfig& cfg);

struct StreamSummary {
    std::size_t windows = 0;
    std::size_t alerts = 0;
    std::map<std::string, std::size_t> gated_by_algorithm;
    SuppressionCounts suppressed;
    double mean_runtime_ms = 0.0;
    double max_runtime_ms = 0.0;
    std::size_t errors = 0;
};

/// Process windows with a bounded worker pool (cfg.jobs); alerts reach the
/// sink serialized in window order. Per-window results are independent of
/// the thread schedule because every RNG stream derives from
/// (seed, window_id).
StreamSummary run_stream(std::span<const FeatureMatrix> windows, const PipelineConfig& cfg,
                         const std::function<void(const Alert&)>& sink);

} // namespace cad
