#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cad/correlation.hpp"
#include "cad/feature_matrix.hpp"

namespace cad {

/// Planted-instance description. In direct_matrix mode the correlation
/// matrix entries are drawn directly (the random-matrix setting of the
/// degeneration/concentration experiments; positive semi-definiteness is
/// not enforced). In data_vectors mode a latent-factor window matrix is
/// built so the detectors can consume real columns.
struct PlantedSpec {
    enum class Mode { direct_matrix, data_vectors };

    std::size_t n = 100;
    std::size_t k = 0;          // anomaly count, k < n (k = n allowed in matrix mode)
    double mu = 0.3;            // background mean correlation
    double sigma = -1.0;        // background std; <= 0 -> concentration-20 beta
    double mu_tilde = 0.85;     // within-anomaly mean correlation
    Mode mode = Mode::direct_matrix;
    std::size_t rows = 100;     // M (data_vectors)
    double strength_target = -1.0; // phi target; <= 0 -> leave norms alone
    double strength_p = 1.4;    // norm order used for the strength target
};

struct GroundTruth {
    std::vector<std::size_t> anomaly_cols;
};

/// Random symmetric matrix with unit diagonal: within-anomaly entries are
/// Beta with mean mu_tilde (concentration 20), all others Beta matched to
/// (mu, sigma). Throws std::invalid_argument when (mu, sigma) cannot be
/// realized by a [0,1] distribution.
CorrelationMatrix gen_planted_matrix(const PlantedSpec& spec, std::uint64_t seed,
                                     GroundTruth* truth = nullptr);

/// Latent-factor window: anomaly columns share a factor with the noise
/// level calibrated so the mean within-anomaly |correlation| lands within
/// 0.005 of mu_tilde (well inside the +-0.03 contract); normal columns are
/// independent when mu == 0, otherwise share a weak factor calibrated to
/// mu. Anomaly columns are rescaled so the set's p-norm strength equals
/// strength_target exactly. Throws when calibration cannot reach the
/// target in 50 bisection steps.
FeatureMatrix gen_planted_stream(const PlantedSpec& spec, std::uint64_t seed,
                                 GroundTruth* truth = nullptr);

/// Anomaly growth rule for the degeneration experiment: k = n^m or k = c*n.
struct GrowthRule {
    enum class Kind { power, linear } kind = Kind::power;
    double param = 0.8;

    std::size_t k_of(std::size_t n) const;
    std::string str() const;
    static GrowthRule parse(std::string_view text); // "n^0.8" or "0.2n"
};

struct DegenerationRow {
    std::size_t n = 0;
    std::size_t k = 0;
    double rho = 0.0;           // mean over seeds
    double predicted_rho = 0.0; // mu + (mu_tilde - mu) * (k/n)^2
};

std::vector<DegenerationRow> degeneration_curve(const GrowthRule& rule,
                                                std::span<const std::size_t> n_grid,
                                                std::size_t seeds, double mu, double mu_tilde,
                                                std::uint64_t base_seed);

enum class InjectScenario { big_sets, strong_strength, hidden };

const char* scenario_name(InjectScenario s);
std::optional<InjectScenario> scenario_from_name(std::string_view name);

struct Injection {
    FeatureMatrix window;                    // original columns + injected ones
    std::vector<std::size_t> injected_cols;  // indices into window
    std::vector<std::string> injected_ids;
    double strength = 0.0;                   // measured phi of the injected set
};

/// Append generated correlated columns to a window per the scenario's
/// count and strength ranges. Returns nullopt (window too small) with the
/// reason left to the caller's counters.
std::optional<Injection> inject_anomalies(const FeatureMatrix& window, InjectScenario scenario,
                                          std::uint64_t seed);

struct EvalReport {
    std::optional<double> recall;       // absent when nothing was injected
    std::optional<double> est_accuracy; // absent when nothing was detected
    std::size_t extra_alerts = 0;
    double mean_runtime_ms = 0.0;
    double max_runtime_ms = 0.0;
};

EvalReport evaluate(std::span<const std::string> detected, std::span<const std::string> injected,
                    std::span<const std::string> presuspicious, std::size_t control_alerts,
                    std::span<const double> runtimes_ms);

/// Corpus for the parameter sweep: injected windows whose anomaly columns
/// are spiky (mass concentrated on a few rows), so the norm order p
/// genuinely changes their sampling weight, plus weakly-loaded outlier
/// columns that erode accuracy when oversampled, plus plain control
/// windows.
struct SweepCorpusSpec {
    std::size_t injected_windows = 40;
    std::size_t control_windows = 20;
    std::size_t n = 400;          // normal columns per window
    std::size_t rows = 100;
    std::size_t anomalies = 40;
    std::size_t outliers = 40;    // spiky, partially loaded on the anomaly factor
    double block_corr = 0.95;
    double outlier_loading = 0.70;
    std::uint64_t seed = 1;
};

struct SweepCorpus {
    std::vector<Injection> injected;
    std::vector<FeatureMatrix> controls;
};

SweepCorpus gen_sweep_corpus(const SweepCorpusSpec& spec);

struct SweepGrids {
    std::vector<double> r = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> p = {1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
    std::vector<double> alpha = {0.6, 0.65, 0.7, 0.75, 0.8, 0.85};
    std::vector<std::size_t> ell = {1, 2, 3, 4, 5, 6};
};

struct SweepRow {
    std::string param;
    double value = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    std::size_t extra_alerts = 0;
};

/// One EvalReport row per grid point, varying one parameter at a time from
/// the base configuration (the layout of the published tuning table).
struct PipelineConfig; // defined in cad/pipeline.hpp
std::vector<SweepRow> parameter_sweep(const SweepCorpus& corpus, const SweepGrids& grids,
                                      const PipelineConfig& base);

} // namespace cad
