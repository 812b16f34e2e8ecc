#include "cad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cad/pipeline.hpp"
#include "cad/rng.hpp"
#include "cad/rps.hpp"
#include "cad/spectral.hpp"

namespace cad {

namespace {

struct BetaShape {
    double a, b;
    bool constant = false; // mean 0 or 1 degenerates to a point mass
    double value = 0.0;

    double draw(Rng& rng) const { return constant ? value : rng.beta(a, b); }
};

BetaShape beta_from_mean_conc(double mean, double conc) {
    if (mean <= 0.0) return {0, 0, true, 0.0};
    if (mean >= 1.0) return {0, 0, true, 1.0};
    return {conc * mean, conc * (1.0 - mean), false, 0.0};
}

BetaShape beta_from_mean_sigma(double mean, double sigma) {
    if (sigma <= 0.0) return beta_from_mean_conc(mean, 20.0);
    if (mean <= 0.0 || mean >= 1.0)
        throw std::invalid_argument("gen_planted_matrix: mean with nonzero sigma must be in (0,1)");
    const double nu = mean * (1.0 - mean) / (sigma * sigma) - 1.0;
    if (nu <= 0.0)
        throw std::invalid_argument("gen_planted_matrix: (mu, sigma) infeasible for a [0,1] law");
    return {mean * nu, (1.0 - mean) * nu, false, 0.0};
}

// Mean |pearson| across up to `max_pairs` pairs of the given columns.
double mean_abs_corr(const FeatureMatrix& X, std::span<const std::size_t> cols,
                     std::size_t max_pairs) {
    if (cols.size() < 2) return 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    // deterministic striding over the pair set
    const std::size_t total = cols.size() * (cols.size() - 1) / 2;
    const std::size_t stride = std::max<std::size_t>(1, total / max_pairs);
    std::size_t pair_index = 0;
    for (std::size_t a = 0; a < cols.size() && count < max_pairs; ++a)
        for (std::size_t b = a + 1; b < cols.size() && count < max_pairs; ++b) {
            if (pair_index++ % stride != 0) continue;
            sum += std::abs(pearson(X.col(cols[a]), X.col(cols[b])));
            ++count;
        }
    return count ? sum / static_cast<double>(count) : 0.0;
}

} // namespace

CorrelationMatrix gen_planted_matrix(const PlantedSpec& spec, std::uint64_t seed,
                                     GroundTruth* truth) {
    if (spec.n < 2) throw std::invalid_argument("gen_planted_matrix: n must be >= 2");
    if (spec.k > spec.n) throw std::invalid_argument("gen_planted_matrix: k must be <= n");
    if (!(spec.mu <= spec.mu_tilde))
        throw std::invalid_argument("gen_planted_matrix: need mu <= mu_tilde");
    const BetaShape anomaly = beta_from_mean_conc(spec.mu_tilde, 20.0);
    const BetaShape background = beta_from_mean_sigma(spec.mu, spec.sigma);

    Rng rng(seed);
    CorrelationMatrix P(spec.n, CorrMode::absolute);
    for (std::size_t i = 0; i < spec.n; ++i)
        for (std::size_t j = i + 1; j < spec.n; ++j) {
            const bool in_block = i < spec.k && j < spec.k;
            P.set(i, j, in_block ? anomaly.draw(rng) : background.draw(rng));
        }
    if (truth) {
        truth->anomaly_cols.resize(spec.k);
        for (std::size_t i = 0; i < spec.k; ++i) truth->anomaly_cols[i] = i;
    }
    return P;
}

FeatureMatrix gen_planted_stream(const PlantedSpec& spec, std::uint64_t seed,
                                 GroundTruth* truth) {
    const std::size_t n = spec.n, k = spec.k, m = spec.rows;
    if (n < 2 || m < 4) throw std::invalid_argument("gen_planted_stream: need n >= 2, rows >= 4");
    if (k >= n) throw std::invalid_argument("gen_planted_stream: need k < n");

    Rng rng(seed);
    std::vector<double> factor(m), weak_factor(m);
    for (double& v : factor) v = rng.normal();
    for (double& v : weak_factor) v = rng.normal();
    std::vector<double> noise(m * n);
    for (double& v : noise) v = rng.normal();

    std::vector<std::string> row_ids(m), col_ids(n);
    for (std::size_t r = 0; r < m; ++r) row_ids[r] = "r" + std::to_string(r);
    for (std::size_t c = 0; c < n; ++c) col_ids[c] = "c" + std::to_string(c);
    FeatureMatrix X(std::move(row_ids), std::move(col_ids));
    X.window_id = seed;

    std::vector<std::size_t> anomaly_cols(k), normal_cols(n - k);
    for (std::size_t i = 0; i < k; ++i) anomaly_cols[i] = i;
    for (std::size_t i = 0; i < n - k; ++i) normal_cols[i] = k + i;

    const auto fill = [&](std::span<const std::size_t> cols, const std::vector<double>& shared,
                          double loading_sq) {
        const double c = std::sqrt(std::clamp(loading_sq, 0.0, 1.0));
        const double s = std::sqrt(1.0 - c * c);
        for (std::size_t j : cols)
            for (std::size_t r = 0; r < m; ++r)
                X.at(r, j) = c * shared[r] + s * noise[j * m + r];
    };

    // Bisection on the squared factor loading until the measured mean
    // |correlation| of the group lands on target.
    const auto calibrate = [&](std::span<const std::size_t> cols,
                               const std::vector<double>& shared, double target) {
        double lo = 0.0, hi = 1.0;
        double loading_sq = std::clamp(target, 0.0, 1.0);
        for (int step = 0; step < 50; ++step) {
            fill(cols, shared, loading_sq);
            const double measured = mean_abs_corr(X, cols, 400);
            if (std::abs(measured - target) <= 0.005) return;
            if (measured < target)
                lo = loading_sq;
            else
                hi = loading_sq;
            loading_sq = 0.5 * (lo + hi);
        }
        fill(cols, shared, loading_sq);
        if (std::abs(mean_abs_corr(X, cols, 400) - target) > 0.03)
            throw std::runtime_error("gen_planted_stream: correlation calibration failed");
    };

    if (spec.mu > 0.0)
        calibrate(normal_cols, weak_factor, spec.mu);
    else
        fill(normal_cols, weak_factor, 0.0); // independent columns

    if (k >= 2) calibrate(anomaly_cols, factor, spec.mu_tilde);

    if (spec.strength_target > 0.0 && k >= 1) {
        if (spec.strength_target >= 1.0)
            throw std::invalid_argument("gen_planted_stream: strength_target must be < 1");
        // Scaling a column scales its p-norm linearly, so the strength
        // target is solvable in closed form.
        const auto norms = column_pnorms(X, spec.strength_p);
        double anomaly_mass = 0.0, normal_mass = 0.0;
        for (std::size_t j : anomaly_cols) anomaly_mass += norms[j];
        for (std::size_t j : normal_cols) normal_mass += norms[j];
        if (anomaly_mass <= 0.0 || normal_mass <= 0.0)
            throw std::runtime_error("gen_planted_stream: degenerate norms");
        const double scale =
            spec.strength_target * normal_mass / ((1.0 - spec.strength_target) * anomaly_mass);
        for (std::size_t j : anomaly_cols)
            for (std::size_t r = 0; r < m; ++r) X.at(r, j) *= scale;
    }

    if (truth) truth->anomaly_cols = anomaly_cols;
    return X;
}

std::size_t GrowthRule::k_of(std::size_t n) const {
    const double nn = static_cast<double>(n);
    const double k = kind == Kind::power ? std::pow(nn, param) : param * nn;
    return static_cast<std::size_t>(std::llround(std::min(k, nn)));
}

std::string GrowthRule::str() const {
    return kind == Kind::power ? "n^" + std::to_string(param) : std::to_string(param) + "n";
}

GrowthRule GrowthRule::parse(std::string_view text) {
    GrowthRule rule;
    if (text.starts_with("n^")) {
        rule.kind = Kind::power;
        rule.param = std::stod(std::string(text.substr(2)));
    } else if (text.ends_with("n")) {
        rule.kind = Kind::linear;
        rule.param = std::stod(std::string(text.substr(0, text.size() - 1)));
    } else {
        throw std::invalid_argument("growth rule must look like n^0.8 or 0.2n");
    }
    return rule;
}

std::vector<DegenerationRow> degeneration_curve(const GrowthRule& rule,
                                                std::span<const std::size_t> n_grid,
                                                std::size_t seeds, double mu, double mu_tilde,
                                                std::uint64_t base_seed) {
    std::vector<DegenerationRow> rows;
    rows.reserve(n_grid.size());
    for (std::size_t n : n_grid) {
        PlantedSpec spec;
        spec.n = n;
        spec.k = rule.k_of(n);
        spec.mu = mu;
        spec.mu_tilde = mu_tilde;
        spec.mode = PlantedSpec::Mode::direct_matrix;
        double sum = 0.0;
        for (std::size_t s = 0; s < seeds; ++s) {
            const CorrelationMatrix P = gen_planted_matrix(spec, base_seed + 7919 * s + n);
            sum += principal_score(P);
        }
        const double phi = static_cast<double>(spec.k) / static_cast<double>(n);
        rows.push_back({n, spec.k, sum / static_cast<double>(seeds),
                        mu + (mu_tilde - mu) * phi * phi});
    }
    return rows;
}

const char* scenario_name(InjectScenario s) {
    switch (s) {
    case InjectScenario::big_sets: return "big_sets";
    case InjectScenario::strong_strength: return "strong_strength";
    case InjectScenario::hidden: return "hidden";
    }
    return "?";
}

std::optional<InjectScenario> scenario_from_name(std::string_view name) {
    if (name == "big_sets") return InjectScenario::big_sets;
    if (name == "strong_strength") return InjectScenario::strong_strength;
    if (name == "hidden") return InjectScenario::hidden;
    return std::nullopt;
}

std::optional<Injection> inject_anomalies(const FeatureMatrix& window, InjectScenario scenario,
                                          std::uint64_t seed) {
    const std::size_t n0 = window.cols();
    const std::size_t m = window.rows();
    if (m < 4 || n0 < 4) return std::nullopt;

    Rng rng(seed);
    std::size_t count = 0;
    double strength = 0.0;
    switch (scenario) {
    case InjectScenario::big_sets: {
        // injected take up 20%..50% of the resulting data entries
        const double frac = rng.uniform(0.20, 0.50);
        count = static_cast<std::size_t>(std::ceil(frac / (1.0 - frac) * static_cast<double>(n0)));
        strength = rng.uniform(0.15, 0.60);
        break;
    }
    case InjectScenario::strong_strength: {
        const double frac = rng.uniform(0.05, 0.20);
        count = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(frac / (1.0 - frac) * static_cast<double>(n0))));
        strength = rng.uniform(0.70, 0.95);
        break;
    }
    case InjectScenario::hidden: {
        if (n0 < 20) return std::nullopt; // too small to hide anything in
        count = 20 + static_cast<std::size_t>(rng.uniform() * 181.0); // 20..200
        strength = rng.uniform(0.02, 0.08);                           // below 0.1
        break;
    }
    }
    if (count < 2) count = 2;

    const double mu_tilde = rng.uniform(0.82, 0.92);

    // Shared factor plus noise, calibrated like gen_planted_stream.
    std::vector<double> factor(m);
    for (double& v : factor) v = rng.normal();
    std::vector<double> noise(m * count);
    for (double& v : noise) v = rng.normal();

    Injection out;
    out.window = window;
    std::vector<std::string> ids(count);
    for (std::size_t c = 0; c < count; ++c) ids[c] = "sim_" + std::to_string(c);

    FeatureMatrix block(window.row_ids, ids);
    std::vector<std::size_t> all(count);
    for (std::size_t c = 0; c < count; ++c) all[c] = c;
    const auto fill = [&](double loading_sq) {
        const double cl = std::sqrt(std::clamp(loading_sq, 0.0, 1.0));
        const double s = std::sqrt(1.0 - cl * cl);
        for (std::size_t j = 0; j < count; ++j)
            for (std::size_t r = 0; r < m; ++r)
                block.at(r, j) = cl * factor[r] + s * noise[j * m + r];
    };
    double lo = 0.0, hi = 1.0, loading_sq = mu_tilde;
    for (int step = 0; step < 50; ++step) {
        fill(loading_sq);
        const double measured = mean_abs_corr(block, all, 300);
        if (std::abs(measured - mu_tilde) <= 0.01) break;
        if (measured < mu_tilde)
            lo = loading_sq;
        else
            hi = loading_sq;
        loading_sq = 0.5 * (lo + hi);
    }

    // Scale injected columns so their p-norm share of the final window
    // equals the drawn strength.
    const double p = 1.4;
    const auto window_norms = column_pnorms(window, p);
    double window_mass = 0.0;
    for (double v : window_norms) window_mass += v;
    const auto block_norms = column_pnorms(block, p);
    double block_mass = 0.0;
    for (double v : block_norms) block_mass += v;
    if (window_mass <= 0.0 || block_mass <= 0.0) return std::nullopt;
    const double scale = strength * window_mass / ((1.0 - strength) * block_mass);

    const std::size_t n1 = n0 + count;
    FeatureMatrix grown(window.row_ids, window.col_ids);
    grown.col_ids.insert(grown.col_ids.end(), ids.begin(), ids.end());
    grown.data.resize(m * n1);
    std::copy(window.data.begin(), window.data.end(), grown.data.begin());
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t r = 0; r < m; ++r) grown.at(r, n0 + j) = scale * block.at(r, j);
    grown.window_id = window.window_id;
    grown.start = window.start;
    grown.end = window.end;

    out.window = std::move(grown);
    out.injected_ids = std::move(ids);
    out.injected_cols.resize(count);
    for (std::size_t j = 0; j < count; ++j) out.injected_cols[j] = n0 + j;
    out.strength = strength;
    return out;
}

SweepCorpus gen_sweep_corpus(const SweepCorpusSpec& spec) {
    SweepCorpus corpus;
    const std::size_t m = spec.rows;

    const auto make_window = [&](std::uint64_t seed, bool with_block, double strength) {
        Rng rng(seed);
        const std::size_t extras = with_block ? spec.anomalies + spec.outliers : 0;
        const std::size_t n_total = spec.n + extras;
        std::vector<std::string> rows(m), cols(n_total);
        for (std::size_t r = 0; r < m; ++r) rows[r] = "r" + std::to_string(r);
        for (std::size_t c = 0; c < spec.n; ++c) cols[c] = "v" + std::to_string(c);
        for (std::size_t c = 0; c < spec.outliers && with_block; ++c)
            cols[spec.n + c] = "o" + std::to_string(c);
        for (std::size_t c = 0; c < spec.anomalies && with_block; ++c)
            cols[spec.n + spec.outliers + c] = "sim_" + std::to_string(c);
        FeatureMatrix X(std::move(rows), std::move(cols));
        X.window_id = seed;

        // normal columns share a moderate market factor
        std::vector<double> market(m);
        for (double& v : market) v = rng.normal();
        for (std::size_t c = 0; c < spec.n; ++c)
            for (std::size_t r = 0; r < m; ++r)
                X.at(r, c) = 0.67 * market[r] + 0.74 * rng.normal(); // mutual corr ~0.45
        if (!with_block) return X;

        // Spiky row profile shared by outliers and anomalies: the higher p
        // is, the larger their share of the p-norm mass becomes, so the
        // norm order genuinely moves the sampling behavior.
        std::vector<double> profile(m, 0.25);
        for (std::size_t h = 0; h < 3; ++h) profile[rng.index(m)] = 25.0;

        std::vector<double> factor(m);
        for (double& v : factor) v = rng.normal();
        const auto spiky = [&](double loading_sq, std::size_t col, double amplitude) {
            const double cl = std::sqrt(loading_sq);
            const double sl = std::sqrt(1.0 - loading_sq);
            for (std::size_t r = 0; r < m; ++r)
                X.at(r, col) = amplitude * profile[r] * (cl * factor[r] + sl * rng.normal());
        };
        for (std::size_t c = 0; c < spec.outliers; ++c) {
            // loadings straddle the membership threshold so the flagged
            // fraction grows as more of them enter the sample
            const double loading = spec.outlier_loading + rng.uniform(-0.10, 0.05);
            spiky(loading * loading, spec.n + c, 4.0);
        }
        for (std::size_t c = 0; c < spec.anomalies; ++c)
            spiky(spec.block_corr, spec.n + spec.outliers + c, 1.0);

        // scale the anomaly set so its 1.4-norm strength hits the target
        const auto norms = column_pnorms(X, 1.4);
        double anomaly_mass = 0.0, rest_mass = 0.0;
        for (std::size_t c = 0; c < n_total; ++c) {
            if (c >= spec.n + spec.outliers)
                anomaly_mass += norms[c];
            else
                rest_mass += norms[c];
        }
        const double scale = strength * rest_mass / ((1.0 - strength) * anomaly_mass);
        for (std::size_t c = spec.n + spec.outliers; c < n_total; ++c)
            for (std::size_t r = 0; r < m; ++r) X.at(r, c) *= scale;
        return X;
    };

    Rng strength_rng(spec.seed);
    for (std::size_t w = 0; w < spec.injected_windows; ++w) {
        // graded difficulty: the weaker windows only alert once the norm
        // order or sampling rate favors them enough
        const double strength = strength_rng.uniform(0.78, 0.96);
        Injection inj;
        inj.window = make_window(spec.seed * 1000003 + w, true, strength);
        inj.window.window_id = w;
        for (std::size_t c = 0; c < spec.anomalies; ++c) {
            inj.injected_cols.push_back(spec.n + spec.outliers + c);
            inj.injected_ids.push_back("sim_" + std::to_string(c));
        }
        inj.strength = anomaly_strength(inj.injected_cols, inj.window, 1.4);
        corpus.injected.push_back(std::move(inj));
    }
    for (std::size_t w = 0; w < spec.control_windows; ++w) {
        FeatureMatrix X = make_window(spec.seed * 2000003 + w, false, 0.0);
        X.window_id = spec.injected_windows + w;
        corpus.controls.push_back(std::move(X));
    }
    return corpus;
}

EvalReport evaluate(std::span<const std::string> detected, std::span<const std::string> injected,
                    std::span<const std::string> presuspicious, std::size_t control_alerts,
                    std::span<const double> runtimes_ms) {
    EvalReport rep;
    rep.extra_alerts = control_alerts;
    const std::set<std::string> det(detected.begin(), detected.end());
    const std::set<std::string> inj(injected.begin(), injected.end());
    const std::set<std::string> pre(presuspicious.begin(), presuspicious.end());

    std::size_t hits = 0;
    for (const auto& id : det)
        if (inj.contains(id)) ++hits;
    if (!inj.empty()) rep.recall = static_cast<double>(hits) / static_cast<double>(inj.size());

    std::size_t considered = 0;
    for (const auto& id : det)
        if (!pre.contains(id)) ++considered;
    if (considered > 0)
        rep.est_accuracy = static_cast<double>(hits) / static_cast<double>(considered);

    for (double t : runtimes_ms) {
        rep.mean_runtime_ms += t;
        rep.max_runtime_ms = std::max(rep.max_runtime_ms, t);
    }
    if (!runtimes_ms.empty()) rep.mean_runtime_ms /= static_cast<double>(runtimes_ms.size());
    return rep;
}

namespace {

SweepRow sweep_point(const SweepCorpus& corpus, const PipelineConfig& cfg, std::string param,
                     double value) {
    std::size_t hits = 0, detected_total = 0, injected_total = 0, control_alerts = 0;
    for (const Injection& inj : corpus.injected) {
        const WindowResult res = run_window(inj.window, cfg);
        std::set<std::string> detected;
        for (const Alert& a : res.alerts)
            detected.insert(a.anomalies.begin(), a.anomalies.end());
        const std::set<std::string> truth(inj.injected_ids.begin(), inj.injected_ids.end());
        for (const auto& id : detected)
            if (truth.contains(id)) ++hits;
        detected_total += detected.size();
        injected_total += truth.size();
    }
    for (const FeatureMatrix& X : corpus.controls)
        if (!run_window(X, cfg).alerts.empty()) ++control_alerts;

    SweepRow row;
    row.param = std::move(param);
    row.value = value;
    row.recall = injected_total ? static_cast<double>(hits) / static_cast<double>(injected_total)
                                : 0.0;
    row.accuracy =
        detected_total ? static_cast<double>(hits) / static_cast<double>(detected_total) : 0.0;
    row.extra_alerts = control_alerts;
    return row;
}

} // namespace

std::vector<SweepRow> parameter_sweep(const SweepCorpus& corpus, const SweepGrids& grids,
                                      const PipelineConfig& base) {
    std::vector<SweepRow> rows;
    // The r and p rows tune the sampling arm, so they run rPS alone:
    // otherwise gPS completes any partially-sampled set and flattens the
    // trends the table is meant to show. The alpha and ell rows tune gPS
    // and run the combined detector.
    PipelineConfig sampling = base;
    sampling.enable_direct = false;
    sampling.enable_gps = false;
    for (double r : grids.r) {
        PipelineConfig cfg = sampling;
        cfg.rps.ratio = r;
        rows.push_back(sweep_point(corpus, cfg, "r", r));
    }
    for (double p : grids.p) {
        PipelineConfig cfg = sampling;
        cfg.rps.p = p;
        rows.push_back(sweep_point(corpus, cfg, "p", p));
    }
    PipelineConfig generative = base;
    generative.enable_direct = false;
    for (double alpha : grids.alpha) {
        PipelineConfig cfg = generative;
        cfg.gps.alpha = alpha;
        rows.push_back(sweep_point(corpus, cfg, "alpha", alpha));
    }
    for (std::size_t ell : grids.ell) {
        PipelineConfig cfg = generative;
        cfg.gps.ell = ell;
        rows.push_back(sweep_point(corpus, cfg, "ell", static_cast<double>(ell)));
    }
    return rows;
}

} // namespace cad
