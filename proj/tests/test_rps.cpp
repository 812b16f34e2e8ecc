#include <doctest.h>

#include <cmath>
#include <set>

#include "cad/correlation.hpp"
#include "cad/rps.hpp"
#include "cad/spectral.hpp"
#include "cad/synth.hpp"

using namespace cad;

namespace {

FeatureMatrix noise_window(std::size_t m, std::size_t n, std::uint64_t seed) {
    PlantedSpec spec;
    spec.n = n;
    spec.k = 0;
    spec.mu = 0.0;
    spec.mode = PlantedSpec::Mode::data_vectors;
    spec.rows = m;
    return gen_planted_stream(spec, seed);
}

} // namespace

TEST_CASE("anomaly strength basics") {
    FeatureMatrix X({"r0", "r1"}, {"a", "b", "c"});
    // 1-norms: 3, 1, 6
    X.at(0, 0) = 1;
    X.at(1, 0) = 2;
    X.at(0, 1) = 1;
    X.at(1, 1) = 0;
    X.at(0, 2) = 4;
    X.at(1, 2) = 2;

    const std::vector<std::size_t> all = {0, 1, 2};
    CHECK(anomaly_strength(all, X, 1.0) == doctest::Approx(1.0));
    const std::vector<std::size_t> pair = {0, 2};
    CHECK(anomaly_strength(pair, X, 1.0) == doctest::Approx(0.9)); // 9/10

    // n equal-norm columns, |A| = 1 -> 1/n
    FeatureMatrix Y({"r0", "r1"}, {"a", "b", "c", "d"});
    for (std::size_t c = 0; c < 4; ++c) {
        Y.at(0, c) = 1;
        Y.at(1, c) = 1;
    }
    const std::vector<std::size_t> one = {2};
    CHECK(anomaly_strength(one, Y, 1.4) == doctest::Approx(0.25));

    FeatureMatrix Z({"r0", "r1"}, {"a", "b"}); // all zero
    const std::vector<std::size_t> z0 = {0};
    CHECK(anomaly_strength(z0, Z, 1.0) == 0.0);
}

TEST_CASE("sample size follows the ceil rule") {
    std::vector<double> norms(1000, 1.0);
    Rng rng(1);
    RpsConfig cfg;
    cfg.ratio = 0.2;
    CHECK(sample_columns(norms, cfg, rng).size() == 200);
    cfg.ratio = 0.001; // ceil(1) = 1, but the minimum is 2
    CHECK(sample_columns(norms, cfg, rng).size() == 2);
}

TEST_CASE("sampling rejects an all-zero matrix") {
    std::vector<double> norms(5, 0.0);
    Rng rng(2);
    RpsConfig cfg;
    CHECK_THROWS_AS(sample_columns(norms, cfg, rng), std::invalid_argument);
}

TEST_CASE("equal norms sample uniformly (chi-square at 0.001)") {
    const std::size_t n = 16;
    std::vector<double> norms(n, 3.7);
    RpsConfig cfg;
    cfg.ratio = 1.0; // 16 draws per call
    Rng rng(12345);
    std::vector<std::size_t> counts(n, 0);
    const std::size_t total = 100000;
    std::size_t drawn = 0;
    while (drawn < total) {
        for (std::size_t idx : sample_columns(norms, cfg, rng)) {
            if (drawn == total) break;
            ++counts[idx];
            ++drawn;
        }
    }
    const double expected = static_cast<double>(total) / static_cast<double>(n);
    double chi2 = 0.0;
    for (std::size_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    CHECK(chi2 < 37.697); // chi-square 0.999 quantile, 15 dof
}

TEST_CASE("a column with 90% of the mass is drawn 90% of the time") {
    std::vector<double> norms = {9.0, 0.25, 0.25, 0.25, 0.25};
    RpsConfig cfg;
    cfg.ratio = 1.0;
    Rng rng(777);
    std::size_t hits = 0, total = 100000, drawn = 0;
    while (drawn < total)
        for (std::size_t idx : sample_columns(norms, cfg, rng)) {
            if (drawn == total) break;
            ++drawn;
            if (idx == 0) ++hits;
        }
    const double freq = static_cast<double>(hits) / static_cast<double>(total);
    CHECK(freq == doctest::Approx(0.90).epsilon(0.012));
}

TEST_CASE("identical columns: score near 1, every sampled column flagged") {
    FeatureMatrix X({"r0", "r1", "r2", "r3"}, std::vector<std::string>{});
    X.col_ids.resize(12);
    for (std::size_t c = 0; c < 12; ++c) X.col_ids[c] = "c" + std::to_string(c);
    X.data.assign(4 * 12, 0.0);
    for (std::size_t c = 0; c < 12; ++c)
        for (std::size_t r = 0; r < 4; ++r) X.at(r, c) = static_cast<double>(r) + 1.0;
    RpsConfig cfg;
    cfg.ratio = 0.5;
    const Detection det = rps_detect(X, cfg);
    CHECK(det.score == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(det.anomalies.empty());
    CHECK(det.strength > 0.0);
}

TEST_CASE("degenerate sample: fewer than 2 distinct columns") {
    FeatureMatrix X({"r0", "r1"}, {"big", "z1", "z2"});
    X.at(0, 0) = 100.0;
    X.at(1, 0) = 50.0; // all other columns are exactly zero
    RpsConfig cfg;
    cfg.ratio = 1.0;
    const Detection det = rps_detect(X, cfg);
    CHECK(det.degenerate);
    CHECK(det.score == 0.0);
    CHECK(det.anomalies.empty());
}

TEST_CASE("detection is deterministic and deduplicated") {
    const FeatureMatrix X = noise_window(40, 60, 99);
    RpsConfig cfg;
    cfg.seed = 5;
    const Detection a = rps_detect(X, cfg);
    const Detection b = rps_detect(X, cfg);
    CHECK(a.score == b.score);
    CHECK(a.anomalies == b.anomalies);
    CHECK(a.strength == b.strength);
    const std::set<std::string> unique(a.anomalies.begin(), a.anomalies.end());
    CHECK(unique.size() == a.anomalies.size());
}

TEST_CASE("independent noise keeps the sampled score far below alert level") {
    std::size_t below = 0;
    const std::size_t runs = 60;
    for (std::size_t s = 0; s < runs; ++s) {
        const FeatureMatrix X = noise_window(80, 400, 1000 + s);
        RpsConfig cfg;
        cfg.seed = s;
        if (rps_detect(X, cfg).score < 0.5) ++below;
    }
    CHECK(below == runs);
}

TEST_CASE("high-strength planted block: rPS alerts while direct stays low") {
    std::size_t rps_hits = 0, direct_low = 0;
    const std::size_t runs = 20;
    for (std::size_t s = 0; s < runs; ++s) {
        PlantedSpec spec;
        spec.n = 500;
        spec.k = 25; // 5%
        spec.mu = 0.0;
        spec.mu_tilde = 0.85;
        spec.mode = PlantedSpec::Mode::data_vectors;
        spec.rows = 100;
        spec.strength_target = 0.97;
        const FeatureMatrix X = gen_planted_stream(spec, 31000 + s);
        RpsConfig cfg;
        cfg.seed = s;
        if (rps_detect(X, cfg).score > 0.7) ++rps_hits;
        if (principal_score(build_correlation_matrix(X, CorrMode::absolute)) < 0.5) ++direct_low;
    }
    CHECK(rps_hits >= 16);   // >= 80%
    CHECK(direct_low == runs);
}

TEST_CASE("sampled-score dominance when strength exceeds the count fraction") {
    // phi = 0.3 with k/n = 0.05: the sample is enriched, so on average the
    // sampled score should not fall below the direct score.
    double rps_sum = 0.0, direct_sum = 0.0;
    const std::size_t runs = 15;
    for (std::size_t s = 0; s < runs; ++s) {
        PlantedSpec spec;
        spec.n = 400;
        spec.k = 20;
        spec.mu = 0.0;
        spec.mu_tilde = 0.85;
        spec.mode = PlantedSpec::Mode::data_vectors;
        spec.rows = 80;
        spec.strength_target = 0.30;
        const FeatureMatrix X = gen_planted_stream(spec, 5200 + s);
        RpsConfig cfg;
        cfg.seed = 7 * s + 1;
        rps_sum += rps_detect(X, cfg).score;
        direct_sum += principal_score(build_correlation_matrix(X, CorrMode::absolute));
    }
    CHECK(rps_sum / runs >= direct_sum / runs - 0.02);
}

TEST_CASE("r = 1 with equal norms tracks direct detection on noise") {
    const FeatureMatrix X = noise_window(100, 500, 4711);
    const double direct = principal_score(build_correlation_matrix(X, CorrMode::absolute));
    RpsConfig cfg;
    cfg.ratio = 1.0;
    double diff_sum = 0.0;
    const std::size_t runs = 50;
    for (std::size_t s = 0; s < runs; ++s) {
        cfg.seed = s;
        diff_sum += std::abs(rps_detect(X, cfg).score - direct);
    }
    CHECK(diff_sum / runs < 0.1);
}
