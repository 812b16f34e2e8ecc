#include <doctest.h>

#include <set>

#include "cad/pipeline.hpp"
#include "cad/synth.hpp"

using namespace cad;

namespace {

Detection make_det(double score, double strength, std::vector<std::string> ids,
                   Algo algo = Algo::rps) {
    Detection d;
    d.algorithm = algo;
    d.score = score;
    d.strength = strength;
    d.anomalies = std::move(ids);
    return d;
}

FeatureMatrix strong_window(std::uint64_t seed, std::size_t window_id) {
    PlantedSpec spec;
    spec.n = 300;
    spec.k = 20;
    spec.mu = 0.0;
    spec.mu_tilde = 0.9;
    spec.mode = PlantedSpec::Mode::data_vectors;
    spec.rows = 80;
    spec.strength_target = 0.97;
    FeatureMatrix X = gen_planted_stream(spec, seed);
    X.window_id = window_id;
    X.start = static_cast<std::int64_t>(window_id) * 3600;
    X.end = X.start + 3600;
    return X;
}

FeatureMatrix noise_window(std::uint64_t seed, std::size_t window_id) {
    PlantedSpec spec;
    spec.n = 150;
    spec.k = 0;
    spec.mu = 0.0;
    spec.mode = PlantedSpec::Mode::data_vectors;
    spec.rows = 100;
    FeatureMatrix X = gen_planted_stream(spec, seed);
    X.window_id = window_id;
    return X;
}

bool satisfies_gate(const Alert& a, const PipelineConfig& cfg) {
    return a.score > cfg.threshold && a.strength >= cfg.strength_floor && !a.anomalies.empty();
}

} // namespace

TEST_CASE("gate: strict inequality at the threshold") {
    PipelineConfig cfg;
    const auto r = gate_alert(make_det(0.69, 0.5, {"a"}), cfg);
    CHECK_FALSE(r.alert.has_value());
    CHECK(r.reason == SuppressReason::below_threshold);
    // exactly at the threshold is still suppressed
    const auto eq = gate_alert(make_det(0.7, 0.5, {"a"}), cfg);
    CHECK(eq.reason == SuppressReason::below_threshold);
}

TEST_CASE("gate: strength floor") {
    PipelineConfig cfg;
    const auto r = gate_alert(make_det(0.75, 0.0005, {"a"}), cfg);
    CHECK(r.reason == SuppressReason::below_strength);
}

TEST_CASE("gate: empty set") {
    PipelineConfig cfg;
    const auto r = gate_alert(make_det(0.75, 0.02, {}), cfg);
    CHECK(r.reason == SuppressReason::empty_set);
}

TEST_CASE("gate: passing detection becomes an alert") {
    PipelineConfig cfg;
    const auto r = gate_alert(make_det(0.75, 0.02, {"a", "b"}), cfg, 100, 200);
    REQUIRE(r.alert.has_value());
    CHECK(r.alert->score == 0.75);
    CHECK(r.alert->start == 100);
    CHECK(r.alert->end == 200);
    CHECK(r.alert->algorithm == "rps");
}

TEST_CASE("merge: set algebra of core and suspicious") {
    const Detection rps = make_det(0.8, 0.1, {"a", "b", "c"}, Algo::rps);
    const Detection gps = make_det(0.9, 0.1, {"b", "c"}, Algo::gps);
    const std::vector<Detection> gps_list = {gps};
    const auto merged = merge_detections(&rps, gps_list);
    CHECK(merged.core == std::vector<std::string>{"b", "c"});
    CHECK(merged.suspicious == std::vector<std::string>{"a"});
    CHECK(merged.anomalies == std::vector<std::string>{"a", "b", "c"});

    const Detection gps_only = make_det(0.9, 0.1, {"d"}, Algo::gps);
    const std::vector<Detection> only = {gps_only};
    const auto m2 = merge_detections(nullptr, only);
    CHECK(m2.core == std::vector<std::string>{"d"});
    CHECK(m2.suspicious.empty());

    const Detection rps_only = make_det(0.8, 0.1, {"a"}, Algo::rps);
    const auto m3 = merge_detections(&rps_only, {});
    CHECK(m3.core.empty());
    CHECK(m3.suspicious == std::vector<std::string>{"a"});
}

TEST_CASE("planted window raises a merged alert whose core is the gPS set") {
    const FeatureMatrix X = strong_window(2025, 7);
    PipelineConfig cfg;
    cfg.seed = 3;
    const WindowResult res = run_window(X, cfg);
    REQUIRE(res.alerts.size() == 1);
    const Alert& alert = res.alerts.front();
    CHECK(alert.window_id == 7);
    CHECK(satisfies_gate(alert, cfg));
    CHECK(alert.algorithm == "rps+gps");
    CHECK(res.gated_by_algorithm.at("rps") == 1);
    CHECK(res.gated_by_algorithm.at("gps") >= 1);

    // planted ids are c0..c19; the core should be dominated by them
    std::size_t planted_core = 0;
    for (const auto& id : alert.core) {
        const std::size_t idx = std::stoul(id.substr(1));
        if (idx < 20) ++planted_core;
    }
    CHECK(planted_core >= 16);
    CHECK(alert.core.size() <= 24);

    // core and suspicious partition the merged set
    std::set<std::string> all(alert.core.begin(), alert.core.end());
    all.insert(alert.suspicious.begin(), alert.suspicious.end());
    CHECK(all.size() == alert.anomalies.size());
}

TEST_CASE("noise windows stay quiet and suppressions are counted") {
    PipelineConfig cfg;
    cfg.seed = 11;
    std::size_t alerts = 0, suppressed = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const WindowResult res = run_window(noise_window(800 + s, s), cfg);
        alerts += res.alerts.size();
        suppressed += res.suppressed.total();
    }
    CHECK(alerts == 0);
    CHECK(suppressed > 0); // every produced detection must be accounted for
}

TEST_CASE("gps disabled: merged alerts carry empty core") {
    const FeatureMatrix X = strong_window(31, 0);
    PipelineConfig cfg;
    cfg.enable_gps = false;
    const WindowResult res = run_window(X, cfg);
    REQUIRE(res.alerts.size() == 1);
    CHECK(res.alerts.front().core.empty());
    CHECK(res.alerts.front().suspicious == res.alerts.front().anomalies);
}

TEST_CASE("diagnostic mode emits one alert per gated detection") {
    const FeatureMatrix X = strong_window(32, 0);
    PipelineConfig cfg;
    cfg.merged_alerts = false;
    const WindowResult res = run_window(X, cfg);
    CHECK(res.alerts.size() >= 2); // rps and at least one gps set
    for (const Alert& a : res.alerts) CHECK((a.algorithm == "rps" || a.algorithm == "gps"));
}

TEST_CASE("stream: ordering is monotone and alerts satisfy the gate") {
    std::vector<FeatureMatrix> windows;
    for (std::size_t i = 0; i < 6; ++i)
        windows.push_back(i % 2 == 0 ? strong_window(500 + i, i) : noise_window(600 + i, i));
    PipelineConfig cfg;
    cfg.seed = 99;

    std::vector<Alert> sunk;
    const StreamSummary summary =
        run_stream(windows, cfg, [&](const Alert& a) { sunk.push_back(a); });
    CHECK(summary.windows == 6);
    CHECK(summary.alerts == sunk.size());
    CHECK(sunk.size() == 3);
    for (std::size_t i = 1; i < sunk.size(); ++i)
        CHECK(sunk[i - 1].window_id <= sunk[i].window_id);
    for (const Alert& a : sunk) CHECK(satisfies_gate(a, cfg));
    CHECK(summary.suppressed.total() > 0);
}

TEST_CASE("stream results do not depend on the worker count") {
    std::vector<FeatureMatrix> windows;
    for (std::size_t i = 0; i < 5; ++i)
        windows.push_back(i == 2 ? strong_window(700, i) : noise_window(710 + i, i));

    PipelineConfig sequential;
    sequential.seed = 1234;
    sequential.jobs = 1;
    std::vector<Alert> a1;
    run_stream(windows, sequential, [&](const Alert& a) { a1.push_back(a); });

    PipelineConfig parallel = sequential;
    parallel.jobs = 3;
    std::vector<Alert> a2;
    run_stream(windows, parallel, [&](const Alert& a) { a2.push_back(a); });

    REQUIRE(a1.size() == a2.size());
    for (std::size_t i = 0; i < a1.size(); ++i) {
        CHECK(a1[i].window_id == a2[i].window_id);
        CHECK(a1[i].score == a2[i].score);
        CHECK(a1[i].anomalies == a2[i].anomalies);
        CHECK(a1[i].core == a2[i].core);
    }
}
