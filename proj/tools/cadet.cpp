// cadet: correlated anomaly detection over windowed data streams.
// Subcommands: detect, simulate, tune, report.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "cad/gps.hpp"
#include "cad/ingest.hpp"
#include "cad/pipeline.hpp"
#include "cad/rps.hpp"
#include "cad/spectral.hpp"
#include "cad/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct RunMeta {
    std::uint64_t seed = 0;
    std::string config_hash;

    json to_json() const {
        return json{{"meta", {{"tool", "cadet"},
                              {"version", kVersion},
                              {"seed", seed},
                              {"config_hash", config_hash}}}};
    }
    std::string csv_comment() const {
        return "# cadet " + std::string(kVersion) + " seed=" + std::to_string(seed) +
               " config=" + config_hash;
    }
};

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

json alert_to_json(const cad::Alert& a) {
    return json{{"window_id", a.window_id}, {"start", a.start},
                {"end", a.end},             {"algorithm", a.algorithm},
                {"score", a.score},         {"strength", a.strength},
                {"anomalies", a.anomalies}, {"core", a.core},
                {"suspicious", a.suspicious}};
}

// ---------------------------------------------------------------- detect

struct DetectOptions {
    std::vector<std::string> inputs;
    std::string kind = "access_log";
    std::int64_t window = 0; // 0 -> kind default
    std::int64_t step = 0;   // 0 -> kind default
    std::size_t min_entities = 2;
    bool keep_query = false;
    std::string out_dir = ".";
    cad::PipelineConfig pipeline;
};

std::string detect_config_dump(const DetectOptions& opt) {
    std::ostringstream s;
    s << "kind=" << opt.kind << " window=" << opt.window << " step=" << opt.step
      << " min_entities=" << opt.min_entities << " threshold=" << opt.pipeline.threshold
      << " strength_floor=" << opt.pipeline.strength_floor << " rps.p=" << opt.pipeline.rps.p
      << " rps.ratio=" << opt.pipeline.rps.ratio
      << " rps.threshold=" << opt.pipeline.rps.threshold << " gps.ell=" << opt.pipeline.gps.ell
      << " gps.alpha=" << opt.pipeline.gps.alpha << " gps.max_iter=" << opt.pipeline.gps.max_iter
      << " gps.ll_tol=" << opt.pipeline.gps.ll_tol << " seed=" << opt.pipeline.seed;
    return s.str();
}

int run_detect(DetectOptions opt) {
    const bool price_mode = opt.kind == "price_csv";
    if (opt.window == 0) opt.window = price_mode ? 30 : 3600;
    if (opt.step == 0) opt.step = price_mode ? 3 : std::max<std::int64_t>(1, opt.window / 4);

    cad::ParseStats parse_stats;
    std::vector<cad::Event> events;
    for (const std::string& input : opt.inputs) {
        std::ifstream in(input);
        if (!in) throw IoError("cannot read input: " + input);
        if (price_mode) {
            const std::string hint = fs::path(input).stem().string();
            auto file_events = cad::parse_price_csv(in, hint, &parse_stats);
            events.insert(events.end(), std::make_move_iterator(file_events.begin()),
                          std::make_move_iterator(file_events.end()));
        } else {
            cad::LogParser parser(!opt.keep_query);
            std::string line;
            while (std::getline(in, line))
                if (auto ev = parser.parse_line(line)) events.push_back(std::move(*ev));
            parse_stats.lines += parser.stats().lines;
            parse_stats.events += parser.stats().events;
            parse_stats.skipped += parser.stats().skipped;
            parse_stats.warnings += parser.stats().warnings;
        }
    }

    const cad::WindowSpec spec{opt.window, opt.step, opt.min_entities};
    cad::WindowStats window_stats;
    const auto windows =
        cad::slide_windows(std::move(events), spec,
                           price_mode ? cad::StreamKind::price_csv : cad::StreamKind::access_log,
                           &window_stats);

    RunMeta meta{opt.pipeline.seed, hex64(fnv1a(detect_config_dump(opt)))};
    fs::create_directories(opt.out_dir);
    auto alerts_out = open_output(fs::path(opt.out_dir) / "alerts.jsonl");
    alerts_out << meta.to_json().dump() << '\n';

    std::size_t emitted = 0;
    const cad::StreamSummary summary =
        cad::run_stream(windows, opt.pipeline, [&](const cad::Alert& a) {
            alerts_out << alert_to_json(a).dump() << '\n';
            ++emitted;
        });

    json s = meta.to_json();
    s["windows"] = summary.windows;
    s["windows_skipped"] = window_stats.windows_skipped;
    s["alerts"] = summary.alerts;
    s["gated_by_algorithm"] = summary.gated_by_algorithm;
    s["suppressed"] = {{"below_threshold", summary.suppressed.below_threshold},
                       {"below_strength", summary.suppressed.below_strength},
                       {"empty_set", summary.suppressed.empty_set}};
    s["runtime_ms"] = {{"mean", summary.mean_runtime_ms}, {"max", summary.max_runtime_ms}};
    s["parse"] = {{"lines", parse_stats.lines},
                  {"events", parse_stats.events},
                  {"skipped", parse_stats.skipped},
                  {"warnings", parse_stats.warnings}};
    s["errors"] = summary.errors;
    open_output(fs::path(opt.out_dir) / "summary.json") << s.dump(2) << '\n';

    std::cerr << "cadet detect: " << summary.windows << " windows, " << emitted << " alerts\n";
    return kExitOk;
}

// -------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string experiment;
    std::string rule = "n^0.8";
    std::vector<std::size_t> grid = {200, 500, 1000, 2000, 4000, 8000};
    std::size_t seeds = 20;
    double mu = 0.5;
    double mu_tilde = 0.85;
    std::vector<double> phi = {0.3, 0.5, 0.7};
    std::size_t n = 2000;
    std::vector<std::size_t> sizes = {1000, 2000, 3000, 4000, 5000};
    std::size_t windows_per_case = 40;
    std::uint64_t seed = 42;
    std::string out_dir = ".";
};

int simulate_degeneration(const SimulateOptions& opt) {
    const auto rule = cad::GrowthRule::parse(opt.rule);
    const auto rows =
        cad::degeneration_curve(rule, opt.grid, opt.seeds, opt.mu, opt.mu_tilde, opt.seed);
    RunMeta meta{opt.seed, hex64(fnv1a("degeneration rule=" + rule.str()))};
    auto out = open_output(fs::path(opt.out_dir) / "degeneration.csv");
    out << meta.csv_comment() << " rule=" << rule.str() << " seeds=" << opt.seeds
        << " mu=" << opt.mu << " mu_tilde=" << opt.mu_tilde << " n0=" << opt.grid.front() << "\n";
    out << "n,k,rho,predicted_rho\n";
    for (const auto& r : rows)
        out << r.n << ',' << r.k << ',' << r.rho << ',' << r.predicted_rho << '\n';
    return kExitOk;
}

int simulate_concentration(const SimulateOptions& opt) {
    RunMeta meta{opt.seed, hex64(fnv1a("concentration"))};
    auto out = open_output(fs::path(opt.out_dir) / "concentration.csv");
    out << meta.csv_comment() << " n=" << opt.n << " mu=" << opt.mu
        << " mu_tilde=" << opt.mu_tilde << "\n";
    out << "phi,seed,rho,predicted,band_lo,band_hi,in_band\n";
    const double band = 5.0 / std::sqrt(static_cast<double>(opt.n));
    for (double phi : opt.phi) {
        cad::PlantedSpec spec;
        spec.n = opt.n;
        spec.k = static_cast<std::size_t>(std::llround(phi * static_cast<double>(opt.n)));
        spec.mu = opt.mu;
        spec.mu_tilde = opt.mu_tilde;
        const double predicted = opt.mu + (opt.mu_tilde - opt.mu) * phi * phi;
        for (std::size_t s = 0; s < opt.seeds; ++s) {
            const double rho =
                cad::principal_score(cad::gen_planted_matrix(spec, opt.seed + 31 * s));
            out << phi << ',' << s << ',' << rho << ',' << predicted << ','
                << predicted - band << ',' << predicted + band << ','
                << (std::abs(rho - predicted) <= band ? 1 : 0) << '\n';
        }
    }
    return kExitOk;
}

int simulate_injection(const SimulateOptions& opt) {
    RunMeta meta{opt.seed, hex64(fnv1a("injection"))};
    auto out = open_output(fs::path(opt.out_dir) / "eval.csv");
    out << meta.csv_comment() << " windows_per_case=" << opt.windows_per_case << "\n";
    out << "scenario,windows,recall,est_accuracy,extra_alerts,mean_ms,max_ms\n";

    cad::PipelineConfig cfg;
    cfg.seed = opt.seed;

    const auto base_window = [&](std::uint64_t s) {
        cad::PlantedSpec spec;
        spec.n = 300;
        spec.k = 0;
        spec.mu = 0.0;
        spec.mode = cad::PlantedSpec::Mode::data_vectors;
        spec.rows = 100;
        cad::FeatureMatrix X = cad::gen_planted_stream(spec, s);
        X.window_id = s;
        return X;
    };

    std::size_t control_alerts = 0;
    for (std::size_t w = 0; w < opt.windows_per_case; ++w) {
        const auto res = cad::run_window(base_window(opt.seed + 900000 + w), cfg);
        if (!res.alerts.empty()) ++control_alerts;
    }

    for (const auto scenario : {cad::InjectScenario::big_sets,
                                cad::InjectScenario::strong_strength,
                                cad::InjectScenario::hidden}) {
        std::vector<std::string> detected, injected;
        std::vector<double> times;
        for (std::size_t w = 0; w < opt.windows_per_case; ++w) {
            const auto inj =
                cad::inject_anomalies(base_window(opt.seed + 1000 * w), scenario,
                                      opt.seed + 77 * w);
            if (!inj) continue;
            const auto res = cad::run_window(inj->window, cfg);
            times.push_back(res.runtime_ms);
            std::set<std::string> det;
            for (const auto& a : res.alerts) det.insert(a.anomalies.begin(), a.anomalies.end());
            for (const auto& id : det)
                detected.push_back(std::to_string(w) + "/" + id);
            for (const auto& id : inj->injected_ids)
                injected.push_back(std::to_string(w) + "/" + id);
        }
        const auto rep = cad::evaluate(detected, injected, {}, control_alerts, times);
        out << cad::scenario_name(scenario) << ',' << opt.windows_per_case << ','
            << (rep.recall ? *rep.recall : -1.0) << ','
            << (rep.est_accuracy ? *rep.est_accuracy : -1.0) << ',' << rep.extra_alerts << ','
            << rep.mean_runtime_ms << ',' << rep.max_runtime_ms << '\n';
    }
    return kExitOk;
}

int simulate_scaling(const SimulateOptions& opt) {
    RunMeta meta{opt.seed, hex64(fnv1a("scaling"))};
    auto out = open_output(fs::path(opt.out_dir) / "scaling.csv");
    out << meta.csv_comment() << "\n";
    out << "n,direct_ms,rps_ms,gps_fit_ms,gps_sweep_ms,direct_rho,rps_score\n";
    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t) {
        return std::chrono::duration<double, std::milli>(clock::now() - t).count();
    };

    for (std::size_t n : opt.sizes) {
        cad::PlantedSpec spec;
        spec.n = n;
        spec.k = n / 20;
        spec.mu = 0.0;
        spec.mu_tilde = 0.9;
        spec.mode = cad::PlantedSpec::Mode::data_vectors;
        spec.rows = 50;
        spec.strength_target = 0.9;
        const cad::FeatureMatrix X = cad::gen_planted_stream(spec, opt.seed + n);

        auto t = clock::now();
        const auto P = cad::build_correlation_matrix(X, cad::CorrMode::absolute);
        const auto eig = cad::top_eigenpair(P);
        const auto mem = cad::membership_scores(X, eig);
        (void)mem;
        const double direct_ms = ms_since(t);
        const double direct_rho = eig.lambda1 / static_cast<double>(n);

        cad::RpsConfig rcfg;
        rcfg.seed = opt.seed;
        t = clock::now();
        const auto det = cad::rps_detect(X, rcfg);
        const double rps_ms = ms_since(t);

        std::set<std::string> det_ids(det.anomalies.begin(), det.anomalies.end());
        std::vector<std::size_t> init;
        for (std::size_t j = 0; j < X.cols(); ++j)
            if (det_ids.contains(X.col_ids[j])) init.push_back(j);
        cad::GpsConfig gcfg;
        t = clock::now();
        const auto fit = cad::gps_fit(P, gcfg, {init});
        const double gps_fit_ms = ms_since(t);

        cad::GpsModel model = fit.model;
        t = clock::now();
        cad::update_labels(P, model, gcfg);
        const double gps_sweep_ms = ms_since(t);

        out << n << ',' << direct_ms << ',' << rps_ms << ',' << gps_fit_ms << ','
            << gps_sweep_ms << ',' << direct_rho << ',' << det.score << '\n';
        out.flush();
    }
    return kExitOk;
}

int run_simulate(const SimulateOptions& opt) {
    fs::create_directories(opt.out_dir);
    if (opt.experiment == "degeneration") return simulate_degeneration(opt);
    if (opt.experiment == "concentration") return simulate_concentration(opt);
    if (opt.experiment == "injection") return simulate_injection(opt);
    if (opt.experiment == "scaling") return simulate_scaling(opt);
    std::cerr << "cadet simulate: unknown experiment '" << opt.experiment << "'\n";
    return kExitConfig;
}

// ------------------------------------------------------------------ tune

struct TuneOptions {
    std::string corpus_path;
    std::string out_dir = ".";
    std::string emit_template;
    std::string r_grid, p_grid, alpha_grid, ell_grid; // comma lists
    bool default_grids = true;
    std::uint64_t seed = 42;
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

int run_tune(const TuneOptions& opt) {
    if (!opt.emit_template.empty()) {
        json t = {{"injected_windows", 40}, {"control_windows", 20}, {"n", 400},
                  {"rows", 100},            {"anomalies", 40},       {"outliers", 40},
                  {"block_corr", 0.95},     {"outlier_loading", 0.70}, {"seed", 1}};
        open_output(opt.emit_template) << t.dump(2) << '\n';
        return kExitOk;
    }
    std::ifstream in(opt.corpus_path);
    if (!in) {
        std::cerr << "cadet tune: cannot read corpus " << opt.corpus_path << "\n";
        return kExitIo;
    }
    cad::SweepCorpusSpec spec;
    try {
        const json manifest = json::parse(in);
        spec.injected_windows = manifest.value("injected_windows", spec.injected_windows);
        spec.control_windows = manifest.value("control_windows", spec.control_windows);
        spec.n = manifest.value("n", spec.n);
        spec.rows = manifest.value("rows", spec.rows);
        spec.anomalies = manifest.value("anomalies", spec.anomalies);
        spec.outliers = manifest.value("outliers", spec.outliers);
        spec.block_corr = manifest.value("block_corr", spec.block_corr);
        spec.outlier_loading = manifest.value("outlier_loading", spec.outlier_loading);
        spec.seed = manifest.value("seed", spec.seed);
    } catch (const json::exception& e) {
        std::cerr << "cadet tune: bad corpus manifest: " << e.what() << "\n";
        return kExitConfig;
    }

    cad::SweepGrids grids;
    if (!opt.default_grids) {
        grids.r = parse_grid(opt.r_grid);
        grids.p = parse_grid(opt.p_grid);
        grids.alpha = parse_grid(opt.alpha_grid);
        grids.ell.clear();
        for (double v : parse_grid(opt.ell_grid))
            grids.ell.push_back(static_cast<std::size_t>(v));
        if (grids.r.empty() && grids.p.empty() && grids.alpha.empty() && grids.ell.empty()) {
            std::cerr << "cadet tune: empty grid\n";
            return kExitConfig;
        }
    }

    const cad::SweepCorpus corpus = cad::gen_sweep_corpus(spec);
    cad::PipelineConfig base;
    base.seed = opt.seed;
    const auto rows = cad::parameter_sweep(corpus, grids, base);

    RunMeta meta{opt.seed, hex64(fnv1a("tune corpus=" + opt.corpus_path))};
    fs::create_directories(opt.out_dir);
    auto out = open_output(fs::path(opt.out_dir) / "sweep.csv");
    out << meta.csv_comment() << "\n";
    out << "param,value,recall,accuracy,extra_alerts\n";
    for (const auto& row : rows)
        out << row.param << ',' << row.value << ',' << row.recall << ',' << row.accuracy << ','
            << row.extra_alerts << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
    std::string alerts_path;
    std::string out_dir = ".";
};

int run_report(const ReportOptions& opt) {
    std::ifstream in(opt.alerts_path);
    if (!in) {
        std::cerr << "cadet report: cannot read " << opt.alerts_path << "\n";
        return kExitIo;
    }

    struct Row {
        std::size_t window_id;
        std::string algorithm;
        double score, strength;
        std::vector<std::string> anomalies;
    };
    std::vector<Row> rows;
    std::map<std::string, std::set<std::string>> ids_by_algo;
    std::size_t malformed = 0;
    std::string line;
    std::uint64_t seed = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            ++malformed;
            continue;
        }
        if (j.contains("meta")) {
            seed = j["meta"].value("seed", 0);
            continue;
        }
        try {
            Row row;
            row.window_id = j.at("window_id").get<std::size_t>();
            row.algorithm = j.at("algorithm").get<std::string>();
            row.score = j.at("score").get<double>();
            row.strength = j.at("strength").get<double>();
            row.anomalies = j.at("anomalies").get<std::vector<std::string>>();
            ids_by_algo[row.algorithm].insert(row.anomalies.begin(), row.anomalies.end());
            rows.push_back(std::move(row));
        } catch (const json::exception&) {
            ++malformed;
        }
    }

    const auto unique_count = [&](const Row& row) {
        std::size_t unique = 0;
        for (const auto& id : row.anomalies) {
            bool elsewhere = false;
            for (const auto& [algo, ids] : ids_by_algo)
                if (algo != row.algorithm && ids.contains(id)) elsewhere = true;
            if (!elsewhere) ++unique;
        }
        return unique;
    };

    RunMeta meta{seed, hex64(fnv1a("report " + opt.alerts_path))};
    fs::create_directories(opt.out_dir);
    auto csv = open_output(fs::path(opt.out_dir) / "timeline.csv");
    csv << meta.csv_comment() << "\n";
    csv << "window_id,algorithm,score,strength,anomalies,unique_discoveries\n";
    for (const auto& row : rows)
        csv << row.window_id << ',' << row.algorithm << ',' << row.score << ',' << row.strength
            << ',' << row.anomalies.size() << ',' << unique_count(row) << '\n';

    auto txt = open_output(fs::path(opt.out_dir) / "report.txt");
    txt << meta.csv_comment() << "\n";
    txt << "alerts: " << rows.size() << ", malformed lines skipped: " << malformed << "\n";
    std::map<std::string, std::size_t> per_algo;
    for (const auto& row : rows) ++per_algo[row.algorithm];
    for (const auto& [algo, count] : per_algo) {
        double best = 0.0;
        for (const auto& row : rows)
            if (row.algorithm == algo) best = std::max(best, row.score);
        txt << "  " << algo << ": " << count << " alerts, max score " << best << ", unique ids "
            << ids_by_algo[algo].size() << "\n";
    }
    if (malformed) std::cerr << "cadet report: skipped " << malformed << " malformed lines\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlated anomaly detection over windowed data streams"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config");
    app.require_subcommand(1);

    DetectOptions det;
    auto* detect = app.add_subcommand("detect", "run detection over an input stream");
    detect->add_option("--input", det.inputs, "input file(s)")->required();
    detect->add_option("--kind", det.kind, "access_log | price_csv")
        ->check(CLI::IsMember({"access_log", "price_csv"}));
    detect->add_option("--window", det.window, "window length (seconds or business days)");
    detect->add_option("--step", det.step, "slide step (default: length/4 for logs, 3 for prices)");
    detect->add_option("--min-entities", det.min_entities, "skip windows with fewer columns");
    detect->add_flag("--keep-query", det.keep_query, "keep URL query strings");
    detect->add_option("--threshold", det.pipeline.threshold, "alert threshold");
    detect->add_option("--strength-floor", det.pipeline.strength_floor, "minimum anomaly strength");
    detect->add_option("--membership-threshold", det.pipeline.membership_threshold,
                       "principal-component correlation cutoff");
    detect->add_option("--rps.p", det.pipeline.rps.p, "norm order");
    detect->add_option("--rps.ratio", det.pipeline.rps.ratio, "sampling ratio");
    detect->add_option("--rps.threshold", det.pipeline.rps.threshold, "rPS membership cutoff");
    detect->add_option("--gps.ell", det.pipeline.gps.ell, "number of anomaly sets");
    detect->add_option("--gps.alpha", det.pipeline.gps.alpha, "anomaly beta-mean floor");
    detect->add_option("--gps.max-iter", det.pipeline.gps.max_iter, "gPS iteration cap");
    detect->add_option("--gps.ll-tol", det.pipeline.gps.ll_tol, "gPS convergence tolerance");
    detect->add_option("--seed", det.pipeline.seed, "RNG seed");
    detect->add_option("--jobs", det.pipeline.jobs, "worker threads");
    detect->add_flag_callback("--diagnostic", [&det]() { det.pipeline.merged_alerts = false; },
                              "per-algorithm alerts instead of merged ones");
    detect->add_flag_callback("--no-direct", [&det]() { det.pipeline.enable_direct = false; },
                              "disable direct PS");
    detect->add_flag_callback("--no-rps", [&det]() { det.pipeline.enable_rps = false; },
                              "disable rPS");
    detect->add_flag_callback("--no-gps", [&det]() { det.pipeline.enable_gps = false; },
                              "disable gPS");
    detect->add_option("--out", det.out_dir, "output directory");

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "run a synthetic experiment");
    simulate->add_option("experiment", sim.experiment,
                         "degeneration | concentration | injection | scaling")
        ->required();
    simulate->add_option("--rule", sim.rule, "anomaly growth rule (n^0.8 or 0.2n)");
    simulate->add_option("--grid", sim.grid, "data sizes for the degeneration curve");
    simulate->add_option("--seeds", sim.seeds, "Monte-Carlo seeds per grid point");
    simulate->add_option("--mu", sim.mu, "background mean correlation");
    simulate->add_option("--mu-tilde", sim.mu_tilde, "anomaly mean correlation");
    simulate->add_option("--phi", sim.phi, "anomaly fractions for concentration");
    simulate->add_option("--n", sim.n, "matrix size for concentration");
    simulate->add_option("--sizes", sim.sizes, "window sizes for scaling");
    simulate->add_option("--windows", sim.windows_per_case, "windows per injection case");
    simulate->add_option("--seed", sim.seed, "RNG seed");
    simulate->add_option("--out", sim.out_dir, "output directory");

    TuneOptions tune;
    auto* tune_cmd = app.add_subcommand("tune", "parameter sweep over an injected corpus");
    tune_cmd->add_option("--corpus", tune.corpus_path, "corpus manifest (json)");
    tune_cmd->add_option("--emit-corpus-template", tune.emit_template,
                         "write a default corpus manifest to this path and exit");
    auto* rg = tune_cmd->add_option("--r-grid", tune.r_grid, "sampling ratios (comma list)");
    auto* pg = tune_cmd->add_option("--p-grid", tune.p_grid, "norm orders (comma list)");
    auto* ag = tune_cmd->add_option("--alpha-grid", tune.alpha_grid, "beta-mean floors (comma list)");
    auto* eg = tune_cmd->add_option("--ell-grid", tune.ell_grid, "anomaly set counts (comma list)");
    tune_cmd->add_option("--seed", tune.seed, "RNG seed");
    tune_cmd->add_option("--out", tune.out_dir, "output directory");

    ReportOptions rep;
    auto* report = app.add_subcommand("report", "summarize an alerts.jsonl file");
    report->add_option("--alerts", rep.alerts_path, "alerts.jsonl path")->required();
    report->add_option("--out", rep.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }
    tune.default_grids = rg->count() == 0 && pg->count() == 0 && ag->count() == 0 &&
                         eg->count() == 0;

    try {
        if (*detect) return run_detect(det);
        if (*simulate) return run_simulate(sim);
        if (*tune_cmd) {
            if (tune.corpus_path.empty() && tune.emit_template.empty()) {
                std::cerr << "cadet tune: --corpus is required\n";
                return kExitConfig;
            }
            return run_tune(tune);
        }
        if (*report) return run_report(rep);
    } catch (const IoError& e) {
        std::cerr << "cadet: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "cadet: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "cadet: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
