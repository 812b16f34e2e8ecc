#include "cad/gps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cad/specfun.hpp"
#include "cad/spectral.hpp"

namespace cad {

namespace {

constexpr double kShapeMax = 1e4;
constexpr double kShapeMin = 1e-8;
constexpr double kInitConcentration = 10.0; // a + b at initialization

double clamp_corr(double w, double eps) { return std::min(1.0 - eps, std::max(eps, w)); }

// ln of the beta normalization constant 1/B(a,b).
double ln_beta_norm(double a, double b) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

// Constraint projection. Anomaly groups: mean >= alpha via rescaling b
// with a held fixed; background: mean <= 1/2 via rescaling a with b held
// fixed. Then a + b >= 1 by proportional scale-up (mean preserved).
void project(double& a, double& b, bool background, double alpha, bool& capped) {
    a = std::clamp(a, kShapeMin, kShapeMax);
    b = std::clamp(b, kShapeMin, kShapeMax);
    if (a >= kShapeMax || b >= kShapeMax) capped = true;
    if (background) {
        if (a / (a + b) > 0.5) a = b;
    } else {
        if (a / (a + b) < alpha) b = a * (1.0 - alpha) / alpha;
    }
    const double s = a + b;
    if (s < 1.0) {
        a /= s;
        b /= s;
    }
}

void init_params_from_mean(double mean, bool background, double alpha, double& a, double& b) {
    mean = std::clamp(mean, 0.01, 0.99);
    a = kInitConcentration * mean;
    b = kInitConcentration * (1.0 - mean);
    bool capped = false;
    project(a, b, background, alpha, capped);
}

} // namespace

GroupStats group_stats(const CorrelationMatrix& P, std::span<const std::uint32_t> z,
                       std::size_t ell, double eps) {
    GroupStats st;
    st.m.assign(ell + 1, 0);
    st.sum_ln.assign(ell + 1, 0.0);
    st.sum_ln1m.assign(ell + 1, 0.0);
    st.sum_w.assign(ell + 1, 0.0);
    st.members.assign(ell + 1, 0);
    const std::size_t n = P.n();
    for (std::size_t i = 0; i < n; ++i) ++st.members[z[i]];
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = P.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t g = (z[i] == z[j] && z[i] < ell) ? z[i] : ell;
            const double w = clamp_corr(row[j], eps);
            ++st.m[g];
            st.sum_ln[g] += std::log(w);
            st.sum_ln1m[g] += std::log1p(-w);
            st.sum_w[g] += w;
        }
    }
    return st;
}

double log_likelihood(const GroupStats& stats, std::span<const double> a,
                      std::span<const double> b) {
    double ll = 0.0;
    for (std::size_t g = 0; g < a.size(); ++g) {
        if (stats.m[g] == 0) continue;
        ll += (a[g] - 1.0) * stats.sum_ln[g] + (b[g] - 1.0) * stats.sum_ln1m[g] +
              static_cast<double>(stats.m[g]) * ln_beta_norm(a[g], b[g]);
    }
    return ll;
}

double log_likelihood(const CorrelationMatrix& P, const GpsModel& model, const GpsConfig& cfg) {
    const GroupStats st = group_stats(P, model.z, cfg.ell, cfg.eps);
    return log_likelihood(st, model.a, model.b);
}

std::pair<double, double> beta_mle_fixed_point(double mean_ln, double mean_ln1m, double a0,
                                               double b0, double tol, std::size_t max_steps) {
    double a = a0, b = b0;
    for (std::size_t s = 0; s < max_steps; ++s) {
        const double psi_ab = digamma(a + b);
        const double na = inv_digamma(psi_ab + mean_ln);
        const double nb = inv_digamma(psi_ab + mean_ln1m);
        const double delta = std::abs(na - a) + std::abs(nb - b);
        a = std::min(na, kShapeMax);
        b = std::min(nb, kShapeMax);
        if (delta <= tol * (1.0 + a + b)) break;
    }
    return {a, b};
}

void update_beta_params(GpsModel& model, const GroupStats& stats, const GpsConfig& cfg) {
    const std::size_t groups = cfg.ell + 1;
    for (std::size_t g = 0; g < groups; ++g) {
        if (stats.m[g] == 0) continue; // frozen while empty
        const double mean_ln = stats.sum_ln[g] / static_cast<double>(stats.m[g]);
        const double mean_ln1m = stats.sum_ln1m[g] / static_cast<double>(stats.m[g]);
        const bool background = g == cfg.ell;
        double a = model.a[g], b = model.b[g];
        for (std::size_t s = 0; s < 50; ++s) {
            const double psi_ab = digamma(a + b);
            double na = inv_digamma(psi_ab + mean_ln);
            double nb = inv_digamma(psi_ab + mean_ln1m);
            project(na, nb, background, cfg.alpha, model.params_capped);
            const double delta = std::abs(na - a) + std::abs(nb - b);
            a = na;
            b = nb;
            if (delta <= 1e-8 * (1.0 + a + b)) break;
        }
        model.a[g] = a;
        model.b[g] = b;
    }
}

std::size_t update_labels(const CorrelationMatrix& P, GpsModel& model, const GpsConfig& cfg) {
    const std::size_t n = P.n();
    const std::size_t ell = cfg.ell;
    const std::size_t bg = ell;

    std::vector<double> norm_const(ell + 1);
    for (std::size_t g = 0; g <= ell; ++g) norm_const[g] = ln_beta_norm(model.a[g], model.b[g]);

    std::vector<double> sum_ln(ell), sum_ln1m(ell);
    std::vector<std::size_t> cnt(ell);
    std::size_t changed = 0;

    for (std::size_t i = 0; i < n; ++i) {
        std::fill(sum_ln.begin(), sum_ln.end(), 0.0);
        std::fill(sum_ln1m.begin(), sum_ln1m.end(), 0.0);
        std::fill(cnt.begin(), cnt.end(), 0);
        const auto row = P.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const std::size_t g = model.z[j];
            if (g >= ell) continue;
            const double w = clamp_corr(row[j], cfg.eps);
            sum_ln[g] += std::log(w);
            sum_ln1m[g] += std::log1p(-w);
            ++cnt[g];
        }
        // Delta of the full log-likelihood for candidate label c against
        // the background baseline: only pairs incident to i change owner,
        // and only the pairs i shares with members of c move.
        std::size_t best = bg;
        double best_delta = 0.0;
        for (std::size_t g = 0; g < ell; ++g) {
            if (cnt[g] == 0) continue; // joining an empty/far group moves no pairs
            const double delta = (model.a[g] - model.a[bg]) * sum_ln[g] +
                                 (model.b[g] - model.b[bg]) * sum_ln1m[g] +
                                 static_cast<double>(cnt[g]) * (norm_const[g] - norm_const[bg]);
            if (delta > best_delta) {
                best_delta = delta;
                best = g;
            }
        }
        if (best != model.z[i]) {
            model.z[i] = static_cast<std::uint32_t>(best);
            ++changed;
        }
    }
    return changed;
}

GpsFit gps_fit(const CorrelationMatrix& P, const GpsConfig& cfg,
               const std::vector<std::vector<std::size_t>>& init_sets,
               std::span<const double> col_norm_mass) {
    const std::size_t n = P.n();
    const std::size_t ell = cfg.ell;
    if (ell < 1) throw std::invalid_argument("gps_fit: ell must be >= 1");
    if (!(cfg.alpha > 0.5 && cfg.alpha < 1.0))
        throw std::invalid_argument("gps_fit: alpha must be in (0.5, 1)");

    GpsFit fit;
    GpsModel& model = fit.model;
    model.z.assign(n, static_cast<std::uint32_t>(ell));
    model.a.assign(ell + 1, 0.0);
    model.b.assign(ell + 1, 0.0);

    const std::size_t seeded = std::min(init_sets.size(), ell);
    for (std::size_t g = 0; g < seeded; ++g)
        for (std::size_t j : init_sets[g])
            if (j < n) model.z[j] = static_cast<std::uint32_t>(g);

    if (seeded < ell) {
        // Remaining groups are seeded from the columns with the highest row
        // sums plus their strongly-correlated neighbors, so gPS can reach
        // structure the given sets missed.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> row_sums(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (double v : P.row(i)) row_sums[i] += v;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return row_sums[a] != row_sums[b] ? row_sums[a] > row_sums[b] : a < b;
        });
        std::size_t next_seed = 0;
        for (std::size_t g = seeded; g < ell && next_seed < n; ++g) {
            while (next_seed < n && model.z[order[next_seed]] != ell) ++next_seed;
            if (next_seed >= n) break;
            const std::size_t seed = order[next_seed];
            model.z[seed] = static_cast<std::uint32_t>(g);
            for (std::size_t j = 0; j < n; ++j)
                if (model.z[j] == ell && P(seed, j) > 0.7)
                    model.z[j] = static_cast<std::uint32_t>(g);
        }
    }

    // Parameters start mean-matched to each group's average correlation.
    GroupStats stats = group_stats(P, model.z, ell, cfg.eps);
    for (std::size_t g = 0; g <= ell; ++g) {
        const bool background = g == ell;
        const double mean = stats.m[g] > 0
            ? stats.sum_w[g] / static_cast<double>(stats.m[g])
            : (background ? 0.3 : cfg.alpha);
        init_params_from_mean(mean, background, cfg.alpha, model.a[g], model.b[g]);
    }
    fit.initial_loglik = log_likelihood(stats, model.a, model.b);
    double prev_ll = fit.initial_loglik;

    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        fit.iterations = it;
        update_beta_params(model, stats, cfg);
        const std::size_t changed = update_labels(P, model, cfg);
        stats = group_stats(P, model.z, ell, cfg.eps);
        const double ll = log_likelihood(stats, model.a, model.b);
        const bool ll_stable = std::abs(ll - prev_ll) <= cfg.ll_tol * std::max(1.0, std::abs(prev_ll));
        prev_ll = ll;
        if (changed == 0 && ll_stable) {
            fit.converged = true;
            break;
        }
    }
    model.loglik = prev_ll;
    fit.final_loglik = prev_ll;

    double total_mass = 0.0;
    for (double v : col_norm_mass) total_mass += v;
    for (std::size_t g = 0; g < ell; ++g) {
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < n; ++j)
            if (model.z[j] == g) members.push_back(j);
        if (members.size() < 2) continue; // a set of one carries no correlation
        Detection det;
        det.algorithm = Algo::gps;
        det.score = principal_score(P.submatrix(members));
        det.anomalies.reserve(members.size());
        for (std::size_t j : members)
            det.anomalies.push_back(j < P.col_ids().size() ? P.col_ids()[j]
                                                           : std::to_string(j));
        if (!col_norm_mass.empty() && total_mass > 0.0) {
            double mass = 0.0;
            for (std::size_t j : members) mass += col_norm_mass[j];
            det.strength = mass / total_mass;
        } else {
            det.strength = static_cast<double>(members.size()) / static_cast<double>(n);
        }
        fit.sets.push_back(std::move(members));
        fit.detections.push_back(std::move(det));
    }
    return fit;
}

} // namespace cad
