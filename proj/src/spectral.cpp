#include "cad/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cad/rng.hpp"

namespace cad {

namespace {

void matvec(const CorrelationMatrix& P, const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t n = P.n();
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = P.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<double> start_vector(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = 1.0 + 1e-3 * (rng.uniform() - 0.5);
    const double nn = norm2(v);
    for (double& x : v) x /= nn;
    return v;
}

void sign_normalize(std::vector<double>& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0)
        for (double& x : v) x = -x;
}

double true_residual(const CorrelationMatrix& P, const std::vector<double>& v, double lambda) {
    std::vector<double> w(v.size());
    matvec(P, v, w);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = w[i] - lambda * v[i];
        s += d * d;
    }
    return std::sqrt(s);
}

EigenResult power_iteration(const CorrelationMatrix& P, const EigenOptions& opts) {
    const std::size_t n = P.n();
    EigenResult res;
    res.v1 = start_vector(n, opts.seed);
    std::vector<double> w(n);
    double lambda = 0.0;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        matvec(P, res.v1, w);
        lambda = dot(res.v1, w); // Rayleigh quotient, ||v|| = 1
        double rr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = w[i] - lambda * res.v1[i];
            rr += d * d;
        }
        res.iterations = it;
        res.residual = std::sqrt(rr);
        if (res.residual <= opts.tol * std::max(lambda, 1e-300)) {
            res.converged = true;
            break;
        }
        const double wn = norm2(w);
        if (wn == 0.0) break; // zero matrix cannot occur (unit diagonal)
        for (std::size_t i = 0; i < n; ++i) res.v1[i] = w[i] / wn;
    }
    res.lambda1 = lambda;
    sign_normalize(res.v1);
    return res;
}

// Symmetric tridiagonal QL with implicit shifts; eigenvalues in d,
// eigenvectors accumulated in the columns of z (classic tql2 port).
void tridiag_eigen(std::vector<double>& d, std::vector<double>& e,
                   std::vector<std::vector<double>>& z) {
    const std::size_t n = d.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-15 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) return; // give up silently; caller checks residual
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (std::size_t k = 0; k < n; ++k) {
                        f = z[k][i + 1];
                        z[k][i + 1] = s * z[k][i] + c * f;
                        z[k][i] = c * z[k][i] - s * f;
                    }
                }
                if (r == 0.0 && m > l + 1) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

EigenResult lanczos(const CorrelationMatrix& P, const EigenOptions& opts) {
    const std::size_t n = P.n();
    const std::size_t max_dim = std::min(n, opts.max_iter);
    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta;
    V.push_back(start_vector(n, opts.seed));
    std::vector<double> w(n);

    EigenResult res;
    double theta = 0.0;
    std::vector<double> ritz; // coefficients of the top Ritz vector in V

    const auto solve_projected = [&](double last_beta) -> double {
        const std::size_t j = alpha.size();
        std::vector<double> d = alpha;
        std::vector<double> e(j, 0.0);
        for (std::size_t i = 1; i < j; ++i) e[i] = beta[i - 1];
        std::vector<std::vector<double>> z(j, std::vector<double>(j, 0.0));
        for (std::size_t i = 0; i < j; ++i) z[i][i] = 1.0;
        tridiag_eigen(d, e, z);
        std::size_t top = 0;
        for (std::size_t i = 1; i < j; ++i)
            if (d[i] > d[top]) top = i;
        theta = d[top];
        ritz.assign(j, 0.0);
        for (std::size_t i = 0; i < j; ++i) ritz[i] = z[i][top];
        return std::abs(last_beta * ritz[j - 1]); // Ritz residual estimate
    };

    bool exhausted = false;
    for (std::size_t j = 0; j < max_dim; ++j) {
        matvec(P, V[j], w);
        ++res.iterations;
        if (j > 0)
            for (std::size_t i = 0; i < n; ++i) w[i] -= beta[j - 1] * V[j - 1][i];
        alpha.push_back(dot(w, V[j]));
        for (std::size_t i = 0; i < n; ++i) w[i] -= alpha[j] * V[j][i];
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : V) {
                const double c = dot(w, u);
                for (std::size_t i = 0; i < n; ++i) w[i] -= c * u[i];
            }
        const double b = norm2(w);
        const double est = solve_projected(b);
        if (est <= opts.tol * std::max(theta, 1e-300) || b <= 1e-13 * std::max(1.0, theta)) {
            res.converged = true;
            break;
        }
        if (j + 1 == max_dim) {
            exhausted = true;
            break;
        }
        beta.push_back(b);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
        V.push_back(std::move(next));
    }
    (void)exhausted;

    res.v1.assign(n, 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i)
        for (std::size_t r = 0; r < n; ++r) res.v1[r] += ritz[i] * V[i][r];
    const double vn = norm2(res.v1);
    if (vn > 0.0)
        for (double& x : res.v1) x /= vn;
    res.lambda1 = theta;
    res.residual = true_residual(P, res.v1, theta);
    res.converged = res.residual <= opts.tol * std::max(theta, 1e-300);
    sign_normalize(res.v1);
    return res;
}

} // namespace

EigenResult top_eigenpair(const CorrelationMatrix& P, const EigenOptions& opts) {
    const std::size_t n = P.n();
    if (n == 0) throw std::invalid_argument("top_eigenpair: empty matrix");
    if (n == 1) {
        EigenResult res;
        res.lambda1 = P(0, 0);
        res.v1 = {1.0};
        res.converged = true;
        return res;
    }
    return n <= 64 ? power_iteration(P, opts) : lanczos(P, opts);
}

double principal_score(const CorrelationMatrix& P, const EigenOptions& opts) {
    return top_eigenpair(P, opts).lambda1 / static_cast<double>(P.n());
}

MembershipResult membership_scores(const FeatureMatrix& X, const EigenResult& eig) {
    const std::size_t m = X.rows();
    const std::size_t n = X.cols();
    std::vector<double> t(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = X.col(j);
        const double w = eig.v1[j];
        for (std::size_t r = 0; r < m; ++r) t[r] += w * col[r];
    }
    double mean = 0.0;
    for (double v : t) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean);

    MembershipResult out;
    out.scores.assign(n, 0.0);
    if (var <= 0.0) {
        out.degenerate = true;
        return out;
    }
    for (std::size_t j = 0; j < n; ++j) out.scores[j] = std::abs(pearson(X.col(j), t));
    return out;
}

} // namespace cad
