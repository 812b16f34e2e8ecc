#include <doctest.h>

#include <cmath>
#include <vector>

#include "cad/correlation.hpp"
#include "cad/rng.hpp"
#include "support/oracles.hpp"

using namespace cad;

namespace {

FeatureMatrix random_matrix(std::size_t m, std::size_t n, Rng& rng) {
    std::vector<std::string> rows(m), cols(n);
    for (std::size_t r = 0; r < m; ++r) rows[r] = "r" + std::to_string(r);
    for (std::size_t c = 0; c < n; ++c) cols[c] = "c" + std::to_string(c);
    FeatureMatrix X(std::move(rows), std::move(cols));
    for (double& v : X.data) v = rng.normal();
    return X;
}

void check_matrix_invariants(const CorrelationMatrix& P) {
    for (std::size_t i = 0; i < P.n(); ++i) {
        CHECK(P(i, i) == 1.0);
        for (std::size_t j = 0; j < P.n(); ++j) {
            CHECK(P(i, j) == P(j, i));
            CHECK(P(i, j) >= 0.0);
            CHECK(P(i, j) <= 1.0);
        }
    }
}

} // namespace

TEST_CASE("pearson on exact linear relations") {
    const std::vector<double> x{1, 2, 3};
    CHECK(pearson(x, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson zero-variance convention") {
    CHECK(pearson(std::vector<double>{5, 5, 5}, std::vector<double>{1, 2, 3}) == 0.0);
}

TEST_CASE("pearson contract violations") {
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}),
                    std::invalid_argument);
}

TEST_CASE("pearson is insensitive to magnitude") {
    const std::vector<double> x{1, 0, 2, 2, 0, 1}, y{0, 0, 1, 2, 1, 1};
    const std::vector<double> x10{10, 0, 20, 20, 0, 10}, y10{0, 0, 10, 20, 10, 10};
    const double r = pearson(x, y);
    CHECK(r == doctest::Approx(pearson(x10, y10)).epsilon(1e-12));
    // the common value against the textbook long-double route
    CHECK(r == doctest::Approx(test::pearson_reference(x, y)).epsilon(1e-12));
}

TEST_CASE("pearson agrees with the reference formula on random vectors") {
    Rng rng(99);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(20), y(20);
        for (auto& v : x) v = rng.uniform(-5, 5);
        for (auto& v : y) v = rng.uniform(-5, 5);
        CHECK(pearson(x, y) == doctest::Approx(test::pearson_reference(x, y)).epsilon(1e-10));
    }
}

TEST_CASE("build_correlation_matrix sign modes") {
    // two anti-correlated columns and one noisy one
    FeatureMatrix X({"r0", "r1", "r2", "r3"}, {"a", "b", "c"});
    const std::vector<double> a{1, 2, 3, 4}, b{4, 3, 2, 1}, c{1, -1, 2, 0.5};
    for (std::size_t r = 0; r < 4; ++r) {
        X.at(r, 0) = a[r];
        X.at(r, 1) = b[r];
        X.at(r, 2) = c[r];
    }
    const auto abs_mode = build_correlation_matrix(X, CorrMode::absolute);
    const auto pos_mode = build_correlation_matrix(X, CorrMode::positive_only);
    const auto neg_mode = build_correlation_matrix(X, CorrMode::negative_only);
    check_matrix_invariants(abs_mode);
    check_matrix_invariants(pos_mode);
    check_matrix_invariants(neg_mode);

    CHECK(abs_mode(0, 1) == doctest::Approx(1.0));
    CHECK(pos_mode(0, 1) == 0.0); // correlation is -1
    CHECK(neg_mode(0, 1) == doctest::Approx(1.0));

    const double r02 = pearson(X.col(0), X.col(2));
    CHECK(abs_mode(0, 2) == doctest::Approx(std::abs(r02)));
    CHECK(pos_mode(0, 2) == doctest::Approx(std::max(r02, 0.0)));
    CHECK(neg_mode(0, 2) == doctest::Approx(std::max(-r02, 0.0)));
}

TEST_CASE("identical columns give the all-ones matrix") {
    FeatureMatrix X({"r0", "r1", "r2"}, {"a", "b"});
    for (std::size_t r = 0; r < 3; ++r) X.at(r, 0) = X.at(r, 1) = static_cast<double>(r) + 1.0;
    const auto P = build_correlation_matrix(X, CorrMode::absolute);
    CHECK(P(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("absolute mode is invariant under negating a column") {
    Rng rng(7);
    FeatureMatrix X = random_matrix(12, 6, rng);
    const auto P = build_correlation_matrix(X, CorrMode::absolute);
    FeatureMatrix Y = X;
    for (std::size_t r = 0; r < Y.rows(); ++r) Y.at(r, 3) = -Y.at(r, 3);
    const auto Q = build_correlation_matrix(Y, CorrMode::absolute);
    for (std::size_t i = 0; i < P.n(); ++i)
        for (std::size_t j = 0; j < P.n(); ++j)
            CHECK(P(i, j) == doctest::Approx(Q(i, j)).epsilon(1e-12));
}

TEST_CASE("zero-variance column correlates with nothing, diagonal stays 1") {
    FeatureMatrix X({"r0", "r1", "r2"}, {"a", "b"});
    for (std::size_t r = 0; r < 3; ++r) {
        X.at(r, 0) = 5.0;
        X.at(r, 1) = static_cast<double>(r);
    }
    const auto P = build_correlation_matrix(X, CorrMode::absolute);
    CHECK(P(0, 1) == 0.0);
    CHECK(P(0, 0) == 1.0);
}

TEST_CASE("incremental identity slide leaves the matrix unchanged") {
    Rng rng(21);
    const FeatureMatrix X = random_matrix(10, 5, rng);
    PairStats stats(X);
    const auto before = stats.correlations(CorrMode::absolute);
    const auto outcome = update_correlation_incremental(stats, X, CorrMode::absolute);
    CHECK(outcome.incremental);
    CHECK(outcome.fresh_columns == 0);
    for (std::size_t i = 0; i < before.n(); ++i)
        for (std::size_t j = 0; j < before.n(); ++j)
            CHECK(outcome.corr(i, j) == before(i, j));
}

TEST_CASE("adding one column computes only that column fresh") {
    Rng rng(22);
    const FeatureMatrix X = random_matrix(8, 4, rng);
    PairStats stats(X);
    const auto before = stats.correlations(CorrMode::absolute);

    FeatureMatrix Y(X.row_ids, {"c0", "c1", "c2", "c3", "new"});
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t r = 0; r < 8; ++r) Y.at(r, c) = X.at(r, c);
    for (std::size_t r = 0; r < 8; ++r) Y.at(r, 4) = rng.normal();

    const auto outcome = update_correlation_incremental(stats, Y, CorrMode::absolute);
    CHECK(outcome.incremental);
    CHECK(outcome.fresh_columns == 1);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(outcome.corr(i, j) == before(i, j));
    // the new row/col matches a batch recomputation
    const auto batch = build_correlation_matrix(Y, CorrMode::absolute);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(outcome.corr(i, 4) == doctest::Approx(batch(i, 4)).epsilon(1e-12));
}

TEST_CASE("row-space change falls back to a full recompute") {
    Rng rng(23);
    const FeatureMatrix X = random_matrix(6, 4, rng);
    PairStats stats(X);
    FeatureMatrix Y = random_matrix(6, 4, rng); // all-new row values, same ids
    const auto outcome = update_correlation_incremental(stats, Y, CorrMode::absolute);
    CHECK_FALSE(outcome.incremental);
    const auto batch = build_correlation_matrix(Y, CorrMode::absolute);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(outcome.corr(i, j) == doctest::Approx(batch(i, j)).epsilon(1e-12));
}

TEST_CASE("randomized slides: incremental equals batch within 1e-10") {
    Rng rng(4242);
    const std::size_t n_cols = 50;
    const std::size_t m = 24;
    const std::size_t slides = 100;

    // rolling window over a long synthetic series: 6 rows depart / arrive
    const std::size_t step = 6;
    std::vector<double> series(n_cols * (m + slides * step));
    for (double& v : series) v = rng.uniform(-3, 3);

    const auto window_at = [&](std::size_t offset) {
        std::vector<std::string> rows(m), cols(n_cols);
        for (std::size_t r = 0; r < m; ++r) rows[r] = "t" + std::to_string(offset + r);
        for (std::size_t c = 0; c < n_cols; ++c) cols[c] = "c" + std::to_string(c);
        FeatureMatrix X(std::move(rows), std::move(cols));
        for (std::size_t c = 0; c < n_cols; ++c)
            for (std::size_t r = 0; r < m; ++r)
                X.at(r, c) = series[c * (m + slides * step) + offset + r];
        return X;
    };

    PairStats stats(window_at(0));
    for (std::size_t s = 1; s <= slides; ++s) {
        const FeatureMatrix X = window_at(s * step);
        const auto outcome = update_correlation_incremental(stats, X, CorrMode::absolute);
        CHECK(outcome.incremental);
        const auto batch = build_correlation_matrix(X, CorrMode::absolute);
        for (std::size_t i = 0; i < n_cols; ++i)
            for (std::size_t j = i + 1; j < n_cols; ++j) {
                const double got = outcome.corr(i, j);
                const double want = batch(i, j);
                CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
            }
        check_matrix_invariants(outcome.corr);
    }
}
