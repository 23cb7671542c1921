#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "disclap/distribution.hpp"
#include "disclap/mixture.hpp"

using namespace disclap;

namespace {

MixtureModel make_model(std::vector<double> tau, std::vector<std::vector<int>> centers,
                        std::vector<double> omega, std::vector<double> lambda) {
    MixtureModel m;
    m.clusters = tau.size();
    m.loci = lambda.size();
    m.tau = std::move(tau);
    m.centers = IntMatrix::from_rows(centers);
    m.omega = std::move(omega);
    m.lambda = std::move(lambda);
    for (std::size_t k = 0; k < m.loci; ++k)
        m.locus_names.push_back("Locus" + std::to_string(k + 1));
    return m;
}

IntMatrix sample_cluster_data(std::size_t n, const std::vector<double>& p,
                              const std::vector<int>& y, std::mt19937_64& rng) {
    IntMatrix db(n, p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto xs = sample({p[k], y[k]}, n, rng);
        for (std::size_t i = 0; i < n; ++i) db(i, k) = xs[i];
    }
    return db;
}

IntMatrix random_db(std::mt19937_64& rng, std::size_t max_n = 60, std::size_t max_r = 4) {
    const std::size_t n = 5 + rng() % max_n;
    const std::size_t r = 1 + rng() % max_r;
    std::vector<double> p(r);
    std::vector<int> y(r);
    for (std::size_t k = 0; k < r; ++k) {
        p[k] = 0.05 + 0.55 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        y[k] = static_cast<int>(rng() % 30);
    }
    return sample_cluster_data(n, p, y, rng);
}

}  // namespace

TEST_CASE("haplotype_log_density: single cluster at its center") {
    const double p = 0.3;
    const auto m = make_model({1.0}, {{13, 14, 15}}, {0.0},
                              {std::log(p), std::log(p), std::log(p)});
    const int x[] = {13, 14, 15};
    CHECK(m.haplotype_log_density(x) ==
          doctest::Approx(3 * std::log((1 - p) / (1 + p))).epsilon(1e-13));
}

TEST_CASE("haplotype_log_density: two identical components collapse") {
    const auto one = make_model({1.0}, {{5, 7}}, {0.0}, {std::log(0.2), std::log(0.35)});
    const auto two = make_model({0.5, 0.5}, {{5, 7}, {5, 7}}, {0.0, 0.0},
                                {std::log(0.2), std::log(0.35)});
    const int x[] = {6, 9};
    CHECK(two.haplotype_log_density(x) ==
          doctest::Approx(one.haplotype_log_density(x)).epsilon(1e-13));
}

TEST_CASE("haplotype_log_density: hand product of PMF factors") {
    const auto m = make_model({1.0}, {{10, 20}}, {0.0}, {std::log(0.2), std::log(0.4)});
    const int x[] = {11, 20};
    const double expected = (0.8 / 1.2) * 0.2 * (0.6 / 1.4);
    CHECK(m.haplotype_log_density(x) == doctest::Approx(std::log(expected)).epsilon(1e-13));
    CHECK_THROWS_AS(m.haplotype_log_density(std::vector<int>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("predict: center of a 7-locus single cluster") {
    std::vector<double> lambda(7, std::log(0.3));
    const auto m = make_model({1.0}, {{1, 2, 3, 4, 5, 6, 7}}, {0.0}, lambda);
    IntMatrix xs(1, 7);
    for (int k = 0; k < 7; ++k) xs(0, k) = k + 1;
    const auto pred = m.predict(xs);
    CHECK(pred[0] == doctest::Approx(std::pow(0.7 / 1.3, 7)).epsilon(1e-12));
}

TEST_CASE("predict: sums to one over a wide box") {
    const auto m = make_model({1.0}, {{0, 0}}, {0.0}, {std::log(0.2), std::log(0.4)});
    double total = 0.0;
    for (int a = -30; a <= 30; ++a)
        for (int b = -30; b <= 30; ++b) {
            const int x[] = {a, b};
            total += std::exp(m.haplotype_log_density(x));
        }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("init_centers: c=1 gives the L1 medoid") {
    const auto db = IntMatrix::from_rows({{0, 0}, {1, 0}, {10, 10}});
    const auto centers = init_centers(db, 1);
    CHECK(centers.row_vec(0) == std::vector<int>{1, 0});
}

TEST_CASE("init_centers: two well-separated blobs") {
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({0, 0});
    for (int i = 0; i < 10; ++i) rows.push_back({9, 9});
    const auto centers = init_centers(IntMatrix::from_rows(rows), 2);
    std::vector<std::vector<int>> got = {centers.row_vec(0), centers.row_vec(1)};
    std::sort(got.begin(), got.end());
    CHECK(got[0] == std::vector<int>{0, 0});
    CHECK(got[1] == std::vector<int>{9, 9});
}

TEST_CASE("init_centers: deterministic and validates distinct rows") {
    std::mt19937_64 rng(3);
    const auto db = random_db(rng);
    CHECK(init_centers(db, 2) == init_centers(db, 2));
    const auto degenerate = IntMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}});
    CHECK_THROWS_AS(init_centers(degenerate, 2), FitError);
}

TEST_CASE("fit: c=1 matches the closed-form per-locus MLE") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const auto db = random_db(rng);
        const auto result = fit(db, 1);
        for (std::size_t k = 0; k < db.cols(); ++k) {
            std::vector<int> col(db.rows());
            for (std::size_t i = 0; i < db.rows(); ++i) col[i] = db(i, k);
            const auto est = mle(col);
            CHECK(result.model.centers(0, k) == est.y_hat);
            const double expected = std::max(est.p_hat, kMinDispersion);
            CHECK(result.model.dispersion(0, k) == doctest::Approx(expected).epsilon(1e-6));
        }
    }
}

TEST_CASE("fit: identical rows clamp to the dispersion floor") {
    std::vector<std::vector<int>> rows(20, std::vector<int>{3, 9, 1});
    const auto result = fit(IntMatrix::from_rows(rows), 1);
    CHECK(result.model.centers.row_vec(0) == std::vector<int>{3, 9, 1});
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(result.model.dispersion(0, k) == doctest::Approx(kMinDispersion));
    CHECK(result.report.iterations <= 2);
    CHECK(result.report.converged);
}

TEST_CASE("fit: three-locus synthetic recovery") {
    std::mt19937_64 rng(2024);
    const auto db = sample_cluster_data(100, {0.3, 0.4, 0.5}, {13, 14, 15}, rng);
    const auto result = fit(db, 1);
    CHECK(result.model.centers.row_vec(0) == std::vector<int>{13, 14, 15});
    const double truth[] = {0.3, 0.4, 0.5};
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(std::abs(result.model.dispersion(0, k) - truth[k]) < 0.1);
}

TEST_CASE("fit: validates inputs") {
    CHECK_THROWS_AS(fit(IntMatrix{}, 1), FitError);
    CHECK_THROWS_AS(fit(IntMatrix::from_rows({{1, 2}}), 2), FitError);
    CHECK_THROWS_AS(fit(IntMatrix::from_rows({{1, 2}, {3, 4}}), 0), FitError);
}

TEST_CASE("fit: EM trace is monotone and responsibilities are normalized") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto db = random_db(rng);
        const std::size_t c = 1 + rng() % 3;
        FitResult result;
        try {
            result = fit(db, c);
        } catch (const FitError&) {
            continue;  // fewer distinct rows than clusters
        }
        const auto& trace = result.report.loglik_trace;
        for (std::size_t t = 1; t < trace.size(); ++t)
            CHECK(trace[t] >= trace[t - 1] - 1e-8);
        for (std::size_t i = 0; i < result.responsibilities.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                const double v = result.responsibilities(i, j);
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                s += v;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("fit: tau sums to one and dispersions stay in (0, 1)") {
    std::mt19937_64 rng(77);
    const auto db = random_db(rng);
    const auto result = fit(db, 2);
    double s = 0.0;
    for (double t : result.model.tau) {
        CHECK(t > 0.0);
        s += t;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.model.omega[0] == 0.0);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < db.cols(); ++k) {
            CHECK(result.model.dispersion(j, k) > 0.0);
            CHECK(result.model.dispersion(j, k) < 1.0);
        }
}

TEST_CASE("fit: column-shift equivariance") {
    std::mt19937_64 rng(41);
    const auto db = random_db(rng);
    IntMatrix shifted = db;
    std::vector<int> shift(db.cols());
    for (std::size_t k = 0; k < db.cols(); ++k) {
        shift[k] = static_cast<int>(rng() % 21) - 10;
        for (std::size_t i = 0; i < db.rows(); ++i) shifted(i, k) += shift[k];
    }
    const auto a = fit(db, 2);
    const auto b = fit(shifted, 2);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < db.cols(); ++k)
            CHECK(b.model.centers(j, k) == a.model.centers(j, k) + shift[k]);
    CHECK(b.model.tau == a.model.tau);
    CHECK(b.model.omega == a.model.omega);
    CHECK(b.model.lambda == a.model.lambda);
    CHECK(b.report.final_loglik() == a.report.final_loglik());
    CHECK(b.report.bic == a.report.bic);
}

TEST_CASE("fit: row permutation leaves the model unchanged up to relabeling") {
    std::mt19937_64 rng(53);
    // two well-separated clusters so the optimum is unambiguous
    auto db1 = sample_cluster_data(40, {0.2, 0.3}, {0, 0}, rng);
    auto db2 = sample_cluster_data(60, {0.3, 0.2}, {25, 25}, rng);
    std::vector<std::vector<int>> rows;
    for (std::size_t i = 0; i < db1.rows(); ++i) rows.push_back(db1.row_vec(i));
    for (std::size_t i = 0; i < db2.rows(); ++i) rows.push_back(db2.row_vec(i));
    const auto base = fit(IntMatrix::from_rows(rows), 2);
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto permuted = fit(IntMatrix::from_rows(rows), 2);

    auto canonical = [](const FitResult& r) {
        std::vector<std::pair<std::vector<int>, double>> cs;
        for (std::size_t j = 0; j < r.model.clusters; ++j)
            cs.emplace_back(r.model.centers.row_vec(j), r.model.tau[j]);
        std::sort(cs.begin(), cs.end());
        return cs;
    };
    const auto a = canonical(base), b = canonical(permuted);
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK(a[j].first == b[j].first);
        CHECK(a[j].second == doctest::Approx(b[j].second).epsilon(1e-9));
    }
    CHECK(base.report.final_loglik() == doctest::Approx(permuted.report.final_loglik()).epsilon(1e-9));
}

TEST_CASE("fit: BIC arithmetic") {
    std::mt19937_64 rng(61);
    const auto db = random_db(rng);
    const auto result = fit(db, 2);
    const std::size_t c = 2, r = db.cols();
    CHECK(result.report.n_params == (c - 1) + c * r + (c - 1) + r);
    const double expected = -2.0 * result.report.final_loglik() +
                            static_cast<double>(result.report.n_params) *
                                std::log(static_cast<double>(db.rows()));
    CHECK(result.report.bic == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("fit_sweep: single-value range") {
    std::mt19937_64 rng(71);
    const auto db = random_db(rng);
    const auto sweep = fit_sweep(db, 1, 1);
    CHECK(sweep.fits.size() == 1);
    CHECK(sweep.best_index == 0);
}

TEST_CASE("fit_sweep: picks the lowest BIC on a two-cluster dataset") {
    std::mt19937_64 rng(83);
    auto db1 = sample_cluster_data(120, {0.2, 0.25, 0.3}, {0, 0, 0}, rng);
    auto db2 = sample_cluster_data(120, {0.25, 0.3, 0.2}, {20, 20, 20}, rng);
    std::vector<std::vector<int>> rows;
    for (std::size_t i = 0; i < db1.rows(); ++i) rows.push_back(db1.row_vec(i));
    for (std::size_t i = 0; i < db2.rows(); ++i) rows.push_back(db2.row_vec(i));
    const auto sweep = fit_sweep(IntMatrix::from_rows(rows), 1, 3);
    CHECK(sweep.fits.size() == 3);
    CHECK(sweep.best_index == 1);  // c = 2
}

TEST_CASE("fit: random restarts are deterministic given the seed") {
    std::mt19937_64 rng(97);
    const auto db = random_db(rng);
    FitOptions opts;
    opts.restarts = 3;
    opts.seed = 12345;
    const auto a = fit(db, 2, opts);
    const auto b = fit(db, 2, opts);
    CHECK(a.model.centers == b.model.centers);
    CHECK(a.report.final_loglik() == b.report.final_loglik());
}
