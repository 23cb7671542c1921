#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "disclap/dataset.hpp"

using namespace disclap;

namespace {

HaplotypeTable make_pop(std::vector<std::pair<std::vector<int>, std::uint64_t>> rows) {
    HaplotypeTable pop;
    const std::size_t r = rows.front().first.size();
    for (std::size_t k = 0; k < r; ++k)
        pop.locus_names.push_back("Locus" + std::to_string(k + 1));
    for (auto& [h, n] : rows) pop.rows.emplace(std::move(h), n);
    return pop;
}

}  // namespace

TEST_CASE("sample_dataset: single-haplotype population") {
    const auto pop = make_pop({{{14, 12}, 7}});
    std::mt19937_64 rng(1);
    const auto ds = sample_dataset(pop, 5, rng);
    CHECK(ds.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(ds.db.row_vec(i) == std::vector<int>{14, 12});
    CHECK(ds.unique.size() == 1);
    CHECK(ds.unique[0].count_in_sample == 5);
    CHECK(ds.unique[0].true_pop_freq == 1.0);
    CHECK(singleton_proportion(ds) == 0.0);
}

TEST_CASE("sample_dataset: draws proportional to population counts") {
    const auto pop = make_pop({{{0}, 1}, {{1}, 999}});
    std::mt19937_64 rng(5);
    const auto ds = sample_dataset(pop, 10000, rng);
    std::uint64_t rare = 0;
    for (const auto& u : ds.unique)
        if (u.haplotype == std::vector<int>{0}) rare = u.count_in_sample;
    CHECK(rare >= 1);   // 10 +/- 10 at three sigma
    CHECK(rare <= 20);
}

TEST_CASE("sample_dataset: reproducible under a fixed seed") {
    const auto pop = make_pop({{{0, 0}, 10}, {{1, 2}, 20}, {{3, 1}, 5}});
    std::mt19937_64 rng_a(9), rng_b(9);
    const auto a = sample_dataset(pop, 50, rng_a);
    const auto b = sample_dataset(pop, 50, rng_b);
    CHECK(a.db == b.db);
}

TEST_CASE("sample_dataset: rejects bad input") {
    HaplotypeTable empty;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(sample_dataset(empty, 5, rng), std::invalid_argument);
}

TEST_CASE("singleton_proportion: hand cases") {
    SampledDataset ds;
    ds.db = IntMatrix(5, 1);
    ds.unique = {{{1}, 1, 0.1, SourceTag::single},
                 {{2}, 1, 0.1, SourceTag::single},
                 {{3}, 3, 0.8, SourceTag::single}};
    CHECK(singleton_proportion(ds) == doctest::Approx(0.4));

    SampledDataset all_distinct;
    all_distinct.db = IntMatrix(5, 1);
    for (int i = 0; i < 5; ++i)
        all_distinct.unique.push_back({{i}, 1, 0.2, SourceTag::single});
    CHECK(singleton_proportion(all_distinct) == 1.0);
}

TEST_CASE("aggregation round-trip: expanding by Ndb and re-aggregating is exact") {
    const auto pop = make_pop({{{0, 0}, 10}, {{1, 2}, 20}, {{3, 1}, 5}, {{7, 7}, 1}});
    std::mt19937_64 rng(13);
    const auto ds = sample_dataset(pop, 200, rng);
    std::map<std::vector<int>, std::uint64_t> recount;
    for (std::size_t i = 0; i < ds.db.rows(); ++i) ++recount[ds.db.row_vec(i)];
    CHECK(recount.size() == ds.unique.size());
    std::uint64_t total = 0;
    for (const auto& u : ds.unique) {
        CHECK(recount.at(u.haplotype) == u.count_in_sample);
        total += u.count_in_sample;
    }
    CHECK(total == ds.size());
}

TEST_CASE("sample_mixture: realized split stays near the target") {
    const auto pop1 = make_pop({{{0}, 1}});
    const auto pop2 = make_pop({{{5}, 1}});
    std::mt19937_64 rng(21);
    const auto ds = sample_mixture(pop1, pop2, 500, 0.2, rng);
    const double realized = static_cast<double>(ds.n_from_pop1) / 500.0;
    CHECK(std::abs(realized - 0.2) <= 0.054);  // three sigma of Binomial(500, 0.2)
}

TEST_CASE("sample_mixture: disjoint populations never tag 'both'") {
    const auto pop1 = make_pop({{{0, 0}, 3}, {{1, 1}, 2}});
    const auto pop2 = make_pop({{{10, 10}, 3}, {{11, 11}, 2}});
    std::mt19937_64 rng(33);
    const auto ds = sample_mixture(pop1, pop2, 200, 0.4, rng);
    for (const auto& u : ds.unique) {
        CHECK(u.source != SourceTag::both);
        CHECK(u.source != SourceTag::single);
        if (u.haplotype[0] < 10) CHECK(u.source == SourceTag::pop1_only);
        else CHECK(u.source == SourceTag::pop2_only);
    }
}

TEST_CASE("sample_mixture: forced full split degenerates to a plain draw") {
    const auto pop = make_pop({{{0, 0}, 10}, {{1, 2}, 20}, {{3, 1}, 5}});
    std::mt19937_64 rng_a(44), rng_b(44);
    const auto plain = sample_dataset(pop, 100, rng_a);
    const auto forced = sample_mixture_with_split(pop, pop, 100, 100, rng_b);
    CHECK(forced.db == plain.db);
    CHECK(forced.unique.size() == plain.unique.size());
    for (std::size_t i = 0; i < forced.unique.size(); ++i) {
        CHECK(forced.unique[i].haplotype == plain.unique[i].haplotype);
        CHECK(forced.unique[i].count_in_sample == plain.unique[i].count_in_sample);
        CHECK(forced.unique[i].true_pop_freq ==
              doctest::Approx(plain.unique[i].true_pop_freq).epsilon(1e-15));
        CHECK(forced.unique[i].source == SourceTag::pop1_only);
    }
}

TEST_CASE("sample_mixture: mixture true frequency uses realized weights") {
    const auto pop1 = make_pop({{{0}, 1}, {{1}, 3}});
    const auto pop2 = make_pop({{{0}, 1}, {{2}, 1}});
    std::mt19937_64 rng(55);
    const auto ds = sample_mixture_with_split(pop1, pop2, 100, 40, rng);
    for (const auto& u : ds.unique) {
        if (u.haplotype == std::vector<int>{0} && u.source == SourceTag::both)
            CHECK(u.true_pop_freq == doctest::Approx(0.4 * 0.25 + 0.6 * 0.5).epsilon(1e-12));
        if (u.haplotype == std::vector<int>{1})
            CHECK(u.true_pop_freq == doctest::Approx(0.4 * 0.75).epsilon(1e-12));
        if (u.haplotype == std::vector<int>{2})
            CHECK(u.true_pop_freq == doctest::Approx(0.6 * 0.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(sample_mixture(pop1, pop2, 100, 1.5, rng), std::invalid_argument);
}

TEST_CASE("evaluation_table: one row per unique haplotype, oracle = predict") {
    const auto pop = make_pop({{{0, 0}, 10}, {{1, 2}, 20}, {{3, 1}, 5}});
    std::mt19937_64 rng(66);
    const auto ds = sample_dataset(pop, 100, rng);

    MixtureModel m;
    m.clusters = 1;
    m.loci = 2;
    m.tau = {1.0};
    m.centers = IntMatrix::from_rows({{1, 1}});
    m.omega = {0.0};
    m.lambda = {std::log(0.3), std::log(0.4)};
    m.locus_names = {"Locus1", "Locus2"};

    const auto rows = evaluation_table(ds, m);
    CHECK(rows.size() == ds.unique.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].haplotype == ds.unique[i].haplotype);
        CHECK(rows[i].true_freq == ds.unique[i].true_pop_freq);
        IntMatrix one(1, 2);
        one(0, 0) = rows[i].haplotype[0];
        one(0, 1) = rows[i].haplotype[1];
        CHECK(rows[i].predicted_freq == m.predict(one)[0]);
    }

    MixtureModel wrong = m;
    wrong.loci = 3;
    CHECK_THROWS_AS(evaluation_table(ds, wrong), std::invalid_argument);
}
