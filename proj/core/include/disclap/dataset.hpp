#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "disclap/fwsim.hpp"
#include "disclap/matrix.hpp"
#include "disclap/mixture.hpp"

namespace disclap {

enum class SourceTag { single, pop1_only, pop2_only, both };

std::string to_string(SourceTag tag);
SourceTag source_tag_from_string(const std::string& s);

struct UniqueHaplotype {
    std::vector<int> haplotype;
    std::uint64_t count_in_sample = 0;  // Ndb
    double true_pop_freq = 0.0;
    SourceTag source = SourceTag::single;
};

struct SampledDataset {
    IntMatrix db;                        // one row per sampled individual
    std::vector<UniqueHaplotype> unique; // sorted lexicographically by haplotype
    std::vector<std::string> locus_names;
    std::size_t n_from_pop1 = 0;         // realized first-population draw (mixtures only)

    std::size_t size() const { return db.rows(); }
};

// n draws with replacement, each haplotype weighted by its population count.
SampledDataset sample_dataset(const HaplotypeTable& pop, std::size_t n, std::mt19937_64& rng);

// Fraction of individuals whose haplotype occurs exactly once in the sample.
double singleton_proportion(const SampledDataset& ds);

// Two-population draw: n1 ~ Binomial(n, w1) individuals from pop1, the rest
// from pop2. The true frequency of each unique haplotype mixes the two
// population frequencies with the realized weights (n1/n, n2/n).
SampledDataset sample_mixture(const HaplotypeTable& pop1, const HaplotypeTable& pop2,
                              std::size_t n, double w1, std::mt19937_64& rng);

// Same, with the binomial split fixed; sample_mixture delegates here.
SampledDataset sample_mixture_with_split(const HaplotypeTable& pop1,
                                         const HaplotypeTable& pop2, std::size_t n,
                                         std::size_t n1, std::mt19937_64& rng);

struct EvaluationRow {
    std::vector<int> haplotype;
    double true_freq = 0.0;
    double predicted_freq = 0.0;
    SourceTag source = SourceTag::single;
};

// True-vs-predicted frequency per unique sampled haplotype.
std::vector<EvaluationRow> evaluation_table(const SampledDataset& ds, const MixtureModel& model);

}  // namespace disclap
