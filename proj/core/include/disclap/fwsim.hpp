#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace disclap {

struct SimParams {
    std::size_t generations = 0;
    std::size_t initial_size = 1;
    std::size_t loci = 1;
    std::vector<double> mu;            // per-locus per-meiosis mutation probability
    double growth_rate = 1.0;          // expected offspring per individual
    std::uint64_t seed = 0;
    std::uint64_t population_cap = 100'000'000;
};

// Final-generation population, aggregated by haplotype. Keys are sorted
// lexicographically, which is also the CSV row order.
struct HaplotypeTable {
    std::vector<std::string> locus_names;
    std::map<std::vector<int>, std::uint64_t> rows;

    std::uint64_t total() const;
    double pop_freq(std::uint64_t count) const { return static_cast<double>(count) / static_cast<double>(total()); }
    std::size_t loci() const { return locus_names.size(); }
};

struct ExtinctionError : std::runtime_error {
    explicit ExtinctionError(std::size_t generation);
    std::size_t generation;
};

struct PopulationOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Forward Fisher-Wright simulation: start with initial_size copies of the
// all-zeros haplotype; each generation every individual leaves
// Poisson(growth_rate) offspring and each offspring locus mutates by +/-1
// (equal probability) with probability mu[k].
HaplotypeTable simulate(const SimParams& params);

// Translate every haplotype by +shift component-wise.
HaplotypeTable shift_locations(const HaplotypeTable& table, std::span<const int> shift);

}  // namespace disclap
