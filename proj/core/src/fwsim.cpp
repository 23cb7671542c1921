#include "disclap/fwsim.hpp"

#include <random>
#include <utility>

namespace disclap {

namespace {

void validate(const SimParams& p) {
    if (p.loci == 0) throw std::invalid_argument("loci must be >= 1");
    if (p.initial_size == 0) throw std::invalid_argument("initial size must be >= 1");
    if (!(p.growth_rate > 0.0)) throw std::invalid_argument("growth rate must be positive");
    if (p.mu.size() != p.loci)
        throw std::invalid_argument("mutation rate vector length must equal locus count");
    for (double m : p.mu)
        if (!(m >= 0.0 && m <= 1.0))
            throw std::invalid_argument("mutation rates must be in [0, 1]");
}

std::uint64_t binomial(std::uint64_t trials, double prob, std::mt19937_64& rng) {
    if (trials == 0 || prob <= 0.0) return 0;
    if (prob >= 1.0) return trials;
    std::binomial_distribution<std::uint64_t> dist(trials, prob);
    return dist(rng);
}

}  // namespace

std::uint64_t HaplotypeTable::total() const {
    std::uint64_t t = 0;
    for (const auto& [h, n] : rows) t += n;
    return t;
}

ExtinctionError::ExtinctionError(std::size_t g)
    : std::runtime_error("population extinct at generation " + std::to_string(g)),
      generation(g) {}

HaplotypeTable simulate(const SimParams& params) {
    validate(params);
    std::mt19937_64 rng(params.seed);

    using Key = std::vector<int>;
    std::map<Key, std::uint64_t> pop;
    pop[Key(params.loci, 0)] = params.initial_size;

    // Offspring are i.i.d. per parent, so each haplotype group can be
    // reproduced and mutated in aggregate: Poisson for the litter size,
    // then a binomial split per locus into unchanged / +1 / -1.
    std::vector<std::pair<Key, std::uint64_t>> groups, next_groups;
    for (std::size_t gen = 1; gen <= params.generations; ++gen) {
        std::map<Key, std::uint64_t> next;
        std::uint64_t total = 0;
        for (const auto& [haplotype, count] : pop) {
            std::poisson_distribution<std::uint64_t> litter(
                params.growth_rate * static_cast<double>(count));
            const std::uint64_t offspring = litter(rng);
            if (offspring == 0) continue;

            groups.clear();
            groups.emplace_back(haplotype, offspring);
            for (std::size_t k = 0; k < params.loci; ++k) {
                next_groups.clear();
                for (auto& [h, m] : groups) {
                    const std::uint64_t mutated = binomial(m, params.mu[k], rng);
                    if (m > mutated) next_groups.emplace_back(h, m - mutated);
                    if (mutated > 0) {
                        const std::uint64_t up = binomial(mutated, 0.5, rng);
                        if (up > 0) {
                            Key hu = h;
                            ++hu[k];
                            next_groups.emplace_back(std::move(hu), up);
                        }
                        if (mutated > up) {
                            Key hd = h;
                            --hd[k];
                            next_groups.emplace_back(std::move(hd), mutated - up);
                        }
                    }
                }
                groups.swap(next_groups);
            }
            for (auto& [h, m] : groups) {
                next[std::move(h)] += m;
                total += m;
            }
        }
        if (next.empty()) throw ExtinctionError(gen);
        if (total > params.population_cap)
            throw PopulationOverflowError("population exceeded cap at generation " +
                                          std::to_string(gen));
        pop = std::move(next);
    }

    HaplotypeTable table;
    for (std::size_t k = 0; k < params.loci; ++k)
        table.locus_names.push_back("Locus" + std::to_string(k + 1));
    table.rows = std::move(pop);
    return table;
}

HaplotypeTable shift_locations(const HaplotypeTable& table, std::span<const int> shift) {
    if (shift.size() != table.loci())
        throw std::invalid_argument("shift vector length must equal locus count");
    HaplotypeTable out;
    out.locus_names = table.locus_names;
    for (const auto& [h, n] : table.rows) {
        std::vector<int> shifted = h;
        for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] += shift[k];
        out.rows.emplace(std::move(shifted), n);
    }
    return out;
}

}  // namespace disclap
