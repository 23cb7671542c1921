#include "disclap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace disclap {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct FlatPop {
    std::vector<const std::vector<int>*> haplotypes;
    std::vector<double> cum_weight;  // cumulative counts
    std::vector<double> freq;
    double total = 0.0;
};

FlatPop flatten(const HaplotypeTable& pop) {
    if (pop.rows.empty()) throw std::invalid_argument("empty population");
    FlatPop flat;
    double cum = 0.0;
    for (const auto& [h, n] : pop.rows) {
        flat.haplotypes.push_back(&h);
        cum += static_cast<double>(n);
        flat.cum_weight.push_back(cum);
    }
    flat.total = cum;
    for (const auto& [h, n] : pop.rows)
        flat.freq.push_back(static_cast<double>(n) / cum);
    return flat;
}

std::size_t draw_index(const FlatPop& flat, std::mt19937_64& rng) {
    const double u = uniform01(rng) * flat.total;
    const auto it = std::upper_bound(flat.cum_weight.begin(), flat.cum_weight.end(), u);
    return std::min<std::size_t>(it - flat.cum_weight.begin(), flat.cum_weight.size() - 1);
}

}  // namespace

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::single: return "single";
        case SourceTag::pop1_only: return "pop1-only";
        case SourceTag::pop2_only: return "pop2-only";
        case SourceTag::both: return "both";
    }
    return "single";
}

SourceTag source_tag_from_string(const std::string& s) {
    if (s == "single") return SourceTag::single;
    if (s == "pop1-only") return SourceTag::pop1_only;
    if (s == "pop2-only") return SourceTag::pop2_only;
    if (s == "both") return SourceTag::both;
    throw std::invalid_argument("unknown source tag: " + s);
}

SampledDataset sample_dataset(const HaplotypeTable& pop, std::size_t n, std::mt19937_64& rng) {
    if (n == 0) throw std::invalid_argument("sample size must be >= 1");
    const FlatPop flat = flatten(pop);

    SampledDataset ds;
    ds.locus_names = pop.locus_names;
    ds.db = IntMatrix(n, pop.loci());
    std::map<std::size_t, std::uint64_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = draw_index(flat, rng);
        ++counts[idx];
        const auto& h = *flat.haplotypes[idx];
        for (std::size_t k = 0; k < h.size(); ++k) ds.db(i, k) = h[k];
    }
    for (const auto& [idx, ndb] : counts) {
        UniqueHaplotype u;
        u.haplotype = *flat.haplotypes[idx];
        u.count_in_sample = ndb;
        u.true_pop_freq = flat.freq[idx];
        u.source = SourceTag::single;
        ds.unique.push_back(std::move(u));
    }
    return ds;
}

double singleton_proportion(const SampledDataset& ds) {
    if (ds.size() == 0) throw std::invalid_argument("empty dataset");
    std::size_t singletons = 0;
    for (const auto& u : ds.unique)
        if (u.count_in_sample == 1) ++singletons;
    return static_cast<double>(singletons) / static_cast<double>(ds.size());
}

SampledDataset sample_mixture(const HaplotypeTable& pop1, const HaplotypeTable& pop2,
                              std::size_t n, double w1, std::mt19937_64& rng) {
    if (!(w1 > 0.0 && w1 < 1.0)) throw std::invalid_argument("w1 must be in (0, 1)");
    if (n == 0) throw std::invalid_argument("sample size must be >= 1");
    std::binomial_distribution<std::size_t> split(n, w1);
    return sample_mixture_with_split(pop1, pop2, n, split(rng), rng);
}

SampledDataset sample_mixture_with_split(const HaplotypeTable& pop1,
                                         const HaplotypeTable& pop2, std::size_t n,
                                         std::size_t n1, std::mt19937_64& rng) {
    if (pop1.loci() != pop2.loci())
        throw std::invalid_argument("populations have different locus counts");
    if (n1 > n) throw std::invalid_argument("n1 exceeds n");
    const FlatPop flat1 = flatten(pop1);
    const FlatPop flat2 = flatten(pop2);
    const std::size_t n2 = n - n1;

    SampledDataset ds;
    ds.locus_names = pop1.locus_names;
    ds.db = IntMatrix(n, pop1.loci());
    ds.n_from_pop1 = n1;

    struct Acc {
        std::uint64_t ndb1 = 0, ndb2 = 0;
        double freq1 = 0.0, freq2 = 0.0;
    };
    std::map<std::vector<int>, Acc> merged;

    for (std::size_t i = 0; i < n1; ++i) {
        const std::size_t idx = draw_index(flat1, rng);
        const auto& h = *flat1.haplotypes[idx];
        for (std::size_t k = 0; k < h.size(); ++k) ds.db(i, k) = h[k];
        auto& acc = merged[h];
        ++acc.ndb1;
        acc.freq1 = flat1.freq[idx];
    }
    for (std::size_t i = 0; i < n2; ++i) {
        const std::size_t idx = draw_index(flat2, rng);
        const auto& h = *flat2.haplotypes[idx];
        for (std::size_t k = 0; k < h.size(); ++k) ds.db(n1 + i, k) = h[k];
        auto& acc = merged[h];
        ++acc.ndb2;
        acc.freq2 = flat2.freq[idx];
    }

    const double rw1 = static_cast<double>(n1) / static_cast<double>(n);
    const double rw2 = static_cast<double>(n2) / static_cast<double>(n);
    for (const auto& [h, acc] : merged) {
        UniqueHaplotype u;
        u.haplotype = h;
        u.count_in_sample = acc.ndb1 + acc.ndb2;
        u.true_pop_freq = rw1 * acc.freq1 + rw2 * acc.freq2;
        u.source = acc.ndb1 > 0 && acc.ndb2 > 0 ? SourceTag::both
                 : acc.ndb1 > 0                 ? SourceTag::pop1_only
                                                : SourceTag::pop2_only;
        ds.unique.push_back(std::move(u));
    }
    return ds;
}

std::vector<EvaluationRow> evaluation_table(const SampledDataset& ds, const MixtureModel& model) {
    if (!ds.unique.empty() && model.loci != ds.unique.front().haplotype.size())
        throw std::invalid_argument("model and dataset locus counts differ");
    std::vector<EvaluationRow> rows;
    rows.reserve(ds.unique.size());
    for (const auto& u : ds.unique) {
        EvaluationRow row;
        row.haplotype = u.haplotype;
        row.true_freq = u.true_pop_freq;
        row.predicted_freq = std::exp(model.haplotype_log_density(u.haplotype));
        row.source = u.source;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace disclap
