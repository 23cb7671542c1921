#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "disclap/dataset.hpp"
#include "disclap/fwsim.hpp"
#include "disclap/matrix.hpp"
#include "disclap/mixture.hpp"

namespace disclap::io {

struct ParseError : std::runtime_error {
    ParseError(const std::filesystem::path& file, std::size_t line, const std::string& what);
    std::size_t line;
};

// Population CSV: header Locus1,...,LocusR,N; rows sorted lexicographically
// by haplotype. PopFreq is always recomputed, never stored.
void write_population(const std::filesystem::path& path, const HaplotypeTable& table);
HaplotypeTable read_population(const std::filesystem::path& path);

// Dataset CSV: Locus1,...,LocusR; one row per sampled individual.
void write_dataset(const std::filesystem::path& path, const IntMatrix& db,
                   const std::vector<std::string>& locus_names);
IntMatrix read_dataset(const std::filesystem::path& path, std::vector<std::string>* locus_names = nullptr);

// Unique-haplotype CSV: Locus1,...,LocusR,Ndb,TrueFreq,Source.
void write_unique_table(const std::filesystem::path& path, const SampledDataset& ds);
SampledDataset read_unique_table(const std::filesystem::path& path);

// Evaluation CSV: Locus1,...,LocusR,true_freq,predicted_freq,source.
void write_evaluation(const std::filesystem::path& path,
                      const std::vector<EvaluationRow>& rows,
                      const std::vector<std::string>& locus_names);

// Model JSON: {c, r, locus_names, tau[], centers[][], omega[], lambda[],
// fit:{loglik, bic, iterations, converged}}; reals carry 17 significant digits.
void write_model(const std::filesystem::path& path, const MixtureModel& model,
                 const FitReport& report);
struct ModelFile {
    MixtureModel model;
    FitReport report;  // only loglik/bic/iterations/converged round-trip
};
ModelFile read_model(const std::filesystem::path& path);

// All writers go through a temp file plus rename.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

std::string format_real(double value);  // 17 significant digits

}  // namespace disclap::io
