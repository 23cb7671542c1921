#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "disclap/matrix.hpp"

namespace disclap {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dispersion bounds used while fitting. The floor is only reached on
// degenerate data (a locus with zero deviation from its center).
inline constexpr double kMinDispersion = 1e-5;
inline constexpr double kMaxDispersion = 1.0 - 1e-9;

// Mixture of multivariate, marginally independent, discrete Laplace
// distributions. Cluster j has weight tau[j], integer central haplotype
// centers(j, .) and per-locus dispersions p_jk = exp(omega[j] + lambda[k]),
// with omega[0] pinned to 0 for identifiability.
struct MixtureModel {
    std::size_t clusters = 0;
    std::size_t loci = 0;
    std::vector<double> tau;
    IntMatrix centers;
    std::vector<double> omega;
    std::vector<double> lambda;
    std::vector<std::string> locus_names;

    double dispersion(std::size_t j, std::size_t k) const;

    // log of sum_j tau_j prod_k f(x_k; p_jk, y_jk), via log-sum-exp.
    double haplotype_log_density(std::span<const int> x) const;

    // Predicted haplotype frequency per row of xs.
    std::vector<double> predict(const IntMatrix& xs) const;
};

struct FitReport {
    std::vector<double> loglik_trace;  // log-likelihood after each E-step
    std::size_t iterations = 0;
    bool converged = false;
    double bic = 0.0;
    std::size_t n_params = 0;
    std::size_t n_obs = 0;

    double final_loglik() const { return loglik_trace.back(); }
};

struct FitOptions {
    double tol = 1e-8;          // relative log-likelihood change
    std::size_t max_iter = 1000;
    std::size_t restarts = 0;   // extra EM runs from random centers
    std::uint64_t seed = 0;     // drives the random restarts only
};

using Responsibilities = RealMatrix;  // n x c, rows sum to 1

struct FitResult {
    MixtureModel model;
    Responsibilities responsibilities;
    FitReport report;
};

// Deterministic maximin L1 medoid seeding: the first medoid minimizes the
// total L1 distance to all rows, each next one maximizes the distance to
// its nearest chosen medoid; ties go to the lowest row index.
IntMatrix init_centers(const IntMatrix& db, std::size_t c);

// EM fit of a c-cluster model to an n x r integer haplotype matrix.
FitResult fit(const IntMatrix& db, std::size_t c, const FitOptions& opts = {});

struct SweepResult {
    std::vector<FitResult> fits;  // one per cluster count, in range order
    std::size_t best_index = 0;   // argmin BIC
};

SweepResult fit_sweep(const IntMatrix& db, std::size_t c_min, std::size_t c_max,
                      const FitOptions& opts = {});

// Number of free parameters charged by the BIC:
// (c-1) weights + c*r centers + (c-1) cluster effects + r locus effects.
std::size_t parameter_count(std::size_t c, std::size_t r);

}  // namespace disclap
