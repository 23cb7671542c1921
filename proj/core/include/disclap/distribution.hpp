#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace disclap {

// Univariate discrete Laplace distribution DL(p, y) on the integers:
//   P(X = x) = (1-p)/(1+p) * p^|x-y|
// with dispersion 0 < p < 1 and integer location y. p == 0 is the
// degenerate point mass at y.
struct DiscreteLaplace {
    double p = 0.5;
    int y = 0;
};

double pmf(const DiscreteLaplace& d, long long x);

// log(pmf); requires p > 0 since the point mass has no finite log off-center.
double log_pmf(const DiscreteLaplace& d, long long x);

// n i.i.d. draws, built as y + G1 - G2 with G1, G2 geometric.
std::vector<int> sample(const DiscreteLaplace& d, std::size_t n, std::mt19937_64& rng);

// Closed-form maximum likelihood fit of DL(p, y) to one sample:
//   y_hat  = median (lower middle order statistic for even n)
//   mu_hat = mean |x_i - y_hat|
//   p_hat  = (sqrt(mu_hat^2 + 1) - 1) / mu_hat, 0 when mu_hat = 0
struct SingleSampleMle {
    int y_hat = 0;
    double mu_hat = 0.0;
    double p_hat = 0.0;
};

SingleSampleMle mle(std::span<const int> xs);

// E|X - y| = 2p / (1 - p^2); inverse of the p_hat formula above.
double mean_abs_deviation(double p);

// Inverse of mean_abs_deviation: the p with E|X - y| = mu (0 when mu = 0).
double dispersion_from_mad(double mu);

}  // namespace disclap
