#include "disclap/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace disclap {

namespace {

void check_p_pmf(double p) {
    if (!(p >= 0.0) || !(p < 1.0))
        throw std::domain_error("discrete Laplace dispersion must be in [0, 1)");
}

}  // namespace

double pmf(const DiscreteLaplace& d, long long x) {
    check_p_pmf(d.p);
    if (d.p == 0.0) return x == d.y ? 1.0 : 0.0;
    const double k = std::abs(static_cast<double>(x - d.y));
    const double log_p = std::log(d.p);
    if (k * -log_p > 700.0) {
        // evaluate in log space so extreme alleles underflow gracefully
        return std::exp(std::log1p(-d.p) - std::log1p(d.p) + k * log_p);
    }
    return (1.0 - d.p) / (1.0 + d.p) * std::pow(d.p, k);
}

double log_pmf(const DiscreteLaplace& d, long long x) {
    if (!(d.p > 0.0) || !(d.p < 1.0))
        throw std::domain_error("log_pmf requires dispersion in (0, 1)");
    const double k = std::abs(static_cast<double>(x - d.y));
    return std::log1p(-d.p) - std::log1p(d.p) + k * std::log(d.p);
}

std::vector<int> sample(const DiscreteLaplace& d, std::size_t n, std::mt19937_64& rng) {
    if (!(d.p > 0.0) || !(d.p < 1.0))
        throw std::domain_error("sampling requires dispersion in (0, 1)");
    // G1 - G2 with G1, G2 ~ Geom(1-p) has PMF (1-p)/(1+p) * p^|k|.
    std::geometric_distribution<int> geom(1.0 - d.p);
    std::vector<int> xs(n);
    for (auto& x : xs) x = d.y + geom(rng) - geom(rng);
    return xs;
}

SingleSampleMle mle(std::span<const int> xs) {
    if (xs.empty()) throw std::invalid_argument("mle: empty sample");
    std::vector<int> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    SingleSampleMle est;
    est.y_hat = sorted[(sorted.size() - 1) / 2];  // lower middle for even n
    double sum = 0.0;
    for (int x : sorted) sum += std::abs(x - est.y_hat);
    est.mu_hat = sum / static_cast<double>(sorted.size());
    est.p_hat = dispersion_from_mad(est.mu_hat);
    return est;
}

double mean_abs_deviation(double p) {
    return 2.0 * p / (1.0 - p * p);
}

double dispersion_from_mad(double mu) {
    if (mu == 0.0) return 0.0;
    return (std::sqrt(mu * mu + 1.0) - 1.0) / mu;
}

}  // namespace disclap
