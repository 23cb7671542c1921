#include "disclap/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "disclap/distribution.hpp"

namespace disclap {

namespace {

double clamp_dispersion(double p) {
    return std::clamp(p, kMinDispersion, kMaxDispersion);
}

long long l1_distance(std::span<const int> a, std::span<const int> b) {
    long long d = 0;
    for (std::size_t k = 0; k < a.size(); ++k)
        d += std::abs(static_cast<long long>(a[k]) - b[k]);
    return d;
}

// Gaussian elimination with partial pivoting; A is m x m row-major.
// Returns false when A is numerically singular.
bool solve_linear(std::vector<double> A, std::vector<double>& b, std::size_t m) {
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t i = col + 1; i < m; ++i)
            if (std::abs(A[i * m + col]) > std::abs(A[pivot * m + col])) pivot = i;
        if (std::abs(A[pivot * m + col]) < 1e-300) return false;
        if (pivot != col) {
            for (std::size_t k = col; k < m; ++k) std::swap(A[pivot * m + k], A[col * m + k]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / A[col * m + col];
        for (std::size_t i = col + 1; i < m; ++i) {
            const double f = A[i * m + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < m; ++k) A[i * m + k] -= f * A[col * m + k];
            b[i] -= f * b[col];
        }
    }
    for (std::size_t i = m; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < m; ++k) s -= A[i * m + k] * b[k];
        b[i] = s / A[i * m + i];
    }
    return true;
}

// Maximizes sum over active (j,k) of
//   W_j * (log(1-p) - log(1+p)) + S_jk * log p,   p = exp(omega_j + lambda_k)
// by damped Newton on the free coordinates, omega of the gauge cluster
// pinned. A coordinate whose incident S entries are all zero has its
// optimum at p -> 0; it is frozen low and the E-step clamp takes over.
class DispersionOptimizer {
public:
    DispersionOptimizer(const RealMatrix& S, const std::vector<double>& W)
        : S_(S), W_(W), c_(S.rows()), r_(S.cols()),
          row_active_(c_, false), col_active_(r_, false) {
        for (std::size_t k = 0; k < r_; ++k) {
            double tot = 0.0;
            for (std::size_t j = 0; j < c_; ++j) tot += S_(j, k);
            col_active_[k] = tot > 0.0;
        }
        for (std::size_t j = 0; j < c_; ++j) {
            double tot = 0.0;
            for (std::size_t k = 0; k < r_; ++k)
                if (col_active_[k]) tot += S_(j, k);
            row_active_[j] = tot > 0.0 || has_active_terms(j);
        }
        gauge_ = 0;
        while (gauge_ < c_ && !row_active_[gauge_]) ++gauge_;
    }

    void run(std::vector<double>& omega, std::vector<double>& lambda) {
        // free variable layout: active omegas except the gauge, then active lambdas
        std::vector<std::size_t> om_idx(c_, npos), la_idx(r_, npos);
        std::size_t m = 0;
        for (std::size_t j = 0; j < c_; ++j)
            if (row_active_[j] && j != gauge_) om_idx[j] = m++;
        for (std::size_t k = 0; k < r_; ++k)
            if (col_active_[k]) la_idx[k] = m++;

        if (gauge_ == c_ || m == 0) {
            freeze_inactive(omega, lambda);
            return;
        }

        // keep the starting point strictly inside p < kMaxDispersion
        double max_omega = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c_; ++j)
            if (row_active_[j]) max_omega = std::max(max_omega, omega[j]);
        const double log_pmax = std::log(kMaxDispersion);
        for (std::size_t k = 0; k < r_; ++k)
            if (col_active_[k]) lambda[k] = std::min(lambda[k], log_pmax - max_omega - 1e-6);

        double q = objective(omega, lambda);
        std::vector<double> grad(m), H(m * m), step;
        for (std::size_t iter = 0; iter < 50; ++iter) {
            std::fill(grad.begin(), grad.end(), 0.0);
            std::fill(H.begin(), H.end(), 0.0);
            for (std::size_t j = 0; j < c_; ++j) {
                if (!row_active_[j]) continue;
                for (std::size_t k = 0; k < r_; ++k) {
                    if (!col_active_[k]) continue;
                    const double p = std::exp(omega[j] + lambda[k]);
                    const double denom = 1.0 - p * p;
                    const double g = S_(j, k) - 2.0 * W_[j] * p / denom;
                    const double h = -2.0 * W_[j] * p * (1.0 + p * p) / (denom * denom);
                    const std::size_t a = om_idx[j], b = la_idx[k];
                    if (a != npos) { grad[a] += g; H[a * m + a] += h; }
                    grad[b] += g;
                    H[b * m + b] += h;
                    if (a != npos) { H[a * m + b] += h; H[b * m + a] += h; }
                }
            }
            double gmax = 0.0;
            for (double g : grad) gmax = std::max(gmax, std::abs(g));
            if (gmax < 1e-10) break;

            step = grad;
            for (double& s : step) s = -s;
            if (!solve_linear(H, step, m)) {
                // singular Hessian: fall back to a scaled ascent step
                step = grad;
                double norm = 0.0;
                for (double s : step) norm += s * s;
                norm = std::sqrt(norm);
                for (double& s : step) s /= (1.0 + norm);
            }

            double t = 1.0;
            bool accepted = false;
            for (int halving = 0; halving < 60; ++halving) {
                std::vector<double> om = omega, la = lambda;
                for (std::size_t j = 0; j < c_; ++j)
                    if (om_idx[j] != npos) om[j] += t * step[om_idx[j]];
                for (std::size_t k = 0; k < r_; ++k)
                    if (la_idx[k] != npos) la[k] += t * step[la_idx[k]];
                if (inside(om, la)) {
                    const double qn = objective(om, la);
                    if (qn >= q - 1e-12 * std::abs(q)) {
                        omega = std::move(om);
                        lambda = std::move(la);
                        q = qn;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if (!accepted) break;
        }
        freeze_inactive(omega, lambda);
    }

private:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool has_active_terms(std::size_t j) const {
        for (std::size_t k = 0; k < r_; ++k)
            if (col_active_[k] && S_(j, k) > 0.0) return true;
        return false;
    }

    bool inside(const std::vector<double>& omega, const std::vector<double>& lambda) const {
        const double log_pmax = std::log(kMaxDispersion);
        for (std::size_t j = 0; j < c_; ++j) {
            if (!row_active_[j]) continue;
            for (std::size_t k = 0; k < r_; ++k)
                if (col_active_[k] && omega[j] + lambda[k] >= log_pmax) return false;
        }
        return true;
    }

    double objective(const std::vector<double>& omega, const std::vector<double>& lambda) const {
        double q = 0.0;
        for (std::size_t j = 0; j < c_; ++j) {
            if (!row_active_[j]) continue;
            for (std::size_t k = 0; k < r_; ++k) {
                if (!col_active_[k]) continue;
                const double eta = omega[j] + lambda[k];
                const double p = std::exp(eta);
                q += W_[j] * (std::log1p(-p) - std::log1p(p)) + S_(j, k) * eta;
            }
        }
        return q;
    }

    // Frozen coordinates are pushed low enough that the evaluation clamp
    // lands every affected p_jk exactly on kMinDispersion.
    void freeze_inactive(std::vector<double>& omega, std::vector<double>& lambda) const {
        double max_omega = 0.0, max_lambda = 0.0;
        for (std::size_t j = 0; j < c_; ++j)
            if (row_active_[j]) max_omega = std::max(max_omega, omega[j]);
        const double log_pmin = std::log(kMinDispersion);
        for (std::size_t k = 0; k < r_; ++k)
            if (!col_active_[k]) lambda[k] = log_pmin - max_omega - 1.0;
        for (std::size_t k = 0; k < r_; ++k) max_lambda = std::max(max_lambda, lambda[k]);
        for (std::size_t j = 0; j < c_; ++j)
            if (!row_active_[j]) omega[j] = log_pmin - max_lambda - 1.0;
    }

    const RealMatrix& S_;
    const std::vector<double>& W_;
    std::size_t c_, r_;
    std::vector<bool> row_active_, col_active_;
    std::size_t gauge_;
};

// Dispersion part of the EM surrogate evaluated with the same clamp the
// E-step applies. The Newton optimizer works on the unclamped surface, so a
// quasi-degenerate cluster whose optimum sits below the clamp floor can come
// back worse once clamped; the M-step compares before/after on this function
// and keeps the old parameters in that case.
double clamped_dispersion_q(const RealMatrix& S, const std::vector<double>& W,
                            const std::vector<double>& omega,
                            const std::vector<double>& lambda) {
    double q = 0.0;
    for (std::size_t j = 0; j < S.rows(); ++j)
        for (std::size_t k = 0; k < S.cols(); ++k) {
            const double p = clamp_dispersion(std::exp(omega[j] + lambda[k]));
            q += W[j] * (std::log1p(-p) - std::log1p(p)) + S(j, k) * std::log(p);
        }
    return q;
}

// Smallest column value whose cumulative weight reaches half the total;
// with unit weights this is the lower middle order statistic.
int weighted_lower_median(const IntMatrix& db, const std::vector<std::size_t>& order,
                          std::size_t col, const RealMatrix& V, std::size_t cluster,
                          double total_weight) {
    const double half = total_weight / 2.0;
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += V(i, cluster);
        if (cum >= half) return db(i, col);
    }
    return db(order.back(), col);
}

struct EmState {
    MixtureModel model;
    Responsibilities V;
    std::vector<double> row_log_density;
};

// One E-step; returns the observed-data log-likelihood.
double e_step(const IntMatrix& db, EmState& st) {
    const std::size_t n = db.rows(), c = st.model.clusters, r = st.model.loci;
    double loglik = 0.0;
    std::vector<double> log_tau(c), cluster_logdens(c);
    for (std::size_t j = 0; j < c; ++j) log_tau[j] = std::log(st.model.tau[j]);

    // per-(j,k) PMF pieces, hoisted out of the observation loop
    RealMatrix log_norm(c, r), log_p(c, r);
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t k = 0; k < r; ++k) {
            const double p = st.model.dispersion(j, k);
            log_norm(j, k) = std::log1p(-p) - std::log1p(p);
            log_p(j, k) = std::log(p);
        }

    for (std::size_t i = 0; i < n; ++i) {
        double max_ld = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c; ++j) {
            double ld = log_tau[j];
            for (std::size_t k = 0; k < r; ++k) {
                const double dev = std::abs(static_cast<double>(db(i, k)) - st.model.centers(j, k));
                ld += log_norm(j, k) + dev * log_p(j, k);
            }
            cluster_logdens[j] = ld;
            max_ld = std::max(max_ld, ld);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) sum += std::exp(cluster_logdens[j] - max_ld);
        const double lse = max_ld + std::log(sum);
        st.row_log_density[i] = lse;
        for (std::size_t j = 0; j < c; ++j) st.V(i, j) = std::exp(cluster_logdens[j] - lse);
        loglik += lse;
    }
    if (!std::isfinite(loglik))
        throw FitError("non-finite log-likelihood in E-step");
    return loglik;
}

void m_step(const IntMatrix& db, const std::vector<std::vector<std::size_t>>& col_order,
            EmState& st) {
    const std::size_t n = db.rows(), c = st.model.clusters, r = st.model.loci;
    std::vector<double> W(c, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) W[j] += st.V(i, j);

    for (std::size_t j = 0; j < c; ++j) st.model.tau[j] = W[j] / static_cast<double>(n);

    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t k = 0; k < r; ++k)
            st.model.centers(j, k) = weighted_lower_median(db, col_order[k], k, st.V, j, W[j]);

    RealMatrix S(c, r, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double v = st.V(i, j);
            if (v == 0.0) continue;
            for (std::size_t k = 0; k < r; ++k)
                S(j, k) += v * std::abs(static_cast<double>(db(i, k)) - st.model.centers(j, k));
        }

    const auto old_omega = st.model.omega;
    const auto old_lambda = st.model.lambda;
    const double q_old = clamped_dispersion_q(S, W, old_omega, old_lambda);
    DispersionOptimizer(S, W).run(st.model.omega, st.model.lambda);
    if (clamped_dispersion_q(S, W, st.model.omega, st.model.lambda) < q_old) {
        st.model.omega = old_omega;
        st.model.lambda = old_lambda;
    }
}

FitResult run_em(const IntMatrix& db, const IntMatrix& initial_centers,
                 const FitOptions& opts,
                 const std::vector<std::vector<std::size_t>>& col_order) {
    const std::size_t n = db.rows(), r = db.cols(), c = initial_centers.rows();

    EmState st;
    st.model.clusters = c;
    st.model.loci = r;
    st.model.tau.assign(c, 1.0 / static_cast<double>(c));
    st.model.centers = initial_centers;
    st.model.omega.assign(c, 0.0);
    st.model.lambda.assign(r, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
        std::string name = "Locus" + std::to_string(k + 1);
        st.model.locus_names.push_back(std::move(name));
    }
    st.V = Responsibilities(n, c, 0.0);
    st.row_log_density.assign(n, 0.0);

    // hard assignment to the nearest initial center under L1
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        long long best_d = l1_distance(db.row(i), initial_centers.row(0));
        for (std::size_t j = 1; j < c; ++j) {
            const long long d = l1_distance(db.row(i), initial_centers.row(j));
            if (d < best_d) { best_d = d; best = j; }
        }
        st.V(i, best) = 1.0;
    }

    // crude pooled dispersion start for the Newton warm chain
    for (std::size_t k = 0; k < r; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            long long best = std::numeric_limits<long long>::max();
            for (std::size_t j = 0; j < c; ++j)
                best = std::min(best, static_cast<long long>(
                    std::abs(static_cast<long long>(db(i, k)) - initial_centers(j, k))));
            s += static_cast<double>(best);
        }
        const double p0 = std::clamp(dispersion_from_mad(s / static_cast<double>(n)),
                                     kMinDispersion, 0.9);
        st.model.lambda[k] = std::log(p0);
    }

    m_step(db, col_order, st);

    FitReport report;
    report.n_obs = n;
    report.n_params = parameter_count(c, r);

    std::size_t reseeds = 0;
    bool converged = false;
    std::size_t iterations = 0;
    while (iterations < opts.max_iter) {
        double loglik = e_step(db, st);
        // rescue clusters whose total responsibility collapsed
        bool reseeded = false;
        for (std::size_t j = 0; j < c; ++j) {
            double wj = 0.0;
            for (std::size_t i = 0; i < n; ++i) wj += st.V(i, j);
            if (wj < 1e-8 * static_cast<double>(n)) {
                if (++reseeds > 3) throw FitError("cluster collapsed repeatedly during EM");
                std::size_t worst = 0;
                for (std::size_t i = 1; i < n; ++i)
                    if (st.row_log_density[i] < st.row_log_density[worst]) worst = i;
                for (std::size_t k = 0; k < r; ++k) st.model.centers(j, k) = db(worst, k);
                st.model.tau[j] = 1.0 / static_cast<double>(n);
                double rest = 0.0;
                for (std::size_t jj = 0; jj < c; ++jj)
                    if (jj != j) rest += st.model.tau[jj];
                for (std::size_t jj = 0; jj < c; ++jj)
                    if (jj != j) st.model.tau[jj] *= (1.0 - st.model.tau[j]) / rest;
                reseeded = true;
            }
        }
        if (reseeded) loglik = e_step(db, st);

        report.loglik_trace.push_back(loglik);
        ++iterations;
        const std::size_t t = report.loglik_trace.size();
        if (t >= 2) {
            const double prev = report.loglik_trace[t - 2];
            if (std::abs(loglik - prev) <= opts.tol * std::abs(loglik)) {
                converged = true;
                break;
            }
        }
        m_step(db, col_order, st);
    }

    report.iterations = iterations;
    report.converged = converged;
    report.bic = -2.0 * report.final_loglik()
                 + static_cast<double>(report.n_params) * std::log(static_cast<double>(n));
    return FitResult{std::move(st.model), std::move(st.V), std::move(report)};
}

std::vector<std::vector<std::size_t>> column_sort_orders(const IntMatrix& db) {
    std::vector<std::vector<std::size_t>> order(db.cols());
    for (std::size_t k = 0; k < db.cols(); ++k) {
        order[k].resize(db.rows());
        std::iota(order[k].begin(), order[k].end(), std::size_t{0});
        std::stable_sort(order[k].begin(), order[k].end(),
                         [&](std::size_t a, std::size_t b) { return db(a, k) < db(b, k); });
    }
    return order;
}

std::size_t count_distinct_rows(const IntMatrix& db) {
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < db.rows(); ++i) seen.insert(db.row_vec(i));
    return seen.size();
}

IntMatrix random_distinct_centers(const IntMatrix& db, std::size_t c, std::mt19937_64& rng) {
    std::set<std::vector<int>> chosen;
    IntMatrix centers(c, db.cols());
    std::size_t filled = 0;
    while (filled < c) {
        const std::size_t i = rng() % db.rows();
        auto row = db.row_vec(i);
        if (!chosen.insert(row).second) continue;
        for (std::size_t k = 0; k < db.cols(); ++k) centers(filled, k) = row[k];
        ++filled;
    }
    return centers;
}

}  // namespace

double MixtureModel::dispersion(std::size_t j, std::size_t k) const {
    return clamp_dispersion(std::exp(omega[j] + lambda[k]));
}

double MixtureModel::haplotype_log_density(std::span<const int> x) const {
    if (x.size() != loci)
        throw std::invalid_argument("haplotype length does not match model locus count");
    std::vector<double> cluster_logdens(clusters);
    double max_ld = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < clusters; ++j) {
        double ld = std::log(tau[j]);
        for (std::size_t k = 0; k < loci; ++k)
            ld += log_pmf(DiscreteLaplace{dispersion(j, k), centers(j, k)}, x[k]);
        cluster_logdens[j] = ld;
        max_ld = std::max(max_ld, ld);
    }
    double sum = 0.0;
    for (double ld : cluster_logdens) sum += std::exp(ld - max_ld);
    return max_ld + std::log(sum);
}

std::vector<double> MixtureModel::predict(const IntMatrix& xs) const {
    if (xs.rows() > 0 && xs.cols() != loci)
        throw std::invalid_argument("haplotype matrix column count does not match model");
    std::vector<double> out(xs.rows());
    for (std::size_t i = 0; i < xs.rows(); ++i)
        out[i] = std::exp(haplotype_log_density(xs.row(i)));
    return out;
}

std::size_t parameter_count(std::size_t c, std::size_t r) {
    return (c - 1) + c * r + (c - 1) + r;
}

IntMatrix init_centers(const IntMatrix& db, std::size_t c) {
    const std::size_t n = db.rows();
    if (n == 0 || c == 0) throw std::invalid_argument("init_centers: empty input");
    if (count_distinct_rows(db) < c)
        throw FitError("fewer distinct haplotypes than requested clusters");

    std::vector<std::size_t> medoids;
    {
        std::size_t best = 0;
        long long best_total = std::numeric_limits<long long>::max();
        for (std::size_t i = 0; i < n; ++i) {
            long long total = 0;
            for (std::size_t j = 0; j < n; ++j) total += l1_distance(db.row(i), db.row(j));
            if (total < best_total) { best_total = total; best = i; }
        }
        medoids.push_back(best);
    }
    while (medoids.size() < c) {
        std::size_t best = 0;
        long long best_d = -1;
        for (std::size_t i = 0; i < n; ++i) {
            long long nearest = std::numeric_limits<long long>::max();
            for (std::size_t m : medoids)
                nearest = std::min(nearest, l1_distance(db.row(i), db.row(m)));
            if (nearest > best_d) { best_d = nearest; best = i; }
        }
        medoids.push_back(best);
    }

    IntMatrix centers(c, db.cols());
    for (std::size_t j = 0; j < c; ++j)
        for (std::size_t k = 0; k < db.cols(); ++k) centers(j, k) = db(medoids[j], k);
    return centers;
}

FitResult fit(const IntMatrix& db, std::size_t c, const FitOptions& opts) {
    if (db.rows() == 0) throw FitError("empty dataset");
    if (c == 0) throw FitError("cluster count must be at least 1");
    if (c > db.rows()) throw FitError("more clusters than observations");

    const auto col_order = column_sort_orders(db);
    FitResult best = run_em(db, init_centers(db, c), opts, col_order);

    if (opts.restarts > 0) {
        std::mt19937_64 rng(opts.seed);
        for (std::size_t rstart = 0; rstart < opts.restarts; ++rstart) {
            FitResult candidate =
                run_em(db, random_distinct_centers(db, c, rng), opts, col_order);
            if (candidate.report.final_loglik() > best.report.final_loglik())
                best = std::move(candidate);
        }
    }
    return best;
}

SweepResult fit_sweep(const IntMatrix& db, std::size_t c_min, std::size_t c_max,
                      const FitOptions& opts) {
    if (c_min == 0 || c_max < c_min) throw std::invalid_argument("invalid cluster range");
    SweepResult sweep;
    for (std::size_t c = c_min; c <= c_max; ++c) sweep.fits.push_back(fit(db, c, opts));
    for (std::size_t i = 1; i < sweep.fits.size(); ++i)
        if (sweep.fits[i].report.bic < sweep.fits[sweep.best_index].report.bic)
            sweep.best_index = i;
    return sweep;
}

}  // namespace disclap
