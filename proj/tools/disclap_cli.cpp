// Command-line front end: simulate / sample / fit / predict / evaluate.
//
// Exit codes: 0 success, 2 flag validation, 3 extinction, 4 unreadable or
// invalid input file, 5 fit failure, 6 model/dataset locus mismatch.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "disclap/dataset.hpp"
#include "disclap/distribution.hpp"
#include "disclap/fwsim.hpp"
#include "disclap/io.hpp"
#include "disclap/mixture.hpp"

namespace {

constexpr int kExitFlags = 2;
constexpr int kExitExtinction = 3;
constexpr int kExitBadInput = 4;
constexpr int kExitFitFailure = 5;
constexpr int kExitLocusMismatch = 6;

struct FlagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw FlagError("invalid number '" + item + "'");
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        out.push_back(std::stoi(item, &pos));
        if (pos != item.size()) throw FlagError("invalid integer '" + item + "'");
    }
    return out;
}

// "a:b" expands to r linearly spaced mutation rates
std::vector<double> expand_mu_range(const std::string& s, std::size_t r) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw FlagError("--mu-range must look like a:b");
    const double a = std::stod(s.substr(0, colon));
    const double b = std::stod(s.substr(colon + 1));
    std::vector<double> mu(r);
    for (std::size_t k = 0; k < r; ++k)
        mu[k] = r == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(r - 1);
    return mu;
}

struct CommonFlags {
    std::uint64_t seed = 0;
    bool quiet = false;
};

struct SimulateArgs {
    std::size_t g = 0, k = 0, r = 0;
    std::string mu_list, mu_range, shift;
    double alpha = 1.0;
    std::uint64_t max_pop = 100'000'000;
    std::string out;
};

int cmd_simulate(const SimulateArgs& args, const CommonFlags& common) {
    disclap::SimParams params;
    params.generations = args.g;
    params.initial_size = args.k;
    params.loci = args.r;
    params.growth_rate = args.alpha;
    params.seed = common.seed;
    params.population_cap = args.max_pop;
    if (!args.mu_list.empty() == !args.mu_range.empty())
        throw FlagError("exactly one of --mu and --mu-range is required");
    params.mu = args.mu_list.empty() ? expand_mu_range(args.mu_range, args.r)
                                     : parse_real_list(args.mu_list);

    std::optional<std::vector<int>> shift;
    if (!args.shift.empty()) {
        shift = parse_int_list(args.shift);
        if (shift->size() != args.r)
            throw FlagError("--shift must have one value per locus");
    }

    disclap::HaplotypeTable table;
    try {
        table = disclap::simulate(params);
    } catch (const disclap::ExtinctionError& e) {
        std::cerr << "extinction at generation " << e.generation << "\n";
        return kExitExtinction;
    } catch (const std::invalid_argument& e) {
        throw FlagError(e.what());
    }
    if (shift) table = disclap::shift_locations(table, *shift);
    disclap::io::write_population(args.out, table);

    if (!common.quiet) {
        std::cout << "population size: " << table.total() << "\n";
        std::cout << "unique haplotypes: " << table.rows.size() << "\n";
        std::vector<std::pair<std::vector<int>, std::uint64_t>> top(table.rows.begin(),
                                                                    table.rows.end());
        std::stable_sort(top.begin(), top.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        std::cout << "top haplotypes:\n";
        for (std::size_t i = 0; i < std::min<std::size_t>(5, top.size()); ++i) {
            std::cout << " ";
            for (int allele : top[i].first) std::cout << " " << allele;
            std::cout << "  N=" << top[i].second << "\n";
        }
    }
    return 0;
}

struct SampleArgs {
    std::vector<std::string> pops;
    std::size_t n = 0;
    double w1 = -1.0;
    std::string out;
};

int cmd_sample(const SampleArgs& args, const CommonFlags& common) {
    if (args.pops.empty() || args.pops.size() > 2)
        throw FlagError("--pop takes one or two population files");
    if ((args.pops.size() == 2) != (args.w1 >= 0.0))
        throw FlagError("--w1 is required exactly when two populations are given");

    std::mt19937_64 rng(common.seed);
    disclap::SampledDataset ds;
    if (args.pops.size() == 1) {
        const auto pop = disclap::io::read_population(args.pops[0]);
        ds = disclap::sample_dataset(pop, args.n, rng);
    } else {
        if (!(args.w1 > 0.0 && args.w1 < 1.0)) throw FlagError("--w1 must be in (0, 1)");
        const auto pop1 = disclap::io::read_population(args.pops[0]);
        const auto pop2 = disclap::io::read_population(args.pops[1]);
        ds = disclap::sample_mixture(pop1, pop2, args.n, args.w1, rng);
        if (!common.quiet)
            std::cout << "realized split: " << ds.n_from_pop1 << "/" << args.n << " = "
                      << static_cast<double>(ds.n_from_pop1) / static_cast<double>(args.n)
                      << "\n";
    }
    disclap::io::write_dataset(args.out + "_db.csv", ds.db, ds.locus_names);
    disclap::io::write_unique_table(args.out + "_unique.csv", ds);
    if (!common.quiet)
        std::cout << "singleton proportion: " << disclap::singleton_proportion(ds) << "\n";
    return 0;
}

struct FitArgs {
    std::string dataset;
    std::string clusters = "1";
    double tol = 1e-8;
    std::size_t max_iter = 1000;
    std::size_t restarts = 0;
    std::string out;
};

int cmd_fit(const FitArgs& args, const CommonFlags& common) {
    std::pair<std::size_t, std::size_t> range;
    const auto colon = args.clusters.find(':');
    try {
        if (colon == std::string::npos) {
            range.first = range.second = std::stoul(args.clusters);
        } else {
            range.first = std::stoul(args.clusters.substr(0, colon));
            range.second = std::stoul(args.clusters.substr(colon + 1));
        }
    } catch (const std::exception&) {
        throw FlagError("--clusters must be N or A:B");
    }
    if (range.first == 0 || range.second < range.first)
        throw FlagError("invalid cluster range");

    std::vector<std::string> locus_names;
    disclap::IntMatrix db = disclap::io::read_dataset(args.dataset, &locus_names);

    disclap::FitOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    opts.restarts = args.restarts;
    opts.seed = common.seed;

    auto sweep = disclap::fit_sweep(db, range.first, range.second, opts);
    for (auto& f : sweep.fits) f.model.locus_names = locus_names;

    if (range.first == range.second) {
        disclap::io::write_model(args.out, sweep.fits[0].model, sweep.fits[0].report);
        if (!common.quiet)
            std::cout << "wrote " << args.out << " (BIC " << sweep.fits[0].report.bic << ")\n";
        return 0;
    }

    std::string bic_csv = "c,loglik,bic,iterations,converged\n";
    for (std::size_t i = 0; i < sweep.fits.size(); ++i) {
        const auto& f = sweep.fits[i];
        const std::string path = args.out + "_c" + std::to_string(range.first + i) + ".json";
        disclap::io::write_model(path, f.model, f.report);
        bic_csv += std::to_string(range.first + i) + "," +
                   disclap::io::format_real(f.report.final_loglik()) + "," +
                   disclap::io::format_real(f.report.bic) + "," +
                   std::to_string(f.report.iterations) + "," +
                   (f.report.converged ? "true" : "false") + "\n";
    }
    disclap::io::atomic_write(args.out + "_bic.csv", bic_csv);
    const std::string best_path =
        args.out + "_c" + std::to_string(range.first + sweep.best_index) + ".json";
    std::cout << best_path << "\n";
    return 0;
}

struct PredictArgs {
    std::string model, haplotypes, out;
};

int cmd_predict(const PredictArgs& args, const CommonFlags& common) {
    const auto mf = disclap::io::read_model(args.model);
    std::vector<std::string> locus_names;
    const auto xs = disclap::io::read_dataset(args.haplotypes, &locus_names);
    if (locus_names.size() != mf.model.loci) {
        std::cerr << "locus count mismatch: model has " << mf.model.loci << ", input has "
                  << locus_names.size() << "\n";
        return kExitLocusMismatch;
    }
    const auto freqs = mf.model.predict(xs);

    std::string out;
    for (std::size_t k = 0; k < locus_names.size(); ++k) out += locus_names[k] + ",";
    out += "predicted_freq\n";
    for (std::size_t i = 0; i < xs.rows(); ++i) {
        for (std::size_t k = 0; k < xs.cols(); ++k) out += std::to_string(xs(i, k)) + ",";
        out += disclap::io::format_real(freqs[i]) + "\n";
    }
    disclap::io::atomic_write(args.out, out);
    if (!common.quiet) std::cout << "predicted " << xs.rows() << " haplotypes\n";
    return 0;
}

struct EvaluateArgs {
    std::string unique, model, out;
};

int cmd_evaluate(const EvaluateArgs& args, const CommonFlags& common) {
    const auto ds = disclap::io::read_unique_table(args.unique);
    const auto mf = disclap::io::read_model(args.model);
    if (ds.locus_names.size() != mf.model.loci) {
        std::cerr << "locus count mismatch: model has " << mf.model.loci << ", table has "
                  << ds.locus_names.size() << "\n";
        return kExitLocusMismatch;
    }
    const auto rows = disclap::evaluation_table(ds, mf.model);
    disclap::io::write_evaluation(args.out, rows, ds.locus_names);

    if (!common.quiet) {
        // Pearson correlation and mean offset of log10 frequencies
        std::vector<double> lt, lp;
        for (const auto& row : rows) {
            if (row.true_freq <= 0.0 || row.predicted_freq <= 0.0) continue;
            lt.push_back(std::log10(row.true_freq));
            lp.push_back(std::log10(row.predicted_freq));
        }
        const std::size_t m = lt.size();
        double ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) ratio += lp[i] - lt[i];
        if (m > 0) ratio /= static_cast<double>(m);

        double mt = 0.0, mp = 0.0;
        for (std::size_t i = 0; i < m; ++i) { mt += lt[i]; mp += lp[i]; }
        if (m > 0) { mt /= static_cast<double>(m); mp /= static_cast<double>(m); }
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            sxx += (lt[i] - mt) * (lt[i] - mt);
            syy += (lp[i] - mp) * (lp[i] - mp);
            sxy += (lt[i] - mt) * (lp[i] - mp);
        }
        if (m < 2 || sxx == 0.0 || syy == 0.0)
            std::cout << "log10 pearson r: undefined\n";
        else
            std::cout << "log10 pearson r: " << sxy / std::sqrt(sxx * syy) << "\n";
        std::cout << "mean log10(predicted/true): " << ratio << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"haplotype frequency estimation with discrete Laplace mixtures"};
    app.require_subcommand(1);

    CommonFlags common;
    app.add_option("--seed", common.seed, "random seed")->capture_default_str();
    app.add_flag("--quiet", common.quiet, "suppress summaries on stdout");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "forward Fisher-Wright population simulation");
    simulate->add_option("--g", sim.g, "generations")->required();
    simulate->add_option("--k", sim.k, "initial population size")->required();
    simulate->add_option("--r", sim.r, "number of loci")->required();
    simulate->add_option("--mu", sim.mu_list, "comma-separated per-locus mutation rates");
    simulate->add_option("--mu-range", sim.mu_range, "a:b, expanded to r linearly spaced rates");
    simulate->add_option("--alpha", sim.alpha, "expected offspring per individual")
        ->capture_default_str();
    simulate->add_option("--shift", sim.shift, "comma-separated location shift per locus");
    simulate->add_option("--max-pop", sim.max_pop, "population size cap")->capture_default_str();
    simulate->add_option("--out", sim.out, "population CSV path")->required();

    SampleArgs smp;
    auto* sample = app.add_subcommand("sample", "draw a dataset from population file(s)");
    sample->add_option("--pop", smp.pops, "population CSV (repeat for a two-population mixture)")
        ->required();
    sample->add_option("--n", smp.n, "dataset size")->required();
    sample->add_option("--w1", smp.w1, "expected proportion from the first population");
    sample->add_option("--out", smp.out, "output prefix (<out>_db.csv, <out>_unique.csv)")
        ->required();

    FitArgs fit_args;
    auto* fitc = app.add_subcommand("fit", "fit a discrete Laplace mixture by EM");
    fitc->add_option("dataset", fit_args.dataset, "dataset CSV")->required();
    fitc->add_option("--clusters", fit_args.clusters, "cluster count N or range A:B")
        ->capture_default_str();
    fitc->add_option("--tol", fit_args.tol, "relative log-likelihood tolerance")
        ->capture_default_str();
    fitc->add_option("--max-iter", fit_args.max_iter, "EM iteration cap")->capture_default_str();
    fitc->add_option("--restarts", fit_args.restarts, "random-restart count")
        ->capture_default_str();
    fitc->add_option("--out", fit_args.out, "model JSON path (prefix when a range is given)")
        ->required();

    PredictArgs pred;
    auto* predict = app.add_subcommand("predict", "predict haplotype frequencies");
    predict->add_option("model", pred.model, "model JSON")->required();
    predict->add_option("haplotypes", pred.haplotypes, "haplotype CSV")->required();
    predict->add_option("--out", pred.out, "output CSV")->required();

    EvaluateArgs eval;
    auto* evaluate = app.add_subcommand("evaluate", "compare true and predicted frequencies");
    evaluate->add_option("unique", eval.unique, "unique-haplotype table CSV")->required();
    evaluate->add_option("model", eval.model, "model JSON")->required();
    evaluate->add_option("--out", eval.out, "evaluation CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : kExitFlags;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, common);
        if (sample->parsed()) return cmd_sample(smp, common);
        if (fitc->parsed()) return cmd_fit(fit_args, common);
        if (predict->parsed()) return cmd_predict(pred, common);
        if (evaluate->parsed()) return cmd_evaluate(eval, common);
    } catch (const FlagError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFlags;
    } catch (const disclap::FitError& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return kExitFitFailure;
    } catch (const disclap::io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fitc->parsed() ? kExitFitFailure : kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fitc->parsed() ? kExitFitFailure : kExitFlags;
    }
    return 0;
}
