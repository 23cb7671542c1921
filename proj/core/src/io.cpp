#include "disclap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace disclap::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

long long parse_int(const std::string& s, const std::filesystem::path& file, std::size_t line) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "expected an integer, got '" + s + "'");
    }
}

double parse_real(const std::string& s, const std::filesystem::path& file, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file, line, "expected a number, got '" + s + "'");
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::string locus_header(const std::vector<std::string>& locus_names) {
    std::string h;
    for (std::size_t k = 0; k < locus_names.size(); ++k) {
        if (k) h += ',';
        h += locus_names[k];
    }
    return h;
}

// header must start with r locus columns; returns r
std::size_t count_locus_columns(const std::vector<std::string>& header,
                                const std::vector<std::string>& trailing,
                                const std::filesystem::path& file) {
    if (header.size() < trailing.size() + 1)
        throw ParseError(file, 1, "header has too few columns");
    const std::size_t r = header.size() - trailing.size();
    for (std::size_t i = 0; i < trailing.size(); ++i)
        if (header[r + i] != trailing[i])
            throw ParseError(file, 1, "expected column '" + trailing[i] + "', got '" +
                                          header[r + i] + "'");
    return r;
}

}  // namespace

ParseError::ParseError(const std::filesystem::path& file, std::size_t line_no,
                       const std::string& what)
    : std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": " + what),
      line(line_no) {}

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

void write_population(const std::filesystem::path& path, const HaplotypeTable& table) {
    std::string out = locus_header(table.locus_names) + ",N\n";
    for (const auto& [h, n] : table.rows) {
        for (int allele : h) out += std::to_string(allele) + ",";
        out += std::to_string(n) + "\n";
    }
    atomic_write(path, out);
}

HaplotypeTable read_population(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path, 1, "missing header");
    const auto header = split_csv_line(lines[0]);
    const std::size_t r = count_locus_columns(header, {"N"}, path);

    HaplotypeTable table;
    table.locus_names.assign(header.begin(), header.begin() + r);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto fields = split_csv_line(lines[li]);
        if (fields.size() != r + 1)
            throw ParseError(path, li + 1, "expected " + std::to_string(r + 1) + " fields");
        std::vector<int> h(r);
        for (std::size_t k = 0; k < r; ++k)
            h[k] = static_cast<int>(parse_int(fields[k], path, li + 1));
        const long long n = parse_int(fields[r], path, li + 1);
        if (n < 1) throw ParseError(path, li + 1, "multiplicity must be >= 1");
        if (!table.rows.emplace(std::move(h), static_cast<std::uint64_t>(n)).second)
            throw ParseError(path, li + 1, "duplicate haplotype row");
    }
    if (table.rows.empty()) throw ParseError(path, 1, "population has no rows");
    return table;
}

void write_dataset(const std::filesystem::path& path, const IntMatrix& db,
                   const std::vector<std::string>& locus_names) {
    std::string out = locus_header(locus_names) + "\n";
    for (std::size_t i = 0; i < db.rows(); ++i) {
        for (std::size_t k = 0; k < db.cols(); ++k) {
            if (k) out += ',';
            out += std::to_string(db(i, k));
        }
        out += '\n';
    }
    atomic_write(path, out);
}

IntMatrix read_dataset(const std::filesystem::path& path, std::vector<std::string>* locus_names) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path, 1, "missing header");
    const auto header = split_csv_line(lines[0]);
    const std::size_t r = header.size();
    if (r == 0) throw ParseError(path, 1, "empty header");
    if (locus_names) locus_names->assign(header.begin(), header.end());

    IntMatrix db(lines.size() - 1, r);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto fields = split_csv_line(lines[li]);
        if (fields.size() != r)
            throw ParseError(path, li + 1, "expected " + std::to_string(r) + " fields");
        for (std::size_t k = 0; k < r; ++k)
            db(li - 1, k) = static_cast<int>(parse_int(fields[k], path, li + 1));
    }
    return db;
}

void write_unique_table(const std::filesystem::path& path, const SampledDataset& ds) {
    std::string out = locus_header(ds.locus_names) + ",Ndb,TrueFreq,Source\n";
    for (const auto& u : ds.unique) {
        for (int allele : u.haplotype) out += std::to_string(allele) + ",";
        out += std::to_string(u.count_in_sample) + "," + format_real(u.true_pop_freq) + "," +
               to_string(u.source) + "\n";
    }
    atomic_write(path, out);
}

SampledDataset read_unique_table(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path, 1, "missing header");
    const auto header = split_csv_line(lines[0]);
    const std::size_t r = count_locus_columns(header, {"Ndb", "TrueFreq", "Source"}, path);

    SampledDataset ds;
    ds.locus_names.assign(header.begin(), header.begin() + r);
    std::vector<std::vector<int>> db_rows;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto fields = split_csv_line(lines[li]);
        if (fields.size() != r + 3)
            throw ParseError(path, li + 1, "expected " + std::to_string(r + 3) + " fields");
        UniqueHaplotype u;
        u.haplotype.resize(r);
        for (std::size_t k = 0; k < r; ++k)
            u.haplotype[k] = static_cast<int>(parse_int(fields[k], path, li + 1));
        const long long ndb = parse_int(fields[r], path, li + 1);
        if (ndb < 1) throw ParseError(path, li + 1, "Ndb must be >= 1");
        u.count_in_sample = static_cast<std::uint64_t>(ndb);
        u.true_pop_freq = parse_real(fields[r + 1], path, li + 1);
        try {
            u.source = source_tag_from_string(fields[r + 2]);
        } catch (const std::exception& e) {
            throw ParseError(path, li + 1, e.what());
        }
        for (std::uint64_t i = 0; i < u.count_in_sample; ++i) db_rows.push_back(u.haplotype);
        ds.unique.push_back(std::move(u));
    }
    ds.db = IntMatrix::from_rows(db_rows);
    return ds;
}

void write_evaluation(const std::filesystem::path& path,
                      const std::vector<EvaluationRow>& rows,
                      const std::vector<std::string>& locus_names) {
    std::string out = locus_header(locus_names) + ",true_freq,predicted_freq,source\n";
    for (const auto& row : rows) {
        for (int allele : row.haplotype) out += std::to_string(allele) + ",";
        out += format_real(row.true_freq) + "," + format_real(row.predicted_freq) + "," +
               to_string(row.source) + "\n";
    }
    atomic_write(path, out);
}

void write_model(const std::filesystem::path& path, const MixtureModel& model,
                 const FitReport& report) {
    std::string out = "{\n";
    out += "  \"c\": " + std::to_string(model.clusters) + ",\n";
    out += "  \"r\": " + std::to_string(model.loci) + ",\n";
    out += "  \"locus_names\": [";
    for (std::size_t k = 0; k < model.loci; ++k) {
        if (k) out += ", ";
        out += "\"" + model.locus_names[k] + "\"";
    }
    out += "],\n";
    const auto real_list = [](const std::vector<double>& xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) s += ", ";
            s += format_real(xs[i]);
        }
        return s + "]";
    };
    out += "  \"tau\": " + real_list(model.tau) + ",\n";
    out += "  \"centers\": [";
    for (std::size_t j = 0; j < model.clusters; ++j) {
        if (j) out += ", ";
        out += "[";
        for (std::size_t k = 0; k < model.loci; ++k) {
            if (k) out += ", ";
            out += std::to_string(model.centers(j, k));
        }
        out += "]";
    }
    out += "],\n";
    out += "  \"omega\": " + real_list(model.omega) + ",\n";
    out += "  \"lambda\": " + real_list(model.lambda) + ",\n";
    out += "  \"fit\": {\"loglik\": " + format_real(report.final_loglik()) +
           ", \"bic\": " + format_real(report.bic) +
           ", \"iterations\": " + std::to_string(report.iterations) +
           ", \"converged\": " + (report.converged ? "true" : "false") + "}\n";
    out += "}\n";
    atomic_write(path, out);
}

ModelFile read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError(path, 0, e.what());
    }
    try {
        ModelFile mf;
        mf.model.clusters = j.at("c").get<std::size_t>();
        mf.model.loci = j.at("r").get<std::size_t>();
        mf.model.locus_names = j.at("locus_names").get<std::vector<std::string>>();
        mf.model.tau = j.at("tau").get<std::vector<double>>();
        mf.model.omega = j.at("omega").get<std::vector<double>>();
        mf.model.lambda = j.at("lambda").get<std::vector<double>>();
        const auto centers = j.at("centers").get<std::vector<std::vector<int>>>();
        mf.model.centers = IntMatrix::from_rows(centers);
        if (mf.model.centers.rows() != mf.model.clusters ||
            mf.model.tau.size() != mf.model.clusters ||
            mf.model.omega.size() != mf.model.clusters ||
            mf.model.lambda.size() != mf.model.loci ||
            mf.model.locus_names.size() != mf.model.loci ||
            (mf.model.clusters > 0 && mf.model.centers.cols() != mf.model.loci))
            throw std::runtime_error("inconsistent model dimensions");
        const auto& fit = j.at("fit");
        mf.report.loglik_trace = {fit.at("loglik").get<double>()};
        mf.report.bic = fit.at("bic").get<double>();
        mf.report.iterations = fit.at("iterations").get<std::size_t>();
        mf.report.converged = fit.at("converged").get<bool>();
        return mf;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(path, 0, e.what());
    }
}

}  // namespace disclap::io
