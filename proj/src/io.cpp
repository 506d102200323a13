#include "robustcs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace robustcs {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line_no) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw MalformedInputError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" + cell +
                                  "'");
    }
    return v;
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FileNotFoundError("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool header_seen = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_record(line);
        if (!header_seen) {
            header_seen = true;
            width = fields.size();
            continue;
        }
        if (fields.size() != width) {
            throw MalformedInputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(width) + " fields, found " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(width);
        for (const auto& f : fields) row.push_back(parse_cell(f, path, line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw MalformedInputError(path.string() + ": no data rows");
    }
    return rows;
}

void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
    out.open(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    const auto rows = read_numeric_csv(path);
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

Vector read_csv_vector(const std::filesystem::path& path) {
    const auto rows = read_numeric_csv(path);
    if (rows.front().size() != 1) {
        throw MalformedInputError(path.string() + ": expected a single column");
    }
    Vector v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = rows[i][0];
    return v;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out;
    open_for_write(out, path);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        out << (j ? "," : "") << "a" << (j + 1);
    }
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << format_double(m(i, j));
        }
        out << '\n';
    }
}

void write_csv_vector(const std::filesystem::path& path, const Vector& v, const std::string& header) {
    std::ofstream out;
    open_for_write(out, path);
    out << header << '\n';
    for (double x : v) out << format_double(x) << '\n';
}

LoadedProblem load_problem(const std::filesystem::path& matrix_path, const std::filesystem::path& obs_path,
                           bool normalize) {
    MeasurementMatrix a(read_csv_matrix(matrix_path));
    Vector y = read_csv_vector(obs_path);
    if (static_cast<std::size_t>(y.size()) != a.rows()) {
        throw DimensionMismatchError("matrix has " + std::to_string(a.rows()) + " rows but observation vector has " +
                                     std::to_string(y.size()) + " entries");
    }
    if (normalize) a.normalize_columns();
    return {std::move(a), std::move(y)};
}

void write_trial_csv(std::ostream& out, const BenchmarkReport& report) {
    const auto& cfg = report.config;
    out << "trial,method,family,dof,snr_db,support_match,sq_error,iterations,sigma_hat,converged,noise_scale\n";
    for (const auto& r : report.trials) {
        const auto& pt = cfg.noise_grid[r.point];
        out << (r.trial + 1) << ',' << cfg.methods[r.method].name << ',' << to_string(pt.family) << ','
            << (pt.dof ? format_double(*pt.dof) : "") << ',' << format_double(pt.snr_db) << ','
            << (r.support_match ? 1 : 0) << ',' << format_double(r.sq_error) << ',' << r.iterations << ','
            << format_double(r.sigma_hat) << ',' << (r.converged ? 1 : 0) << ',' << format_double(r.noise_scale)
            << '\n';
    }
}

void write_summary_csv(std::ostream& out, const BenchmarkReport& report) {
    const auto& cfg = report.config;
    out << "family,dof,snr_db,method,mse_db,mse_linear,per,trials_run,mean_iterations,converged_rate,"
           "median_sigma_ratio\n";
    for (const auto& c : report.cells) {
        const auto& pt = cfg.noise_grid[c.point];
        out << to_string(pt.family) << ',' << (pt.dof ? format_double(*pt.dof) : "") << ','
            << format_double(pt.snr_db) << ',' << cfg.methods[c.method].name << ',' << format_double(c.mse_db)
            << ',' << format_double(c.mse_linear) << ',' << format_double(c.per_rate) << ',' << c.trials_run << ','
            << format_double(c.mean_iterations) << ',' << format_double(c.converged_rate) << ','
            << format_double(c.median_sigma_ratio) << '\n';
    }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& pt : cfg.noise_grid) {
        grid.push_back({{"family", to_string(pt.family)},
                        {"dof", pt.dof ? nlohmann::json(*pt.dof) : nlohmann::json(nullptr)},
                        {"snr_db", pt.snr_db}});
    }
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : cfg.methods) {
        methods.push_back({{"name", m.name}, {"c", m.huber_c ? nlohmann::json(*m.huber_c) : nlohmann::json(nullptr)}});
    }
    return {{"name", cfg.name},
            {"provenance", cfg.provenance},
            {"n", cfg.n},
            {"p", cfg.p},
            {"k", cfg.k},
            {"amplitude", cfg.amplitude},
            {"num_trials", cfg.num_trials},
            {"master_seed", cfg.master_seed},
            {"fixed_matrix", cfg.fixed_matrix},
            {"tolerance", cfg.control.tolerance},
            {"max_iterations", cfg.control.max_iterations},
            {"max_halvings", cfg.control.max_halvings},
            {"noise_grid", grid},
            {"methods", methods}};
}

nlohmann::json report_to_json(const BenchmarkReport& report) {
    const auto& cfg = report.config;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& c : report.cells) {
        const auto& pt = cfg.noise_grid[c.point];
        results.push_back({
            {"family", to_string(pt.family)},
            {"dof", pt.dof ? nlohmann::json(*pt.dof) : nlohmann::json(nullptr)},
            {"snr_db", pt.snr_db},
            {"noise_scale", c.noise_scale},
            {"method", cfg.methods[c.method].name},
            // -inf (perfect recovery) has no JSON spelling.
            {"mse_db", std::isfinite(c.mse_db) ? nlohmann::json(c.mse_db) : nlohmann::json(nullptr)},
            {"mse_linear", c.mse_linear},
            {"per", c.per_rate},
            {"trials_run", c.trials_run},
            {"mean_iterations", c.mean_iterations},
            {"converged_rate", c.converged_rate},
            {"median_sigma_ratio", c.median_sigma_ratio},
            {"monotonicity_violations", c.monotonicity_violations},
        });
    }
    return {{"schema", kReportSchema},
            {"config", config_to_json(cfg)},
            {"seeding", "mt19937_64 per stream; seed = splitmix64(splitmix64(splitmix64(master) ^ stream) + trial), "
                        "streams: 1 matrix, 2 signal, 3 noise"},
            {"results", results}};
}

nlohmann::json recovery_to_json(const RecoveryResult& result, const std::string& method, std::size_t k) {
    nlohmann::json support = nlohmann::json::array();
    for (auto j : result.signal.support()) support.push_back(j + 1);
    std::vector<double> coeffs(result.signal.coefficients().begin(), result.signal.coefficients().end());
    return {{"schema", "robustcs.recovery/1"},
            {"method", method},
            {"k", k},
            {"sigma_hat", result.sigma_hat},
            {"support", support},
            {"coefficients", coeffs},
            {"iterations", result.iterations},
            {"converged", result.converged},
            {"exact_fit", result.exact_fit}};
}

}  // namespace robustcs
