#include "robustcs/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "robustcs/io.hpp"

#ifndef ROBUSTCS_VERSION
#define ROBUSTCS_VERSION "dev"
#endif

namespace robustcs {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
    std::istringstream in(text);
    T v{};
    if (!(in >> v) || !(in >> std::ws).eof()) {
        throw ConfigError("invalid value for " + what + ": '" + text + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    if (text.empty() || text.front() == '-') throw ConfigError("invalid value for " + what + ": '" + text + "'");
    return parse_number<std::size_t>(text, what);
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("invalid boolean for " + what + ": '" + text + "'");
}

NoiseFamily require_family(const std::string& name) {
    auto fam = parse_noise_family(name);
    if (!fam) throw ConfigError("unknown noise family '" + name + "'");
    return *fam;
}

std::vector<MethodSpec> parse_methods(const std::vector<std::string>& names) {
    std::vector<MethodSpec> out;
    for (const auto& n : names) {
        auto m = parse_method(n);
        if (!m) throw ConfigError("unknown method '" + n + "' (use iht, hiht-c1, hiht-c2 or hiht-<c>)");
        out.push_back(*m);
    }
    return out;
}

std::vector<NoisePoint> build_grid(NoiseFamily family, const std::vector<double>& dofs,
                                   const std::vector<double>& snrs) {
    if (snrs.empty()) throw ConfigError("noise grid needs at least one SNR value");
    const bool is_t = family == NoiseFamily::StudentT;
    if (is_t && dofs.empty()) throw ConfigError("Student-t noise needs degrees of freedom");
    if (!is_t && !dofs.empty()) throw ConfigError("degrees of freedom only apply to Student-t noise");
    std::vector<NoisePoint> out;
    for (double snr : snrs) {
        if (is_t) {
            for (double nu : dofs) out.push_back({family, nu, snr});
        } else {
            out.push_back({family, std::nullopt, snr});
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(parse_number<double>(item, what));
    return out;
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string::npos) throw ConfigError("dims must look like NxP, got '" + text + "'");
    return {parse_count(text.substr(0, x), "dims"), parse_count(text.substr(x + 1), "dims")};
}

ExperimentConfig preset_or_throw(const std::string& name) {
    auto cfg = find_preset(name);
    if (!cfg) {
        std::string known;
        for (const auto& p : experiment_presets()) known += (known.empty() ? "" : ", ") + p.name;
        throw UnknownPresetError("unknown preset '" + name + "' (known: " + known + ")");
    }
    return *cfg;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%d-%H%M%S");
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct BenchOptions {
    std::optional<std::string> preset;
    std::optional<std::string> config;
    std::optional<std::size_t> trials;
    bool full = false;
    std::vector<double> snr;
    std::optional<std::string> family;
    std::vector<double> dof;
    std::vector<std::string> methods;
    std::vector<double> c;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> dims;
    std::optional<unsigned> threads;
    std::string format = "both";
    std::optional<std::string> output_dir;
    bool fixed_matrix = false;
};

struct RecoverOptions {
    std::string matrix;
    std::string obs;
    std::string method = "hiht-c1";
    std::optional<double> c;
    std::size_t k = 0;
    bool normalize = false;
    std::optional<double> tolerance;
    std::optional<std::size_t> max_iterations;
    std::optional<std::string> output_dir;
};

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("ROBUSTCS_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    return parse_number<std::uint64_t>(raw, "ROBUSTCS_SEED");
}

ExperimentConfig resolve_bench_config(const BenchOptions& o) {
    ExperimentConfig cfg;
    if (o.config) {
        std::ifstream in(*o.config);
        if (!in) throw FileNotFoundError("cannot open config file " + *o.config);
        cfg = parse_experiment_config(in, *o.config);
        if (o.preset) throw ConfigError("give either --preset or --config, not both (use `preset = ...` inside the file)");
    } else if (o.preset) {
        cfg = preset_or_throw(*o.preset);
    } else {
        throw ConfigError("bench needs --preset or --config");
    }

    if (o.full) cfg.num_trials = kFullTrials;
    if (o.trials) cfg.num_trials = *o.trials;
    if (o.k) cfg.k = *o.k;
    if (o.dims) std::tie(cfg.n, cfg.p) = parse_dims(*o.dims);
    if (o.threads) cfg.threads = *o.threads;
    if (o.fixed_matrix) cfg.fixed_matrix = true;
    if (o.seed) {
        cfg.master_seed = *o.seed;
    } else if (auto s = env_seed()) {
        cfg.master_seed = *s;
    }
    if (!o.methods.empty()) cfg.methods = parse_methods(o.methods);
    for (double c : o.c) {
        if (!(c > 0.0)) throw ConfigError("--c must be positive");
        cfg.methods.push_back(MethodSpec::hiht(c, "hiht-" + format_double(c)));
    }

    if (o.family || !o.dof.empty() || !o.snr.empty()) {
        // Rebuild the grid from the overridden axes, keeping the others.
        std::vector<NoiseFamily> families;
        std::vector<double> dofs;
        std::vector<double> snrs;
        for (const auto& pt : cfg.noise_grid) {
            if (std::find(families.begin(), families.end(), pt.family) == families.end()) families.push_back(pt.family);
            if (pt.dof && std::find(dofs.begin(), dofs.end(), *pt.dof) == dofs.end()) dofs.push_back(*pt.dof);
            if (std::find(snrs.begin(), snrs.end(), pt.snr_db) == snrs.end()) snrs.push_back(pt.snr_db);
        }
        if (o.family) families = {require_family(*o.family)};
        if (!o.dof.empty()) dofs = o.dof;
        if (!o.snr.empty()) snrs = o.snr;
        cfg.noise_grid.clear();
        for (NoiseFamily fam : families) {
            const bool is_t = fam == NoiseFamily::StudentT;
            auto pts = build_grid(fam, is_t ? dofs : std::vector<double>{}, snrs);
            cfg.noise_grid.insert(cfg.noise_grid.end(), pts.begin(), pts.end());
        }
        cfg.name += "+overrides";
    }
    cfg.validate();
    return cfg;
}

void print_summary(std::ostream& out, const BenchmarkReport& report) {
    const auto& cfg = report.config;
    out << "# " << cfg.name << "  n=" << cfg.n << " p=" << cfg.p << " K=" << cfg.k << " trials=" << cfg.num_trials
        << " seed=" << cfg.master_seed << '\n';
    out << std::left << std::setw(10) << "family" << std::setw(7) << "dof" << std::setw(8) << "snr" << std::setw(10)
        << "method" << std::right << std::setw(10) << "mse_db" << std::setw(8) << "per" << std::setw(8) << "iters"
        << '\n';
    for (const auto& c : report.cells) {
        const auto& pt = cfg.noise_grid[c.point];
        std::ostringstream dof;
        if (pt.dof) dof << *pt.dof;
        out << std::left << std::setw(10) << to_string(pt.family) << std::setw(7) << dof.str() << std::setw(8)
            << pt.snr_db << std::setw(10) << cfg.methods[c.method].name << std::right << std::fixed
            << std::setprecision(2) << std::setw(10) << c.mse_db << std::setw(8) << c.per_rate << std::setw(8)
            << std::setprecision(1) << c.mean_iterations << '\n';
        out << std::defaultfloat << std::setprecision(6);
    }
}

int run_bench(const BenchOptions& o, const std::vector<std::string>& args, std::ostream& out) {
    if (o.format != "csv" && o.format != "json" && o.format != "both") {
        throw ConfigError("--format must be csv, json or both");
    }
    const ExperimentConfig cfg = resolve_bench_config(o);
    const fs::path dir = o.output_dir ? fs::path(*o.output_dir)
                                      : fs::path("results") / (timestamp() + "-" + std::to_string(cfg.master_seed));
    fs::create_directories(dir);

    const auto start = std::chrono::steady_clock::now();
    const BenchmarkReport report = run_experiment(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::string> artifacts;
    if (o.format != "csv") {
        write_text(dir / "report.json", report_to_json(report).dump(2) + "\n");
        artifacts.push_back("report.json");
    }
    if (o.format != "json") {
        std::ostringstream trials;
        write_trial_csv(trials, report);
        write_text(dir / "trials.csv", trials.str());
        std::ostringstream summary;
        write_summary_csv(summary, report);
        write_text(dir / "summary.csv", summary.str());
        artifacts.push_back("trials.csv");
        artifacts.push_back("summary.csv");
    }
    const nlohmann::json manifest = {{"schema", "robustcs.manifest/1"},
                                     {"version", ROBUSTCS_VERSION},
                                     {"command", "bench"},
                                     {"args", args},
                                     {"config", config_to_json(cfg)},
                                     {"artifacts", artifacts},
                                     {"wall_seconds", wall}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    print_summary(out, report);
    out << "wrote " << dir.string() << '\n';
    return kExitOk;
}

int run_recover(const RecoverOptions& o, const std::vector<std::string>& args, std::ostream& out) {
    auto method = parse_method(o.method);
    if (!method) throw ConfigError("unknown method '" + o.method + "'");
    if (o.c) {
        if (!method->huber_c) throw ConfigError("--c only applies to hiht methods");
        if (!(*o.c > 0.0)) throw ConfigError("--c must be positive");
        method = MethodSpec::hiht(*o.c, "hiht-" + format_double(*o.c));
    }
    if (o.k == 0) throw ConfigError("--k must be at least 1");

    const LoadedProblem problem = load_problem(o.matrix, o.obs, o.normalize);
    IterationControl ctl;
    ctl.sparsity = o.k;
    if (o.tolerance) ctl.tolerance = *o.tolerance;
    if (o.max_iterations) ctl.max_iterations = *o.max_iterations;
    const RecoveryResult result = run_method(*method, problem.matrix, problem.observations, ctl);

    const fs::path dir = o.output_dir ? fs::path(*o.output_dir) : fs::path("results") / (timestamp() + "-recover");
    fs::create_directories(dir);
    const nlohmann::json doc = recovery_to_json(result, method->name, o.k);
    write_text(dir / "recovery.json", doc.dump(2) + "\n");
    const nlohmann::json manifest = {{"schema", "robustcs.manifest/1"},
                                     {"version", ROBUSTCS_VERSION},
                                     {"command", "recover"},
                                     {"args", args},
                                     {"matrix", fs::absolute(o.matrix).string()},
                                     {"observations", fs::absolute(o.obs).string()},
                                     {"method", method->name},
                                     {"c", method->huber_c ? nlohmann::json(*method->huber_c) : nlohmann::json(nullptr)},
                                     {"k", o.k},
                                     {"normalize", o.normalize},
                                     {"tolerance", ctl.tolerance},
                                     {"max_iterations", ctl.max_iterations},
                                     {"artifacts", {"recovery.json"}}};
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    out << doc.dump(2) << '\n';
    return kExitOk;
}

int run_presets(std::ostream& out) {
    for (const auto& p : experiment_presets()) {
        out << p.name << "\n  " << p.provenance << "\n  n=" << p.n << " p=" << p.p << " K=" << p.k
            << " amplitude=" << p.amplitude << " trials=" << p.num_trials << " (--full: " << kFullTrials << ")\n  grid:";
        for (const auto& pt : p.noise_grid) {
            out << ' ' << to_string(pt.family);
            if (pt.dof) out << "(nu=" << *pt.dof << ")";
            out << '@' << pt.snr_db << "dB";
        }
        out << "\n  methods:";
        for (const auto& m : p.methods) out << ' ' << m.name;
        out << '\n';
    }
    return kExitOk;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::string& source) {
    struct Entry {
        std::string key;
        std::string value;
        std::size_t line;
    };
    std::vector<Entry> top;
    std::vector<std::vector<Entry>> grids;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line != "[grid]") throw ConfigError(where + ": unknown section " + line);
            grids.emplace_back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (e.value.empty()) throw ConfigError(where + ": empty value for " + e.key);
        (grids.empty() ? top : grids.back()).push_back(std::move(e));
    }

    ExperimentConfig cfg;
    for (const auto& e : top) {
        if (e.key == "preset") cfg = preset_or_throw(e.value);
    }
    for (const auto& e : top) {
        const std::string what = source + ":" + std::to_string(e.line) + ": " + e.key;
        if (e.key == "preset") continue;
        else if (e.key == "name") cfg.name = e.value;
        else if (e.key == "n") cfg.n = parse_count(e.value, what);
        else if (e.key == "p") cfg.p = parse_count(e.value, what);
        else if (e.key == "k") cfg.k = parse_count(e.value, what);
        else if (e.key == "amplitude") cfg.amplitude = parse_number<double>(e.value, what);
        else if (e.key == "trials") cfg.num_trials = parse_count(e.value, what);
        else if (e.key == "seed") cfg.master_seed = parse_number<std::uint64_t>(e.value, what);
        else if (e.key == "methods") cfg.methods = parse_methods(split_list(e.value));
        else if (e.key == "fixed_matrix") cfg.fixed_matrix = parse_bool(e.value, what);
        else if (e.key == "tolerance") cfg.control.tolerance = parse_number<double>(e.value, what);
        else if (e.key == "max_iterations") cfg.control.max_iterations = parse_count(e.value, what);
        else if (e.key == "max_halvings") cfg.control.max_halvings = parse_count(e.value, what);
        else if (e.key == "threads") cfg.threads = static_cast<unsigned>(parse_count(e.value, what));
        else throw ConfigError(source + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "'");
    }
    if (!grids.empty()) {
        cfg.noise_grid.clear();
        for (const auto& g : grids) {
            std::optional<NoiseFamily> family;
            std::vector<double> dofs;
            std::vector<double> snrs;
            for (const auto& e : g) {
                const std::string what = source + ":" + std::to_string(e.line) + ": " + e.key;
                if (e.key == "family") family = require_family(e.value);
                else if (e.key == "dof") dofs = parse_double_list(e.value, what);
                else if (e.key == "snr") snrs = parse_double_list(e.value, what);
                else throw ConfigError(what + ": unknown key in [grid]");
            }
            if (!family) throw ConfigError(source + ": [grid] section without family");
            auto pts = build_grid(*family, dofs, snrs);
            cfg.noise_grid.insert(cfg.noise_grid.end(), pts.begin(), pts.end());
        }
    }
    if (cfg.methods.empty()) {
        cfg.methods = parse_methods({"iht", "hiht-c1", "hiht-c2"});
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(source + ": " + ex.what());
    }
    return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust sparse signal recovery: Huber IHT with joint scale estimation, normalized IHT, "
                 "and a Monte-Carlo benchmark harness."};
    app.name("robustcs");
    app.require_subcommand(1);

    BenchOptions bo;
    auto* bench = app.add_subcommand("bench", "Run a Monte-Carlo experiment and write reports");
    bench->add_option("--preset", bo.preset, "Preset name (see `robustcs presets`)");
    bench->add_option("--config", bo.config, "Experiment file (key = value, [grid] sections)");
    bench->add_option("--trials", bo.trials, "Number of Monte-Carlo trials");
    bench->add_flag("--full", bo.full, "Use the full-scale trial count (2000)");
    bench->add_option("--snr", bo.snr, "SNR values in dB")->delimiter(',');
    bench->add_option("--family", bo.family, "Noise family: gaussian, laplace, studentt");
    bench->add_option("--dof", bo.dof, "Student-t degrees of freedom")->delimiter(',');
    bench->add_option("--methods", bo.methods, "Methods: iht, hiht-c1, hiht-c2, hiht-<c>")->delimiter(',');
    bench->add_option("--c", bo.c, "Add a Huber IHT method with this threshold")->delimiter(',');
    bench->add_option("--k", bo.k, "Sparsity level K");
    bench->add_option("--seed", bo.seed, "Master seed (fallback: ROBUSTCS_SEED)");
    bench->add_option("--dims", bo.dims, "Problem size as NxP (rows x columns)");
    bench->add_option("--threads", bo.threads, "Worker threads, 0 = auto");
    bench->add_option("--format", bo.format, "csv, json or both");
    bench->add_option("--output-dir", bo.output_dir, "Output directory (default results/<timestamp>-<seed>)");
    bench->add_flag("--fixed-matrix", bo.fixed_matrix, "Reuse one measurement matrix for all trials");

    RecoverOptions ro;
    auto* recover = app.add_subcommand("recover", "Recover a sparse signal from a matrix and observation file");
    recover->add_option("--matrix", ro.matrix, "Measurement matrix CSV (header row)")->required();
    recover->add_option("--obs", ro.obs, "Observation vector CSV (header row, one column)")->required();
    recover->add_option("--method", ro.method, "iht, hiht-c1, hiht-c2 or hiht-<c>");
    recover->add_option("--c", ro.c, "Huber threshold, overrides the method's");
    recover->add_option("--k", ro.k, "Sparsity level K")->required();
    recover->add_flag("--normalize", ro.normalize, "Scale matrix columns to unit norm after loading");
    recover->add_option("--tolerance", ro.tolerance, "Relative-change stopping tolerance");
    recover->add_option("--max-iterations", ro.max_iterations, "Iteration budget");
    recover->add_option("--output-dir", ro.output_dir, "Output directory (default results/<timestamp>-recover)");

    auto* presets = app.add_subcommand("presets", "List the built-in experiment presets");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "robustcs: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (bench->parsed()) return run_bench(bo, args, out);
        if (recover->parsed()) return run_recover(ro, args, out);
        if (presets->parsed()) return run_presets(out);
    } catch (const FileNotFoundError& e) {
        err << "robustcs: file not found: " << e.what() << '\n';
        return kExitFileNotFound;
    } catch (const MalformedInputError& e) {
        err << "robustcs: malformed input: " << e.what() << '\n';
        return kExitMalformed;
    } catch (const ConfigError& e) {
        err << "robustcs: config error: " << e.what() << '\n';
        return kExitMalformed;
    } catch (const UnknownPresetError& e) {
        err << "robustcs: " << e.what() << '\n';
        return kExitUnknownPreset;
    } catch (const DimensionMismatchError& e) {
        err << "robustcs: dimension mismatch: " << e.what() << '\n';
        return kExitDimensionMismatch;
    } catch (const std::invalid_argument& e) {
        err << "robustcs: invalid value: " << e.what() << '\n';
        return kExitInvalidValue;
    } catch (const std::exception& e) {
        err << "robustcs: error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace robustcs
