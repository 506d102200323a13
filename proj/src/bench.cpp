#include "robustcs/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace robustcs {

namespace {

constexpr std::uint64_t kMatrixStream = 1;
constexpr std::uint64_t kSignalStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::size_t count_violations(const std::vector<double>& trace) {
    std::size_t bad = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (!(trace[i] < trace[i - 1])) ++bad;
    }
    return bad;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

std::vector<NoisePoint> snr_sweep(NoiseFamily family, std::optional<double> dof, std::vector<double> snrs) {
    std::vector<NoisePoint> out;
    for (double s : snrs) out.push_back({family, dof, s});
    return out;
}

std::vector<MethodSpec> standard_methods() {
    return {MethodSpec::iht(), MethodSpec::hiht(HuberParams::kC1, "hiht-c1"),
            MethodSpec::hiht(HuberParams::kC2, "hiht-c2")};
}

}  // namespace

MethodSpec MethodSpec::iht() { return {"iht", std::nullopt}; }
MethodSpec MethodSpec::hiht(double c, std::string name) { return {std::move(name), c}; }

std::optional<MethodSpec> parse_method(const std::string& name) {
    if (name == "iht") return MethodSpec::iht();
    if (name == "hiht-c1") return MethodSpec::hiht(HuberParams::kC1, name);
    if (name == "hiht-c2") return MethodSpec::hiht(HuberParams::kC2, name);
    if (name.rfind("hiht-", 0) == 0) {
        const std::string tail = name.substr(5);
        try {
            std::size_t used = 0;
            const double c = std::stod(tail, &used);
            if (used == tail.size() && c > 0.0 && std::isfinite(c)) return MethodSpec::hiht(c, name);
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

RecoveryResult run_method(const MethodSpec& method, const MeasurementMatrix& matrix, const Vector& observations,
                          const IterationControl& control) {
    if (!method.huber_c) {
        return iht_reference(matrix, observations, control);
    }
    return hiht_recover(matrix, observations, EstimatorConfig{HuberParams(*method.huber_c), control});
}

void ExperimentConfig::validate() const {
    if (num_trials < 1) throw std::invalid_argument("num_trials must be at least 1");
    if (methods.empty()) throw std::invalid_argument("method list is empty");
    if (noise_grid.empty()) throw std::invalid_argument("noise grid is empty");
    if (k < 1 || k > p) throw std::invalid_argument("sparsity must satisfy 1 <= K <= p");
    if (n <= k) throw std::invalid_argument("need n > K");
    if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude must be positive");
    for (const auto& pt : noise_grid) {
        if (!std::isfinite(pt.snr_db)) throw std::invalid_argument("SNR values must be finite");
        // Throws on a family/dof mismatch.
        NoiseSpec(pt.family, pt.dof, scale_from_snr(pt.snr_db, amplitude));
    }
    IterationControl ctl = control;
    ctl.sparsity = k;
    ctl.validate();
}

const CellSummary& BenchmarkReport::cell(std::size_t point, std::size_t method) const {
    return cells.at(point * config.methods.size() + method);
}

double mse_db_from_linear(double linear) {
    if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(linear);
}

double mse(const std::vector<SparseSignal>& estimates, const std::vector<SparseSignal>& truths) {
    if (estimates.empty() || estimates.size() != truths.size()) {
        throw std::invalid_argument("mse needs equal-length, nonempty lists");
    }
    double sum = 0.0;
    for (std::size_t q = 0; q < estimates.size(); ++q) {
        if (estimates[q].size() != truths[q].size()) throw std::invalid_argument("mse: signal length mismatch");
        sum += (estimates[q].coefficients() - truths[q].coefficients()).squaredNorm();
    }
    return mse_db_from_linear(sum / double(estimates.size()));
}

double per(const std::vector<SparseSignal>& estimates, const std::vector<SparseSignal>& truths) {
    if (estimates.empty() || estimates.size() != truths.size()) {
        throw std::invalid_argument("per needs equal-length, nonempty lists");
    }
    std::size_t hits = 0;
    for (std::size_t q = 0; q < estimates.size(); ++q) {
        if (estimates[q].support() == truths[q].support()) ++hits;
    }
    return double(hits) / double(estimates.size());
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    return splitmix64(splitmix64(splitmix64(master) ^ stream) + index);
}

ProblemInstance generate_trial(const ExperimentConfig& cfg, std::size_t trial, std::size_t point) {
    const NoisePoint& pt = cfg.noise_grid.at(point);
    Rng matrix_rng(derive_seed(cfg.master_seed, kMatrixStream, cfg.fixed_matrix ? 0 : trial));
    Rng signal_rng(derive_seed(cfg.master_seed, kSignalStream, trial));
    Rng noise_rng(derive_seed(cfg.master_seed, kNoiseStream, trial));

    MeasurementMatrix a = generate_measurement_matrix(cfg.n, cfg.p, matrix_rng);
    SparseSignal x = generate_sparse_signal(cfg.p, cfg.k, cfg.amplitude, signal_rng);
    const double scale = scale_from_snr(pt.snr_db, cfg.amplitude);
    Vector noise = sample_noise(NoiseSpec(pt.family, pt.dof, scale), cfg.n, noise_rng);
    return make_instance(std::move(a), std::move(x), std::move(noise), scale);
}

std::uint64_t checksum(const MeasurementMatrix& matrix, const Vector& observations) {
    // FNV-1a over the raw bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const double* data, Eigen::Index count) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < std::size_t(count) * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    mix(matrix.entries().data(), matrix.entries().size());
    mix(observations.data(), observations.size());
    return h;
}

std::vector<CellSummary> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& trials) {
    const std::size_t points = cfg.noise_grid.size();
    const std::size_t methods = cfg.methods.size();
    std::vector<CellSummary> cells(points * methods);
    std::vector<std::vector<double>> ratios(cells.size());
    for (std::size_t pt = 0; pt < points; ++pt) {
        for (std::size_t m = 0; m < methods; ++m) {
            auto& c = cells[pt * methods + m];
            c.point = pt;
            c.method = m;
            c.noise_scale = scale_from_snr(cfg.noise_grid[pt].snr_db, cfg.amplitude);
        }
    }
    std::vector<double> sq(cells.size(), 0.0);
    std::vector<double> iters(cells.size(), 0.0);
    std::vector<std::size_t> hits(cells.size(), 0);
    std::vector<std::size_t> conv(cells.size(), 0);
    for (const auto& r : trials) {
        const std::size_t idx = r.point * methods + r.method;
        auto& c = cells.at(idx);
        ++c.trials_run;
        sq[idx] += r.sq_error;
        iters[idx] += double(r.iterations);
        hits[idx] += r.support_match ? 1 : 0;
        conv[idx] += r.converged ? 1 : 0;
        c.monotonicity_violations += r.monotonicity_violations;
        ratios[idx].push_back(r.sigma_hat / r.noise_scale);
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& c = cells[i];
        if (c.trials_run == 0) continue;
        const double t = double(c.trials_run);
        c.mse_linear = sq[i] / t;
        c.mse_db = mse_db_from_linear(c.mse_linear);
        c.per_rate = double(hits[i]) / t;
        c.mean_iterations = iters[i] / t;
        c.converged_rate = double(conv[i]) / t;
        c.median_sigma_ratio = median(std::move(ratios[i]));
    }
    return cells;
}

BenchmarkReport run_experiment(const ExperimentConfig& cfg_in) {
    cfg_in.validate();
    ExperimentConfig cfg = cfg_in;
    cfg.control.sparsity = cfg.k;

    const std::size_t points = cfg.noise_grid.size();
    const std::size_t methods = cfg.methods.size();
    const std::size_t per_trial = points * methods;

    BenchmarkReport report;
    report.config = cfg;
    report.trials.resize(cfg.num_trials * per_trial);

    auto run_trial = [&](std::size_t trial) {
        for (std::size_t pt = 0; pt < points; ++pt) {
            const ProblemInstance inst = generate_trial(cfg, trial, pt);
            for (std::size_t m = 0; m < methods; ++m) {
                TrialRecord rec;
                rec.trial = trial;
                rec.point = pt;
                rec.method = m;
                rec.noise_scale = inst.noise_scale;
                rec.data_checksum = checksum(inst.matrix, inst.observations);
                const RecoveryResult res = run_method(cfg.methods[m], inst.matrix, inst.observations, cfg.control);
                rec.converged = res.converged;
                rec.stop = res.stop;
                rec.iterations = res.iterations;
                rec.sigma_hat = res.sigma_hat;
                rec.sq_error = (res.signal.coefficients() - inst.truth.coefficients()).squaredNorm();
                rec.support_match = res.converged && res.signal.support() == inst.truth.support();
                rec.monotonicity_violations = count_violations(res.objective_trace);
                report.trials[(trial * points + pt) * methods + m] = rec;
            }
        }
    };

    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.num_trials));
    if (threads <= 1) {
        for (std::size_t t = 0; t < cfg.num_trials; ++t) run_trial(t);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < cfg.num_trials; t = next++) {
                    try {
                        run_trial(t);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Streaming pass in trial order.
    report.cells.resize(per_trial);
    std::vector<std::vector<double>> ratios(per_trial);
    for (std::size_t pt = 0; pt < points; ++pt) {
        for (std::size_t m = 0; m < methods; ++m) {
            auto& c = report.cells[pt * methods + m];
            c.point = pt;
            c.method = m;
            c.noise_scale = scale_from_snr(cfg.noise_grid[pt].snr_db, cfg.amplitude);
        }
    }
    for (const auto& r : report.trials) {
        const std::size_t idx = r.point * methods + r.method;
        auto& c = report.cells[idx];
        const double t = double(++c.trials_run);
        c.mse_linear += (r.sq_error - c.mse_linear) / t;
        c.per_rate += ((r.support_match ? 1.0 : 0.0) - c.per_rate) / t;
        c.mean_iterations += (double(r.iterations) - c.mean_iterations) / t;
        c.converged_rate += ((r.converged ? 1.0 : 0.0) - c.converged_rate) / t;
        c.monotonicity_violations += r.monotonicity_violations;
        ratios[idx].push_back(r.sigma_hat / r.noise_scale);
    }
    for (std::size_t i = 0; i < per_trial; ++i) {
        auto& c = report.cells[i];
        c.mse_db = mse_db_from_linear(c.mse_linear);
        c.median_sigma_ratio = median(std::move(ratios[i]));
    }
    return report;
}

std::vector<ExperimentConfig> experiment_presets(std::size_t num_trials) {
    std::vector<double> sweep;
    for (int s = 20; s <= 40; s += 2) sweep.push_back(double(s));
    const std::vector<double> dofs{1.0, 1.25, 1.5, 1.75, 2.0, 3.0, 4.0, 5.0};

    std::vector<NoisePoint> student;
    for (double snr : {40.0, 20.0}) {
        for (double nu : dofs) student.push_back({NoiseFamily::StudentT, nu, snr});
    }

    std::vector<ExperimentConfig> base(3);
    base[0].name = "I-gaussian";
    base[0].provenance = "Experiment I, Gaussian N(0, sd^2) noise, MSE vs SNR 20-40 dB";
    base[0].noise_grid = snr_sweep(NoiseFamily::Gaussian, std::nullopt, sweep);
    base[1].name = "I-laplace";
    base[1].provenance = "Experiment I, Laplace(0, MeAD) noise, MSE vs SNR 20-40 dB";
    base[1].noise_grid = snr_sweep(NoiseFamily::Laplace, std::nullopt, sweep);
    base[2].name = "II-studentT";
    base[2].provenance = "Experiment II, t_nu(0, MAD) noise, nu in {1..5} at SNR 40 and 20 dB";
    base[2].noise_grid = student;

    std::vector<ExperimentConfig> out;
    for (auto& cfg : base) {
        cfg.n = 512;
        cfg.p = 256;
        cfg.k = 8;
        cfg.amplitude = 10.0;
        cfg.num_trials = num_trials;
        cfg.methods = standard_methods();
        cfg.master_seed = 1;
        out.push_back(cfg);

        ExperimentConfig swapped = cfg;
        swapped.name += "-swapped";
        swapped.n = 256;
        swapped.p = 512;
        swapped.provenance += " (n and p swapped so that p > n)";
        out.push_back(swapped);
    }
    return out;
}

std::optional<ExperimentConfig> find_preset(const std::string& name, std::size_t num_trials) {
    for (auto& cfg : experiment_presets(num_trials)) {
        if (cfg.name == name) return cfg;
    }
    return std::nullopt;
}

}  // namespace robustcs
