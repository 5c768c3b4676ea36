// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "doalab/eval.hpp"
#include "doalab/gimusic.hpp"
#include "doalab/greedy.hpp"
#include "doalab/order.hpp"
#include "doalab/scenario.hpp"
#include "doalab/subspace.hpp"

namespace doalab {

enum class MethodId {
    MusicNoise,
    MusicSignal,
    Ols,
    OlsImusic,
    OlsIwmusic,
    Omp,
    OmpImusic,
    OmpIwmusic,
    WmusicNoise,
    WmusicSignal,
};

struct MethodName {
    MethodId id;
    const char* name;
};

inline constexpr MethodName kMethodNames[] = {
    {MethodId::MusicNoise, "music-noise"}, {MethodId::MusicSignal, "music-signal"},
    {MethodId::Ols, "ols"},                {MethodId::OlsImusic, "ols-imusic"},
    {MethodId::OlsIwmusic, "ols-iwmusic"}, {MethodId::Omp, "omp"},
    {MethodId::OmpImusic, "omp-imusic"},   {MethodId::OmpIwmusic, "omp-iwmusic"},
    {MethodId::WmusicNoise, "wmusic-noise"}, {MethodId::WmusicSignal, "wmusic-signal"},
};

inline std::string to_string(MethodId id) {
    for (const auto& m : kMethodNames)
        if (m.id == id)
            return m.name;
    return "?";
}

inline MethodId parse_method(const std::string& s) {
    for (const auto& m : kMethodNames)
        if (s == m.name)
            return m.id;
    throw ConfigError("unknown method id '" + s + "'");
}

inline std::vector<MethodId> all_methods() {
    std::vector<MethodId> out;
    for (const auto& m : kMethodNames)
        out.push_back(m.id);
    return out;
}

inline bool is_ols_family(MethodId id) {
    return id == MethodId::Ols || id == MethodId::OlsImusic || id == MethodId::OlsIwmusic;
}

struct MethodOptions {
    Evaluator evaluator = Evaluator::Fft;
    bool evd_per_iter = false;
};

/// Runs one estimator from the sample covariance with a given target count.
inline DoaEstimate run_method(MethodId id, const ComplexMatrix& r, std::size_t k, const GridEvaluator& ge,
                              const MethodOptions& opt) {
    if (k == 0)
        return {};
    const std::size_t m = static_cast<std::size_t>(r.rows());
    const GimusicOptions gopt{opt.evd_per_iter};
    const Evaluator ev = opt.evaluator;
    switch (id) {
    case MethodId::MusicNoise: return music_estimate(r, k, MusicVariant::MusicNoise, ge, ev);
    case MethodId::MusicSignal: return music_estimate(r, k, MusicVariant::MusicSignal, ge, ev);
    case MethodId::WmusicNoise: return music_estimate(r, k, MusicVariant::WmusicNoise, ge, ev);
    case MethodId::WmusicSignal: return music_estimate(r, k, MusicVariant::WmusicSignal, ge, ev);
    case MethodId::Omp: return greedy_estimate(covariance_sqrt(hermitian_evd(r)), k, GreedyMethod::Omp, ge, ev);
    case MethodId::Ols: return greedy_estimate(covariance_sqrt(hermitian_evd(r)), k, GreedyMethod::Ols, ge, ev);
    case MethodId::OmpImusic: return gimusic_estimate(r, k, GimusicVariant::OmpImusic, ge, ev, gopt);
    case MethodId::OlsImusic: return gimusic_estimate(r, k, default_ols_imusic_variant(k, m), ge, ev, gopt);
    case MethodId::OmpIwmusic: return gimusic_estimate(r, k, GimusicVariant::OmpIwmusic, ge, ev, gopt);
    case MethodId::OlsIwmusic: return gimusic_estimate(r, k, GimusicVariant::OlsIwmusic, ge, ev, gopt);
    }
    return {};
}

inline HybridDriver hybrid_driver_for(MethodId id, std::size_t max_k, std::size_t m) {
    switch (id) {
    case MethodId::OlsImusic:
        return default_ols_imusic_variant(max_k, m) == GimusicVariant::OlsImusicSignal ? HybridDriver::OlsImusicSignal
                                                                                       : HybridDriver::OlsImusicNoise;
    case MethodId::OlsIwmusic: return HybridDriver::OlsIwmusic;
    default: return HybridDriver::Ols;
    }
}

enum class SweepParameter { SnrDb, Targets, Subcarriers, Antennas };

inline std::string to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::SnrDb: return "snr_db";
    case SweepParameter::Targets: return "targets";
    case SweepParameter::Subcarriers: return "subcarriers";
    case SweepParameter::Antennas: return "antennas";
    }
    return "?";
}

inline SweepParameter parse_sweep_parameter(const std::string& s) {
    for (auto p : {SweepParameter::SnrDb, SweepParameter::Targets, SweepParameter::Subcarriers,
                   SweepParameter::Antennas})
        if (s == to_string(p))
            return p;
    throw ConfigError("unknown sweep parameter '" + s + "'");
}

struct SweepSpec {
    SweepParameter parameter = SweepParameter::SnrDb;
    std::vector<double> values{40.0};
    std::size_t trials = 500;
    std::vector<MethodId> methods = all_methods();
    OrderCriterion order_criterion = OrderCriterion::RankAic;
    std::map<MethodId, OrderCriterion> order_overrides;
    Evaluator evaluator = Evaluator::Fft;
    bool evd_per_iter = false;
    std::size_t hybrid_extra = 4; // hybrid searches up to K_rank + hybrid_extra
    bool serial = false;
    ScenarioConfig base;

    OrderCriterion criterion_for(MethodId id) const {
        auto it = order_overrides.find(id);
        return it == order_overrides.end() ? order_criterion : it->second;
    }

    void validate() const {
        if (values.empty())
            throw ConfigError("sweep values must not be empty");
        if (trials < 1)
            throw ConfigError("trials must be >= 1");
        if (methods.empty())
            throw ConfigError("at least one method is required");
        for (double v : values)
            config_at(v).validate();
    }

    ScenarioConfig config_at(double value) const {
        ScenarioConfig c = base;
        auto as_count = [&](double v) {
            if (!(v >= 0.0) || v != std::floor(v))
                throw ConfigError("sweep value " + std::to_string(v) + " must be a non-negative integer");
            return static_cast<std::size_t>(v);
        };
        switch (parameter) {
        case SweepParameter::SnrDb: c.snr_db = value; break;
        case SweepParameter::Targets: c.targets = as_count(value); break;
        case SweepParameter::Subcarriers: c.subcarriers = as_count(value); break;
        case SweepParameter::Antennas: c.antennas = as_count(value); break;
        }
        return c;
    }
};

/// Outcome of one method on one trial.
struct MethodTrial {
    bool failed = false;
    std::string error;
    std::size_t k_hat = 0;
    double time_ms = 0.0;
    DetectionMetrics detection;
    std::optional<double> rmse;
    DoaEstimate estimate;
};

struct TrialRecord {
    GroundTruth truth;
    DiagnosticMetrics diagnostics;
    std::vector<MethodTrial> methods; // same order as SweepSpec::methods
};

struct ResultRow {
    std::string sweep_param;
    double sweep_value = 0.0;
    std::string method;
    std::string criterion;
    std::string evaluator;
    std::size_t trials = 0;
    double youden_j = 0.0;
    double hit_rate = 0.0;
    double fa_rate = 0.0;
    double rmse = 0.0;
    double rmse_coverage = 0.0;
    double mean_time_ms = 0.0;
    double t_metric = 0.0;
    double s_metric = 0.0;
    double mean_k_hat = 0.0;
    std::uint64_t seed = 0;
    std::size_t failed_trials = 0;
    int warning = 0; // 1 when more than 5% of trials failed
};

struct SweepPoint {
    double value = 0.0;
    std::vector<TrialRecord> trials;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<SweepPoint> points;
};

/// Mean after dropping the top and bottom 5% of samples.
inline double trimmed_mean(std::vector<double> xs, double fraction = 0.05) {
    if (xs.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const auto drop = static_cast<std::size_t>(std::floor(static_cast<double>(xs.size()) * fraction));
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = drop; i + drop < xs.size(); ++i, ++n)
        s += xs[i];
    return s / static_cast<double>(n);
}

inline std::size_t worker_count(bool serial) {
    if (serial)
        return 1;
    if (const char* env = std::getenv("DOALAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/**
 * One Monte Carlo trial: every method consumes the same observation and
 * covariance. Only the estimator call (from R onward) is timed.
 */
inline TrialRecord run_trial(const SweepSpec& spec, const ScenarioConfig& cfg, const GridEvaluator& ge,
                             std::uint64_t trial_index) {
    auto rng = trial_stream(cfg.seed, trial_index);
    TrialRecord rec;
    rec.truth = draw_targets(cfg, rng);
    const auto obs = synthesize_observation(rec.truth, cfg, rng);
    rec.diagnostics = diagnostics(rec.truth, obs.coeffs, cfg.antennas, cfg.element_phase_factor);

    const ComplexMatrix r = sample_covariance(obs.y);
    const auto evd = hermitian_evd(r);
    const auto rank = aic_rank(evd.eigenvalues, cfg.snapshots());
    const std::size_t m = cfg.antennas;
    const double halfwidth = default_hit_halfwidth(m);
    const MethodOptions opt{spec.evaluator, spec.evd_per_iter};

    rec.methods.resize(spec.methods.size());
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
        const MethodId id = spec.methods[i];
        MethodTrial& mt = rec.methods[i];
        try {
            const auto t0 = std::chrono::steady_clock::now();
            if (spec.criterion_for(id) == OrderCriterion::RankAic) {
                mt.k_hat = rank.k_hat;
                mt.estimate = run_method(id, r, mt.k_hat, ge, opt);
            } else {
                const std::size_t max_k = std::min(m - 1, rank.k_hat + spec.hybrid_extra);
                const auto hy = hybrid_order(r, max_k, rank, hybrid_driver_for(id, max_k, m), cfg.snapshots(), ge,
                                             spec.evaluator);
                mt.k_hat = hy.k_hat;
                mt.estimate = is_ols_family(id) ? hy.selected : run_method(id, r, mt.k_hat, ge, opt);
            }
            const auto t1 = std::chrono::steady_clock::now();
            mt.time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            const auto assoc = associate(rec.truth.doas, mt.estimate.angles);
            mt.detection = detection_metrics(assoc, rec.truth.size(), halfwidth);
        } catch (const std::exception& e) {
            mt = MethodTrial{};
            mt.failed = true;
            mt.error = e.what();
            mt.detection.hit_mask.assign(rec.truth.size(), 0);
            mt.detection.hit_gaps.assign(rec.truth.size(), std::numeric_limits<double>::quiet_NaN());
        }
    }
    std::vector<DetectionMetrics> dets;
    for (const auto& mt : rec.methods)
        dets.push_back(mt.detection);
    const auto rmse = rmse_common_hits(dets);
    for (std::size_t i = 0; i < rec.methods.size(); ++i)
        rec.methods[i].rmse = rec.methods[i].failed ? std::nullopt : rmse[i];
    return rec;
}

inline std::vector<ResultRow> aggregate(const SweepSpec& spec, const SweepPoint& point, std::uint64_t seed) {
    std::vector<ResultRow> rows;
    double t_sum = 0.0, s_sum = 0.0;
    for (const auto& tr : point.trials) {
        t_sum += tr.diagnostics.t_metric;
        s_sum += tr.diagnostics.s_metric;
    }
    const double n_trials = static_cast<double>(point.trials.size());
    for (std::size_t i = 0; i < spec.methods.size(); ++i) {
        ResultRow row;
        row.sweep_param = to_string(spec.parameter);
        row.sweep_value = point.value;
        row.method = to_string(spec.methods[i]);
        row.criterion = std::string(to_string(spec.criterion_for(spec.methods[i])));
        row.evaluator = spec.evaluator == Evaluator::Fft ? "fft" : "direct";
        row.seed = seed;
        row.t_metric = t_sum / n_trials;
        row.s_metric = s_sum / n_trials;
        double j = 0, hr = 0, fa = 0, rm = 0, kh = 0;
        std::size_t ok = 0, rm_n = 0;
        std::vector<double> times;
        for (const auto& tr : point.trials) {
            const auto& mt = tr.methods[i];
            if (mt.failed) {
                ++row.failed_trials;
                continue;
            }
            ++ok;
            j += mt.detection.youden_j;
            hr += mt.detection.hit_rate;
            fa += mt.detection.fa_rate;
            kh += static_cast<double>(mt.k_hat);
            times.push_back(mt.time_ms);
            if (mt.rmse) {
                rm += *mt.rmse;
                ++rm_n;
            }
        }
        const double d_ok = static_cast<double>(ok);
        constexpr double nan = std::numeric_limits<double>::quiet_NaN();
        row.trials = ok;
        row.youden_j = ok ? j / d_ok : nan;
        row.hit_rate = ok ? hr / d_ok : nan;
        row.fa_rate = ok ? fa / d_ok : nan;
        row.mean_k_hat = ok ? kh / d_ok : nan;
        row.rmse = rm_n ? rm / static_cast<double>(rm_n) : nan;
        row.rmse_coverage = ok ? static_cast<double>(rm_n) / d_ok : 0.0;
        row.mean_time_ms = trimmed_mean(times);
        row.warning = static_cast<double>(row.failed_trials) > 0.05 * n_trials ? 1 : 0;
        rows.push_back(row);
    }
    return rows;
}

/// Runs every (sweep value, trial) and aggregates one row per (value, method).
inline SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    const std::size_t workers = worker_count(spec.serial);
    for (double value : spec.values) {
        const ScenarioConfig cfg = spec.config_at(value);
        const GridEvaluator ge(cfg.grid_points, cfg.antennas, cfg.element_phase_factor);
        SweepPoint point;
        point.value = value;
        point.trials.resize(spec.trials);
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto work = [&] {
            for (std::size_t t = next++; t < spec.trials; t = next++) {
                try {
                    point.trials[t] = run_trial(spec, cfg, ge, t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        };
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back(work);
        }
        if (failure)
            std::rethrow_exception(failure);
        auto rows = aggregate(spec, point, cfg.seed);
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
        result.points.push_back(std::move(point));
    }
    std::stable_sort(result.rows.begin(), result.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.sweep_value != b.sweep_value)
            return a.sweep_value < b.sweep_value;
        return a.method < b.method;
    });
    return result;
}

// ---- CSV -------------------------------------------------------------------

inline const std::vector<std::string>& csv_header() {
    static const std::vector<std::string> h{
        "sweep_param", "sweep_value", "method",    "criterion",     "evaluator", "trials",
        "youden_j",    "hit_rate",    "fa_rate",   "rmse",          "rmse_coverage", "mean_time_ms",
        "t_metric",    "s_metric",    "mean_k_hat", "seed",         "failed_trials", "warning"};
    return h;
}

inline std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    const auto& h = csv_header();
    for (std::size_t i = 0; i < h.size(); ++i)
        os << (i ? "," : "") << h[i];
    os << '\n';
    for (const auto& r : rows) {
        os << r.sweep_param << ',' << format_float(r.sweep_value) << ',' << r.method << ',' << r.criterion << ','
           << r.evaluator << ',' << r.trials << ',' << format_float(r.youden_j) << ',' << format_float(r.hit_rate)
           << ',' << format_float(r.fa_rate) << ',' << format_float(r.rmse) << ',' << format_float(r.rmse_coverage)
           << ',' << format_float(r.mean_time_ms) << ',' << format_float(r.t_metric) << ','
           << format_float(r.s_metric) << ',' << format_float(r.mean_k_hat) << ',' << r.seed << ','
           << r.failed_trials << ',' << r.warning << '\n';
    }
    return os.str();
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty())
        throw ContractError("emit_csv: empty table");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << to_csv(rows);
    if (!out)
        throw IoError("failed writing '" + path + "'");
}

inline std::vector<ResultRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw IoError("parse_csv: missing header");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != csv_header().size())
            throw IoError("parse_csv: wrong column count");
        ResultRow r;
        r.sweep_param = f[0];
        r.sweep_value = std::stod(f[1]);
        r.method = f[2];
        r.criterion = f[3];
        r.evaluator = f[4];
        r.trials = std::stoul(f[5]);
        r.youden_j = std::stod(f[6]);
        r.hit_rate = std::stod(f[7]);
        r.fa_rate = std::stod(f[8]);
        r.rmse = std::stod(f[9]);
        r.rmse_coverage = std::stod(f[10]);
        r.mean_time_ms = std::stod(f[11]);
        r.t_metric = std::stod(f[12]);
        r.s_metric = std::stod(f[13]);
        r.mean_k_hat = std::stod(f[14]);
        r.seed = std::stoull(f[15]);
        r.failed_trials = std::stoul(f[16]);
        r.warning = std::stoi(f[17]);
        rows.push_back(r);
    }
    return rows;
}

// ---- configuration file ----------------------------------------------------

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos)
            out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw ConfigError("");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (!(d >= 0.0) || d != std::floor(d))
        throw ConfigError("key '" + key + "': expected a non-negative integer");
    return static_cast<std::size_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("key '" + key + "': expected true/false");
}

inline OrderCriterion parse_criterion(const std::string& v) {
    if (v == "rank-aic")
        return OrderCriterion::RankAic;
    if (v == "hybrid")
        return OrderCriterion::Hybrid;
    throw ConfigError("unknown order criterion '" + v + "'");
}

inline Evaluator parse_evaluator(const std::string& v) {
    if (v == "fft")
        return Evaluator::Fft;
    if (v == "direct")
        return Evaluator::Direct;
    throw ConfigError("unknown evaluator '" + v + "'");
}

} // namespace detail

inline Evaluator parse_evaluator(const std::string& v) { return detail::parse_evaluator(v); }

/**
 * Reads an INI-style configuration:
 *
 *   [scenario]       ScenarioConfig fields (targets, antennas, subcarriers, ...)
 *   [sweep]          parameter, values, trials, methods, order_criterion,
 *                    evaluator, evd_per_iter, hybrid_extra
 *   [order_criterion] per-method overrides, e.g. "ols = hybrid"
 *
 * Unknown sections or keys are errors.
 */
inline SweepSpec parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    SweepSpec spec;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' outside of a section");
        for (const auto& [key, node] : body) {
            const std::string v = node.data();
            const std::string where = section + "." + key;
            if (section == "scenario") {
                auto& c = spec.base;
                if (key == "targets") c.targets = detail::parse_count(where, v);
                else if (key == "antennas") c.antennas = detail::parse_count(where, v);
                else if (key == "subcarriers") c.subcarriers = detail::parse_count(where, v);
                else if (key == "symbols") c.symbols = detail::parse_count(where, v);
                else if (key == "snr_db") c.snr_db = detail::parse_double(where, v);
                else if (key == "carrier_freq_hz") c.carrier_freq_hz = detail::parse_double(where, v);
                else if (key == "subcarrier_spacing_hz") c.subcarrier_spacing_hz = detail::parse_double(where, v);
                else if (key == "max_range_m") c.max_range_m = detail::parse_double(where, v);
                else if (key == "grid_points") c.grid_points = detail::parse_count(where, v);
                else if (key == "element_phase_factor") c.element_phase_factor = detail::parse_double(where, v);
                else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(v));
                else throw ConfigError("unknown key '" + where + "'");
            } else if (section == "sweep") {
                if (key == "parameter") spec.parameter = parse_sweep_parameter(v);
                else if (key == "values") {
                    spec.values.clear();
                    for (const auto& s : detail::split_list(v))
                        spec.values.push_back(detail::parse_double(where, s));
                } else if (key == "trials") spec.trials = detail::parse_count(where, v);
                else if (key == "methods") {
                    spec.methods.clear();
                    for (const auto& s : detail::split_list(v))
                        spec.methods.push_back(parse_method(s));
                } else if (key == "order_criterion") spec.order_criterion = detail::parse_criterion(v);
                else if (key == "evaluator") spec.evaluator = detail::parse_evaluator(v);
                else if (key == "evd_per_iter") spec.evd_per_iter = detail::parse_bool(where, v);
                else if (key == "hybrid_extra") spec.hybrid_extra = detail::parse_count(where, v);
                else throw ConfigError("unknown key '" + where + "'");
            } else if (section == "order_criterion") {
                spec.order_overrides[parse_method(key)] = detail::parse_criterion(v);
            } else {
                throw ConfigError("unknown section '" + section + "'");
            }
        }
    }
    spec.validate();
    return spec;
}

inline SweepSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config '" + path + "'");
    return parse_config(in);
}

} // namespace doalab
