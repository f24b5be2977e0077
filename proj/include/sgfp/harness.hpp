#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgfp/dynamics.hpp"
#include "sgfp/game.hpp"
#include "sgfp/game_io.hpp"
#include "sgfp/learners.hpp"
#include "sgfp/oracles.hpp"

namespace sgfp {

enum class Algorithm { Sfp, Mfp, Sbrd, Mbrd };

inline const char* to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Sfp: return "sfp";
        case Algorithm::Mfp: return "mfp";
        case Algorithm::Sbrd: return "sbrd";
        case Algorithm::Mbrd: return "mbrd";
    }
    return "sfp";
}

inline bool is_continuous(Algorithm a) { return a == Algorithm::Sbrd || a == Algorithm::Mbrd; }
inline bool is_model_free(Algorithm a) { return a == Algorithm::Mfp || a == Algorithm::Mbrd; }

struct GeneratorSpec {
    int states = 2;
    std::vector<int> actions = {2, 2};
    GameClassTag cls = GameClassTag::General;
    double mixing = 0.3;
    double discount = 0.5;
    std::optional<uint64_t> seed;  // absent: the per-run seed generates the game
};

struct GameSource {
    std::string path;  // empty when generated
    std::optional<GeneratorSpec> generator;
};

struct ExperimentConfig {
    GameSource game;
    Algorithm algorithm = Algorithm::Sfp;
    double beta_temp = 0.1;
    std::string regularizer = "entropy";
    NoiseSpec noise = NoiseSpec::none();
    ValueRateSchedule schedule = ValueRateSchedule::harmonic();  // discrete algorithms
    RateFunction rate_function = RateFunction::harmonic();       // continuous algorithms
    LambdaPolicy lambda = LambdaPolicy::constant_floor(0.2);
    IntegrationMethod method = IntegrationMethod::RK4;
    int64_t steps = 0;
    double t_end = 0.0;
    double h = 0.01;
    int64_t cadence = 1;
    int initial_state = 0;
    std::vector<uint64_t> seeds;
    std::string output_dir = "out";
    // metric name -> upper bound checked against the across-seed median of the
    // final trace row
    std::vector<std::pair<std::string, double>> thresholds;
};

// ---------------------------------------------------------------------------
// Traces

struct Trace {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
    std::map<std::string, double> row_as_map(size_t r) const {
        std::map<std::string, double> m;
        for (size_t c = 0; c < columns.size(); ++c) m[columns[c]] = rows[r][c];
        return m;
    }
};

inline void write_trace_csv(const Trace& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (size_t c = 0; c < t.columns.size(); ++c) {
        if (c) f << ',';
        f << t.columns[c];
    }
    f << '\n';
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) f << ',';
            f << detail::fmt17(row[c]);
        }
        f << '\n';
    }
}

inline Trace read_trace_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
    Trace t;
    std::string line;
    if (!std::getline(f, line)) throw ParseError(path + ": empty trace file");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) t.columns.push_back(cell);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != t.columns.size())
            throw ParseError(path + ": row width does not match header");
        t.rows.push_back(std::move(vals));
    }
    return t;
}

// Fixed per-algorithm column schema. Shared-value modes emit one u column per
// state (u_s0, ...), general/team modes one per player and state (u_p0_s0,
// ...). Zero-sum games add per-state duality gaps, model-free algorithms the
// estimator sup errors.
inline std::vector<std::string> trace_columns(const StochasticGame& g, Algorithm alg,
                                              GameClassTag mode) {
    std::vector<std::string> cols;
    cols.push_back(is_continuous(alg) ? "t" : "step");
    const bool shared = (mode == GameClassTag::ZeroSum || mode == GameClassTag::IdenticalInterest);
    if (shared) {
        for (int s = 0; s < g.num_states(); ++s) cols.push_back("u_s" + std::to_string(s));
    } else {
        for (int i = 0; i < g.num_players(); ++i)
            for (int s = 0; s < g.num_states(); ++s)
                cols.push_back("u_p" + std::to_string(i) + "_s" + std::to_string(s));
    }
    for (int s = 0; s < g.num_states(); ++s) cols.push_back("rho_val_s" + std::to_string(s));
    for (int s = 0; s < g.num_states(); ++s) cols.push_back("rho_br_s" + std::to_string(s));
    if (mode == GameClassTag::ZeroSum)
        for (int s = 0; s < g.num_states(); ++s) cols.push_back("w_s" + std::to_string(s));
    if (is_model_free(alg)) {
        cols.push_back("qhat_err");
        cols.push_back("rhat_err");
    }
    cols.push_back("beta_rate");
    return cols;
}

namespace detail {

struct MetricEnv {
    const StochasticGame& game;
    const Regularizer& reg;
    double beta_temp;
    GameClassTag mode;
    Algorithm alg;
};

inline std::vector<double> metric_row(const MetricEnv& env, double time_or_step,
                                      const StationaryProfile& x, const ContinuationValues& u,
                                      const ModelTensors* model, double beta_rate) {
    std::vector<double> row;
    row.push_back(time_or_step);
    for (const auto& table : u.tables) row.insert(row.end(), table.begin(), table.end());
    const auto residuals =
        equilibrium_residuals(env.game, env.beta_temp, env.reg, x, u,
                              env.mode == GameClassTag::ZeroSum);
    for (const auto& r : residuals) row.push_back(r.rho_val);
    for (const auto& r : residuals) row.push_back(r.rho_br);
    if (env.mode == GameClassTag::ZeroSum) {
        AuxContext ctx{env.game, u, env.beta_temp, env.reg, true, nullptr};
        for (int s = 0; s < env.game.num_states(); ++s)
            row.push_back(duality_gap(ctx, s, x.at(s)).value);
    }
    if (is_model_free(env.alg)) {
        row.push_back(model ? model->max_transition_error(env.game) : 0.0);
        row.push_back(model ? model->max_reward_error(env.game) : 0.0);
    }
    row.push_back(beta_rate);
    return row;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config file (UTF-8 JSON mirroring ExperimentConfig)

inline NoiseSpec parse_noise(const nlohmann::json& j) {
    const auto kind = detail::require_field<std::string>(j, "kind");
    auto param = [&j](const char* name) {
        if (j.contains(name)) return j.at(name).get<double>();
        if (j.contains("param")) return j.at("param").get<double>();
        throw ParseError(std::string("noise: missing field '") + name + "'");
    };
    if (kind == "none") return NoiseSpec::none();
    if (kind == "gaussian") return NoiseSpec::gaussian(param("sigma"));
    if (kind == "uniform") return NoiseSpec::uniform(param("halfwidth"));
    if (kind == "bernoulli-shift") return NoiseSpec::bernoulli_shift(param("shift"));
    throw ParseError("noise: unknown kind '" + kind + "'");
}

inline GameClassTag parse_class(const std::string& s) {
    if (s == "ZeroSum" || s == "zero-sum") return GameClassTag::ZeroSum;
    if (s == "IdenticalInterest" || s == "identical-interest") return GameClassTag::IdenticalInterest;
    if (s == "Team" || s == "team") return GameClassTag::Team;
    if (s == "General" || s == "general") return GameClassTag::General;
    throw ParseError("unknown game class '" + s + "'");
}

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::string& origin) {
    ExperimentConfig cfg;

    const auto game = detail::require_field<nlohmann::json>(j, "game");
    if (game.contains("path")) {
        cfg.game.path = game.at("path").get<std::string>();
    } else if (game.contains("generator")) {
        const auto& gen = game.at("generator");
        GeneratorSpec spec;
        spec.states = detail::require_field<int>(gen, "states");
        spec.actions = detail::require_field<std::vector<int>>(gen, "actions");
        spec.cls = parse_class(detail::require_field<std::string>(gen, "class"));
        if (gen.contains("mixing")) spec.mixing = gen.at("mixing").get<double>();
        if (gen.contains("discount")) spec.discount = gen.at("discount").get<double>();
        if (gen.contains("seed")) spec.seed = gen.at("seed").get<uint64_t>();
        cfg.game.generator = spec;
    } else {
        throw ParseError(origin + ": game must contain 'path' or 'generator'");
    }

    const auto alg = detail::require_field<std::string>(j, "algorithm");
    if (alg == "sfp") cfg.algorithm = Algorithm::Sfp;
    else if (alg == "mfp") cfg.algorithm = Algorithm::Mfp;
    else if (alg == "sbrd") cfg.algorithm = Algorithm::Sbrd;
    else if (alg == "mbrd") cfg.algorithm = Algorithm::Mbrd;
    else throw ParseError(origin + ": unknown algorithm '" + alg + "'");

    if (j.contains("beta")) cfg.beta_temp = j.at("beta").get<double>();
    if (j.contains("regularizer")) cfg.regularizer = j.at("regularizer").get<std::string>();
    if (j.contains("noise")) cfg.noise = parse_noise(j.at("noise"));

    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        const auto family = detail::require_field<std::string>(s, "family");
        if (family == "harmonic") cfg.schedule = ValueRateSchedule::harmonic();
        else if (family == "constant")
            cfg.schedule = ValueRateSchedule::constant(detail::require_field<double>(s, "rate"));
        else if (family == "power")
            cfg.schedule = ValueRateSchedule::power(detail::require_field<double>(s, "c"),
                                                    detail::require_field<double>(s, "rho"));
        else if (family == "doubling")
            cfg.schedule = ValueRateSchedule::doubling(
                detail::require_field<double>(s, "rate"),
                detail::require_field<double>(s, "threshold"),
                s.contains("shrink") ? s.at("shrink").get<double>() : 0.5);
        else throw ParseError(origin + ": unknown schedule family '" + family + "'");
        if (s.contains("per_visit")) cfg.schedule.per_visit = s.at("per_visit").get<bool>();
    }

    if (j.contains("rate_function")) {
        const auto& s = j.at("rate_function");
        const auto family = detail::require_field<std::string>(s, "family");
        if (family == "harmonic") cfg.rate_function = RateFunction::harmonic();
        else if (family == "constant")
            cfg.rate_function = RateFunction::constant(detail::require_field<double>(s, "rate"));
        else if (family == "power")
            cfg.rate_function = RateFunction::power(detail::require_field<double>(s, "c"),
                                                    detail::require_field<double>(s, "rho"));
        else throw ParseError(origin + ": unknown rate_function family '" + family + "'");
    }

    if (j.contains("lambda")) {
        const auto& s = j.at("lambda");
        const auto policy = detail::require_field<std::string>(s, "policy");
        const double floor = s.contains("floor") ? s.at("floor").get<double>() : 0.2;
        if (!(floor > 0.0 && floor <= 1.0))
            throw ParseError(origin + ": lambda floor must be in (0,1]");
        if (policy == "constant-floor") cfg.lambda = LambdaPolicy::constant_floor(floor);
        else if (policy == "constant-one") cfg.lambda = LambdaPolicy::constant_one(floor);
        else if (policy == "per-state") cfg.lambda = LambdaPolicy::per_state(floor);
        else if (policy == "sinusoidal") cfg.lambda = LambdaPolicy::sinusoidal(floor);
        else throw ParseError(origin + ": unknown lambda policy '" + policy + "'");
    }

    if (j.contains("method")) {
        const auto m = j.at("method").get<std::string>();
        if (m == "rk4") cfg.method = IntegrationMethod::RK4;
        else if (m == "euler") cfg.method = IntegrationMethod::Euler;
        else throw ParseError(origin + ": unknown method '" + m + "'");
    }

    if (is_continuous(cfg.algorithm)) {
        cfg.t_end = detail::require_field<double>(j, "t_end");
        if (j.contains("h")) cfg.h = j.at("h").get<double>();
    } else {
        cfg.steps = detail::require_field<int64_t>(j, "steps");
    }
    cfg.cadence = detail::require_field<int64_t>(j, "cadence");
    cfg.seeds = detail::require_field<std::vector<uint64_t>>(j, "seeds");
    cfg.output_dir = detail::require_field<std::string>(j, "output_dir");
    if (j.contains("initial_state")) cfg.initial_state = j.at("initial_state").get<int>();
    if (j.contains("thresholds"))
        for (const auto& [k, v] : j.at("thresholds").items())
            cfg.thresholds.emplace_back(k, v.get<double>());
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    return parse_config(j, path);
}

// Structural checks that run before any seed: referenced files exist, seed
// list nonempty, cadence divides the reporting window.
inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("config: seed list must be nonempty");
    if (cfg.cadence < 1) throw std::invalid_argument("config: cadence must be >= 1");
    if (!cfg.game.path.empty() && !std::filesystem::exists(cfg.game.path))
        throw std::invalid_argument("config: game file '" + cfg.game.path + "' does not exist");
    if (is_continuous(cfg.algorithm)) {
        if (!(cfg.h > 0.0) || !(cfg.t_end > 0.0))
            throw std::invalid_argument("config: t_end and h must be positive");
        const int64_t steps = static_cast<int64_t>(std::llround(cfg.t_end / cfg.h));
        if (steps < 1 || steps % cfg.cadence != 0)
            throw std::invalid_argument("config: cadence must divide t_end/h");
    } else {
        if (cfg.steps < 1) throw std::invalid_argument("config: steps must be >= 1");
        if (cfg.steps % cfg.cadence != 0)
            throw std::invalid_argument("config: cadence must divide steps");
    }
    make_regularizer(cfg.regularizer);  // rejects unknown names
}

// ---------------------------------------------------------------------------
// Experiment execution

struct SeedOutcome {
    uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::map<std::string, double> final_row;
    double runtime_sec = 0.0;
    std::string trace_path;
};

struct ThresholdCheck {
    std::string metric;
    double limit = 0.0;
    double observed_median = 0.0;
    bool pass = false;
};

struct SummaryReport {
    std::string algorithm;
    std::vector<SeedOutcome> seeds;
    std::map<std::string, double> medians;
    std::map<std::string, std::array<double, 3>> quantiles;  // q25, q50, q75
    std::vector<ThresholdCheck> checks;
    bool pass = true;
};

namespace detail {

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    const double pos = p * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

// The game a given run plays: an explicit file, a generator pinned by its own
// seed, or a generator keyed by the per-run seed (substream 0; play uses
// substream 1).
inline StochasticGame realize_game(const ExperimentConfig& cfg, uint64_t run_seed) {
    if (!cfg.game.path.empty()) return load_game(cfg.game.path);
    const GeneratorSpec& spec = *cfg.game.generator;
    const uint64_t gen_seed = spec.seed ? *spec.seed : run_seed;
    RngStream rng = RngStream::derive(gen_seed, 0);
    return random_ergodic_game({spec.states, spec.actions, spec.discount}, spec.cls, spec.mixing,
                               rng);
}

inline Trace run_single_seed(const ExperimentConfig& cfg, uint64_t seed) {
    const StochasticGame game = realize_game(cfg, seed);
    auto validation = validate(game);
    if (!validation.ok())
        throw std::invalid_argument("game invalid: " + validation.violations.front());
    const GameClassTag mode = classify(game).tag;
    const auto reg = make_regularizer(cfg.regularizer);

    Trace trace;
    trace.columns = trace_columns(game, cfg.algorithm, mode);
    const MetricEnv env{game, *reg, cfg.beta_temp, mode, cfg.algorithm};

    if (is_continuous(cfg.algorithm)) {
        DynamicsConfig dcfg;
        dcfg.model_free = is_model_free(cfg.algorithm);
        dcfg.beta_rate = cfg.rate_function;
        dcfg.lambda = cfg.lambda;
        dcfg.beta_temp = cfg.beta_temp;
        dcfg.reg = reg.get();
        dcfg.mode = mode;
        ContinuousState state = ContinuousState::initial(game, mode, dcfg.model_free);
        integrate(game, dcfg, state, cfg.t_end, cfg.h, cfg.method, cfg.cadence,
                  [&](const ContinuousState& cs) {
                      trace.rows.push_back(metric_row(env, cs.t, cs.x, cs.u,
                                                      cs.model ? &*cs.model : nullptr,
                                                      cfg.rate_function(cs.t)));
                  });
    } else {
        LearnerConfig lcfg;
        lcfg.beta_temp = cfg.beta_temp;
        lcfg.reg = reg.get();
        lcfg.mode = mode;
        lcfg.schedule = cfg.schedule;
        lcfg.noise = cfg.noise;
        LearnerState state = LearnerState::init(game, lcfg, RngStream::derive(seed, 1),
                                                is_model_free(cfg.algorithm), cfg.initial_state);
        const StepKind kind = cfg.algorithm == Algorithm::Sfp ? StepKind::Sfp : StepKind::Mfp;
        run(state, game, lcfg, kind, cfg.steps, cfg.cadence, [&](const LearnerState& st) {
            trace.rows.push_back(metric_row(env, static_cast<double>(st.step), st.profile,
                                            st.values,
                                            st.estimate ? &st.estimate->model : nullptr,
                                            st.schedule.rate(st.step)));
        });
    }
    return trace;
}

}  // namespace detail

// Executes every seed (concurrently), writes one trace CSV per seed plus one
// summary.json, and evaluates the configured thresholds against across-seed
// medians of the final trace row. Reruns with an identical config produce
// byte-identical trace files. A failing seed is recorded in the summary
// without aborting its siblings.
inline SummaryReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.output_dir);

    SummaryReport report;
    report.algorithm = to_string(cfg.algorithm);
    report.seeds.resize(cfg.seeds.size());

    std::vector<std::future<void>> jobs;
    jobs.reserve(cfg.seeds.size());
    for (size_t k = 0; k < cfg.seeds.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, [&cfg, &report, k]() {
            SeedOutcome& out = report.seeds[k];
            out.seed = cfg.seeds[k];
            const auto start = std::chrono::steady_clock::now();
            try {
                Trace trace = detail::run_single_seed(cfg, out.seed);
                out.trace_path =
                    (std::filesystem::path(cfg.output_dir) /
                     ("trace_seed" + std::to_string(out.seed) + ".csv")).string();
                write_trace_csv(trace, out.trace_path);
                if (!trace.rows.empty()) out.final_row = trace.row_as_map(trace.rows.size() - 1);
                out.ok = true;
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
            out.runtime_sec =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }));
    }
    for (auto& j : jobs) j.get();

    // across-seed statistics of the final rows
    std::map<std::string, std::vector<double>> finals;
    for (const auto& s : report.seeds)
        if (s.ok)
            for (const auto& [k, v] : s.final_row) finals[k].push_back(v);
    for (const auto& [k, vals] : finals) {
        report.medians[k] = detail::quantile(vals, 0.5);
        report.quantiles[k] = {detail::quantile(vals, 0.25), detail::quantile(vals, 0.5),
                               detail::quantile(vals, 0.75)};
    }
    for (const auto& [metric, limit] : cfg.thresholds) {
        ThresholdCheck check;
        check.metric = metric;
        check.limit = limit;
        auto it = report.medians.find(metric);
        if (it == report.medians.end()) {
            check.observed_median = std::numeric_limits<double>::quiet_NaN();
            check.pass = false;
        } else {
            check.observed_median = it->second;
            check.pass = check.observed_median <= limit;
        }
        report.checks.push_back(check);
        report.pass = report.pass && check.pass;
    }
    for (const auto& s : report.seeds) report.pass = report.pass && s.ok;

    nlohmann::ordered_json j;
    j["algorithm"] = report.algorithm;
    j["pass"] = report.pass;
    j["seeds"] = nlohmann::ordered_json::array();
    for (const auto& s : report.seeds) {
        nlohmann::ordered_json js;
        js["seed"] = s.seed;
        js["ok"] = s.ok;
        if (!s.ok) js["error"] = s.error;
        js["trace"] = s.trace_path;
        js["runtime_sec"] = s.runtime_sec;
        js["final"] = s.final_row;
        j["seeds"].push_back(js);
    }
    j["medians"] = report.medians;
    {
        nlohmann::ordered_json q;
        for (const auto& [k, v] : report.quantiles) q[k] = {v[0], v[1], v[2]};
        j["quantiles"] = q;
    }
    j["threshold_checks"] = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json jc;
        jc["metric"] = c.metric;
        jc["limit"] = c.limit;
        jc["observed_median"] = c.observed_median;
        jc["pass"] = c.pass;
        j["threshold_checks"].push_back(jc);
    }
    std::ofstream f(std::filesystem::path(cfg.output_dir) / "summary.json");
    f << j.dump(2) << '\n';

    return report;
}

// ---------------------------------------------------------------------------
// Plot data

struct PlotTable {
    // long format: one row per (step, seed) plus the across-seed median of the
    // metric at that step
    std::vector<std::string> columns{"step", "seed", "value", "median"};
    std::vector<std::array<double, 4>> rows;
};

// Derived aggregate metrics over the per-state columns.
inline std::vector<std::string> derived_metrics() {
    return {"rho_val_max", "rho_br_max", "duality_gap_max"};
}

namespace detail {

inline std::optional<double> metric_value(const Trace& t, size_t row, const std::string& metric) {
    const int idx = t.column_index(metric);
    if (idx >= 0) return t.rows[row][idx];
    std::string prefix;
    if (metric == "rho_val_max") prefix = "rho_val_s";
    else if (metric == "rho_br_max") prefix = "rho_br_s";
    else if (metric == "duality_gap_max") prefix = "w_s";
    else return std::nullopt;
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (size_t c = 0; c < t.columns.size(); ++c)
        if (t.columns[c].rfind(prefix, 0) == 0) {
            m = std::max(m, t.rows[row][c]);
            any = true;
        }
    if (!any) return std::nullopt;
    return m;
}

}  // namespace detail

inline PlotTable emit_plot_data(const std::vector<std::pair<uint64_t, Trace>>& traces,
                                const std::string& metric) {
    if (traces.empty()) throw std::invalid_argument("emit_plot_data: no traces");
    {
        const Trace& t0 = traces.front().second;
        if (!t0.rows.empty() && !detail::metric_value(t0, 0, metric)) {
            std::string available;
            for (const auto& c : t0.columns) available += c + " ";
            for (const auto& c : derived_metrics()) available += c + " ";
            throw std::invalid_argument("emit_plot_data: unknown metric '" + metric +
                                        "' (available: " + available + ")");
        }
    }
    PlotTable table;
    // per-step medians across seeds
    std::map<double, std::vector<double>> by_step;
    for (const auto& [seed, trace] : traces)
        for (size_t r = 0; r < trace.rows.size(); ++r) {
            auto v = detail::metric_value(trace, r, metric);
            if (!v) throw std::invalid_argument("emit_plot_data: metric missing in a trace");
            by_step[trace.rows[r][0]].push_back(*v);
        }
    std::map<double, double> medians;
    for (const auto& [step, vals] : by_step) medians[step] = detail::quantile(vals, 0.5);
    for (const auto& [seed, trace] : traces)
        for (size_t r = 0; r < trace.rows.size(); ++r) {
            const double step = trace.rows[r][0];
            table.rows.push_back({step, static_cast<double>(seed),
                                  *detail::metric_value(trace, r, metric), medians[step]});
        }
    return table;
}

inline void write_plot_table(const PlotTable& t, std::ostream& os) {
    for (size_t c = 0; c < t.columns.size(); ++c) {
        if (c) os << ',';
        os << t.columns[c];
    }
    os << '\n';
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) os << ',';
            os << detail::fmt17(row[c]);
        }
        os << '\n';
    }
}

}  // namespace sgfp
