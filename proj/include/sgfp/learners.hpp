#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sgfp/auxiliary.hpp"
#include "sgfp/estimation.hpp"
#include "sgfp/game.hpp"
#include "sgfp/profiles.hpp"
#include "sgfp/regularizers.hpp"
#include "sgfp/rng.hpp"

namespace sgfp {

// Value-update rate family beta_s(n). The action rate is not configurable: the
// visited state's empirical profile always moves with 1/(visits+1), which
// keeps it the running mean of the drawn actions.
struct ValueRateSchedule {
    enum class Family { Harmonic, Constant, Power, Doubling };
    Family family = Family::Harmonic;
    double constant_rate = 0.1;  // Constant and Doubling (current value)
    double power_c = 1.0;
    double power_rho = 0.5;  // in (0, 1]
    double doubling_threshold = 0.1;
    double doubling_shrink = 0.5;
    // When set, beta_s(n) is evaluated at the state's own visit count instead
    // of the global step (fully asynchronous value updates; exposed, untested
    // against the convergence targets).
    bool per_visit = false;

    static ValueRateSchedule harmonic() { return {}; }
    static ValueRateSchedule constant(double rate) {
        ValueRateSchedule s;
        s.family = Family::Constant;
        s.constant_rate = rate;
        return s;
    }
    static ValueRateSchedule power(double c, double rho) {
        ValueRateSchedule s;
        s.family = Family::Power;
        s.power_c = c;
        s.power_rho = rho;
        return s;
    }
    static ValueRateSchedule doubling(double rate, double threshold, double shrink = 0.5) {
        ValueRateSchedule s;
        s.family = Family::Doubling;
        s.constant_rate = rate;
        s.doubling_threshold = threshold;
        s.doubling_shrink = shrink;
        return s;
    }

    double rate(int64_t n) const {
        switch (family) {
            case Family::Harmonic: return 1.0 / static_cast<double>(n + 1);
            case Family::Constant: return constant_rate;
            case Family::Power:
                return power_c / std::pow(1.0 + static_cast<double>(n), power_rho);
            case Family::Doubling: return constant_rate;
        }
        return 0.0;
    }
};

// Doubling-trick mechanism: whenever the (max-over-states) duality gap falls
// below the current threshold, shrink the constant rate and the threshold by
// the same factor. Repeated triggers drive the rate to zero geometrically.
inline void doubling_trick_update(ValueRateSchedule& schedule, double max_duality_gap) {
    if (schedule.family != ValueRateSchedule::Family::Doubling) return;
    if (max_duality_gap < schedule.doubling_threshold) {
        schedule.constant_rate *= schedule.doubling_shrink;
        schedule.doubling_threshold *= schedule.doubling_shrink;
    }
}

struct LearnerConfig {
    double beta_temp = 0.1;
    const Regularizer* reg = nullptr;
    // Value-table layout and regularizer coupling; normally classify(game).tag.
    GameClassTag mode = GameClassTag::General;
    ValueRateSchedule schedule = ValueRateSchedule::harmonic();
    NoiseSpec noise = NoiseSpec::none();
    double br_tol = 1e-10;

    bool zero_sum_coupling() const { return mode == GameClassTag::ZeroSum; }
};

// Complete mutable state of one SFP/MFP run.
struct LearnerState {
    int64_t step = 0;
    int state = 0;
    StationaryProfile profile;       // per-state empirical actions (x)
    ContinuationValues values;       // continuation payoffs (u)
    std::optional<ModelEstimate> estimate;  // MFP only
    std::vector<int64_t> state_visits;
    ValueRateSchedule schedule;      // mutable: the doubling trick shrinks it
    RngStream rng;

    static LearnerState init(const StochasticGame& g, const LearnerConfig& cfg, RngStream rng,
                             bool model_free, int initial_state = 0) {
        LearnerState st{0,
                        initial_state,
                        StationaryProfile::uniform(g),
                        ContinuationValues::zeros(g, cfg.mode),
                        std::nullopt,
                        std::vector<int64_t>(g.num_states(), 0),
                        cfg.schedule,
                        rng};
        if (model_free) st.estimate = ModelEstimate::fresh(g);
        return st;
    }

    AuxContext context(const StochasticGame& g, const LearnerConfig& cfg) const {
        return AuxContext{g, values, cfg.beta_temp, *cfg.reg, cfg.zero_sum_coupling(),
                          estimate ? &estimate->model : nullptr};
    }
};

namespace detail {

// Shared body of sfp_step/mfp_step. Within-step ordering: draw actions from
// the pre-update (u, x), then update u synchronously at every state, then
// update x at the current state only, then sample the transition (and, in the
// model-free case, observe the realized rewards/transition into the
// estimate). The step is a pure function of the prior state and consumes rng
// draws in a fixed order: actions, rewards (model-free), transition.
inline void learner_step(LearnerState& st, const StochasticGame& g, const LearnerConfig& cfg,
                         bool model_free) {
    if (model_free && !st.estimate)
        throw std::invalid_argument("mfp_step: learner state has no model estimate");
    const AuxContext ctx = st.context(g, cfg);
    const int cur = st.state;
    const int players = g.num_players();

    // (1) action draws from the smooth best response at the current state
    std::vector<int> actions(players);
    for (int i = 0; i < players; ++i) {
        auto br = smooth_best_response(ctx, i, cur, st.profile.at(cur), cfg.br_tol);
        actions[i] = st.rng.categorical(br);
    }
    const int joint = g.joint_index(actions);

    // (2) synchronous value update: u_s += beta_s(n) (Gamma_s(x_s) - u_s).
    // All Gamma_s are evaluated at the pre-update (u, x) before any table is
    // touched, so the update is simultaneous across states.
    const int tables = st.values.num_tables();
    std::vector<double> gammas(static_cast<size_t>(tables) * g.num_states());
    for (int s = 0; s < g.num_states(); ++s)
        for (int tab = 0; tab < tables; ++tab)
            gammas[static_cast<size_t>(tab) * g.num_states() + s] =
                regularized_auxiliary_payoff(ctx, tab, s, st.profile.at(s));
    for (int s = 0; s < g.num_states(); ++s) {
        const int64_t clock = st.schedule.per_visit ? st.state_visits[s] : st.step;
        const double rate = st.schedule.rate(clock);
        for (int tab = 0; tab < tables; ++tab) {
            double& u = st.values.tables[tab][s];
            u += rate * (gammas[static_cast<size_t>(tab) * g.num_states() + s] - u);
        }
    }

    // (3) empirical action update at the current state: running mean of draws
    const double xrate = 1.0 / static_cast<double>(st.state_visits[cur] + 1);
    for (int i = 0; i < players; ++i) {
        auto& block = st.profile.x[cur][i];
        for (size_t a = 0; a < block.size(); ++a)
            block[a] += xrate * (((static_cast<int>(a) == actions[i]) ? 1.0 : 0.0) - block[a]);
    }

    // (4) realized rewards and transition
    std::vector<double> rewards(players, 0.0);
    if (model_free)
        for (int i = 0; i < players; ++i)
            rewards[i] = sample_reward(g, cfg.noise, i, cur, joint, st.rng);
    const int next = sample_transition(g, cur, joint, st.rng);
    if (model_free) st.estimate->observe(cur, joint, rewards, next);

    ++st.state_visits[cur];
    ++st.step;
    st.state = next;
}

}  // namespace detail

// One step of smooth fictitious play with the model known exactly.
inline void sfp_step(LearnerState& st, const StochasticGame& g, const LearnerConfig& cfg) {
    detail::learner_step(st, g, cfg, false);
}

// One step of model-free smooth fictitious play: best responses and value
// updates use the estimated auxiliary payoff; the realized noisy rewards and
// the realized transition feed the running-mean estimators at the visited
// (state, joint action) pair. All players observe the full joint action.
inline void mfp_step(LearnerState& st, const StochasticGame& g, const LearnerConfig& cfg) {
    detail::learner_step(st, g, cfg, true);
}

enum class StepKind { Sfp, Mfp };

// Applies the configured stepper `steps` times, invoking the metric callback
// every `cadence` steps (first invocation after `cadence` steps). When the
// schedule is the doubling family and the mode is zero-sum, the duality gap
// the players can compute (from their own estimates in the model-free case)
// is evaluated at each cadence point and fed to the doubling trick before the
// callback runs.
inline void run(LearnerState& st, const StochasticGame& g, const LearnerConfig& cfg, StepKind kind,
                int64_t steps, int64_t cadence,
                const std::function<void(const LearnerState&)>& on_metric = nullptr) {
    if (steps < 1) throw std::invalid_argument("run: steps must be >= 1");
    if (cadence < 1) throw std::invalid_argument("run: cadence must be >= 1");
    for (int64_t n = 0; n < steps; ++n) {
        if (kind == StepKind::Sfp)
            sfp_step(st, g, cfg);
        else
            mfp_step(st, g, cfg);
        if ((n + 1) % cadence == 0) {
            if (st.schedule.family == ValueRateSchedule::Family::Doubling &&
                cfg.mode == GameClassTag::ZeroSum) {
                const AuxContext ctx = st.context(g, cfg);
                double max_gap = 0.0;
                for (int s = 0; s < g.num_states(); ++s)
                    max_gap = std::max(max_gap, duality_gap(ctx, s, st.profile.at(s)).value);
                doubling_trick_update(st.schedule, max_gap);
            }
            if (on_metric) on_metric(st);
        }
    }
}

// Invariant ball for the values: starting from ||u||_inf inside
// ||r||_inf + beta h_max / (1 - delta), every update keeps it there.
inline double value_bound(const StochasticGame& g, double beta, const Regularizer& reg) {
    double h_max = 0.0;
    for (int i = 0; i < g.num_players(); ++i) h_max += reg.max_value(g.num_actions(i));
    return g.reward_sup_norm() + beta * h_max / (1.0 - g.discount());
}

}  // namespace sgfp
