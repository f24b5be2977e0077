#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sgfp/game.hpp"

namespace sgfp {

// Estimated model tensors (r-hat per player, q-hat shared): the payload of the
// empirical estimator in discrete time and the continuous estimator state.
struct ModelTensors {
    int num_players = 0;
    int num_states = 0;
    int num_joint = 0;
    std::vector<double> rhat;  // [player][state][joint]
    std::vector<double> qhat;  // [state][joint][next]

    double reward(int player, int state, int joint) const {
        return rhat[(static_cast<size_t>(player) * num_states + state) * num_joint + joint];
    }
    double& reward(int player, int state, int joint) {
        return rhat[(static_cast<size_t>(player) * num_states + state) * num_joint + joint];
    }
    std::span<const double> transition_row(int state, int joint) const {
        return {qhat.data() + (static_cast<size_t>(state) * num_joint + joint) * num_states,
                static_cast<size_t>(num_states)};
    }
    std::span<double> transition_row(int state, int joint) {
        return {qhat.data() + (static_cast<size_t>(state) * num_joint + joint) * num_states,
                static_cast<size_t>(num_states)};
    }

    // Convention for pairs never observed: zero reward, uniform transition.
    // Keeps the estimated auxiliary payoff well-defined from step 0; the smooth
    // best-response floor guarantees every pair is eventually visited in
    // ergodic games, so the defaults wash out.
    static ModelTensors defaults(const StochasticGame& g) {
        ModelTensors m;
        m.num_players = g.num_players();
        m.num_states = g.num_states();
        m.num_joint = g.num_joint_actions();
        m.rhat.assign(static_cast<size_t>(m.num_players) * m.num_states * m.num_joint, 0.0);
        m.qhat.assign(static_cast<size_t>(m.num_states) * m.num_joint * m.num_states,
                      1.0 / g.num_states());
        return m;
    }

    static ModelTensors exact(const StochasticGame& g) {
        ModelTensors m = defaults(g);
        for (int i = 0; i < m.num_players; ++i)
            for (int s = 0; s < m.num_states; ++s)
                for (int a = 0; a < m.num_joint; ++a) m.reward(i, s, a) = g.reward(i, s, a);
        for (int s = 0; s < m.num_states; ++s)
            for (int a = 0; a < m.num_joint; ++a) {
                auto dst = m.transition_row(s, a);
                auto src = g.transition_row(s, a);
                std::copy(src.begin(), src.end(), dst.begin());
            }
        return m;
    }

    double max_transition_error(const StochasticGame& g) const {
        double err = 0.0;
        for (int s = 0; s < num_states; ++s)
            for (int a = 0; a < num_joint; ++a) {
                auto est = transition_row(s, a);
                auto tru = g.transition_row(s, a);
                for (int t = 0; t < num_states; ++t) err = std::max(err, std::abs(est[t] - tru[t]));
            }
        return err;
    }

    double max_reward_error(const StochasticGame& g) const {
        double err = 0.0;
        for (int i = 0; i < num_players; ++i)
            for (int s = 0; s < num_states; ++s)
                for (int a = 0; a < num_joint; ++a)
                    err = std::max(err, std::abs(reward(i, s, a) - g.reward(i, s, a)));
        return err;
    }
};

// Empirical model estimate: per-(state, joint action) visit counts, running
// mean rewards per player and empirical transition frequencies. Incremental
// updates with rate 1/(count+1) keep the running means equal to the arithmetic
// mean of the observations.
struct ModelEstimate {
    ModelTensors model;
    std::vector<int64_t> visits;  // [state][joint]

    static ModelEstimate fresh(const StochasticGame& g) {
        ModelEstimate e;
        e.model = ModelTensors::defaults(g);
        e.visits.assign(static_cast<size_t>(g.num_states()) * g.num_joint_actions(), 0);
        return e;
    }

    int64_t visit_count(int state, int joint) const {
        return visits[static_cast<size_t>(state) * model.num_joint + joint];
    }

    int64_t min_visit_count() const {
        int64_t m = std::numeric_limits<int64_t>::max();
        for (int64_t v : visits) m = std::min(m, v);
        return m;
    }

    // One observation at (state, joint): realized per-player rewards and the
    // realized next state. The first observation of a pair overwrites the
    // defaults entirely (rate 1).
    void observe(int state, int joint, std::span<const double> rewards_per_player, int next_state) {
        int64_t& c = visits[static_cast<size_t>(state) * model.num_joint + joint];
        const double rate = 1.0 / static_cast<double>(c + 1);
        for (int i = 0; i < model.num_players; ++i) {
            double& r = model.reward(i, state, joint);
            if (c == 0)
                r = rewards_per_player[i];
            else
                r += rate * (rewards_per_player[i] - r);
        }
        auto row = model.transition_row(state, joint);
        if (c == 0) {
            for (int t = 0; t < model.num_states; ++t) row[t] = (t == next_state) ? 1.0 : 0.0;
        } else {
            for (int t = 0; t < model.num_states; ++t)
                row[t] += rate * (((t == next_state) ? 1.0 : 0.0) - row[t]);
        }
        ++c;
    }
};

}  // namespace sgfp
