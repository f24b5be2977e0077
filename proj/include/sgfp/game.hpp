#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sgfp/rng.hpp"

namespace sgfp {

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kClassTolerance = 1e-12;

struct PlayerSpec {
    int action_count = 1;
};

// Finite discounted stochastic game with dense reward/transition tensors.
//
// Joint actions are flattened row-major over players in declared order:
// player 0 is the most significant digit, the last player the least. All
// tensors indexed by a joint action use this flattening, in memory and in the
// game file format.
//
// Immutable after construction; safe to share across concurrent runs.
class StochasticGame {
public:
    StochasticGame(int num_states, std::vector<PlayerSpec> players, double discount)
        : num_states_(num_states), players_(std::move(players)), discount_(discount) {
        if (num_states_ <= 0) throw std::invalid_argument("num_states must be positive");
        if (players_.empty()) throw std::invalid_argument("at least one player required");
        num_joint_ = 1;
        for (const auto& p : players_) {
            if (p.action_count < 1) throw std::invalid_argument("action_count must be >= 1");
            num_joint_ *= p.action_count;
        }
        rewards_.assign(static_cast<size_t>(num_players()) * num_states_ * num_joint_, 0.0);
        transitions_.assign(static_cast<size_t>(num_states_) * num_joint_ * num_states_, 0.0);
        // joint index -> per-player action index, precomputed once
        action_of_.assign(players_.size(), std::vector<int>(num_joint_, 0));
        for (int a = 0; a < num_joint_; ++a) {
            int rest = a;
            for (int i = num_players() - 1; i >= 0; --i) {
                action_of_[i][a] = rest % players_[i].action_count;
                rest /= players_[i].action_count;
            }
        }
    }

    int num_states() const { return num_states_; }
    int num_players() const { return static_cast<int>(players_.size()); }
    int num_actions(int player) const { return players_[player].action_count; }
    int max_actions() const {
        int m = 1;
        for (const auto& p : players_) m = std::max(m, p.action_count);
        return m;
    }
    int num_joint_actions() const { return num_joint_; }
    double discount() const { return discount_; }
    const std::vector<PlayerSpec>& players() const { return players_; }

    // Flat joint index of one action per player (row-major, player 0 first).
    int joint_index(std::span<const int> actions) const {
        int idx = 0;
        for (int i = 0; i < num_players(); ++i) idx = idx * players_[i].action_count + actions[i];
        return idx;
    }
    int action_of(int player, int joint) const { return action_of_[player][joint]; }

    double reward(int player, int state, int joint) const {
        return rewards_[reward_offset(player, state) + joint];
    }
    double& reward(int player, int state, int joint) {
        return rewards_[reward_offset(player, state) + joint];
    }
    std::span<const double> reward_row(int player, int state) const {
        return {rewards_.data() + reward_offset(player, state), static_cast<size_t>(num_joint_)};
    }

    std::span<const double> transition_row(int state, int joint) const {
        return {transitions_.data() + transition_offset(state, joint),
                static_cast<size_t>(num_states_)};
    }
    std::span<double> transition_row(int state, int joint) {
        return {transitions_.data() + transition_offset(state, joint),
                static_cast<size_t>(num_states_)};
    }

    double reward_sup_norm() const {
        double m = 0.0;
        for (double r : rewards_) m = std::max(m, std::abs(r));
        return m;
    }

private:
    size_t reward_offset(int player, int state) const {
        return (static_cast<size_t>(player) * num_states_ + state) * num_joint_;
    }
    size_t transition_offset(int state, int joint) const {
        return (static_cast<size_t>(state) * num_joint_ + joint) * num_states_;
    }

    int num_states_;
    std::vector<PlayerSpec> players_;
    double discount_;
    int num_joint_;
    std::vector<double> rewards_;
    std::vector<double> transitions_;
    std::vector<std::vector<int>> action_of_;
};

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const {
        std::string out;
        for (const auto& v : violations) {
            out += v;
            out += '\n';
        }
        return out;
    }
};

// Checks every structural invariant and reports each violation with the
// offending tensor indices. Never throws; an empty report means valid.
inline ValidationReport validate(const StochasticGame& g) {
    ValidationReport rep;
    auto add = [&rep](const std::string& s) { rep.violations.push_back(s); };

    if (!(g.discount() > 0.0 && g.discount() < 1.0)) {
        std::ostringstream os;
        os << "discount " << g.discount() << " outside (0,1)";
        add(os.str());
    }
    for (int i = 0; i < g.num_players(); ++i) {
        for (int s = 0; s < g.num_states(); ++s) {
            for (int a = 0; a < g.num_joint_actions(); ++a) {
                if (!std::isfinite(g.reward(i, s, a))) {
                    std::ostringstream os;
                    os << "rewards[player=" << i << "][state=" << s << "][joint_action=" << a
                       << "] is not finite";
                    add(os.str());
                }
            }
        }
    }
    for (int s = 0; s < g.num_states(); ++s) {
        for (int a = 0; a < g.num_joint_actions(); ++a) {
            auto row = g.transition_row(s, a);
            double sum = 0.0;
            bool finite = true;
            for (int t = 0; t < g.num_states(); ++t) {
                if (!std::isfinite(row[t])) finite = false;
                if (row[t] < 0.0) {
                    std::ostringstream os;
                    os << "transitions[state=" << s << "][joint_action=" << a << "][next=" << t
                       << "] is negative (" << row[t] << ")";
                    add(os.str());
                }
                sum += row[t];
            }
            if (!finite) {
                std::ostringstream os;
                os << "transitions[state=" << s << "][joint_action=" << a << "] has non-finite entry";
                add(os.str());
            } else if (std::abs(sum - 1.0) > kRowSumTolerance) {
                std::ostringstream os;
                os << "transitions[state=" << s << "][joint_action=" << a << "] sums to " << sum;
                add(os.str());
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Classification

enum class GameClassTag { ZeroSum, IdenticalInterest, Team, General };

struct GameClass {
    GameClassTag tag = GameClassTag::General;
    // Team: per-player constants c^i with offsets[0] == 0. Empty otherwise.
    std::vector<double> offsets;

    bool zero_sum() const { return tag == GameClassTag::ZeroSum; }
    bool shared_values() const {
        return tag == GameClassTag::ZeroSum || tag == GameClassTag::IdenticalInterest;
    }
};

inline const char* to_string(GameClassTag t) {
    switch (t) {
        case GameClassTag::ZeroSum: return "ZeroSum";
        case GameClassTag::IdenticalInterest: return "IdenticalInterest";
        case GameClassTag::Team: return "Team";
        case GameClassTag::General: return "General";
    }
    return "General";
}

// Most specific class of the game. Precedence: ZeroSum (two players,
// r^1 == -r^2 entrywise), then IdenticalInterest (Team with all c^i == 0),
// then Team (r^i == r^1 + c^i), then General.
inline GameClass classify(const StochasticGame& g) {
    if (g.num_players() == 2) {
        bool zs = true;
        for (int s = 0; s < g.num_states() && zs; ++s)
            for (int a = 0; a < g.num_joint_actions() && zs; ++a)
                if (std::abs(g.reward(0, s, a) + g.reward(1, s, a)) > kClassTolerance) zs = false;
        if (zs) return {GameClassTag::ZeroSum, {}};
    }
    // Team test: r^i - r^1 constant over (state, joint action).
    std::vector<double> offsets(g.num_players(), 0.0);
    bool team = true;
    for (int i = 1; i < g.num_players() && team; ++i) {
        const double c = g.reward(i, 0, 0) - g.reward(0, 0, 0);
        for (int s = 0; s < g.num_states() && team; ++s)
            for (int a = 0; a < g.num_joint_actions() && team; ++a)
                if (std::abs((g.reward(i, s, a) - g.reward(0, s, a)) - c) > kClassTolerance)
                    team = false;
        offsets[i] = c;
    }
    if (team) {
        bool identical = true;
        for (double c : offsets)
            if (std::abs(c) > kClassTolerance) identical = false;
        if (identical) return {GameClassTag::IdenticalInterest, {}};
        return {GameClassTag::Team, offsets};
    }
    return {GameClassTag::General, {}};
}

// ---------------------------------------------------------------------------
// Ergodicity certificate

struct ErgodicityReport {
    bool certified = false;
    int horizon = 0;  // least T with the all-actions support matrix power positive
    std::string to_string() const {
        if (certified) return "certified T=" + std::to_string(horizon);
        return "not certified";
    }
};

// Sufficient certificate: B[s][s'] = 1 iff q_s(a)(s') > 0 for every joint
// action a. If B^T is entrywise positive for some T <= S^2, every state is
// reachable from every state in T steps with positive probability no matter
// which actions are played. "not certified" does not claim non-ergodicity.
inline ErgodicityReport check_ergodicity(const StochasticGame& g) {
    const int S = g.num_states();
    std::vector<uint8_t> base(static_cast<size_t>(S) * S, 1);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < g.num_joint_actions(); ++a) {
            auto row = g.transition_row(s, a);
            for (int t = 0; t < S; ++t)
                if (!(row[t] > 0.0)) base[static_cast<size_t>(s) * S + t] = 0;
        }
    auto all_positive = [S](const std::vector<uint8_t>& m) {
        return std::all_of(m.begin(), m.end(), [](uint8_t v) { return v != 0; });
    };
    std::vector<uint8_t> power = base;
    const int max_T = S * S;
    for (int T = 1; T <= max_T; ++T) {
        if (all_positive(power)) return {true, T};
        std::vector<uint8_t> next(static_cast<size_t>(S) * S, 0);
        for (int s = 0; s < S; ++s)
            for (int k = 0; k < S; ++k) {
                if (!power[static_cast<size_t>(s) * S + k]) continue;
                for (int t = 0; t < S; ++t)
                    if (base[static_cast<size_t>(k) * S + t]) next[static_cast<size_t>(s) * S + t] = 1;
            }
        power = std::move(next);
    }
    return {false, 0};
}

// ---------------------------------------------------------------------------
// Sampling

inline int sample_transition(const StochasticGame& g, int state, int joint, RngStream& rng) {
    if (state < 0 || state >= g.num_states()) throw std::out_of_range("sample_transition: state");
    if (joint < 0 || joint >= g.num_joint_actions())
        throw std::out_of_range("sample_transition: joint action");
    return rng.categorical(g.transition_row(state, joint));
}

struct NoiseSpec {
    enum class Kind { None, Gaussian, Uniform, BernoulliShift };
    Kind kind = Kind::None;
    // Gaussian: standard deviation. Uniform: halfwidth. BernoulliShift: +-shift
    // with equal probability. All in payoff units; conditional mean is zero.
    double param = 0.0;

    static NoiseSpec none() { return {Kind::None, 0.0}; }
    static NoiseSpec gaussian(double sigma) { return {Kind::Gaussian, sigma}; }
    static NoiseSpec uniform(double halfwidth) { return {Kind::Uniform, halfwidth}; }
    static NoiseSpec bernoulli_shift(double shift) { return {Kind::BernoulliShift, shift}; }

    double variance() const {
        switch (kind) {
            case Kind::None: return 0.0;
            case Kind::Gaussian: return param * param;
            case Kind::Uniform: return param * param / 3.0;
            case Kind::BernoulliShift: return param * param;
        }
        return 0.0;
    }

    // Kind::None consumes no draws, so noisy and noiseless runs sharing a
    // stream stay aligned.
    double perturb(double value, RngStream& rng) const {
        switch (kind) {
            case Kind::None: return value;
            case Kind::Gaussian: return value + param * rng.gaussian();
            case Kind::Uniform: return value + rng.uniform_in(-param, param);
            case Kind::BernoulliShift: return value + (rng.uniform() < 0.5 ? param : -param);
        }
        return value;
    }
};

inline double sample_reward(const StochasticGame& g, const NoiseSpec& noise, int player, int state,
                            int joint, RngStream& rng) {
    if (player < 0 || player >= g.num_players()) throw std::out_of_range("sample_reward: player");
    if (state < 0 || state >= g.num_states()) throw std::out_of_range("sample_reward: state");
    if (joint < 0 || joint >= g.num_joint_actions())
        throw std::out_of_range("sample_reward: joint action");
    return noise.perturb(g.reward(player, state, joint), rng);
}

// ---------------------------------------------------------------------------
// Generator

struct GameDims {
    int num_states = 1;
    std::vector<int> action_counts;  // one entry per player
    double discount = 0.5;
};

// Random game whose every transition row is (1-mixing)*random + mixing*uniform,
// which makes check_ergodicity certify T=1 for any mixing > 0. Rewards are
// drawn in [-1, 1] and symmetrized to the requested class, so the sup norm is
// at most 1 by construction.
inline StochasticGame random_ergodic_game(const GameDims& dims, GameClassTag cls, double mixing,
                                          RngStream& rng) {
    if (!(mixing > 0.0 && mixing <= 1.0))
        throw std::invalid_argument("random_ergodic_game: mixing must be in (0,1]");
    if (dims.num_states <= 0 || dims.action_counts.empty())
        throw std::invalid_argument("random_ergodic_game: invalid dims");
    if (cls == GameClassTag::ZeroSum && dims.action_counts.size() != 2)
        throw std::invalid_argument("random_ergodic_game: ZeroSum needs exactly two players");

    std::vector<PlayerSpec> players;
    players.reserve(dims.action_counts.size());
    for (int a : dims.action_counts) {
        if (a < 1) throw std::invalid_argument("random_ergodic_game: invalid action count");
        players.push_back({a});
    }
    StochasticGame g(dims.num_states, players, dims.discount);

    const int S = g.num_states();
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < g.num_joint_actions(); ++a) {
            auto row = g.transition_row(s, a);
            double sum = 0.0;
            for (int t = 0; t < S; ++t) {
                row[t] = rng.uniform();
                sum += row[t];
            }
            for (int t = 0; t < S; ++t)
                row[t] = (1.0 - mixing) * (row[t] / sum) + mixing / S;
            // exact renormalization keeps the row-sum invariant bit-tight
            double total = 0.0;
            for (int t = 0; t < S; ++t) total += row[t];
            for (int t = 0; t < S; ++t) row[t] /= total;
        }

    const int J = g.num_joint_actions();
    switch (cls) {
        case GameClassTag::ZeroSum:
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < J; ++a) {
                    const double r = rng.uniform_in(-1.0, 1.0);
                    g.reward(0, s, a) = r;
                    g.reward(1, s, a) = -r;
                }
            break;
        case GameClassTag::IdenticalInterest:
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < J; ++a) {
                    const double r = rng.uniform_in(-1.0, 1.0);
                    for (int i = 0; i < g.num_players(); ++i) g.reward(i, s, a) = r;
                }
            break;
        case GameClassTag::Team: {
            // Base payoffs in [-1/2, 1/2] plus per-player constants in the same
            // range keep every reward inside [-1, 1].
            std::vector<double> c(g.num_players(), 0.0);
            for (int i = 1; i < g.num_players(); ++i) c[i] = rng.uniform_in(-0.5, 0.5);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < J; ++a) {
                    const double r = rng.uniform_in(-0.5, 0.5);
                    for (int i = 0; i < g.num_players(); ++i) g.reward(i, s, a) = r + c[i];
                }
            break;
        }
        case GameClassTag::General:
            for (int i = 0; i < g.num_players(); ++i)
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < J; ++a) g.reward(i, s, a) = rng.uniform_in(-1.0, 1.0);
            break;
    }
    return g;
}

}  // namespace sgfp
