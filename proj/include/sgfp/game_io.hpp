#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sgfp/game.hpp"

namespace sgfp {

// Raised on malformed or incomplete game/config files. The message carries the
// parse location or the missing field name.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// 17 significant digits round-trips an IEEE double exactly.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T>
T require_field(const nlohmann::json& j, const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("field '") + name + "': " + e.what());
    }
}

}  // namespace detail

// Game file format: a UTF-8 JSON object with fields
//   num_states   : integer
//   players      : list of {"action_count": n}
//   discount     : real in (0,1)
//   rewards      : nested arrays [player][state][joint_action]
//   transitions  : nested arrays [state][joint_action][next_state]
// Joint actions are flattened row-major over players in declared order.
// Numbers are written with 17 significant digits so save/load round-trips are
// bit-exact.
inline void save_game(const StochasticGame& g, std::ostream& os) {
    os << "{\n";
    os << "  \"num_states\": " << g.num_states() << ",\n";
    os << "  \"players\": [";
    for (int i = 0; i < g.num_players(); ++i) {
        if (i) os << ", ";
        os << "{\"action_count\": " << g.num_actions(i) << "}";
    }
    os << "],\n";
    os << "  \"discount\": " << detail::fmt17(g.discount()) << ",\n";
    os << "  \"rewards\": [\n";
    for (int i = 0; i < g.num_players(); ++i) {
        os << "    [";
        for (int s = 0; s < g.num_states(); ++s) {
            if (s) os << ",";
            os << "\n      [";
            for (int a = 0; a < g.num_joint_actions(); ++a) {
                if (a) os << ", ";
                os << detail::fmt17(g.reward(i, s, a));
            }
            os << "]";
        }
        os << "\n    ]" << (i + 1 < g.num_players() ? "," : "") << "\n";
    }
    os << "  ],\n";
    os << "  \"transitions\": [\n";
    for (int s = 0; s < g.num_states(); ++s) {
        os << "    [";
        for (int a = 0; a < g.num_joint_actions(); ++a) {
            if (a) os << ",";
            os << "\n      [";
            auto row = g.transition_row(s, a);
            for (int t = 0; t < g.num_states(); ++t) {
                if (t) os << ", ";
                os << detail::fmt17(row[t]);
            }
            os << "]";
        }
        os << "\n    ]" << (s + 1 < g.num_states() ? "," : "") << "\n";
    }
    os << "  ]\n";
    os << "}\n";
}

inline void save_game(const StochasticGame& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_game(g, f);
}

inline StochasticGame load_game(std::istream& is, const std::string& origin = "<stream>") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }

    const int num_states = detail::require_field<int>(j, "num_states");
    const auto players_json = detail::require_field<nlohmann::json>(j, "players");
    const double discount = detail::require_field<double>(j, "discount");
    if (!players_json.is_array() || players_json.empty())
        throw ParseError(origin + ": field 'players' must be a non-empty list");

    std::vector<PlayerSpec> players;
    for (const auto& p : players_json) players.push_back({detail::require_field<int>(p, "action_count")});
    if (num_states <= 0) throw ParseError(origin + ": field 'num_states' must be positive");
    for (const auto& p : players)
        if (p.action_count < 1) throw ParseError(origin + ": field 'action_count' must be >= 1");

    StochasticGame g(num_states, players, discount);

    const auto rewards = detail::require_field<nlohmann::json>(j, "rewards");
    if (!rewards.is_array() || static_cast<int>(rewards.size()) != g.num_players())
        throw ParseError(origin + ": field 'rewards' must list one tensor per player");
    for (int i = 0; i < g.num_players(); ++i) {
        const auto& per_state = rewards[i];
        if (!per_state.is_array() || static_cast<int>(per_state.size()) != num_states)
            throw ParseError(origin + ": rewards[" + std::to_string(i) + "] must have one row per state");
        for (int s = 0; s < num_states; ++s) {
            const auto& row = per_state[s];
            if (!row.is_array() || static_cast<int>(row.size()) != g.num_joint_actions())
                throw ParseError(origin + ": rewards[" + std::to_string(i) + "][" + std::to_string(s) +
                                 "] must have one entry per joint action");
            for (int a = 0; a < g.num_joint_actions(); ++a) g.reward(i, s, a) = row[a].get<double>();
        }
    }

    const auto transitions = detail::require_field<nlohmann::json>(j, "transitions");
    if (!transitions.is_array() || static_cast<int>(transitions.size()) != num_states)
        throw ParseError(origin + ": field 'transitions' must have one block per state");
    for (int s = 0; s < num_states; ++s) {
        const auto& per_action = transitions[s];
        if (!per_action.is_array() || static_cast<int>(per_action.size()) != g.num_joint_actions())
            throw ParseError(origin + ": transitions[" + std::to_string(s) +
                             "] must have one row per joint action");
        for (int a = 0; a < g.num_joint_actions(); ++a) {
            const auto& row = per_action[a];
            if (!row.is_array() || static_cast<int>(row.size()) != num_states)
                throw ParseError(origin + ": transitions[" + std::to_string(s) + "][" + std::to_string(a) +
                                 "] must have one entry per next state");
            auto dst = g.transition_row(s, a);
            for (int t = 0; t < num_states; ++t) dst[t] = row[t].get<double>();
        }
    }
    return g;
}

inline StochasticGame load_game(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
    return load_game(f, path);
}

}  // namespace sgfp
