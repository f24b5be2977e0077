#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgfp/game.hpp"

namespace sgfp {

// One mixed action per player: the per-state slice of a stationary profile.
using MixedState = std::vector<std::vector<double>>;

// A mixed action per player per state (the x variable).
struct StationaryProfile {
    // x[state][player][action]
    std::vector<MixedState> x;

    static StationaryProfile uniform(const StochasticGame& g) {
        StationaryProfile p;
        p.x.resize(g.num_states());
        for (int s = 0; s < g.num_states(); ++s) {
            p.x[s].resize(g.num_players());
            for (int i = 0; i < g.num_players(); ++i)
                p.x[s][i].assign(g.num_actions(i), 1.0 / g.num_actions(i));
        }
        return p;
    }

    MixedState& at(int state) { return x[state]; }
    const MixedState& at(int state) const { return x[state]; }

    // Largest simplex violation over all blocks: max(|sum-1|, -min entry).
    double simplex_violation() const {
        double v = 0.0;
        for (const auto& ms : x)
            for (const auto& block : ms) {
                double sum = 0.0;
                for (double p : block) {
                    sum += p;
                    if (p < 0.0) v = std::max(v, -p);
                }
                v = std::max(v, std::abs(sum - 1.0));
            }
        return v;
    }
};

// One scalar per state per player (the u variable). Zero-sum and
// identical-interest modes store a single shared table; in the zero-sum case
// it holds player 0's values and player 1 reads the negation, so the opposite
// symmetry is structural.
struct ContinuationValues {
    std::vector<std::vector<double>> tables;  // [table][state]
    bool shared = false;
    bool antisymmetric = false;

    static ContinuationValues zeros(const StochasticGame& g, GameClassTag mode) {
        ContinuationValues u;
        u.shared = (mode == GameClassTag::ZeroSum || mode == GameClassTag::IdenticalInterest);
        u.antisymmetric = (mode == GameClassTag::ZeroSum);
        u.tables.assign(u.shared ? 1 : static_cast<size_t>(g.num_players()),
                        std::vector<double>(g.num_states(), 0.0));
        return u;
    }

    int num_tables() const { return static_cast<int>(tables.size()); }

    double get(int player, int state) const {
        if (!shared) return tables[player][state];
        return (antisymmetric && player != 0) ? -tables[0][state] : tables[0][state];
    }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& t : tables)
            for (double v : t) m = std::max(m, std::abs(v));
        return m;
    }
};

}  // namespace sgfp
