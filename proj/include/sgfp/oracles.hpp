#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sgfp/auxiliary.hpp"
#include "sgfp/game.hpp"
#include "sgfp/profiles.hpp"
#include "sgfp/regularizers.hpp"

namespace sgfp {

// Independent ground-truth solvers used to validate the learners.

struct OracleResult {
    std::vector<double> values;                       // u* per state
    std::vector<MixedState> policy;                   // x* per state (when defined)
    double residual = 0.0;
    int iterations = 0;
};

// Regularized Shapley value iteration for two-player zero-sum games:
// u <- Phi(u), where Phi(u)_s is the saddle value of the regularized auxiliary
// matrix game at s. Phi is a delta-contraction in the sup norm, so the loop
// reaches ||Phi(u) - u||_inf <= tol in finitely many steps. Returns u* and the
// per-state saddle profiles.
inline OracleResult zs_regularized_value_iteration(const StochasticGame& g, double beta,
                                                   const Regularizer& reg, double tol = 1e-9,
                                                   double inner_tol = 1e-10, int max_iters = 100000) {
    if (classify(g).tag != GameClassTag::ZeroSum)
        throw std::invalid_argument("zs_regularized_value_iteration: game is not zero-sum");
    const int S = g.num_states();
    const int n1 = g.num_actions(0), n2 = g.num_actions(1);
    const double delta = g.discount();

    OracleResult res;
    res.values.assign(S, 0.0);
    res.policy.assign(S, MixedState{});

    std::vector<double> next(S, 0.0);
    for (int it = 1; it <= max_iters; ++it) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            // auxiliary matrix at (s, u): rows player 0, columns player 1
            std::vector<std::vector<double>> A(n1, std::vector<double>(n2, 0.0));
            for (int a = 0; a < g.num_joint_actions(); ++a) {
                double cont = 0.0;
                auto row = g.transition_row(s, a);
                for (int t = 0; t < S; ++t) cont += row[t] * res.values[t];
                A[g.action_of(0, a)][g.action_of(1, a)] =
                    (1.0 - delta) * g.reward(0, s, a) + delta * cont;
            }
            auto saddle = regularized_matrix_game_solve(A, beta, reg, inner_tol);
            next[s] = saddle.value;
            res.policy[s] = {saddle.x1, saddle.x2};
            residual = std::max(residual, std::abs(next[s] - res.values[s]));
        }
        res.values = next;
        res.iterations = it;
        res.residual = residual;
        if (residual <= tol) return res;
    }
    throw SolveError("zs_regularized_value_iteration: residual " + std::to_string(res.residual) +
                         " after " + std::to_string(max_iters) + " iterations",
                     res.residual);
}

// Soft value iteration for single-player games (entropy-regularized MDP):
//   V_s <- beta log sum_a exp(((1-delta) r_s(a) + delta q_s(a).V) / beta)
// a delta-contraction; returns V* and the logit-optimal stationary policy.
inline OracleResult soft_value_iteration(const StochasticGame& g, double beta, double tol = 1e-9,
                                         int max_iters = 1000000) {
    if (g.num_players() != 1)
        throw std::invalid_argument("soft_value_iteration: game must have exactly one player");
    if (!(beta > 0.0)) throw std::invalid_argument("soft_value_iteration: beta must be positive");
    const int S = g.num_states();
    const int A = g.num_actions(0);
    const double delta = g.discount();

    OracleResult res;
    res.values.assign(S, 0.0);
    std::vector<double> next(S, 0.0), q(A, 0.0);
    for (int it = 1; it <= max_iters; ++it) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                double cont = 0.0;
                auto row = g.transition_row(s, a);
                for (int t = 0; t < S; ++t) cont += row[t] * res.values[t];
                q[a] = (1.0 - delta) * g.reward(0, s, a) + delta * cont;
            }
            // log-sum-exp with max subtraction
            double m = q[0];
            for (double v : q) m = std::max(m, v);
            double z = 0.0;
            for (double v : q) z += std::exp((v - m) / beta);
            next[s] = m + beta * std::log(z);
            residual = std::max(residual, std::abs(next[s] - res.values[s]));
        }
        res.values = next;
        res.iterations = it;
        res.residual = residual;
        if (residual <= tol) break;
        if (it == max_iters)
            throw SolveError("soft_value_iteration: residual " + std::to_string(residual) +
                                 " after " + std::to_string(max_iters) + " iterations",
                             residual);
    }
    res.policy.assign(S, MixedState{});
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double cont = 0.0;
            auto row = g.transition_row(s, a);
            for (int t = 0; t < S; ++t) cont += row[t] * res.values[t];
            q[a] = (1.0 - delta) * g.reward(0, s, a) + delta * cont;
        }
        res.policy[s] = {logit_response(q, beta)};
    }
    return res;
}

// ---------------------------------------------------------------------------
// Equilibrium residuals

struct StateResiduals {
    double rho_val = 0.0;  // |f_{s,u}(x_s) + beta h(x_s) - u_s|, max over players
    double rho_br = 0.0;   // max_i ||x^i_s - br^i_s(u, x_s)||_inf
};

// Fixed-point residuals of the limit-set conditions Gamma = u and x = br.
// Both vanish exactly at a regularized stationary equilibrium with consistent
// continuation values; computed against the true model.
inline std::vector<StateResiduals> equilibrium_residuals(const StochasticGame& g, double beta,
                                                         const Regularizer& reg,
                                                         const StationaryProfile& x,
                                                         const ContinuationValues& u,
                                                         bool zero_sum_coupling) {
    AuxContext ctx{g, u, beta, reg, zero_sum_coupling, nullptr};
    std::vector<StateResiduals> out(g.num_states());
    const int tables = u.num_tables();
    for (int s = 0; s < g.num_states(); ++s) {
        StateResiduals r;
        for (int i = 0; i < g.num_players(); ++i) {
            if (i < tables) {
                const double gamma = regularized_auxiliary_payoff(ctx, i, s, x.at(s));
                r.rho_val = std::max(r.rho_val, std::abs(gamma - u.get(i, s)));
            }
            auto br = smooth_best_response(ctx, i, s, x.at(s));
            double d = 0.0;
            for (size_t a = 0; a < br.size(); ++a) d = std::max(d, std::abs(br[a] - x.at(s)[i][a]));
            r.rho_br = std::max(r.rho_br, d);
        }
        out[s] = r;
    }
    return out;
}

}  // namespace sgfp
