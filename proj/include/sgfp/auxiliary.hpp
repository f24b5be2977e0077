#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "sgfp/estimation.hpp"
#include "sgfp/game.hpp"
#include "sgfp/profiles.hpp"
#include "sgfp/regularizers.hpp"

namespace sgfp {

// Auxiliary (Shapley-operator) game quantities.
//
// At state s with continuation values u, the auxiliary one-shot payoff of
// player i under joint action a is
//
//   f^i_{s,u}(a) = (1-delta) r^i_s(a) + delta sum_{s'} q_s(a)(s') u^i(s')
//
// extended multilinearly to mixed profiles. The smooth best response is the
// unique maximizer over the player's simplex of f^i + beta h^i; under the
// entropy regularizer it is the logit map of the payoff vector.
//
// When `model` is set, lookups use the estimated tensors (r-hat, q-hat)
// instead of the true game: the same formulas, with hats.
struct AuxContext {
    const StochasticGame& game;
    const ContinuationValues& values;
    double beta;
    const Regularizer& reg;
    // Zero-sum coupling: h^1 = phi(x^1) - phi(x^2) and h^2 = -h^1, so the
    // regularized game stays zero-sum. Otherwise h^i = sum_j phi(x^j) for
    // every player.
    bool zero_sum_coupling = false;
    const ModelTensors* model = nullptr;

    double stage_reward(int player, int state, int joint) const {
        return model ? model->reward(player, state, joint) : game.reward(player, state, joint);
    }
    std::span<const double> stage_transition(int state, int joint) const {
        return model ? model->transition_row(state, joint) : game.transition_row(state, joint);
    }
};

// h^i evaluated at a per-state mixed profile under the context's coupling.
inline double profile_regularizer(const AuxContext& ctx, int player, const MixedState& x_s) {
    if (ctx.zero_sum_coupling) {
        const double v = ctx.reg.value(x_s[0]) - ctx.reg.value(x_s[1]);
        return player == 0 ? v : -v;
    }
    double total = 0.0;
    for (const auto& block : x_s) total += ctx.reg.value(block);
    return total;
}

// Payoff of `payoff_player` under one joint action (pure profile).
inline double pure_auxiliary_payoff(const AuxContext& ctx, int player, int state, int joint) {
    const double delta = ctx.game.discount();
    double cont = 0.0;
    auto row = ctx.stage_transition(state, joint);
    for (int t = 0; t < ctx.game.num_states(); ++t) cont += row[t] * ctx.values.get(player, t);
    return (1.0 - delta) * ctx.stage_reward(player, state, joint) + delta * cont;
}

// f^i_{s,u}(x): expectation of the pure payoff under the product distribution x.
inline double auxiliary_payoff(const AuxContext& ctx, int player, int state, const MixedState& x_s) {
    double total = 0.0;
    for (int a = 0; a < ctx.game.num_joint_actions(); ++a) {
        double w = 1.0;
        for (int j = 0; j < ctx.game.num_players(); ++j) w *= x_s[j][ctx.game.action_of(j, a)];
        if (w == 0.0) continue;
        total += w * pure_auxiliary_payoff(ctx, player, state, a);
    }
    return total;
}

// Estimated auxiliary payoff: same formula with r-hat/q-hat substituted.
inline double estimated_auxiliary_payoff(const AuxContext& ctx, int player, int state,
                                         const MixedState& x_s) {
    if (ctx.model == nullptr)
        throw std::invalid_argument("estimated_auxiliary_payoff: context has no model estimate");
    return auxiliary_payoff(ctx, player, state, x_s);
}

// Regularized auxiliary payoff Gamma^i_s(x) = f^i_{s,u}(x) + beta h^i(x); the
// quantity the value update chases.
inline double regularized_auxiliary_payoff(const AuxContext& ctx, int player, int state,
                                           const MixedState& x_s) {
    return auxiliary_payoff(ctx, player, state, x_s) +
           ctx.beta * profile_regularizer(ctx, player, x_s);
}

// Payoff vector of `payoff_player` as a function of `chooser`'s own action,
// the other players held at x_s: out[b] = f^{payoff_player}_{s,u}(b, x^{-chooser}).
inline void auxiliary_payoff_vector(const AuxContext& ctx, int payoff_player, int chooser, int state,
                                    const MixedState& x_s, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (int a = 0; a < ctx.game.num_joint_actions(); ++a) {
        double w = 1.0;
        for (int j = 0; j < ctx.game.num_players(); ++j) {
            if (j == chooser) continue;
            w *= x_s[j][ctx.game.action_of(j, a)];
        }
        if (w == 0.0) continue;
        out[ctx.game.action_of(chooser, a)] += w * pure_auxiliary_payoff(ctx, payoff_player, state, a);
    }
}

// Smooth best response of player i at state s against x^{-i}: the unique
// maximizer of f^i(., x^{-i}) + beta h^i(., x^{-i}). With a separable
// regularizer the opponents' blocks only shift the objective, so this is the
// one-block smooth argmax of the payoff vector (logit under entropy).
inline std::vector<double> smooth_best_response(const AuxContext& ctx, int player, int state,
                                                const MixedState& x_s, double tol = 1e-10) {
    std::vector<double> v(ctx.game.num_actions(player));
    auxiliary_payoff_vector(ctx, player, player, state, x_s, v);
    return smooth_argmax(v, ctx.beta, ctx.reg, tol);
}

// ---------------------------------------------------------------------------
// Zero-sum duality gap

struct DualityGapRecord {
    int state = 0;
    double value = 0.0;               // w_s >= 0 (up to solver tolerance)
    std::vector<double> max_deviation;  // y^1*: player 0's best deviation
    std::vector<double> min_deviation;  // y^2*: player 1's worst-case response
};

// w_s = max_{y1} [f_{s,u} + beta h](y1, x^2) - min_{y2} [f_{s,u} + beta h](x^1, y2)
// for the payoff function of player 0 with h = phi(x^1) - phi(x^2). Both sides
// bracket the value of the regularized auxiliary game at x, so w_s >= 0 and
// w_s = 0 exactly at the regularized saddle point.
inline DualityGapRecord duality_gap(const AuxContext& ctx, int state, const MixedState& x_s,
                                    double tol = 1e-10) {
    if (ctx.game.num_players() != 2)
        throw std::invalid_argument("duality_gap: requires a two-player zero-sum context");
    if (!ctx.zero_sum_coupling)
        throw std::invalid_argument("duality_gap: context is not in zero-sum coupling");

    const double beta = ctx.beta;
    DualityGapRecord rec;
    rec.state = state;

    // max side: player 0 deviates, payoff f^0(y1, x^2) + beta(phi(y1) - phi(x^2))
    std::vector<double> v0(ctx.game.num_actions(0));
    auxiliary_payoff_vector(ctx, 0, 0, state, x_s, v0);
    rec.max_deviation = smooth_argmax(v0, beta, ctx.reg, tol);
    double max_side = beta * (ctx.reg.value(rec.max_deviation) - ctx.reg.value(x_s[1]));
    for (size_t a = 0; a < v0.size(); ++a) max_side += rec.max_deviation[a] * v0[a];

    // min side: player 1 deviates, same payoff function
    //   min_{y2} f^0(x^1, y2) + beta(phi(x^1) - phi(y2))
    // = beta phi(x^1) - max_{y2} <y2, -v1> + beta phi(y2)
    std::vector<double> v1(ctx.game.num_actions(1));
    auxiliary_payoff_vector(ctx, 0, 1, state, x_s, v1);
    std::vector<double> neg(v1.size());
    for (size_t a = 0; a < v1.size(); ++a) neg[a] = -v1[a];
    rec.min_deviation = smooth_argmax(neg, beta, ctx.reg, tol);
    double min_side = beta * (ctx.reg.value(x_s[0]) - ctx.reg.value(rec.min_deviation));
    for (size_t a = 0; a < v1.size(); ++a) min_side += rec.min_deviation[a] * v1[a];

    rec.value = max_side - min_side;
    return rec;
}

// ---------------------------------------------------------------------------
// Regularized matrix game saddle point

struct MatrixGameResult {
    std::vector<double> x1;
    std::vector<double> x2;
    double value = 0.0;  // saddle value of x1' A x2 + beta (phi(x1) - phi(x2))
    double gap = 0.0;
    int iterations = 0;
};

namespace detail {

struct MatrixGapResult {
    double gap;
    std::vector<double> y1, y2;
};

inline MatrixGapResult matrix_duality_gap(const std::vector<std::vector<double>>& A, double beta,
                                          const Regularizer& reg, const std::vector<double>& x1,
                                          const std::vector<double>& x2, double tol) {
    const size_t n1 = A.size(), n2 = A[0].size();
    std::vector<double> v1(n1, 0.0), v2neg(n2, 0.0);
    for (size_t a = 0; a < n1; ++a)
        for (size_t b = 0; b < n2; ++b) v1[a] += A[a][b] * x2[b];
    for (size_t b = 0; b < n2; ++b)
        for (size_t a = 0; a < n1; ++a) v2neg[b] -= A[a][b] * x1[a];

    MatrixGapResult r;
    r.y1 = smooth_argmax(v1, beta, reg, tol);
    r.y2 = smooth_argmax(v2neg, beta, reg, tol);
    double max_side = beta * (reg.value(r.y1) - reg.value(x2));
    for (size_t a = 0; a < n1; ++a) max_side += r.y1[a] * v1[a];
    double min_side = beta * (reg.value(x1) - reg.value(r.y2));
    for (size_t b = 0; b < n2; ++b) min_side -= r.y2[b] * v2neg[b];
    r.gap = max_side - min_side;
    return r;
}

}  // namespace detail

// Saddle point of x1' A x2 + beta (phi(x1) - phi(x2)) over the two simplices
// (player 1 maximizes, player 2 minimizes); unique by strict concavity in x1
// and strict convexity in x2.
//
// Damped simultaneous smooth-best-response iteration x <- x + gamma (br(x)-x),
// with the duality gap as merit function. A fixed gamma = 0.5 cycles once beta
// is small relative to the payoff scale (the linearized map has eigenvalues
// 1 - gamma +- i gamma s/beta), so the damping is halved whenever a window of
// iterations fails to shrink the best gap seen; at small enough gamma the
// iteration contracts locally and the gap drives it to tol.
inline MatrixGameResult regularized_matrix_game_solve(const std::vector<std::vector<double>>& A,
                                                      double beta, const Regularizer& reg,
                                                      double tol = 1e-8, int max_iters = 100000) {
    if (A.empty() || A[0].empty())
        throw std::invalid_argument("regularized_matrix_game_solve: empty payoff matrix");
    if (!(beta > 0.0))
        throw std::invalid_argument("regularized_matrix_game_solve: beta must be positive");
    const size_t n1 = A.size(), n2 = A[0].size();
    const double inner_tol = std::min(tol * 0.1, 1e-10);

    MatrixGameResult res;
    res.x1.assign(n1, 1.0 / static_cast<double>(n1));
    res.x2.assign(n2, 1.0 / static_cast<double>(n2));

    double damping = 0.5;
    const int window = 50;
    double window_floor = std::numeric_limits<double>::infinity();
    double last_floor = std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= max_iters; ++it) {
        auto step = detail::matrix_duality_gap(A, beta, reg, res.x1, res.x2, inner_tol);
        gap = step.gap;
        if (gap <= tol) {
            res.gap = gap;
            res.iterations = it;
            double bilinear = 0.0;
            for (size_t a = 0; a < n1; ++a)
                for (size_t b = 0; b < n2; ++b) bilinear += res.x1[a] * A[a][b] * res.x2[b];
            res.value = bilinear + beta * (reg.value(res.x1) - reg.value(res.x2));
            return res;
        }
        window_floor = std::min(window_floor, gap);
        if (it % window == 0) {
            if (window_floor > 0.98 * last_floor) damping = std::max(damping * 0.5, 1e-3);
            last_floor = std::min(last_floor, window_floor);
            window_floor = std::numeric_limits<double>::infinity();
        }
        for (size_t a = 0; a < n1; ++a) res.x1[a] += damping * (step.y1[a] - res.x1[a]);
        for (size_t b = 0; b < n2; ++b) res.x2[b] += damping * (step.y2[b] - res.x2[b]);
    }
    throw SolveError("regularized_matrix_game_solve: gap " + std::to_string(gap) + " after " +
                         std::to_string(max_iters) + " iterations",
                     gap);
}

}  // namespace sgfp
