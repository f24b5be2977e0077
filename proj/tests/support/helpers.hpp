#pragma once

// Shared fixtures and independent test-side oracles (brute force, grids,
// finite differences, small linear solves). Everything here is deliberately
// written without reusing the library's solution paths.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgfp/game.hpp"

namespace sgfp::testing {

// Matching pennies on a single self-looping state. Joint index (a0, a1) is
// a0*2+a1; player 0 wins on a match.
inline StochasticGame matching_pennies(double discount = 0.5) {
    StochasticGame g(1, {{2}, {2}}, discount);
    const double r0[4] = {1.0, -1.0, -1.0, 1.0};
    for (int a = 0; a < 4; ++a) {
        g.reward(0, 0, a) = r0[a];
        g.reward(1, 0, a) = -r0[a];
        g.transition_row(0, a)[0] = 1.0;
    }
    return g;
}

// Two states swapping deterministically; single player, single action.
inline StochasticGame swap_chain() {
    StochasticGame g(2, {{1}}, 0.5);
    g.transition_row(0, 0)[1] = 1.0;
    g.transition_row(1, 0)[0] = 1.0;
    g.reward(0, 0, 0) = 1.0;
    g.reward(0, 1, 0) = -1.0;
    return g;
}

// Hand-built copy of tests/data/three_state_game.json.
inline StochasticGame three_state_fixture() {
    StochasticGame g(3, {{2}, {2}}, 0.5);
    const double r0[3][4] = {{1.0, -1.0, -1.0, 1.0},
                             {0.5, 0.25, -0.25, -0.5},
                             {0.0, 0.125, -0.125, 1.0}};
    const double q[3][4][3] = {
        {{0.5, 0.25, 0.25},
         {0.25, 0.5, 0.25},
         {0.25, 0.25, 0.5},
         {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
        {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}, {0.125, 0.375, 0.5}},
        {{0.75, 0.125, 0.125}, {0.125, 0.75, 0.125}, {0.125, 0.125, 0.75}, {0.2, 0.3, 0.5}}};
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 4; ++a) {
            g.reward(0, s, a) = r0[s][a];
            g.reward(1, s, a) = -r0[s][a];
            auto row = g.transition_row(s, a);
            for (int t = 0; t < 3; ++t) row[t] = q[s][a][t];
        }
    return g;
}

// Chi-squared critical values at significance 1e-3, indexed by degrees of
// freedom (1..9).
inline double chi2_critical_1e3(int dof) {
    static const double table[] = {0.0,    10.828, 13.816, 16.266, 18.467,
                                   20.515, 22.458, 24.322, 26.125, 27.877};
    if (dof < 1 || dof > 9) throw std::invalid_argument("chi2 table: dof out of range");
    return table[dof];
}

// Dense Gaussian elimination with partial pivoting, for small systems.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (std::abs(a[col][col]) < 1e-14) throw std::runtime_error("solve_linear: singular");
        for (size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t r = n; r-- > 0;) {
        double s = b[r];
        for (size_t c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

// Central finite differences of a scalar function.
inline std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                               std::vector<double> x, double eps = 1e-6) {
    std::vector<double> g(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + eps;
        const double hi = f(x);
        x[i] = orig - eps;
        const double lo = f(x);
        x[i] = orig;
        g[i] = (hi - lo) / (2.0 * eps);
    }
    return g;
}

// Brute force over all joint-action sequences of length T: true iff every
// ordered state pair is reached with positive probability under every
// sequence.
inline bool reachable_under_all_sequences(const StochasticGame& g, int T) {
    const int S = g.num_states();
    const int J = g.num_joint_actions();
    double combos = std::pow(static_cast<double>(J), T);
    if (combos > 2e6) throw std::invalid_argument("brute force: too many sequences");

    std::vector<int> seq(T, 0);
    std::vector<double> cur(S * S), next(S * S);
    while (true) {
        // cur = product of one-step matrices along the sequence
        for (int s = 0; s < S; ++s)
            for (int t = 0; t < S; ++t) cur[s * S + t] = (s == t) ? 1.0 : 0.0;
        for (int step = 0; step < T; ++step) {
            const int a = seq[step];
            std::fill(next.begin(), next.end(), 0.0);
            for (int s = 0; s < S; ++s)
                for (int k = 0; k < S; ++k) {
                    if (cur[s * S + k] == 0.0) continue;
                    auto row = g.transition_row(k, a);
                    for (int t = 0; t < S; ++t) next[s * S + t] += cur[s * S + k] * row[t];
                }
            std::swap(cur, next);
        }
        for (double p : cur)
            if (!(p > 0.0)) return false;
        // odometer
        int pos = T - 1;
        while (pos >= 0 && ++seq[pos] == J) seq[pos--] = 0;
        if (pos < 0) break;
    }
    return true;
}

// Fine-grid bracket of the saddle of
//   g(p, q) = [p,1-p]' A [q,1-q] + beta (H(p) - H(q))
// over two 2-action simplices: lower = max_p min_q, upper = min_q max_p,
// evaluated on a uniform grid. Independent of the library solver.
struct GridSaddle {
    double lower = 0.0;
    double upper = 0.0;
    double p_star = 0.5;  // argmax of the lower problem
    double q_star = 0.5;  // argmin of the upper problem
};

inline GridSaddle grid_saddle_2x2(const std::array<std::array<double, 2>, 2>& A, double beta,
                                  int grid = 1000) {
    auto ent = [](double p) {
        double h = 0.0;
        if (p > 0.0) h -= p * std::log(p);
        if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
        return h;
    };
    std::vector<double> hs(grid + 1);
    for (int i = 0; i <= grid; ++i) hs[i] = ent(static_cast<double>(i) / grid);

    GridSaddle out;
    out.lower = -std::numeric_limits<double>::infinity();
    out.upper = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        const double p = static_cast<double>(i) / grid;
        // payoff is linear in q for fixed p: g = c0 q + c1 (1-q) + beta(H(p)-H(q))
        const double c0 = p * A[0][0] + (1.0 - p) * A[1][0];
        const double c1 = p * A[0][1] + (1.0 - p) * A[1][1];
        double mn = std::numeric_limits<double>::infinity();
        for (int jq = 0; jq <= grid; ++jq) {
            const double q = static_cast<double>(jq) / grid;
            const double v = c0 * q + c1 * (1.0 - q) + beta * (hs[i] - hs[jq]);
            mn = std::min(mn, v);
        }
        if (mn > out.lower) {
            out.lower = mn;
            out.p_star = p;
        }
    }
    for (int jq = 0; jq <= grid; ++jq) {
        const double q = static_cast<double>(jq) / grid;
        const double d0 = q * A[0][0] + (1.0 - q) * A[0][1];
        const double d1 = q * A[1][0] + (1.0 - q) * A[1][1];
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= grid; ++i) {
            const double p = static_cast<double>(i) / grid;
            const double v = p * d0 + (1.0 - p) * d1 + beta * (hs[i] - hs[jq]);
            mx = std::max(mx, v);
        }
        if (mx < out.upper) {
            out.upper = mx;
            out.q_star = q;
        }
    }
    return out;
}

}  // namespace sgfp::testing
