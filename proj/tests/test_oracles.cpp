#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sgfp/oracles.hpp"
#include "sgfp/rng.hpp"
#include "support/helpers.hpp"

using namespace sgfp;
using Catch::Approx;

namespace {

// One application of the regularized Shapley operator via the library's
// saddle solver; used for contraction and envelope checks.
std::vector<double> apply_phi(const StochasticGame& g, double beta, const Regularizer& reg,
                              const std::vector<double>& u, double inner_tol = 1e-11) {
    std::vector<double> out(g.num_states());
    for (int s = 0; s < g.num_states(); ++s) {
        std::vector<std::vector<double>> A(g.num_actions(0),
                                           std::vector<double>(g.num_actions(1), 0.0));
        for (int a = 0; a < g.num_joint_actions(); ++a) {
            double cont = 0.0;
            auto row = g.transition_row(s, a);
            for (int t = 0; t < g.num_states(); ++t) cont += row[t] * u[t];
            A[g.action_of(0, a)][g.action_of(1, a)] =
                (1.0 - g.discount()) * g.reward(0, s, a) + g.discount() * cont;
        }
        out[s] = regularized_matrix_game_solve(A, beta, reg, inner_tol).value;
    }
    return out;
}

// Fully independent version of the same fixed-point loop: the per-state
// saddle value comes from a fine-grid max-min search instead of the solver.
std::vector<double> grid_value_iteration(const StochasticGame& g, double beta, int outer_iters,
                                         int grid) {
    std::vector<double> u(g.num_states(), 0.0);
    for (int it = 0; it < outer_iters; ++it) {
        std::vector<double> next(g.num_states());
        for (int s = 0; s < g.num_states(); ++s) {
            std::array<std::array<double, 2>, 2> A{};
            for (int a = 0; a < g.num_joint_actions(); ++a) {
                double cont = 0.0;
                auto row = g.transition_row(s, a);
                for (int t = 0; t < g.num_states(); ++t) cont += row[t] * u[t];
                A[g.action_of(0, a)][g.action_of(1, a)] =
                    (1.0 - g.discount()) * g.reward(0, s, a) + g.discount() * cont;
            }
            const auto saddle = testing::grid_saddle_2x2(A, beta, grid);
            next[s] = 0.5 * (saddle.lower + saddle.upper);
        }
        u = next;
    }
    return u;
}

}  // namespace

TEST_CASE("zero-sum regularized value iteration", "[oracles]") {
    ShannonEntropy reg;
    SECTION("matching pennies has value zero and uniform saddle") {
        const auto g = testing::matching_pennies();
        const auto res = zs_regularized_value_iteration(g, 0.1, reg, 1e-9);
        REQUIRE(res.values[0] == Approx(0.0).margin(1e-8));
        REQUIRE(res.policy[0][0][0] == Approx(0.5).margin(1e-6));
        REQUIRE(res.policy[0][1][0] == Approx(0.5).margin(1e-6));
        REQUIRE(res.residual <= 1e-9);
    }
    SECTION("iterates contract inside the geometric envelope") {
        RngStream rng(42);
        const auto g = random_ergodic_game({2, {2, 2}}, GameClassTag::ZeroSum, 0.3, rng);
        std::vector<double> u(g.num_states(), 0.0);
        auto phi_u = apply_phi(g, 0.1, reg, u);
        double residual0 = 0.0;
        for (int s = 0; s < 2; ++s) residual0 = std::max(residual0, std::abs(phi_u[s] - u[s]));
        double residual = residual0;
        for (int k = 1; k <= 12; ++k) {
            u = phi_u;
            phi_u = apply_phi(g, 0.1, reg, u);
            residual = 0.0;
            for (int s = 0; s < 2; ++s) residual = std::max(residual, std::abs(phi_u[s] - u[s]));
            REQUIRE(residual <= std::pow(g.discount(), k) * residual0 + 1e-9);
        }
    }
    SECTION("contraction factor on random value pairs") {
        RngStream rng(43);
        const auto g = random_ergodic_game({3, {2, 2}}, GameClassTag::ZeroSum, 0.3, rng);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> u(3), v(3);
            for (int s = 0; s < 3; ++s) {
                u[s] = rng.uniform_in(-1.0, 1.0);
                v[s] = rng.uniform_in(-1.0, 1.0);
            }
            const auto pu = apply_phi(g, 0.1, reg, u);
            const auto pv = apply_phi(g, 0.1, reg, v);
            double lhs = 0.0, rhs = 0.0;
            for (int s = 0; s < 3; ++s) {
                lhs = std::max(lhs, std::abs(pu[s] - pv[s]));
                rhs = std::max(rhs, std::abs(u[s] - v[s]));
            }
            REQUIRE(lhs <= g.discount() * rhs + 1e-9);
        }
    }
    SECTION("grid-nested value iteration reproduces the oracle values") {
        RngStream rng(44);
        const auto g = random_ergodic_game({2, {2, 2}}, GameClassTag::ZeroSum, 0.3, rng);
        const auto res = zs_regularized_value_iteration(g, 0.1, reg, 1e-10);
        const auto grid_u = grid_value_iteration(g, 0.1, 40, 2000);
        for (int s = 0; s < 2; ++s) REQUIRE(std::abs(res.values[s] - grid_u[s]) <= 1e-6);
    }
    SECTION("saddle profiles have a tiny duality gap at the fixed point") {
        RngStream rng(45);
        const auto g = random_ergodic_game({2, {2, 2}}, GameClassTag::ZeroSum, 0.3, rng);
        const double tol = 1e-9;
        const auto res = zs_regularized_value_iteration(g, 0.1, reg, tol);
        ContinuationValues u = ContinuationValues::zeros(g, GameClassTag::ZeroSum);
        u.tables[0] = res.values;
        AuxContext ctx{g, u, 0.1, reg, true, nullptr};
        for (int s = 0; s < 2; ++s)
            REQUIRE(duality_gap(ctx, s, res.policy[s]).value <= 10.0 * tol);
    }
    SECTION("non-zero-sum games are rejected") {
        RngStream rng(46);
        const auto g = random_ergodic_game({2, {2, 2}}, GameClassTag::IdenticalInterest, 0.3, rng);
        REQUIRE_THROWS_AS(zs_regularized_value_iteration(g, 0.1, reg, 1e-9),
                          std::invalid_argument);
    }
}

TEST_CASE("soft value iteration", "[oracles]") {
    SECTION("single state single action is the plain fixed point") {
        for (double delta : {0.2, 0.5, 0.8}) {
            StochasticGame g(1, {{1}}, delta);
            g.reward(0, 0, 0) = -0.625;
            g.transition_row(0, 0)[0] = 1.0;
            const auto res = soft_value_iteration(g, 0.7, 1e-12);
            REQUIRE(res.values[0] == Approx(-0.625).margin(1e-10));
            REQUIRE(res.policy[0][0][0] == 1.0);
        }
    }
    SECTION("equal rewards give the entropy bonus in closed form") {
        StochasticGame g(1, {{2}}, 0.5);
        for (int a = 0; a < 2; ++a) {
            g.reward(0, 0, a) = 1.0;
            g.transition_row(0, a)[0] = 1.0;
        }
        const auto res = soft_value_iteration(g, 1.0, 1e-12);
        REQUIRE(res.values[0] == Approx(2.386294361119891).margin(1e-9));
        REQUIRE(res.policy[0][0][0] == Approx(0.5).margin(1e-12));
    }
    SECTION("log-sum-exp closed form at negligible discount") {
        StochasticGame g(1, {{2}}, 1e-12);
        g.reward(0, 0, 0) = 1.0;
        g.reward(0, 0, 1) = 0.0;
        for (int a = 0; a < 2; ++a) g.transition_row(0, a)[0] = 1.0;
        const auto res = soft_value_iteration(g, 1.0, 1e-13);
        REQUIRE(res.values[0] == Approx(1.3132616875182228).margin(1e-9));
        REQUIRE(res.policy[0][0][0] == Approx(0.7310585786300049).margin(1e-9));
    }
    SECTION("multi-player games are rejected") {
        REQUIRE_THROWS_AS(soft_value_iteration(testing::matching_pennies(), 0.1),
                          std::invalid_argument);
    }
    SECTION("no stationary policy beats the soft optimum") {
        RngStream rng(47);
        const double beta = 0.1;
        for (uint64_t seed = 0; seed < 3; ++seed) {
            RngStream grng(seed + 100);
            const auto g = random_ergodic_game({2, {2}}, GameClassTag::General, 0.2, grng);
            const auto res = soft_value_iteration(g, beta, 1e-11);
            ShannonEntropy ent;
            for (int trial = 0; trial < 10000; ++trial) {
                // random stationary policy, evaluated exactly through the
                // linear system V = (1-d) r_pi + beta H(pi) + d Q_pi V
                std::vector<std::vector<double>> pi(2, std::vector<double>(2));
                for (int s = 0; s < 2; ++s) {
                    const double p = rng.uniform();
                    pi[s] = {p, 1.0 - p};
                }
                std::vector<std::vector<double>> lhs(2, std::vector<double>(2, 0.0));
                std::vector<double> rhs(2, 0.0);
                for (int s = 0; s < 2; ++s) {
                    lhs[s][s] = 1.0;
                    rhs[s] = beta * ent.value(pi[s]);
                    for (int a = 0; a < 2; ++a) {
                        rhs[s] += (1.0 - g.discount()) * pi[s][a] * g.reward(0, s, a);
                        auto row = g.transition_row(s, a);
                        for (int t = 0; t < 2; ++t)
                            lhs[s][t] -= g.discount() * pi[s][a] * row[t];
                    }
                }
                const auto v_pi = testing::solve_linear(lhs, rhs);
                for (int s = 0; s < 2; ++s) REQUIRE(v_pi[s] <= res.values[s] + 1e-6);
            }
            // the oracle's own logit policy attains the optimum
            std::vector<std::vector<double>> lhs(2, std::vector<double>(2, 0.0));
            std::vector<double> rhs(2, 0.0);
            for (int s = 0; s < 2; ++s) {
                lhs[s][s] = 1.0;
                rhs[s] = beta * ent.value(res.policy[s][0]);
                for (int a = 0; a < 2; ++a) {
                    rhs[s] += (1.0 - g.discount()) * res.policy[s][0][a] * g.reward(0, s, a);
                    auto row = g.transition_row(s, a);
                    for (int t = 0; t < 2; ++t)
                        lhs[s][t] -= g.discount() * res.policy[s][0][a] * row[t];
                }
            }
            const auto v_star = testing::solve_linear(lhs, rhs);
            for (int s = 0; s < 2; ++s) REQUIRE(v_star[s] == Approx(res.values[s]).margin(1e-6));
        }
    }
}

TEST_CASE("equilibrium residuals", "[oracles]") {
    ShannonEntropy reg;
    SECTION("vanish at the zero-sum oracle output") {
        RngStream rng(48);
        const auto g = random_ergodic_game({2, {2, 2}}, GameClassTag::ZeroSum, 0.3, rng);
        const double tol = 1e-9;
        const auto res = zs_regularized_value_iteration(g, 0.1, reg, tol);
        ContinuationValues u = ContinuationValues::zeros(g, GameClassTag::ZeroSum);
        u.tables[0] = res.values;
        StationaryProfile x = StationaryProfile::uniform(g);
        for (int s = 0; s < 2; ++s) x.x[s] = res.policy[s];
        const auto rr = equilibrium_residuals(g, 0.1, reg, x, u, true);
        for (const auto& r : rr) {
            // rho_val inherits the outer tolerance directly; rho_br is pinned
            // through the quadratic gap bound sqrt(2 gap / beta)
            REQUIRE(r.rho_val <= 10.0 * tol);
            REQUIRE(r.rho_br <= std::sqrt(2.0 * 10.0 * tol / 0.1));
        }
    }
    SECTION("uniform profile with zero values shows the plain payoff residual") {
        const auto g = testing::matching_pennies();
        ContinuationValues u = ContinuationValues::zeros(g, GameClassTag::ZeroSum);
        StationaryProfile x = StationaryProfile::uniform(g);
        const auto rr = equilibrium_residuals(g, 0.1, reg, x, u, true);
        // f(uniform) = 0 for matching pennies, h = H(x1)-H(x2) = 0, u = 0
        REQUIRE(rr[0].rho_val == Approx(0.0).margin(1e-12));
        REQUIRE(rr[0].rho_br == Approx(0.0).margin(1e-12));

        // a nonzero-reward identical-interest game leaves |f + beta h| visible
        StochasticGame g2(1, {{2}}, 0.5);
        for (int a = 0; a < 2; ++a) {
            g2.reward(0, 0, a) = 0.8;
            g2.transition_row(0, a)[0] = 1.0;
        }
        ContinuationValues u2 = ContinuationValues::zeros(g2, GameClassTag::IdenticalInterest);
        StationaryProfile x2 = StationaryProfile::uniform(g2);
        const auto rr2 = equilibrium_residuals(g2, 0.1, reg, x2, u2, false);
        const double expected = 0.5 * 0.8 + 0.1 * std::log(2.0);
        REQUIRE(rr2[0].rho_val == Approx(expected).margin(1e-12));
    }
    SECTION("rho_br grows continuously under small perturbations") {
        RngStream rng(49);
        const auto g = random_ergodic_game({2, {2, 2}}, GameClassTag::ZeroSum, 0.3, rng);
        const auto res = zs_regularized_value_iteration(g, 0.1, reg, 1e-10);
        ContinuationValues u = ContinuationValues::zeros(g, GameClassTag::ZeroSum);
        u.tables[0] = res.values;
        StationaryProfile x = StationaryProfile::uniform(g);
        for (int s = 0; s < 2; ++s) x.x[s] = res.policy[s];
        const auto base = equilibrium_residuals(g, 0.1, reg, x, u, true);

        double prev = 0.0;
        for (double eps : {1e-5, 1e-4, 1e-3}) {
            auto xp = x;
            xp.x[0][0][0] += eps;
            xp.x[0][0][1] -= eps;
            const auto rr = equilibrium_residuals(g, 0.1, reg, xp, u, true);
            const double growth = rr[0].rho_br - base[0].rho_br;
            REQUIRE(growth > 0.0);
            // measured local Lipschitz behavior: the increment stays within a
            // moderate constant times eps and grows with eps
            REQUIRE(growth <= 50.0 * eps);
            REQUIRE(growth >= prev);
            prev = growth;
        }
    }
}
