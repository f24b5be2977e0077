#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgfp {

struct Temperature {
    double beta;
    explicit Temperature(double b) : beta(b) {
        if (!(b > 0.0)) throw std::invalid_argument("temperature must be strictly positive");
    }
};

// One concave block function phi on a single simplex. Profile-level
// regularizers are signed sums of blocks: in identical-interest/team/general
// mode every player uses sum_j phi(x^j); in zero-sum mode player 1 uses
// phi(x^1) - phi(x^2) and player 2 the opposite, so the regularized game stays
// zero-sum.
class Regularizer {
public:
    virtual ~Regularizer() = default;
    virtual const char* name() const = 0;
    // Steep: gradient norm diverges at the simplex boundary, which keeps smooth
    // best responses strictly interior.
    virtual bool steep() const = 0;
    virtual bool separable() const { return true; }
    virtual double value(std::span<const double> p) const = 0;
    virtual void gradient(std::span<const double> p, std::span<double> out) const = 0;
    virtual double max_value(int num_actions) const = 0;
};

// Shannon entropy H(p) = -sum_a p(a) log p(a), with 0 log 0 = 0. The smooth
// best response under this block is the logit map.
class ShannonEntropy final : public Regularizer {
public:
    const char* name() const override { return "entropy"; }
    bool steep() const override { return true; }
    double value(std::span<const double> p) const override {
        double h = 0.0;
        for (double v : p)
            if (v > 0.0) h -= v * std::log(v);
        return h;
    }
    // Defined on the interior only: d/dp_a = -1 - log p_a.
    void gradient(std::span<const double> p, std::span<double> out) const override {
        for (size_t a = 0; a < p.size(); ++a) out[a] = -1.0 - std::log(p[a]);
    }
    double max_value(int num_actions) const override {
        return std::log(static_cast<double>(num_actions));
    }
};

// Non-steep contrast fixture: phi(p) = sum_a p(a)(1 - p(a)). Strictly concave
// but its gradient stays bounded at the boundary, so it violates the steepness
// hypothesis and best responses may hit vertices. Provided for negative tests
// only; convergence claims do not cover it.
class TsallisNonSteep final : public Regularizer {
public:
    const char* name() const override { return "tsallis-nonsteep"; }
    bool steep() const override { return false; }
    double value(std::span<const double> p) const override {
        double h = 0.0;
        for (double v : p) h += v * (1.0 - v);
        return h;
    }
    void gradient(std::span<const double> p, std::span<double> out) const override {
        for (size_t a = 0; a < p.size(); ++a) out[a] = 1.0 - 2.0 * p[a];
    }
    double max_value(int num_actions) const override {
        return 1.0 - 1.0 / static_cast<double>(num_actions);
    }
};

inline std::unique_ptr<Regularizer> make_regularizer(const std::string& name) {
    if (name == "entropy") return std::make_unique<ShannonEntropy>();
    if (name == "tsallis-nonsteep") return std::make_unique<TsallisNonSteep>();
    throw std::invalid_argument("unknown regularizer '" + name +
                                "' (available: entropy, tsallis-nonsteep)");
}

// ---------------------------------------------------------------------------
// Profile-level Shannon entropy (summed over players) and its per-player
// gradient block.

inline double entropy(const std::vector<std::vector<double>>& profile) {
    ShannonEntropy h;
    double total = 0.0;
    for (const auto& block : profile) total += h.value(block);
    return total;
}

inline std::vector<double> entropy_grad(const std::vector<std::vector<double>>& profile, int player) {
    ShannonEntropy h;
    std::vector<double> g(profile[player].size());
    h.gradient(profile[player], g);
    return g;
}

// ---------------------------------------------------------------------------
// Smooth best responses on one block

// logit_response(v, beta)(a) = exp(v(a)/beta) / sum_b exp(v(b)/beta).
// The max payoff is subtracted before exponentiation; the result is unchanged
// (shift invariance) and the exponentials cannot overflow.
inline std::vector<double> logit_response(std::span<const double> payoffs, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("logit_response: beta must be positive");
    double m = -std::numeric_limits<double>::infinity();
    for (double v : payoffs) {
        if (!std::isfinite(v)) throw std::invalid_argument("logit_response: non-finite payoff");
        m = std::max(m, v);
    }
    std::vector<double> out(payoffs.size());
    double z = 0.0;
    for (size_t a = 0; a < payoffs.size(); ++a) {
        out[a] = std::exp((payoffs[a] - m) / beta);
        z += out[a];
    }
    for (double& v : out) v /= z;
    return out;
}

struct SolveError : std::runtime_error {
    double residual;
    SolveError(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
};

// argmax over the simplex of <y, payoffs> + beta * phi(y) for a strictly
// concave block phi, by damped mirror ascent in the entropic geometry:
//   y+ proportional to y * exp(g / beta),  g = payoffs + beta grad phi(y)
//   y  <- (1 - damping) y + damping y+
// Iterates stay strictly interior. Stops when the gradient residual
// max_a g(a) - <y, g> (the linearized improvement over the simplex) falls
// below tol. For entropy the inner map lands on the logit response exactly, so
// the damped iteration contracts geometrically onto it.
inline std::vector<double> generic_smooth_argmax(std::span<const double> payoffs, double beta,
                                                 const Regularizer& reg, double tol = 1e-10,
                                                 int max_iters = 10000, double damping = 0.5) {
    if (!(beta > 0.0)) throw std::invalid_argument("generic_smooth_argmax: beta must be positive");
    const size_t n = payoffs.size();
    if (n == 0) throw std::invalid_argument("generic_smooth_argmax: empty payoff vector");
    if (n == 1) return {1.0};

    std::vector<double> y(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n), g(n), ynext(n);
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        reg.gradient(y, grad);
        double gmax = -std::numeric_limits<double>::infinity();
        double gdot = 0.0;
        for (size_t a = 0; a < n; ++a) {
            g[a] = payoffs[a] + beta * grad[a];
            gmax = std::max(gmax, g[a]);
            gdot += y[a] * g[a];
        }
        residual = gmax - gdot;
        if (residual <= tol) return y;

        double z = 0.0;
        for (size_t a = 0; a < n; ++a) {
            ynext[a] = y[a] * std::exp((g[a] - gmax) / beta);
            z += ynext[a];
        }
        for (size_t a = 0; a < n; ++a) y[a] = (1.0 - damping) * y[a] + damping * (ynext[a] / z);
    }
    throw SolveError("generic_smooth_argmax: no convergence after " + std::to_string(max_iters) +
                         " iterations (residual " + std::to_string(residual) + ")",
                     residual);
}

// Dispatch helper: entropy uses the closed form, anything else the iterative
// solver.
inline std::vector<double> smooth_argmax(std::span<const double> payoffs, double beta,
                                         const Regularizer& reg, double tol = 1e-10) {
    if (std::string(reg.name()) == "entropy") return logit_response(payoffs, beta);
    return generic_smooth_argmax(payoffs, beta, reg, tol);
}

}  // namespace sgfp
