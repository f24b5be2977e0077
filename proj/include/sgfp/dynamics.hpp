#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sgfp/auxiliary.hpp"
#include "sgfp/estimation.hpp"
#include "sgfp/game.hpp"
#include "sgfp/profiles.hpp"
#include "sgfp/regularizers.hpp"

namespace sgfp {

// Continuous-time value-update rate beta_s(t): nonnegative, nonincreasing,
// divergent integral for the harmonic and power families.
struct RateFunction {
    enum class Family { Harmonic, Constant, Power };
    Family family = Family::Harmonic;
    double constant_rate = 0.1;
    double power_c = 1.0;
    double power_rho = 0.5;

    static RateFunction harmonic() { return {}; }
    static RateFunction constant(double rate) {
        return {Family::Constant, rate, 1.0, 0.5};
    }
    static RateFunction power(double c, double rho) {
        return {Family::Power, 0.1, c, rho};
    }

    double operator()(double t) const {
        switch (family) {
            case Family::Harmonic: return 1.0 / (t + 1.0);
            case Family::Constant: return constant_rate;
            case Family::Power: return power_c / std::pow(1.0 + t, power_rho);
        }
        return 0.0;
    }
};

// Explicit selection of the state rate lambda_s(t) from [floor, 1]. The
// differential inclusion admits any measurable selection in that band;
// integrating a few fixed selections probes it.
struct LambdaPolicy {
    enum class Kind { ConstantFloor, ConstantOne, PerState, Sinusoidal };
    Kind kind = Kind::ConstantFloor;
    double floor = 0.2;  // lambda_0 in (0, 1]

    static LambdaPolicy constant_floor(double floor) { return {Kind::ConstantFloor, floor}; }
    static LambdaPolicy constant_one(double floor = 0.2) { return {Kind::ConstantOne, floor}; }
    static LambdaPolicy per_state(double floor) { return {Kind::PerState, floor}; }
    static LambdaPolicy sinusoidal(double floor) { return {Kind::Sinusoidal, floor}; }

    double operator()(int state, double t, int num_states) const {
        switch (kind) {
            case Kind::ConstantFloor: return floor;
            case Kind::ConstantOne: return 1.0;
            case Kind::PerState: {
                const double frac =
                    num_states > 1 ? static_cast<double>(state) / (num_states - 1) : 0.0;
                return floor + (1.0 - floor) * frac;
            }
            case Kind::Sinusoidal:
                return floor + (1.0 - floor) * 0.5 * (1.0 + std::sin(t + state));
        }
        return floor;
    }
};

// State of the continuous-time systems: x, u and (model-based variant) the
// estimator tensors, all advanced jointly by one vector field.
struct ContinuousState {
    double t = 0.0;
    StationaryProfile x;
    ContinuationValues u;
    std::optional<ModelTensors> model;

    static ContinuousState initial(const StochasticGame& g, GameClassTag mode, bool model_free) {
        ContinuousState cs;
        cs.t = 0.0;
        cs.x = StationaryProfile::uniform(g);
        cs.u = ContinuationValues::zeros(g, mode);
        if (model_free) cs.model = ModelTensors::defaults(g);
        return cs;
    }
};

struct DynamicsConfig {
    bool model_free = false;  // false: exact model; true: estimator tensors
    RateFunction beta_rate;
    LambdaPolicy lambda;
    double beta_temp = 0.1;
    const Regularizer* reg = nullptr;
    GameClassTag mode = GameClassTag::General;
    double br_tol = 1e-10;

    bool zero_sum_coupling() const { return mode == GameClassTag::ZeroSum; }
};

namespace detail {

inline size_t flat_size(const ContinuousState& cs) {
    size_t n = 0;
    for (const auto& table : cs.u.tables) n += table.size();
    for (const auto& ms : cs.x.x)
        for (const auto& block : ms) n += block.size();
    if (cs.model) n += cs.model->rhat.size() + cs.model->qhat.size();
    return n;
}

inline void pack(const ContinuousState& cs, std::vector<double>& out) {
    out.clear();
    out.reserve(flat_size(cs));
    for (const auto& table : cs.u.tables) out.insert(out.end(), table.begin(), table.end());
    for (const auto& ms : cs.x.x)
        for (const auto& block : ms) out.insert(out.end(), block.begin(), block.end());
    if (cs.model) {
        out.insert(out.end(), cs.model->rhat.begin(), cs.model->rhat.end());
        out.insert(out.end(), cs.model->qhat.begin(), cs.model->qhat.end());
    }
}

inline void unpack(std::span<const double> flat, ContinuousState& cs) {
    size_t k = 0;
    for (auto& table : cs.u.tables)
        for (double& v : table) v = flat[k++];
    for (auto& ms : cs.x.x)
        for (auto& block : ms)
            for (double& v : block) v = flat[k++];
    if (cs.model) {
        for (double& v : cs.model->rhat) v = flat[k++];
        for (double& v : cs.model->qhat) v = flat[k++];
    }
}

}  // namespace detail

// Right-hand side of the smooth best-response dynamics
//
//   du_s/dt   = beta_s(t) (f_{s,u}(x_s) + beta h(x_s) - u_s)
//   dx^i_s/dt = lambda_s(t) (br^i_s(u, x_s) - x^i_s)
//
// and, in the model-based variant (cfg.model_free), the estimator flow
//
//   dqhat_s(b)/dt = lambda_s(t) pi_s(b) (q_s(b) - qhat_s(b))
//   drhat^i_s(b)/dt = lambda_s(t) pi_s(b) (r^i_s(b) - rhat^i_s(b))
//
// where pi_s is the product of the players' instantaneous smooth best
// responses and f is evaluated on the estimated tensors.
inline void dynamics_rhs(const StochasticGame& g, const DynamicsConfig& cfg,
                         const ContinuousState& cs, double t, std::vector<double>& out) {
    out.assign(detail::flat_size(cs), 0.0);
    const AuxContext ctx{g, cs.u, cfg.beta_temp, *cfg.reg, cfg.zero_sum_coupling(),
                         cs.model ? &*cs.model : nullptr};
    const int S = g.num_states();
    const int players = g.num_players();
    const int tables = cs.u.num_tables();
    const double beta_t = cfg.beta_rate(t);

    // per-state smooth best responses (shared between x and estimator flows)
    std::vector<MixedState> brs(S);
    for (int s = 0; s < S; ++s) {
        brs[s].resize(players);
        for (int i = 0; i < players; ++i)
            brs[s][i] = smooth_best_response(ctx, i, s, cs.x.at(s), cfg.br_tol);
    }

    size_t k = 0;
    for (int tab = 0; tab < tables; ++tab)
        for (int s = 0; s < S; ++s) {
            const double gamma = regularized_auxiliary_payoff(ctx, tab, s, cs.x.at(s));
            out[k++] = beta_t * (gamma - cs.u.tables[tab][s]);
        }
    for (int s = 0; s < S; ++s) {
        const double lam = cfg.lambda(s, t, S);
        for (int i = 0; i < players; ++i)
            for (int a = 0; a < g.num_actions(i); ++a, ++k)
                out[k] = lam * (brs[s][i][a] - cs.x.at(s)[i][a]);
    }
    if (cs.model) {
        const ModelTensors& m = *cs.model;
        // rhat block, then qhat block, in ModelTensors layout
        for (int i = 0; i < players; ++i)
            for (int s = 0; s < S; ++s) {
                const double lam = cfg.lambda(s, t, S);
                for (int b = 0; b < g.num_joint_actions(); ++b, ++k) {
                    double w = 1.0;
                    for (int j = 0; j < players; ++j) w *= brs[s][j][g.action_of(j, b)];
                    out[k] = lam * w * (g.reward(i, s, b) - m.reward(i, s, b));
                }
            }
        for (int s = 0; s < S; ++s) {
            const double lam = cfg.lambda(s, t, S);
            for (int b = 0; b < g.num_joint_actions(); ++b) {
                double w = 1.0;
                for (int j = 0; j < players; ++j) w *= brs[s][j][g.action_of(j, b)];
                auto qrow = m.transition_row(s, b);
                auto trow = g.transition_row(s, b);
                for (int next = 0; next < S; ++next, ++k)
                    out[k] = lam * w * (trow[next] - qrow[next]);
            }
        }
    }
}

// Exact-model right-hand side (SBRD).
inline void sbrd_rhs(const StochasticGame& g, const DynamicsConfig& cfg, const ContinuousState& cs,
                     double t, std::vector<double>& out) {
    if (cs.model) throw std::invalid_argument("sbrd_rhs: state carries estimator tensors");
    dynamics_rhs(g, cfg, cs, t, out);
}

// Estimated-model right-hand side (MBRD); the state must carry the tensors.
inline void mbrd_rhs(const StochasticGame& g, const DynamicsConfig& cfg, const ContinuousState& cs,
                     double t, std::vector<double>& out) {
    if (!cs.model) throw std::invalid_argument("mbrd_rhs: state has no estimator tensors");
    dynamics_rhs(g, cfg, cs, t, out);
}

enum class IntegrationMethod { Euler, RK4 };

// Fixed-step integration with a post-step simplex guard on the x blocks:
// entries are clamped at zero and the block renormalized. The guard may only
// have to absorb drift within 1e-9 of the boundary; a larger violation aborts
// with a diagnostic, as does any non-finite state component.
inline constexpr double kSimplexGuardTolerance = 1e-9;

inline void integrate(const StochasticGame& g, const DynamicsConfig& cfg, ContinuousState& state,
                      double t_end, double h, IntegrationMethod method, int64_t cadence = 0,
                      const std::function<void(const ContinuousState&)>& on_metric = nullptr) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate: step h must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
    if (t_end < h) throw std::invalid_argument("integrate: t_end shorter than one step");
    if (cfg.model_free != state.model.has_value())
        throw std::invalid_argument("integrate: state/model mismatch with config");

    const int64_t steps = static_cast<int64_t>(std::llround(t_end / h));
    const double t0 = state.t;

    std::vector<double> y, k1, k2, k3, k4, tmp;
    detail::pack(state, y);
    ContinuousState scratch = state;

    auto eval = [&](const std::vector<double>& point, double t, std::vector<double>& deriv) {
        detail::unpack(point, scratch);
        dynamics_rhs(g, cfg, scratch, t, deriv);
    };

    for (int64_t n = 0; n < steps; ++n) {
        const double t = t0 + static_cast<double>(n) * h;
        if (method == IntegrationMethod::Euler) {
            eval(y, t, k1);
            for (size_t j = 0; j < y.size(); ++j) y[j] += h * k1[j];
        } else {
            eval(y, t, k1);
            tmp.resize(y.size());
            for (size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
            eval(tmp, t + 0.5 * h, k2);
            for (size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
            eval(tmp, t + 0.5 * h, k3);
            for (size_t j = 0; j < y.size(); ++j) tmp[j] = y[j] + h * k3[j];
            eval(tmp, t + h, k4);
            for (size_t j = 0; j < y.size(); ++j)
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }

        detail::unpack(y, state);
        state.t = t0 + static_cast<double>(n + 1) * h;

        for (int s = 0; s < g.num_states(); ++s)
            for (int i = 0; i < g.num_players(); ++i) {
                auto& block = state.x.x[s][i];
                double sum = 0.0;
                for (double& p : block) {
                    if (!std::isfinite(p)) {
                        std::ostringstream os;
                        os << "integrate: non-finite x at t=" << state.t << " state=" << s
                           << " player=" << i;
                        throw std::runtime_error(os.str());
                    }
                    if (p < 0.0) {
                        if (p < -kSimplexGuardTolerance) {
                            std::ostringstream os;
                            os << "integrate: simplex guard tripped beyond tolerance at t="
                               << state.t << " state=" << s << " player=" << i << " (entry " << p
                               << ")";
                            throw std::runtime_error(os.str());
                        }
                        p = 0.0;
                    }
                    sum += p;
                }
                for (double& p : block) p /= sum;
            }
        for (const auto& table : state.u.tables)
            for (double v : table)
                if (!std::isfinite(v))
                    throw std::runtime_error("integrate: non-finite value component");
        detail::pack(state, y);

        if (cadence > 0 && (n + 1) % cadence == 0 && on_metric) on_metric(state);
    }
}

}  // namespace sgfp
