#ifndef DISCUCB_PLANNER_TASK_MPC_HPP
#define DISCUCB_PLANNER_TASK_MPC_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <discucb/env/environment.hpp>
#include <discucb/planner/icem.hpp>

namespace discucb {

    /// Stage cost c(x, u), evaluated on the state reached after applying u.
    using CostFn = std::function<double(const Vector& x, const Vector& u)>;

    /// theta^2 + 0.1 thetadot^2 + 0.001 u^2 with theta already wrapped.
    inline double pendulum_swing_cost(const Vector& x, const Vector& u)
    {
        return x[0] * x[0] + 0.1 * x[1] * x[1] + 0.001 * u.squaredNorm();
    }

    inline double reward_from_cost(double cost) { return std::exp(-cost); }

    /// Negated cumulative cost along mean-dynamics rollouts of `model`.
    inline std::vector<double> task_objective_batch(const GpModel& model, const EnvSpec& spec, const Vector& x0,
        const std::vector<ActionSequence>& seqs, const CostFn& cost)
    {
        const Index batch = static_cast<Index>(seqs.size());
        std::vector<double> total(seqs.size(), 0.0);
        if (batch == 0)
            return total;
        const Index H = seqs.front().rows();
        const Index sd = spec.state_dim, ad = spec.action_dim;
        Matrix Z(batch, sd + ad);
        for (Index b = 0; b < batch; ++b)
            Z.row(b).head(sd) = x0.transpose();
        std::vector<bool> dead(seqs.size(), false);
        for (Index t = 0; t < H; ++t) {
            for (Index b = 0; b < batch; ++b)
                Z.row(b).tail(ad) = spec.project_action(seqs[static_cast<std::size_t>(b)].row(t).transpose()).transpose();
            const Matrix next = model.predict_batch(Z, false).mean;
            for (Index b = 0; b < batch; ++b) {
                const auto bi = static_cast<std::size_t>(b);
                if (dead[bi])
                    continue;
                const Vector xn = next.row(b).transpose();
                if (!xn.allFinite()) {
                    dead[bi] = true;
                    total[bi] = kMinusInfinity;
                    continue;
                }
                const Vector xp = spec.next_state(Z.row(b).head(sd).transpose(), xn);
                total[bi] -= cost(xp, Z.row(b).tail(ad).transpose());
                Z.row(b).head(sd) = xp.transpose();
            }
        }
        return total;
    }

    inline PlanResult task_mpc_plan(const GpModel& model, const EnvSpec& spec, const Vector& x0, const CostFn& cost,
        const CemConfig& cfg, std::uint64_t seed, const std::optional<ActionSequence>& warm_start = std::nullopt)
    {
        BatchObjective obj = [&](const std::vector<ActionSequence>& seqs) {
            return task_objective_batch(model, spec, x0, seqs, cost);
        };
        return icem_plan(obj, spec.action_bounds, cfg, seed, warm_start);
    }

    /// A model whose mean is exactly the true dynamics (no data, truth prior).
    inline GpModel oracle_model(const Environment& env, const KernelParams& kp = {})
    {
        return GpModel(RbfKernel(kp, env.kernel_periods()), env.truth_mean(), 1.0, env.spec.state_dim, env.spec.action_dim);
    }

    struct ControlTrace {
        Matrix states; // steps + 1 rows
        Matrix actions; // steps rows
        std::vector<double> rewards;
        double total_reward = 0.0;
    };

    /// Receding-horizon control on the noiseless true system, planning with
    /// `model`. The previous plan, shifted by one step, warm-starts the next.
    inline ControlTrace run_task_mpc(const Environment& env, const GpModel& model, const CostFn& cost, const Vector& x0,
        int steps, const CemConfig& cfg, std::uint64_t seed)
    {
        if (steps < 1)
            throw InputError("run_task_mpc: steps must be positive");
        ControlTrace tr;
        tr.states.resize(steps + 1, env.spec.state_dim);
        tr.actions.resize(steps, env.spec.action_dim);
        Vector x = env.spec.project_state(x0);
        tr.states.row(0) = x.transpose();
        std::optional<ActionSequence> warm;
        for (int t = 0; t < steps; ++t) {
            const PlanResult plan = task_mpc_plan(model, env.spec, x, cost, cfg, derive_seed(seed, static_cast<std::uint64_t>(t)), warm);
            const Vector u = env.spec.project_action(plan.best.row(0).transpose());
            x = env.step(x, u);
            const double r = reward_from_cost(cost(x, u));
            tr.actions.row(t) = u.transpose();
            tr.states.row(t + 1) = x.transpose();
            tr.rewards.push_back(r);
            tr.total_reward += r;
            warm = shift_sequence(plan.best);
        }
        return tr;
    }

} // namespace discucb

#endif
