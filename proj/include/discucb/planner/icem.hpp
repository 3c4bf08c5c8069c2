#ifndef DISCUCB_PLANNER_ICEM_HPP
#define DISCUCB_PLANNER_ICEM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <discucb/env/env_spec.hpp>
#include <discucb/planner/acquisition.hpp>
#include <discucb/planner/colored_noise.hpp>

namespace discucb {

    /// Improved cross-entropy method settings. Standard deviations are
    /// fractions of each action interval's width.
    struct CemConfig {
        int horizon = 10;
        int iterations = 10;
        int samples = 50;
        int elites = 10;
        int kept_elites = 5;
        double init_std = 0.5;
        double min_std = 0.05;
        double momentum = 0.1;
        double noise_exponent = 2.0;
        double population_decay = 1.0; // samples shrink by this factor per iteration
        bool add_mean_last = true;

        void validate() const
        {
            if (horizon < 1 || iterations < 1 || samples < 1)
                throw InputError("CemConfig: horizon, iterations and samples must be positive");
            if (elites < 1 || elites > samples)
                throw InputError("CemConfig: elites must lie in [1, samples]");
            if (kept_elites < 0 || kept_elites > elites)
                throw InputError("CemConfig: kept_elites must lie in [0, elites]");
            if (!(init_std > 0.0) || !(min_std > 0.0) || min_std > init_std)
                throw InputError("CemConfig: need 0 < min_std <= init_std");
            if (!(momentum >= 0.0 && momentum < 1.0))
                throw InputError("CemConfig: momentum must lie in [0, 1)");
            if (!(noise_exponent >= 0.0))
                throw InputError("CemConfig: noise_exponent must be non-negative");
            if (!(population_decay >= 1.0))
                throw InputError("CemConfig: population_decay must be >= 1");
        }
    };

    struct PlanResult {
        ActionSequence best;
        double objective = kMinusInfinity;
        std::vector<double> incumbent; // best objective after each iteration
        Index evaluations = 0;
    };

    using BatchObjective = std::function<std::vector<double>(const std::vector<ActionSequence>&)>;
    using SequenceObjective = std::function<double(const ActionSequence&)>;

    /// Drop the first step and repeat the last one.
    inline ActionSequence shift_sequence(const ActionSequence& seq)
    {
        ActionSequence out = seq;
        if (seq.rows() > 1) {
            out.topRows(seq.rows() - 1) = seq.bottomRows(seq.rows() - 1);
            out.row(seq.rows() - 1) = seq.row(seq.rows() - 1);
        }
        return out;
    }

    inline ActionSequence clip_sequence(ActionSequence seq, const std::vector<Interval>& bounds)
    {
        for (Index j = 0; j < seq.cols(); ++j)
            seq.col(j) = seq.col(j).cwiseMax(bounds[static_cast<std::size_t>(j)].lo).cwiseMin(bounds[static_cast<std::size_t>(j)].hi);
        return seq;
    }

    /// Maximise a batched objective over clipped action sequences.
    /// Deterministic for a fixed seed. Throws InfeasibleError if no
    /// evaluated sequence has a finite objective.
    inline PlanResult icem_plan(const BatchObjective& objective, const std::vector<Interval>& bounds, const CemConfig& cfg,
        std::uint64_t seed, const std::optional<ActionSequence>& warm_start = std::nullopt)
    {
        cfg.validate();
        const Index ad = static_cast<Index>(bounds.size());
        const Index H = cfg.horizon;
        if (ad < 1)
            throw InputError("icem_plan: no action bounds");
        Vector width(ad), center(ad);
        for (Index j = 0; j < ad; ++j) {
            const Interval& b = bounds[static_cast<std::size_t>(j)];
            if (!(b.lo < b.hi))
                throw InputError("icem_plan: action bound with lo >= hi");
            width[j] = b.width();
            center[j] = 0.5 * (b.lo + b.hi);
        }

        ActionSequence mean(H, ad);
        if (warm_start) {
            if (warm_start->rows() != H || warm_start->cols() != ad)
                throw InputError("icem_plan: warm start has the wrong shape");
            mean = clip_sequence(*warm_start, bounds);
        }
        else {
            for (Index t = 0; t < H; ++t)
                mean.row(t) = center.transpose();
        }
        Matrix stdev(H, ad);
        for (Index t = 0; t < H; ++t)
            stdev.row(t) = (cfg.init_std * width).transpose();
        const Vector floor = cfg.min_std * width;

        std::mt19937_64 rng(seed);
        const ColoredNoise noise(cfg.noise_exponent, H);

        PlanResult result;
        result.best = mean;
        std::vector<ActionSequence> kept;
        std::vector<double> kept_values;

        for (int it = 0; it < cfg.iterations; ++it) {
            const int n = std::max(cfg.elites,
                static_cast<int>(std::floor(cfg.samples / std::pow(cfg.population_decay, it))));
            std::vector<ActionSequence> fresh;
            fresh.reserve(static_cast<std::size_t>(n) + 1);
            for (int s = 0; s < n; ++s) {
                ActionSequence cand(H, ad);
                for (Index j = 0; j < ad; ++j)
                    cand.col(j) = mean.col(j) + stdev.col(j).cwiseProduct(noise.sample(rng));
                fresh.push_back(clip_sequence(std::move(cand), bounds));
            }
            if (cfg.add_mean_last && it == cfg.iterations - 1)
                fresh.push_back(mean);

            std::vector<double> values = objective(fresh);
            if (values.size() != fresh.size())
                throw InputError("icem_plan: objective returned the wrong number of values");
            result.evaluations += static_cast<Index>(fresh.size());

            std::vector<ActionSequence> pool = std::move(fresh);
            pool.insert(pool.end(), kept.begin(), kept.end());
            values.insert(values.end(), kept_values.begin(), kept_values.end());

            std::vector<std::size_t> order;
            for (std::size_t i = 0; i < values.size(); ++i)
                if (std::isfinite(values[i]))
                    order.push_back(i);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

            if (!order.empty() && values[order.front()] > result.objective) {
                result.objective = values[order.front()];
                result.best = pool[order.front()];
            }
            result.incumbent.push_back(result.objective);

            const std::size_t n_elite = std::min(order.size(), static_cast<std::size_t>(cfg.elites));
            if (n_elite > 0) {
                ActionSequence e_mean = ActionSequence::Zero(H, ad);
                for (std::size_t e = 0; e < n_elite; ++e)
                    e_mean += pool[order[e]];
                e_mean /= static_cast<double>(n_elite);
                ActionSequence e_var = ActionSequence::Zero(H, ad);
                for (std::size_t e = 0; e < n_elite; ++e)
                    e_var += (pool[order[e]] - e_mean).cwiseAbs2();
                e_var /= static_cast<double>(n_elite);
                mean = cfg.momentum * mean + (1.0 - cfg.momentum) * e_mean;
                stdev = cfg.momentum * stdev + (1.0 - cfg.momentum) * e_var.cwiseSqrt();
                for (Index j = 0; j < ad; ++j)
                    stdev.col(j) = stdev.col(j).cwiseMax(floor[j]);
            }

            std::vector<ActionSequence> next_kept;
            std::vector<double> next_values;
            const std::size_t n_keep = std::min(order.size(), static_cast<std::size_t>(cfg.kept_elites));
            for (std::size_t e = 0; e < n_keep; ++e) {
                next_kept.push_back(pool[order[e]]);
                next_values.push_back(values[order[e]]);
            }
            kept = std::move(next_kept);
            kept_values = std::move(next_values);
        }

        if (!std::isfinite(result.objective))
            throw InfeasibleError("icem_plan: no feasible action sequence found");
        return result;
    }

    /// Convenience overload for a per-sequence objective.
    inline PlanResult icem_plan(const SequenceObjective& objective, const std::vector<Interval>& bounds,
        const CemConfig& cfg, std::uint64_t seed, const std::optional<ActionSequence>& warm_start = std::nullopt)
    {
        BatchObjective batch = [&objective](const std::vector<ActionSequence>& seqs) {
            std::vector<double> out;
            out.reserve(seqs.size());
            for (const auto& s : seqs)
                out.push_back(objective(s));
            return out;
        };
        return icem_plan(batch, bounds, cfg, seed, warm_start);
    }

    /// Exploration plan for one step: maximise the summed acquisition along
    /// the mean-dynamics rollout from x0.
    inline PlanResult plan_exploration(const GpModel& model, const PriorMean& episode_prior, const EnvSpec& spec,
        const Vector& x0, const AcquisitionConfig& acq, const CemConfig& cfg, std::uint64_t seed,
        const std::optional<ActionSequence>& warm_start = std::nullopt)
    {
        BatchObjective obj = [&](const std::vector<ActionSequence>& seqs) {
            return rollout_objective_batch(model, episode_prior, spec, x0, seqs, acq);
        };
        PlanResult r = icem_plan(obj, spec.action_bounds, cfg, seed, warm_start);
        return r;
    }

} // namespace discucb

#endif
