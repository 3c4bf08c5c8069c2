#ifndef DISCUCB_EPISODIC_CAMPAIGN_HPP
#define DISCUCB_EPISODIC_CAMPAIGN_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <discucb/episodic/episode.hpp>
#include <discucb/metrics/metrics.hpp>

namespace discucb {

    /// Which analytic mean the learner starts from.
    enum class PriorChoice { env_prior, zero, truth };

    inline std::string to_string(PriorChoice p)
    {
        switch (p) {
        case PriorChoice::zero:
            return "zero";
        case PriorChoice::truth:
            return "truth";
        default:
            return "env_prior";
        }
    }

    struct CampaignSettings {
        EpisodeSettings episode;
        KernelParams kernel;
        PriorChoice prior = PriorChoice::env_prior;
        int episodes = 30;
        Matrix eval_grid; // joined (x, u) test points
        bool check_assumption3 = true;
        bool record_wall_time = false;

        void validate(const Environment& env) const
        {
            kernel.validate();
            episode.validate(env.spec);
            if (episodes < 0)
                throw InputError("CampaignSettings: episodes must be >= 0");
            if (eval_grid.rows() == 0 || eval_grid.cols() != env.spec.input_dim())
                throw InputError("CampaignSettings: evaluation grid missing or of wrong dimension");
        }
    };

    /// Everything needed to continue a campaign: the data log per episode
    /// and the metric record so far. The model is rebuilt from the logs.
    struct CampaignState {
        std::vector<EpisodeLog> logs;
        CampaignRecord record;
        GpModel model;
        double elapsed_s = 0.0;

        int completed() const { return static_cast<int>(logs.size()); }
    };

    inline PriorMean root_prior(const Environment& env, PriorChoice p)
    {
        switch (p) {
        case PriorChoice::zero:
            return PriorMean::zero(env.spec.state_dim);
        case PriorChoice::truth:
            return env.truth_mean();
        default:
            return env.prior_mean();
        }
    }

    inline GpModel initial_model(const Environment& env, const CampaignSettings& s, const PriorMean& root)
    {
        const double reg = s.episode.schedule.kind == ScheduleKind::fixed ? s.episode.schedule.fixed_value : 1.0;
        return GpModel(RbfKernel(s.kernel, env.kernel_periods()), root, reg, env.spec.state_dim, env.spec.action_dim);
    }

    /// Rebuild the model by replaying the logged observations through the
    /// same absorb/freeze sequence the campaign used. Bit-identical to the
    /// live model.
    inline GpModel replay_model(const Environment& env, const CampaignSettings& s, const std::vector<EpisodeLog>& logs)
    {
        const PriorMean root = root_prior(env, s.prior);
        GpModel model = initial_model(env, s, root);
        for (const auto& log : logs) {
            const PriorMean prior = log.tau == 1 ? root : model.freeze_as_prior();
            int n = 0;
            for (const auto& v : log.visited)
                model = absorb_observation(std::move(model), prior, env.spec, s.episode.schedule, log.tau, ++n, v.z, v.y);
        }
        return model;
    }

    using CheckpointFn = std::function<void(const CampaignState&)>;

    /// Episodes tau = 1..T with metrics after each. Deterministic in
    /// `trial_seed`; per-episode seeds are derived from it. `resume`
    /// continues from a previously checkpointed state.
    inline CampaignState run_campaign(const Environment& env, const CampaignSettings& s, std::uint64_t trial_seed,
        const CheckpointFn& checkpoint = nullptr, const CampaignState* resume = nullptr)
    {
        s.validate(env);
        const PriorMean root = root_prior(env, s.prior);
        const PriorMean p0 = env.prior_mean();
        const PriorMean truth = env.truth_mean();
        const Matrix truth_rows = truth_on_grid(env, s.eval_grid);

        CampaignState st;
        if (resume) {
            st.logs = resume->logs;
            st.record = resume->record;
            st.elapsed_s = resume->elapsed_s;
            st.model = replay_model(env, s, st.logs);
            if (st.completed() > s.episodes)
                throw InputError("run_campaign: checkpoint has more episodes than configured");
        }
        else {
            st.model = initial_model(env, s, root);
            st.record.trial_seed = trial_seed;
            st.record.baseline = {0, max_variance_over_grid(st.model, s.eval_grid), mse_against(st.model, s.eval_grid, truth_rows),
                std::numeric_limits<double>::quiet_NaN(), false, 0.0};
        }

        EpisodeSettings es = s.episode;
        es.keep_step_models = s.check_assumption3;
        for (int tau = st.completed() + 1; tau <= s.episodes; ++tau) {
            const auto t0 = std::chrono::steady_clock::now();
            const PriorMean episode_prior = tau == 1 ? st.model.prior() : st.model.freeze_as_prior();
            const Vector reset = select_reset_state(st.model, es.reset_states, es.probe_actions);
            EpisodeResult res = run_episode(env, st.model, episode_prior, es, tau, reset,
                derive_seed(trial_seed, static_cast<std::uint64_t>(tau)));
            st.model = std::move(res.model);

            EpisodeRow row;
            row.tau = tau;
            row.max_variance = max_variance_over_grid(st.model, s.eval_grid);
            row.mse = mse_against(st.model, s.eval_grid, truth_rows);
            row.mean_visited_discrepancy = visited_discrepancy(p0, truth, res.log, s.episode.acquisition.norm);
            row.assumption3_held = s.check_assumption3 && assumption3_check(res.log, res.step_models, s.eval_grid).held;
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            st.elapsed_s += secs;
            row.wall_time_s = s.record_wall_time ? secs : 0.0;
            st.record.rows.push_back(row);
            st.logs.push_back(std::move(res.log));
            if (checkpoint)
                checkpoint(st);
        }
        return st;
    }

} // namespace discucb

#endif
