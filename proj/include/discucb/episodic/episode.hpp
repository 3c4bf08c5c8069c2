#ifndef DISCUCB_EPISODIC_EPISODE_HPP
#define DISCUCB_EPISODIC_EPISODE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <discucb/env/environment.hpp>
#include <discucb/episodic/log.hpp>
#include <discucb/episodic/schedule.hpp>
#include <discucb/planner/greedy.hpp>
#include <discucb/planner/icem.hpp>

namespace discucb {

    enum class Method { discrepancy_ucb, variance_planner, sigma_greedy };

    inline std::string to_string(Method m)
    {
        switch (m) {
        case Method::variance_planner:
            return "variance_planner";
        case Method::sigma_greedy:
            return "sigma_greedy";
        default:
            return "discrepancy_ucb";
        }
    }

    struct EpisodeSettings {
        Method method = Method::discrepancy_ucb;
        AcquisitionConfig acquisition; // beta here is the constant for BetaKind::constant
        BetaKind beta_kind = BetaKind::constant;
        CemConfig cem;
        ScheduleConfig schedule;
        double noise_std = 0.01;
        Matrix reset_states; // candidate reset states, one per row
        Matrix probe_actions; // actions scanned at each reset candidate
        Matrix candidate_actions; // sigma_greedy action set
        bool keep_step_models = false;

        void validate(const EnvSpec& spec) const
        {
            acquisition.validate();
            cem.validate();
            schedule.validate();
            if (!(noise_std >= 0.0))
                throw InputError("EpisodeSettings: noise std must be non-negative");
            if (reset_states.rows() == 0 || reset_states.cols() != spec.state_dim)
                throw InputError("EpisodeSettings: reset states missing or of wrong dimension");
            if (probe_actions.rows() == 0 || probe_actions.cols() != spec.action_dim)
                throw InputError("EpisodeSettings: probe actions missing or of wrong dimension");
            if (method == Method::sigma_greedy && (candidate_actions.rows() == 0 || candidate_actions.cols() != spec.action_dim))
                throw InputError("EpisodeSettings: sigma_greedy needs candidate actions");
        }
    };

    /// Reset state: argmax over candidate states of the largest variance over
    /// the probe actions. Ties go to the lowest index.
    inline Vector select_reset_state(const GpModel& model, const Matrix& states, const Matrix& probe_actions)
    {
        if (states.rows() == 0 || probe_actions.rows() == 0)
            throw InputError("select_reset_state: empty state grid or probe set");
        const Index sd = states.cols(), ad = probe_actions.cols();
        Matrix Z(states.rows() * probe_actions.rows(), sd + ad);
        for (Index i = 0; i < states.rows(); ++i)
            for (Index j = 0; j < probe_actions.rows(); ++j) {
                Z.row(i * probe_actions.rows() + j).head(sd) = states.row(i);
                Z.row(i * probe_actions.rows() + j).tail(ad) = probe_actions.row(j);
            }
        const Vector var = model.predict_batch(Z, true).variance;
        Index best = 0;
        double best_v = -1.0;
        for (Index i = 0; i < states.rows(); ++i) {
            const double v = var.segment(i * probe_actions.rows(), probe_actions.rows()).maxCoeff();
            if (v > best_v) {
                best_v = v;
                best = i;
            }
        }
        return states.row(best).transpose();
    }

    inline Vector select_reset_state(const GpModel& model, const Matrix& states)
    {
        return select_reset_state(model, states, Matrix::Zero(1, model.action_dim()));
    }

    /// Fold one observed transition into the model: switch to the episode
    /// prior, set the scheduled regulariser for step n, then append z with
    /// the regression target of y.
    inline GpModel absorb_observation(GpModel model, const PriorMean& episode_prior, const EnvSpec& spec,
        const ScheduleConfig& schedule, int tau, int n, const Vector& z, const Vector& y)
    {
        if (!model.prior().same_as(episode_prior))
            model = model.with_prior(episode_prior);
        const double reg = regularization(schedule, tau, n);
        if (model.regularization() != reg)
            model = model.with_regularization(reg);
        return model.update_with_observation(z, regression_target(spec, z.head(spec.state_dim), y));
    }

    struct EpisodeResult {
        GpModel model;
        EpisodeLog log;
        std::vector<GpModel> step_models; // model used to select step n at index n - 1
    };

    /// One episode of N plan-act-observe-update steps starting at `reset`.
    /// The executed trajectory follows the observed (noisy) true outcomes.
    inline EpisodeResult run_episode(const Environment& env, GpModel model, const PriorMean& episode_prior,
        const EpisodeSettings& s, int tau, const Vector& reset, std::uint64_t seed)
    {
        s.validate(env.spec);
        const EnvSpec& spec = env.spec;
        const Index sd = spec.state_dim, ad = spec.action_dim;
        NoiseStream noise({s.noise_std, derive_seed(seed, 0)});

        EpisodeResult out;
        out.log.tau = tau;
        out.log.reset_state = spec.project_state(reset);
        Vector x = out.log.reset_state;
        std::optional<ActionSequence> warm;
        AcquisitionConfig logging = s.acquisition;
        logging.use_discrepancy = true;
        logging.safe_set = nullptr;

        for (int n = 1; n <= s.schedule.episode_length; ++n) {
            AcquisitionConfig acq = s.acquisition;
            acq.beta = beta_value(s.beta_kind, s.acquisition.beta, static_cast<long>(model.size()));
            if (s.method != Method::discrepancy_ucb)
                acq.use_discrepancy = false;
            if (s.keep_step_models)
                out.step_models.push_back(model);

            Vector u;
            if (s.method == Method::sigma_greedy) {
                u = spec.project_action(greedy_variance_action(model, x, s.candidate_actions));
            }
            else {
                const PlanResult plan = plan_exploration(model, episode_prior, spec, x, acq, s.cem,
                    derive_seed(seed, static_cast<std::uint64_t>(n)), warm);
                u = spec.project_action(plan.best.row(0).transpose());
                warm = shift_sequence(plan.best);
            }

            Vector z(sd + ad);
            z << x, u;
            logging.beta = acq.beta;
            const AcquisitionBatch terms = acquisition_batch(model, episode_prior, z.transpose(), logging);
            const Vector y = observe_transition(env, x, u, noise);
            model = absorb_observation(std::move(model), episode_prior, spec, s.schedule, tau, n, z, y);
            out.log.visited.push_back({z, y, terms.variance[0], terms.discrepancy[0]});
            x = y;
        }
        out.model = std::move(model);
        return out;
    }

} // namespace discucb

#endif
