#ifndef DISCUCB_PLANNER_ACQUISITION_HPP
#define DISCUCB_PLANNER_ACQUISITION_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <discucb/env/env_spec.hpp>
#include <discucb/gp/gp_model.hpp>

namespace discucb {

    enum class DiscrepancyNorm { l2, l1, linf };

    inline std::string to_string(DiscrepancyNorm n)
    {
        switch (n) {
        case DiscrepancyNorm::l1:
            return "l1";
        case DiscrepancyNorm::linf:
            return "linf";
        default:
            return "l2";
        }
    }

    inline double vector_norm(const Eigen::Ref<const Vector>& v, DiscrepancyNorm n)
    {
        switch (n) {
        case DiscrepancyNorm::l1:
            return v.lpNorm<1>();
        case DiscrepancyNorm::linf:
            return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
        default:
            return v.norm();
        }
    }

    inline constexpr double kMinusInfinity = -std::numeric_limits<double>::infinity();

    /// Discrepancy UCB:
    ///   A(z) = ||mu(z) - m_tau(z)|| + sqrt(beta) sigma(z) + s(z)
    /// with s(z) = 0 inside the safe set and -inf outside.
    /// `use_discrepancy = false` drops the first term (variance-only planning).
    struct AcquisitionConfig {
        double beta = 2.0;
        DiscrepancyNorm norm = DiscrepancyNorm::l2;
        bool use_discrepancy = true;
        std::function<bool(const Vector& z)> safe_set;

        void validate() const
        {
            if (!(beta >= 0.0) || !std::isfinite(beta))
                throw InputError("AcquisitionConfig: beta must be finite and non-negative");
        }
    };

    struct AcquisitionBatch {
        Vector value; // A(z) per row
        Vector discrepancy; // ||mu - m_tau|| per row
        Vector variance; // sigma^2 per row
        Matrix mean; // mu per row, in model space (EnvSpec::next_state maps it to a state)
    };

    namespace detail {
        enum class DiscrepancyRoute { zero, data_term, explicit_difference };

        /// The model frozen into the episode prior has zero discrepancy by
        /// definition; a model whose own prior is the episode prior only
        /// needs its data-driven term.
        inline DiscrepancyRoute discrepancy_route(const GpModel& model, const PriorMean& episode_prior)
        {
            if (const FrozenGp* f = episode_prior.frozen_gp(); f && f->source_id == model.id())
                return DiscrepancyRoute::zero;
            if (model.prior().same_as(episode_prior))
                return DiscrepancyRoute::data_term;
            return DiscrepancyRoute::explicit_difference;
        }
    } // namespace detail

    /// Acquisition values for every row of Z (joined state-action points).
    inline AcquisitionBatch acquisition_batch(const GpModel& model, const PriorMean& episode_prior,
        const Eigen::Ref<const Matrix>& Z, const AcquisitionConfig& cfg)
    {
        cfg.validate();
        const BatchPrediction p = model.predict_batch(Z, true);
        AcquisitionBatch out;
        out.mean = p.mean;
        out.variance = p.variance;
        out.discrepancy = Vector::Zero(Z.rows());
        if (cfg.use_discrepancy) {
            switch (detail::discrepancy_route(model, episode_prior)) {
            case detail::DiscrepancyRoute::zero:
                break;
            case detail::DiscrepancyRoute::data_term:
                for (Index i = 0; i < Z.rows(); ++i)
                    out.discrepancy[i] = vector_norm(p.data_term.row(i).transpose(), cfg.norm);
                break;
            case detail::DiscrepancyRoute::explicit_difference: {
                const Matrix prior_rows = episode_prior.evaluate_rows(Z);
                for (Index i = 0; i < Z.rows(); ++i)
                    out.discrepancy[i] = vector_norm((p.mean.row(i) - prior_rows.row(i)).transpose(), cfg.norm);
                break;
            }
            }
        }
        const double root_beta = std::sqrt(cfg.beta);
        out.value.resize(Z.rows());
        for (Index i = 0; i < Z.rows(); ++i) {
            double v = out.discrepancy[i] + root_beta * std::sqrt(p.variance[i]);
            if (cfg.safe_set && !cfg.safe_set(Z.row(i).transpose()))
                v = kMinusInfinity;
            out.value[i] = v;
        }
        return out;
    }

    inline double acquisition_value(const GpModel& model, const PriorMean& episode_prior, const StateActionPoint& z,
        const AcquisitionConfig& cfg)
    {
        const Vector zj = z.joined();
        return acquisition_batch(model, episode_prior, zj.transpose(), cfg).value[0];
    }

    /// Action sequence: one row per time step.
    using ActionSequence = Matrix;

    /// Sum of acquisition values along the mean-dynamics rollout
    ///   x_{t+1} = next_state(x_t, mu(x_t, u_t)),  x_0 given,
    /// for each sequence in the batch. All sequences share one horizon.
    /// Non-finite rollout states disqualify a sequence (-inf).
    inline std::vector<double> rollout_objective_batch(const GpModel& model, const PriorMean& episode_prior,
        const EnvSpec& spec, const Vector& x0, const std::vector<ActionSequence>& seqs, const AcquisitionConfig& cfg)
    {
        const Index batch = static_cast<Index>(seqs.size());
        std::vector<double> total(seqs.size(), 0.0);
        if (batch == 0)
            return total;
        const Index horizon = seqs.front().rows();
        const Index sd = spec.state_dim;
        const Index ad = spec.action_dim;
        Matrix Z(batch, sd + ad);
        for (Index b = 0; b < batch; ++b) {
            if (seqs[static_cast<std::size_t>(b)].rows() != horizon || seqs[static_cast<std::size_t>(b)].cols() != ad)
                throw InputError("rollout_objective: sequences must share horizon and action dimension");
            Z.row(b).head(sd) = x0.transpose();
        }
        std::vector<bool> dead(seqs.size(), false);
        for (Index t = 0; t < horizon; ++t) {
            for (Index b = 0; b < batch; ++b)
                Z.row(b).tail(ad) = spec.project_action(seqs[static_cast<std::size_t>(b)].row(t).transpose()).transpose();
            const AcquisitionBatch a = acquisition_batch(model, episode_prior, Z, cfg);
            for (Index b = 0; b < batch; ++b) {
                const auto bi = static_cast<std::size_t>(b);
                if (dead[bi])
                    continue;
                total[bi] += a.value[b];
                if (t + 1 < horizon) {
                    const Vector next = a.mean.row(b).transpose();
                    if (!next.allFinite()) {
                        dead[bi] = true;
                        total[bi] = kMinusInfinity;
                        continue;
                    }
                    const Vector x = Z.row(b).head(sd).transpose();
                    Z.row(b).head(sd) = spec.next_state(x, next).transpose();
                }
            }
        }
        return total;
    }

    inline double rollout_objective(const GpModel& model, const PriorMean& episode_prior, const EnvSpec& spec,
        const Vector& x0, const ActionSequence& seq, const AcquisitionConfig& cfg)
    {
        return rollout_objective_batch(model, episode_prior, spec, x0, {seq}, cfg).front();
    }

} // namespace discucb

#endif
