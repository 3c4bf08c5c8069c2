#ifndef DISCUCB_ENV_ENVIRONMENT_HPP
#define DISCUCB_ENV_ENVIRONMENT_HPP

#include <functional>
#include <string>

#include <discucb/env/grid.hpp>
#include <discucb/env/linear.hpp>
#include <discucb/env/noise.hpp>
#include <discucb/env/pendulum.hpp>
#include <discucb/gp/prior_mean.hpp>

namespace discucb {

    /// A simulated system: the true (noiseless) step f and an imperfect
    /// analytic model p0 of it. Both return projected next states.
    /// Stateless; noise comes from a caller-owned NoiseStream.
    struct Environment {
        using StepFn = std::function<Vector(const Vector& x, const Vector& u)>;

        std::string name;
        EnvSpec spec;
        StepFn truth;
        StepFn prior_model;

        Vector step(const Vector& x, const Vector& u) const
        {
            check(x, u);
            return truth(x, spec.project_action(u));
        }

        Vector prior_step(const Vector& x, const Vector& u) const
        {
            check(x, u);
            return prior_model(x, spec.project_action(u));
        }

        /// p0 as a GP prior mean over joined (x, u) inputs, in model space
        /// (see EnvSpec::to_model_output).
        PriorMean prior_mean() const { return as_prior(name + "/prior", prior_model); }

        /// The true dynamics as a prior mean (oracle model, zero bias), in model space.
        PriorMean truth_mean() const { return as_prior(name + "/truth", truth); }

        Vector kernel_periods() const { return spec.kernel_periods(); }

    private:
        void check(const Vector& x, const Vector& u) const
        {
            if (x.size() != spec.state_dim || u.size() != spec.action_dim)
                throw InputError(name + ": state/action dimension mismatch");
            if (!x.allFinite() || !u.allFinite())
                throw InputError(name + ": non-finite state or action");
        }

        PriorMean as_prior(std::string label, StepFn fn) const
        {
            const Index sd = spec.state_dim;
            const EnvSpec s = spec;
            return PriorMean::analytic(std::move(label), sd, [fn = std::move(fn), sd, s](const Vector& z) {
                const Vector x = z.head(sd);
                return s.to_model_output(x, fn(x, s.project_action(z.tail(z.size() - sd))));
            });
        }
    };

    /// GP target for an observed transition x -> y.
    inline Vector regression_target(const EnvSpec& spec, const Vector& x, const Vector& y)
    {
        return spec.to_model_output(x, y);
    }

    /// y = project(f(x, u) + w), w ~ N(0, std^2 I) from the stream.
    inline Vector observe_transition(const Environment& env, const Vector& x, const Vector& u, NoiseStream& noise)
    {
        Vector y = env.step(x, u);
        if (noise.spec().std > 0.0)
            y = env.spec.project_state(y + noise.sample(y.size()));
        return y;
    }

    inline Environment make_pendulum_env(const PendulumParams& truth, const PendulumParams& prior, double dt = 0.05)
    {
        truth.validate();
        prior.validate();
        Environment env;
        env.name = "pendulum";
        env.spec = pendulum_spec(dt);
        const EnvSpec s = env.spec;
        env.truth = [truth, s](const Vector& x, const Vector& u) { return pendulum_step(x, u, truth, s); };
        env.prior_model = [prior, s](const Vector& x, const Vector& u) { return pendulum_step(x, u, prior, s); };
        return env;
    }

    inline Environment make_finite_linear_env(const Matrix& A, const Matrix& B, const Matrix& prior_A, const Matrix& prior_B,
        EnvSpec spec)
    {
        spec.validate();
        if (!spec.finite())
            throw InputError("finite_linear: lattice counts are required");
        if (A.rows() != spec.state_dim || B.cols() != spec.action_dim || prior_A.rows() != A.rows() || prior_B.cols() != B.cols())
            throw InputError("finite_linear: matrix shapes do not match the state and action dimensions");
        Environment env;
        env.name = "finite_linear";
        env.spec = spec;
        env.truth = [A, B, spec](const Vector& x, const Vector& u) { return spec.project_state(linear_env_step(x, u, A, B)); };
        env.prior_model = [prior_A, prior_B, spec](const Vector& x, const Vector& u) {
            return spec.project_state(linear_env_step(x, u, prior_A, prior_B));
        };
        return env;
    }

} // namespace discucb

#endif
