#ifndef DISCUCB_ENV_PENDULUM_HPP
#define DISCUCB_ENV_PENDULUM_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

#include <discucb/env/env_spec.hpp>

namespace discucb {

    struct PendulumParams {
        double g = 9.81; // m/s^2
        double m = 1.0; // kg
        double l = 1.0; // m

        void validate() const
        {
            if (!(m > 0.0) || !(l > 0.0) || !std::isfinite(g))
                throw InputError("PendulumParams: need m > 0, l > 0 and finite g");
        }

        bool operator==(const PendulumParams&) const = default;
    };

    /// State (theta, theta_dot), action torque u.
    /// theta in [-pi, pi] (wrapped), theta_dot in [-8, 8], u in [-2, 2].
    inline EnvSpec pendulum_spec(double dt = 0.05)
    {
        EnvSpec s;
        s.state_dim = 2;
        s.action_dim = 1;
        s.state_bounds = {{-std::numbers::pi, std::numbers::pi}, {-8.0, 8.0}};
        s.action_bounds = {{-2.0, 2.0}};
        s.wrap_mask = {true, false};
        s.dt = dt;
        s.state_names = {"theta", "theta_dot"};
        s.action_names = {"u"};
        s.validate();
        return s;
    }

    /// theta_ddot from  m l^2 theta_ddot + 3 m g l sin(theta) = 3 u.
    inline double pendulum_acceleration(double theta, double u, const PendulumParams& p)
    {
        return 3.0 * u / (p.m * p.l * p.l) - 3.0 * p.g * std::sin(theta) / p.l;
    }

    /// One forward-Euler step followed by wrapping theta and clipping theta_dot.
    inline Vector pendulum_step(const Vector& x, const Vector& u, const PendulumParams& p, const EnvSpec& spec)
    {
        if (x.size() != 2 || u.size() != 1)
            throw InputError("pendulum_step: expected 2-d state and 1-d action");
        if (!x.allFinite() || !u.allFinite())
            throw InputError("pendulum_step: non-finite input");
        const double torque = std::clamp(u[0], spec.action_bounds[0].lo, spec.action_bounds[0].hi);
        const double acc = pendulum_acceleration(x[0], torque, p);
        Vector next(2);
        next[0] = x[0] + spec.dt * x[1];
        next[1] = x[1] + spec.dt * acc;
        return spec.project_state(next);
    }

} // namespace discucb

#endif
