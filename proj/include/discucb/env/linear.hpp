#ifndef DISCUCB_ENV_LINEAR_HPP
#define DISCUCB_ENV_LINEAR_HPP

#include <discucb/env/env_spec.hpp>

namespace discucb {

    /// x' = A x + B u.
    inline Vector linear_env_step(const Vector& x, const Vector& u, const Matrix& A, const Matrix& B)
    {
        if (A.rows() != A.cols() || A.cols() != x.size() || B.rows() != A.rows() || B.cols() != u.size())
            throw InputError("linear_env_step: dimensions are not conformable");
        return A * x + B * u;
    }

    /// Linear dynamics on a finite lattice: the next state is projected onto
    /// the state lattice, so every visited (x, u) is one of N_z grid points.
    inline EnvSpec finite_linear_spec(std::vector<Interval> state_bounds, std::vector<Interval> action_bounds,
        std::vector<int> state_lattice, std::vector<int> action_lattice)
    {
        EnvSpec s;
        s.state_dim = static_cast<Index>(state_bounds.size());
        s.action_dim = static_cast<Index>(action_bounds.size());
        s.state_bounds = std::move(state_bounds);
        s.action_bounds = std::move(action_bounds);
        s.wrap_mask.assign(static_cast<std::size_t>(s.state_dim), false);
        s.dt = 1.0;
        s.state_lattice = std::move(state_lattice);
        s.action_lattice = std::move(action_lattice);
        s.validate();
        return s;
    }

} // namespace discucb

#endif
