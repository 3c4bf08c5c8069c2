#ifndef DISCUCB_ENV_GRID_HPP
#define DISCUCB_ENV_GRID_HPP

#include <limits>
#include <ostream>
#include <vector>

#include <discucb/env/env_spec.hpp>

namespace discucb {

    inline constexpr Index kDefaultGridCap = 1'000'000;

    namespace detail {
        inline Matrix cartesian(const std::vector<Interval>& bounds, const std::vector<int>& counts, Index cap)
        {
            if (bounds.size() != counts.size())
                throw InputError("grid: one count per coordinate required");
            Index total = 1;
            for (int c : counts) {
                if (c < 2)
                    throw InputError("grid: at least 2 points per coordinate");
                if (total > cap / c)
                    throw InputError("grid: size exceeds cap of " + std::to_string(cap) + " points");
                total *= c;
            }
            const Index dim = static_cast<Index>(counts.size());
            Matrix out(total, dim);
            // last coordinate varies fastest
            for (Index row = 0; row < total; ++row) {
                Index rem = row;
                for (Index d = dim - 1; d >= 0; --d) {
                    const int c = counts[static_cast<std::size_t>(d)];
                    out(row, d) = EnvSpec::lattice_value(bounds[static_cast<std::size_t>(d)], c, static_cast<int>(rem % c));
                    rem /= c;
                }
            }
            return out;
        }
    } // namespace detail

    /// Cartesian grid of evenly spaced values over the state-action box,
    /// both bounds included. One joined (x, u) point per row.
    inline Matrix state_action_grid(const EnvSpec& spec, const std::vector<int>& counts, Index cap = kDefaultGridCap)
    {
        if (static_cast<Index>(counts.size()) != spec.input_dim())
            throw InputError("state_action_grid: need one count per state and action coordinate");
        std::vector<Interval> bounds = spec.state_bounds;
        bounds.insert(bounds.end(), spec.action_bounds.begin(), spec.action_bounds.end());
        return detail::cartesian(bounds, counts, cap);
    }

    /// Grid over the state box only (one state per row).
    inline Matrix state_grid(const EnvSpec& spec, const std::vector<int>& counts, Index cap = kDefaultGridCap)
    {
        if (static_cast<Index>(counts.size()) != spec.state_dim)
            throw InputError("state_grid: need one count per state coordinate");
        return detail::cartesian(spec.state_bounds, counts, cap);
    }

    /// Grid over the action box only (one action per row).
    inline Matrix action_grid(const EnvSpec& spec, const std::vector<int>& counts, Index cap = kDefaultGridCap)
    {
        if (static_cast<Index>(counts.size()) != spec.action_dim)
            throw InputError("action_grid: need one count per action coordinate");
        return detail::cartesian(spec.action_bounds, counts, cap);
    }

    inline std::vector<StateActionPoint> grid_points(const Matrix& grid, Index state_dim)
    {
        std::vector<StateActionPoint> out;
        out.reserve(static_cast<std::size_t>(grid.rows()));
        for (Index i = 0; i < grid.rows(); ++i)
            out.push_back(StateActionPoint::split(grid.row(i).transpose(), state_dim));
        return out;
    }

} // namespace discucb

#endif
