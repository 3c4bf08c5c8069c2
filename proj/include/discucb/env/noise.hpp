#ifndef DISCUCB_ENV_NOISE_HPP
#define DISCUCB_ENV_NOISE_HPP

#include <cstdint>
#include <random>

#include <discucb/gp/dataset.hpp>

namespace discucb {

    struct NoiseSpec {
        double std = 0.0;
        std::uint64_t seed = 0;

        void validate() const
        {
            if (!(std >= 0.0) || !std::isfinite(std))
                throw InputError("NoiseSpec: std must be finite and non-negative");
        }
    };

    /// Seeded Gaussian stream. One per worker; never shared.
    class NoiseStream {
    public:
        explicit NoiseStream(NoiseSpec spec) : _spec(spec), _rng(spec.seed)
        {
            _spec.validate();
        }

        const NoiseSpec& spec() const { return _spec; }
        std::uint64_t draws() const { return _draws; }

        Vector sample(Index dim)
        {
            Vector w(dim);
            for (Index i = 0; i < dim; ++i) {
                w[i] = _spec.std * _normal(_rng);
                ++_draws;
            }
            return w;
        }

    private:
        NoiseSpec _spec;
        std::mt19937_64 _rng;
        std::normal_distribution<double> _normal{0.0, 1.0};
        std::uint64_t _draws = 0;
    };

    /// SplitMix64 finalizer; mixes a parent seed with a child index.
    inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index)
    {
        std::uint64_t z = parent + 0x9E3779B97F4A7C15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

} // namespace discucb

#endif
