#ifndef DISCUCB_PLANNER_COLORED_NOISE_HPP
#define DISCUCB_PLANNER_COLORED_NOISE_HPP

#include <cmath>
#include <numbers>
#include <random>

#include <discucb/errors.hpp>
#include <discucb/gp/dataset.hpp>

namespace discucb {

    /// Unit-variance Gaussian noise with power spectrum ~ 1/f^exponent,
    /// built by an inverse real DFT of scaled white noise.
    /// Exponent 0 gives white noise; 2 gives smooth, strongly correlated
    /// sequences. The lowest frequency is clamped to 1/length.
    class ColoredNoise {
    public:
        ColoredNoise(double exponent, Index length)
            : _length(length)
        {
            if (length < 1)
                throw InputError("ColoredNoise: length must be positive");
            if (!(exponent >= 0.0) || !std::isfinite(exponent))
                throw InputError("ColoredNoise: exponent must be finite and non-negative");
            const Index bins = length / 2 + 1;
            _scale.resize(bins);
            const double fmin = 1.0 / static_cast<double>(length);
            for (Index k = 0; k < bins; ++k) {
                const double f = std::max(static_cast<double>(k) / static_cast<double>(length), fmin);
                _scale[k] = std::pow(f, -exponent / 2.0);
            }
            double var = _scale[0] * _scale[0];
            for (Index k = 1; k < bins; ++k) {
                const bool nyquist = (length % 2 == 0) && k == length / 2;
                var += (nyquist ? 1.0 : 4.0) * _scale[k] * _scale[k];
            }
            _norm = std::sqrt(var) / static_cast<double>(length);
            _cos.resize(length, bins);
            _sin.resize(length, bins);
            for (Index n = 0; n < length; ++n)
                for (Index k = 0; k < bins; ++k) {
                    const double phase = 2.0 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(length);
                    _cos(n, k) = std::cos(phase);
                    _sin(n, k) = std::sin(phase);
                }
        }

        Index length() const { return _length; }

        template <class Rng>
        Vector sample(Rng& rng) const
        {
            std::normal_distribution<double> normal(0.0, 1.0);
            const Index bins = _scale.size();
            Vector re(bins), im(bins);
            for (Index k = 0; k < bins; ++k) {
                re[k] = _scale[k] * normal(rng);
                im[k] = _scale[k] * normal(rng);
            }
            im[0] = 0.0;
            Vector weight = Vector::Constant(bins, 2.0);
            weight[0] = 1.0;
            if (_length % 2 == 0) {
                im[bins - 1] = 0.0;
                weight[bins - 1] = 1.0;
            }
            const Vector x = _cos * weight.cwiseProduct(re) - _sin * weight.cwiseProduct(im);
            return x / (static_cast<double>(_length) * _norm);
        }

    private:
        Index _length = 0;
        Vector _scale;
        double _norm = 1.0;
        Matrix _cos;
        Matrix _sin;
    };

} // namespace discucb

#endif
