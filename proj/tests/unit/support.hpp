#ifndef DISCUCB_TESTS_SUPPORT_HPP
#define DISCUCB_TESTS_SUPPORT_HPP

#include <random>

#include <Eigen/Dense>

#include <discucb/gp/gp_model.hpp>

namespace discucb::test_support {

    inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = -2.0, double hi = 2.0)
    {
        std::uniform_real_distribution<double> d(lo, hi);
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j)
                m(i, j) = d(rng);
        return m;
    }

    inline Vector random_vector(std::mt19937_64& rng, Index n, double lo = -2.0, double hi = 2.0)
    {
        return random_matrix(rng, n, 1, lo, hi).col(0);
    }

    /// A smooth analytic prior p0(z) = (sin z0 + 0.3 z1, cos(z_last)) for tests.
    inline PriorMean test_prior(Index output_dim = 2)
    {
        return PriorMean::analytic("test", output_dim, [output_dim](const Vector& z) {
            Vector v(output_dim);
            for (Index i = 0; i < output_dim; ++i)
                v[i] = std::sin(z[0] + 0.5 * static_cast<double>(i)) + 0.3 * z[z.size() - 1] * static_cast<double>(i + 1);
            return v;
        });
    }

    /// Posterior straight from the textbook formulas: forms the full n x n
    /// (G + reg I), one row per raw observation, and solves with a
    /// pivoted LU. Shares nothing with the incremental Cholesky path.
    struct DenseOracle {
        Vector mean;
        double variance;
    };

    inline DenseOracle dense_posterior(const RbfKernel& k, const PriorMean& prior, double reg, const Matrix& Z,
        const Matrix& Y, const Vector& zq)
    {
        const Index n = Z.rows();
        DenseOracle out;
        if (n == 0) {
            out.mean = prior(zq);
            out.variance = 1.0;
            return out;
        }
        Matrix A(n, n);
        Vector kq(n);
        Matrix R(n, Y.cols());
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                double d2 = 0.0;
                for (Index c = 0; c < Z.cols(); ++c) {
                    double delta = Z(i, c) - Z(j, c);
                    if (k.periods().size() && k.periods()[c] > 0) {
                        const double p = k.periods()[c];
                        delta = (p / M_PI) * std::sin(M_PI * delta / p);
                    }
                    d2 += delta * delta;
                }
                A(i, j) = std::exp(-k.gamma() * d2) + (i == j ? reg : 0.0);
            }
            kq[i] = k(Z.row(i).transpose(), zq);
            R.row(i) = Y.row(i) - prior(Z.row(i).transpose()).transpose();
        }
        Eigen::FullPivLU<Matrix> lu(A);
        out.mean = (lu.solve(R)).transpose() * kq + prior(zq);
        out.variance = 1.0 - kq.dot(lu.solve(kq));
        return out;
    }

    inline GpModel incremental_model(const RbfKernel& k, const PriorMean& prior, double reg, Index sdim, Index adim,
        const Matrix& Z, const Matrix& Y)
    {
        GpModel m(k, prior, reg, sdim, adim);
        for (Index i = 0; i < Z.rows(); ++i)
            m = m.update_with_observation(Vector(Z.row(i).transpose()), Vector(Y.row(i).transpose()));
        return m;
    }

} // namespace discucb::test_support

#endif
