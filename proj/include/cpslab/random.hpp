#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace cpslab {

// Derives independent substream seeds from one master seed so that enabling
// or disabling one consumer (e.g. an attack generator) never perturbs the
// draws seen by another (e.g. plant noise).
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
    // splitmix64 on master + stream index.
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic standard-normal sampler (mt19937_64 + Box-Muller) so that a
// given seed produces the same sequence on every platform.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : eng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Eigen::VectorXd vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v(i) = next();
        return v;
    }

private:
    double uniform() {
        // 53-bit mantissa uniform in [0,1).
        return (eng_() >> 11) * (1.0 / 9007199254740992.0);
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Symmetric PSD square root via eigendecomposition (for covariance shaping).
inline Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace cpslab
