#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace holomera::detail {

using Complex = std::complex<double>;

struct LanczosOut {
    double value = 0.0;
    std::vector<Complex> vec;
    double residual = 0.0;
};

/// Lowest eigenpair of a hermitian operator given only y += A x. Restarted
/// Lanczos with full (double) reorthogonalization; deterministic for a
/// deterministic start vector.
template <class MatVec>
LanczosOut lanczos_lowest(const MatVec& matvec, std::size_t dim, std::vector<Complex> v0,
                          int block = 80, int restarts = 60, double tol = 1e-11,
                          int reorth_passes = 2) {
    auto normalize = [&](std::vector<Complex>& v) {
        double n = 0;
        for (auto& z : v) n += std::norm(z);
        n = std::sqrt(n);
        for (auto& z : v) z /= n;
    };
    normalize(v0);
    double theta = 0.0;
    std::vector<Complex> ritz = v0;

    auto residual_of = [&](const std::vector<Complex>& v, double th) {
        std::vector<Complex> hv(dim, Complex{});
        matvec(v.data(), hv.data());
        double res = 0;
        for (std::size_t k = 0; k < dim; ++k) res += std::norm(hv[k] - th * v[k]);
        return std::sqrt(res);
    };

    if (block > static_cast<int>(dim)) block = static_cast<int>(dim);

    for (int r = 0; r < restarts; ++r) {
        std::vector<std::vector<Complex>> basis;
        std::vector<double> alpha, beta;
        basis.push_back(ritz);
        std::vector<Complex> w(dim);
        int m = 0;
        for (int j = 0; j < block; ++j) {
            std::fill(w.begin(), w.end(), Complex{});
            matvec(basis[j].data(), w.data());
            Complex a{0, 0};
            for (std::size_t k = 0; k < dim; ++k) a += std::conj(basis[j][k]) * w[k];
            alpha.push_back(a.real());
            for (int pass = 0; pass < reorth_passes; ++pass)
                for (const auto& b : basis) {
                    Complex ov{0, 0};
                    for (std::size_t k = 0; k < dim; ++k) ov += std::conj(b[k]) * w[k];
                    for (std::size_t k = 0; k < dim; ++k) w[k] -= ov * b[k];
                }
            double nb = 0;
            for (auto& z : w) nb += std::norm(z);
            nb = std::sqrt(nb);
            m = j + 1;
            if (nb < 1e-13 * (1.0 + std::abs(alpha[j])) || j + 1 == block) break;
            if (m >= 2) {
                // cheap Ritz-residual estimate beta * |y_last| on the current T
                Eigen::MatrixXd Tj = Eigen::MatrixXd::Zero(m, m);
                for (int q = 0; q < m; ++q) {
                    Tj(q, q) = alpha[q];
                    if (q + 1 < m) Tj(q, q + 1) = Tj(q + 1, q) = beta[q];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esj(Tj);
                if (nb * std::abs(esj.eigenvectors().col(0)(m - 1)) < 0.3 * tol) break;
            }
            beta.push_back(nb);
            std::vector<Complex> nxt(dim);
            for (std::size_t k = 0; k < dim; ++k) nxt[k] = w[k] / nb;
            basis.push_back(std::move(nxt));
        }
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            T(j, j) = alpha[j];
            if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        theta = es.eigenvalues()(0);
        Eigen::VectorXd y = es.eigenvectors().col(0);
        std::vector<Complex> next(dim, Complex{});
        for (int j = 0; j < m; ++j)
            for (std::size_t k = 0; k < dim; ++k) next[k] += y(j) * basis[j][k];
        normalize(next);
        ritz = std::move(next);
        double res = residual_of(ritz, theta);
        if (res < tol) return {theta, ritz, res};
    }
    return {theta, ritz, residual_of(ritz, theta)};
}

} // namespace holomera::detail
