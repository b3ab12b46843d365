#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace holomera::detail {

using Complex = std::complex<double>;
using MatrixXcdR = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Svd {
    MatrixXcdR u;        // m x k
    Eigen::VectorXd s;   // k, descending
    MatrixXcdR vh;       // k x n
};

inline Svd svd_rowmajor(const Complex* data, std::size_t m, std::size_t n) {
    Eigen::Map<const MatrixXcdR> mat(data, m, n);
    Svd out;
    if (std::min(m, n) <= 96) {
        Eigen::JacobiSVD<MatrixXcdR> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = svd.matrixU();
        out.s = svd.singularValues();
        out.vh = svd.matrixV().adjoint();
    } else {
        Eigen::BDCSVD<MatrixXcdR> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = svd.matrixU();
        out.s = svd.singularValues();
        out.vh = svd.matrixV().adjoint();
    }
    return out;
}

/// Rank to keep under a relative cutoff and hard cap; always at least 1.
inline std::size_t svd_rank(const Eigen::VectorXd& s, std::size_t chi_max, double cutoff) {
    std::size_t full = static_cast<std::size_t>(s.size());
    double smax = full ? s(0) : 0.0;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < full; ++i) {
        if (keep >= chi_max) break;
        if (s(i) < cutoff * smax) break;
        ++keep;
    }
    return keep ? keep : 1;
}

inline double discarded_weight(const Eigen::VectorXd& s, std::size_t keep) {
    double w = 0;
    for (std::size_t i = keep; i < static_cast<std::size_t>(s.size()); ++i) w += s(i) * s(i);
    return w;
}

} // namespace holomera::detail
