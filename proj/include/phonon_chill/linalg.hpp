#pragma once

#include <complex>

#include <Eigen/Dense>

namespace phonon_chill {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

/// Reciprocal condition estimate from singular values (1 = perfect, 0 = singular).
inline double inverse_condition(const CMatrix& a)
{
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0.0;
    }
    return s(s.size() - 1) / s(0);
}

inline double relative_difference(const CVector& a, const CVector& b)
{
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double relative_difference(cplx a, cplx b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace phonon_chill
