#ifndef LIESTAB_TYPES_HPP
#define LIESTAB_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace liestab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row-major vectorization of a matrix expression.
template <typename Derived>
VectorX<typename Derived::Scalar> vectorize(const Eigen::MatrixBase<Derived>& m)
{
  VectorX<typename Derived::Scalar> v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      v(i * m.cols() + j) = m(i, j);
  return v;
}

/// Inverse of vectorize() for square matrices.
inline Matrix unvectorize(const Vector& v, Eigen::Index n)
{
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = v(i * n + j);
  return m;
}

/// Largest singular value (L2 operator norm).
template <typename Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& m)
{
  if (m.size() == 0) return 0.0;
  return m.derived().template cast<double>().jacobiSvd().singularValues()(0);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
  return m.allFinite();
}

} // namespace liestab

#endif
