#ifndef LIESTAB_TEST_FIXTURES_HPP
#define LIESTAB_TEST_FIXTURES_HPP

#include <liestab/lie_algebra.hpp>
#include <liestab/rng.hpp>
#include <liestab/types.hpp>

#include <vector>

namespace fixtures {

using liestab::Matrix;
using liestab::Vector;

inline Matrix mat2(double a, double b, double c, double d)
{
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// nilpotent raising / lowering pair and the diagonal of sl(2)
inline Matrix sl2_e() { return mat2(0, 1, 0, 0); }
inline Matrix sl2_f() { return mat2(0, 0, 1, 0); }
inline Matrix sl2_h() { return mat2(1, 0, 0, -1); }

inline Matrix unit(int n, int i, int j)
{
  Matrix m = Matrix::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

// rotation generators of 3-space
inline Matrix so3_x()
{
  Matrix m = Matrix::Zero(3, 3);
  m(1, 2) = -1.0;
  m(2, 1) = 1.0;
  return m;
}
inline Matrix so3_y()
{
  Matrix m = Matrix::Zero(3, 3);
  m(0, 2) = 1.0;
  m(2, 0) = -1.0;
  return m;
}
inline Matrix so3_z()
{
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = -1.0;
  m(1, 0) = 1.0;
  return m;
}

inline Matrix random_matrix(liestab::Rng& rng, int n)
{
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m;
}

inline Matrix random_matrix_scaled(liestab::Rng& rng, int n, double fro_norm)
{
  Matrix m = random_matrix(rng, n);
  return m * (fro_norm / m.norm());
}

// well-conditioned random similarity transform
inline Matrix random_similarity(liestab::Rng& rng, int n, double spread = 0.3)
{
  return Matrix::Identity(n, n) + spread * random_matrix(rng, n) / std::sqrt(double(n));
}

inline std::vector<Matrix> conjugate_all(const std::vector<Matrix>& mats, const Matrix& s)
{
  const Matrix sinv = s.inverse();
  std::vector<Matrix> out;
  for (const Matrix& m : mats) out.push_back(s * m * sinv);
  return out;
}

// sl(2) acting on the plane plus the two translations, as 3x3 matrices
inline std::vector<Matrix> affine_sl2_generators()
{
  Matrix e = Matrix::Zero(3, 3), f = Matrix::Zero(3, 3);
  e.topLeftCorner(2, 2) = sl2_e();
  f.topLeftCorner(2, 2) = sl2_f();
  return {e, f, unit(3, 0, 2)};
}

// block-diagonal sl(2) plus non-abelian solvable part (upper-triangular 2x2),
// radical with a two-step derived series
inline std::vector<Matrix> block_sl2_triangular_generators()
{
  auto embed_tl = [](const Matrix& m) {
    Matrix out = Matrix::Zero(4, 4);
    out.topLeftCorner(2, 2) = m;
    return out;
  };
  auto embed_br = [](const Matrix& m) {
    Matrix out = Matrix::Zero(4, 4);
    out.bottomRightCorner(2, 2) = m;
    return out;
  };
  return {embed_tl(sl2_e()), embed_tl(sl2_f()), embed_br(unit(2, 0, 0)),
          embed_br(unit(2, 0, 1)), embed_br(unit(2, 1, 1))};
}

// the CERTIFIED_GUES fixture: rotations plus a stable scalar radical
inline std::vector<Matrix> so3_radical_stable_modes()
{
  const Matrix eye = Matrix::Identity(3, 3);
  return {-eye + so3_x(), -eye + so3_y()};
}

// same construction with an unstable radical part
inline std::vector<Matrix> unstable_radical_modes()
{
  const Matrix eye = Matrix::Identity(3, 3);
  return {0.5 * eye + so3_x(), 0.5 * eye + so3_y()};
}

} // namespace fixtures

#endif
