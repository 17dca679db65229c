#include <liestab/lie_algebra.hpp>

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace liestab {

namespace {

// Orthonormal column basis of the span of `cols`, rank-decided at
// tol * max(sigma_max, 1).  The unit floor keeps numerically-zero inputs
// (for example brackets of an abelian family) from promoting noise
// directions to basis vectors; all callers work with O(1)-normalized data.
Matrix orth_span(const Matrix& cols, double tol)
{
  if (cols.cols() == 0) return Matrix(cols.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return Matrix(cols.rows(), 0);
  const double threshold = tol * std::max(sv(0), 1.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > threshold) ++r;
  return svd.matrixU().leftCols(r);
}

// Columns of `space` orthogonal to the (orthonormal) columns of `sub`.
Matrix orth_complement_within(const Matrix& space, const Matrix& sub, double tol)
{
  Matrix residual = space - sub * (sub.transpose() * space);
  return orth_span(residual, tol);
}

Vector project_residual(const Matrix& q, const Vector& v)
{
  if (q.cols() == 0) return v;
  return v - q * (q.transpose() * v);
}

} // namespace

GeneratorSet::GeneratorSet(std::vector<Matrix> mats) : modes(std::move(mats))
{
  if (modes.empty()) throw InputError("generator set needs at least one mode");
  n = static_cast<int>(modes[0].rows());
  if (n <= 0) throw InputError("generator matrices must be non-empty");
  for (std::size_t p = 0; p < modes.size(); ++p) {
    const Matrix& a = modes[p];
    if (a.rows() != n || a.cols() != n)
      throw InputError("mode " + std::to_string(p + 1) + " is not " + std::to_string(n) +
                       "x" + std::to_string(n));
    if (!a.allFinite())
      throw InputError("mode " + std::to_string(p + 1) + " has non-finite entries");
  }
}

const Matrix& GeneratorSet::mode(int p) const
{
  if (p < 1 || p > mode_count())
    throw InputError("mode index " + std::to_string(p) + " outside 1.." +
                     std::to_string(mode_count()));
  return modes[static_cast<std::size_t>(p - 1)];
}

Matrix LieBasis::stacked() const
{
  const int n = matrix_dim();
  Matrix v(n * n, dim());
  for (int i = 0; i < dim(); ++i) v.col(i) = vectorize(elements[i]);
  return v;
}

Vector LieBasis::coordinates(const Matrix& m, double* residual) const
{
  if (dim() == 0) {
    if (residual) *residual = m.norm();
    return Vector(0);
  }
  const Matrix v = stacked();
  const Vector rhs = vectorize(m);
  Vector c = v.colPivHouseholderQr().solve(rhs);
  if (residual) *residual = (v * c - rhs).norm();
  return c;
}

Matrix LieBasis::ad(int i) const
{
  const int d = dim();
  Matrix a = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      a(k, j) = structure_constants[k](i, j);
  return a;
}

namespace {

// Shared tail of closure()/make_lie_basis(): structure constants by least
// squares against the stacked basis, worst residual recorded.
void fill_structure_constants(LieBasis& b)
{
  const int d = b.dim();
  b.structure_constants.assign(d, Matrix::Zero(d, d));
  if (d == 0) return;
  const Matrix v = b.stacked();
  const auto qr = v.colPivHouseholderQr();
  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      const Vector rhs = vectorize(bracket(b.elements[i], b.elements[j]));
      const Vector c = qr.solve(rhs);
      worst = std::max(worst, (v * c - rhs).norm());
      for (int k = 0; k < d; ++k) {
        b.structure_constants[k](i, j) = c(k);
        b.structure_constants[k](j, i) = -c(k);
      }
    }
  }
  b.structure_residual = worst;
}

// Incremental rank-filtered basis builder over vectorized matrices.
class SpanBuilder {
 public:
  SpanBuilder(int n, double tol) : n_(n), tol_(tol), q_(n * n, 0) {}

  bool try_add(const Matrix& m)
  {
    const Vector v = vectorize(m);
    // Two Gram-Schmidt passes keep q_ orthonormal to working precision.
    Vector r = project_residual(q_, v);
    r = project_residual(q_, r);
    if (r.norm() <= tol_ * sigma_max_with(v)) return false;
    accepted_.push_back(m / m.norm());
    q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
    q_.col(q_.cols() - 1) = r / r.norm();
    return true;
  }

  const std::vector<Matrix>& accepted() const { return accepted_; }
  int dim() const { return static_cast<int>(accepted_.size()); }

 private:
  double sigma_max_with(const Vector& v) const
  {
    Matrix stack(n_ * n_, dim() + 1);
    for (int i = 0; i < dim(); ++i) stack.col(i) = vectorize(accepted_[i]);
    stack.col(dim()) = v;
    return Eigen::JacobiSVD<Matrix>(stack).singularValues()(0);
  }

  int n_;
  double tol_;
  Matrix q_;
  std::vector<Matrix> accepted_;
};

} // namespace

LieBasis closure(const GeneratorSet& gens, double tol)
{
  if (tol <= 0.0) throw InputError("closure tolerance must be positive");
  const int n = gens.n;
  const int cap = n * n;

  SpanBuilder span(n, tol);
  for (const Matrix& a : gens.modes)
    if (a.norm() > 0.0) span.try_add(a);

  std::vector<int> frontier(span.dim());
  for (int i = 0; i < span.dim(); ++i) frontier[i] = i;

  while (!frontier.empty() && span.dim() < cap) {
    std::vector<int> next;
    for (int i : frontier) {
      // j scans the growing basis, so new-new pairs within a stage are seen.
      for (int j = 0; j < span.dim() && span.dim() < cap; ++j) {
        if (i == j) continue;
        const Matrix br = bracket(span.accepted()[i], span.accepted()[j]);
        if (span.try_add(br)) next.push_back(span.dim() - 1);
      }
    }
    frontier = std::move(next);
  }

  LieBasis b;
  b.elements = span.accepted();
  b.rank_tolerance = tol;
  fill_structure_constants(b);
  return b;
}

LieBasis make_lie_basis(const std::vector<Matrix>& mats, double tol)
{
  LieBasis b;
  b.rank_tolerance = tol;
  if (mats.empty()) return b;

  const int n = static_cast<int>(mats[0].rows());
  SpanBuilder span(n, tol);
  for (const Matrix& m : mats) {
    if (m.rows() != n || m.cols() != n) throw InputError("basis matrices differ in dimension");
    if (!span.try_add(m)) throw InputError("basis matrices are not linearly independent");
  }
  b.elements = mats;  // keep the caller's scaling
  fill_structure_constants(b);

  const double scale = std::max(1.0, b.stacked().norm());
  if (b.structure_residual > tol * 1e3 * scale)
    throw ResidualTooLarge("given span is not bracket-closed (residual " +
                           std::to_string(b.structure_residual) + ")");
  return b;
}

Matrix killing_form(const LieBasis& basis)
{
  const int d = basis.dim();
  std::vector<Matrix> ads(d);
  for (int i = 0; i < d; ++i) ads[i] = basis.ad(i);
  Matrix k(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      k(i, j) = k(j, i) = (ads[i] * ads[j]).trace();
  return k;
}

LieBasis derived_subalgebra(const LieBasis& basis, double tol)
{
  const int d = basis.dim();
  if (d == 0) return LieBasis{{}, {}, tol, 0.0};
  SpanBuilder span(basis.matrix_dim(), tol);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j)
      span.try_add(bracket(basis.elements[i], basis.elements[j]));

  LieBasis b;
  b.elements = span.accepted();
  b.rank_tolerance = tol;
  fill_structure_constants(b);
  return b;
}

bool is_solvable(const LieBasis& basis, double tol)
{
  LieBasis current = basis;
  for (int step = 0; step <= basis.dim(); ++step) {
    if (current.dim() == 0) return true;
    LieBasis next = derived_subalgebra(current, tol);
    if (next.dim() >= current.dim()) return false;
    current = std::move(next);
  }
  return false;
}

LieBasis radical(const LieBasis& basis, double tol)
{
  const int d = basis.dim();
  if (d == 0) return basis;

  const LieBasis derived = derived_subalgebra(basis, tol);
  if (derived.dim() == 0) return basis;  // abelian: its own radical

  // Coordinates of the derived basis in the ambient basis.
  Matrix dcoords(d, derived.dim());
  for (int j = 0; j < derived.dim(); ++j) {
    double res = 0.0;
    dcoords.col(j) = basis.coordinates(derived.elements[j], &res);
  }

  // Null space of x -> K(x, .)|derived.
  const Matrix k = killing_form(basis);
  const Matrix m = dcoords.transpose() * k;  // derived.dim x d
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol * std::max(smax, 1.0)) ++rank;

  LieBasis rad;
  rad.rank_tolerance = tol;
  for (Eigen::Index c = rank; c < svd.matrixV().cols(); ++c) {
    Matrix elem = Matrix::Zero(basis.matrix_dim(), basis.matrix_dim());
    for (int i = 0; i < d; ++i) elem += svd.matrixV()(i, c) * basis.elements[i];
    rad.elements.push_back(elem / elem.norm());
  }
  fill_structure_constants(rad);

  if (!is_solvable(rad, tol))
    throw SolvabilityCheckFailed("computed radical candidate of dim " +
                                 std::to_string(rad.dim()) +
                                 " is not solvable; adjust the rank tolerance");
  return rad;
}

namespace {

// Bracket in ambient coordinates through the structure-constant tensor.
Vector coord_bracket(const LieBasis& g, const Vector& x, const Vector& y)
{
  const int d = g.dim();
  Vector out(d);
  for (int k = 0; k < d; ++k) out(k) = x.dot(g.structure_constants[k] * y);
  return out;
}

// d x d matrix of y -> [x, y] in ambient coordinates.
Matrix coord_ad(const LieBasis& g, const Vector& x)
{
  const int d = g.dim();
  Matrix b(d, d);
  for (int k = 0; k < d; ++k) b.row(k) = x.transpose() * g.structure_constants[k];
  return b;
}

// Span of all pairwise coordinate brackets of the columns of r.
Matrix coord_derived_span(const LieBasis& g, const Matrix& r, double tol)
{
  const Eigen::Index m = r.cols();
  if (m < 2) return Matrix(g.dim(), 0);
  Matrix cols(g.dim(), m * (m - 1) / 2);
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      cols.col(c++) = coord_bracket(g, r.col(i), r.col(j));
  return orth_span(cols, tol);
}

} // namespace

LieBasis levi_complement(const LieBasis& basis, const LieBasis& rad, double tol)
{
  const int d = basis.dim();
  if (rad.dim() == 0) return basis;
  if (rad.dim() == d) return LieBasis{{}, {}, tol, 0.0};

  // Everything below runs in ambient coordinates (R^d with the basis of g).
  Matrix rad_coords(d, rad.dim());
  for (int j = 0; j < rad.dim(); ++j)
    rad_coords.col(j) = basis.coordinates(rad.elements[j]);

  Matrix h = Matrix::Identity(d, d);          // current subalgebra
  Matrix r = orth_span(rad_coords, tol);      // its radical

  while (r.cols() > 0) {
    const Matrix rp = coord_derived_span(basis, r, tol);   // [r, r]
    const Matrix v = orth_complement_within(h, r, tol);    // candidate complement
    const Matrix a = orth_complement_within(r, rp, tol);   // abelian layer r / [r,r]
    const Eigen::Index s = v.cols();
    const Eigen::Index na = a.cols();

    if (na == 0) throw LiftingSingular("derived series of the radical stalled");

    // Correction x_k in span(a) per complement direction v_k, solving
    //   beta_ij + N_i xi_j - N_j xi_i - sum_k alpha_ijk xi_k = 0  (mod [r,r])
    // which kills the radical component of the corrected brackets.
    std::vector<Matrix> n_ops(s);
    for (Eigen::Index i = 0; i < s; ++i)
      n_ops[i] = a.transpose() * coord_ad(basis, v.col(i)) * a;

    const Eigen::Index pairs = s * (s - 1) / 2;
    Matrix lhs = Matrix::Zero(pairs * na, s * na);
    Vector rhs = Vector::Zero(pairs * na);
    Eigen::Index row = 0;
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const Vector w = coord_bracket(basis, v.col(i), v.col(j));
        const Vector alpha = v.transpose() * w;
        const Vector beta = a.transpose() * w;
        rhs.segment(row, na) = -beta;
        lhs.block(row, j * na, na, na) += n_ops[i];
        lhs.block(row, i * na, na, na) -= n_ops[j];
        for (Eigen::Index k = 0; k < s; ++k)
          lhs.block(row, k * na, na, na) -= alpha(k) * Matrix::Identity(na, na);
        row += na;
      }
    }

    Matrix u = v;
    if (pairs > 0) {
      // Minimum-norm least-squares solution; the system is consistent in
      // exact arithmetic, so a large residual flags numerical rank loss.
      Eigen::JacobiSVD<Matrix> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(tol);
      const Vector xi = svd.solve(rhs);
      const double resid = (lhs * xi - rhs).norm();
      if (resid > 1e3 * tol * std::max(1.0, rhs.norm()))
        throw LiftingSingular("correction system residual " + std::to_string(resid));
      for (Eigen::Index k = 0; k < s; ++k) u.col(k) = v.col(k) + a * xi.segment(k * na, na);
    }

    Matrix next(d, u.cols() + rp.cols());
    next << u, rp;
    h = orth_span(next, tol);
    r = rp;
  }

  LieBasis levi;
  levi.rank_tolerance = tol;
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    Matrix elem = Matrix::Zero(basis.matrix_dim(), basis.matrix_dim());
    for (int i = 0; i < d; ++i) elem += h(i, c) * basis.elements[i];
    levi.elements.push_back(elem / elem.norm());
  }
  fill_structure_constants(levi);
  return levi;
}

LeviDecomposition split_generators(const GeneratorSet& gens, const LieBasis& rad,
                                   const LieBasis& levi, double tol)
{
  const int n = gens.n;
  const int dm = rad.dim();
  const int dh = levi.dim();

  LeviDecomposition out;
  out.radical = rad;
  out.levi = levi;

  Matrix stack(n * n, dm + dh);
  for (int i = 0; i < dm; ++i) stack.col(i) = vectorize(rad.elements[i]);
  for (int i = 0; i < dh; ++i) stack.col(dm + i) = vectorize(levi.elements[i]);
  Eigen::ColPivHouseholderQR<Matrix> qr;
  if (dm + dh > 0) qr.compute(stack);

  double worst = 0.0;
  for (const Matrix& a : gens.modes) {
    Matrix am = Matrix::Zero(n, n);
    Matrix ah = Matrix::Zero(n, n);
    if (dm + dh > 0) {
      const Vector c = qr.solve(vectorize(a));
      for (int i = 0; i < dm; ++i) am += c(i) * rad.elements[i];
      for (int i = 0; i < dh; ++i) ah += c(dm + i) * levi.elements[i];
    }
    worst = std::max(worst, (a - am - ah).norm());
    out.radical_parts.push_back(std::move(am));
    out.levi_parts.push_back(std::move(ah));
  }
  out.reconstruction_error = worst;

  double scale = 0.0;
  for (const Matrix& a : gens.modes) scale = std::max(scale, a.norm());
  if (worst > tol * std::max(scale, 1.0))
    throw ResidualTooLarge("generator split residual " + std::to_string(worst) +
                           " exceeds " + std::to_string(tol));
  return out;
}

LeviDecomposition levi_decompose(const GeneratorSet& gens, double rank_tol, double split_tol)
{
  const LieBasis g = closure(gens, rank_tol);
  LieBasis rad;
  LieBasis levi;
  if (g.dim() > 0) {
    rad = radical(g, rank_tol);
    levi = levi_complement(g, rad, rank_tol);
  }
  rad.rank_tolerance = rank_tol;
  levi.rank_tolerance = rank_tol;
  LeviDecomposition out = split_generators(gens, rad, levi, split_tol);
  out.algebra = g;
  return out;
}

double jacobi_residual(const LieBasis& basis)
{
  const int d = basis.dim();
  std::vector<Matrix> ads(d);
  for (int i = 0; i < d; ++i) ads[i] = basis.ad(i);
  double worst = 0.0;
  // [b_i,[b_j,b_k]] + [b_j,[b_k,b_i]] + [b_k,[b_i,b_j]] = 0 in coordinates
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j)
      for (int k = 0; k < j; ++k) {
        const Vector total = ads[i] * (ads[j] * Vector::Unit(d, k)) +
                             ads[j] * (ads[k] * Vector::Unit(d, i)) +
                             ads[k] * (ads[i] * Vector::Unit(d, j));
        worst = std::max(worst, total.norm());
      }
  return worst;
}

double ideal_residual(const LieBasis& algebra, const LieBasis& ideal)
{
  if (ideal.dim() == 0) return 0.0;
  double worst = 0.0;
  for (const Matrix& g : algebra.elements) {
    for (const Matrix& m : ideal.elements) {
      double res = 0.0;
      ideal.coordinates(bracket(g, m), &res);
      worst = std::max(worst, res);
    }
  }
  return worst;
}

} // namespace liestab
