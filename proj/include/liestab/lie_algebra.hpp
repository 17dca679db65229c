#ifndef LIESTAB_LIE_ALGEBRA_HPP
#define LIESTAB_LIE_ALGEBRA_HPP

#include <liestab/errors.hpp>
#include <liestab/types.hpp>

#include <vector>

namespace liestab {

/// The mode matrices of a switched linear system, indexed p = 1..N.
struct GeneratorSet {
  int n = 0;                  ///< state dimension
  std::vector<Matrix> modes;  ///< n x n real matrices

  GeneratorSet() = default;
  explicit GeneratorSet(std::vector<Matrix> mats);

  int mode_count() const { return static_cast<int>(modes.size()); }

  /// Mode matrix for 1-based index p.
  const Matrix& mode(int p) const;
};

/// A basis of a matrix Lie algebra together with its structure constants.
///
/// Structure constants are stored as one d x d matrix per output index:
/// [b_i, b_j] = sum_k structure_constants[k](i, j) * b_k.
struct LieBasis {
  std::vector<Matrix> elements;
  std::vector<Matrix> structure_constants;
  double rank_tolerance = 1e-9;
  double structure_residual = 0.0;  ///< worst least-squares residual of any bracket

  int dim() const { return static_cast<int>(elements.size()); }
  int matrix_dim() const { return elements.empty() ? 0 : static_cast<int>(elements[0].rows()); }

  /// n^2 x d matrix whose columns are the vectorized basis elements.
  Matrix stacked() const;

  /// Coordinates of M in this basis (least squares); residual optionally reported.
  Vector coordinates(const Matrix& m, double* residual = nullptr) const;

  /// ad b_i as a d x d matrix acting on coordinates.
  Matrix ad(int i) const;
};

/// Levi-Malcev decomposition of the generated algebra, with per-mode splits.
struct LeviDecomposition {
  LieBasis algebra;   ///< the full generated algebra
  LieBasis radical;   ///< maximal solvable ideal
  LieBasis levi;      ///< semi-simple complement
  std::vector<Matrix> radical_parts;  ///< A_p projected onto the radical
  std::vector<Matrix> levi_parts;     ///< A_p projected onto the complement
  double reconstruction_error = 0.0;  ///< max_p |A_p - A_p_radical - A_p_levi|_F
};

/// Commutator X*Y - Y*X.
template <typename DerivedA, typename DerivedB>
Matrix bracket(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y)
{
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows())
    throw InputError("bracket requires square matrices of equal dimension");
  if (!x.allFinite() || !y.allFinite())
    throw InputError("bracket requires finite entries");
  return x.derived() * y.derived() - y.derived() * x.derived();
}

/// Basis of the smallest bracket-closed subspace containing the generators.
///
/// Breadth-first: new basis elements are bracketed against the whole current
/// basis until no bracket increases the numerical rank.  Accepted elements are
/// normalized to unit Frobenius norm; the dimension is capped at n^2.
/// Rank decisions use threshold tol * sigma_max(stacked basis).
LieBasis closure(const GeneratorSet& gens, double tol = 1e-9);

/// Builds a LieBasis from explicitly given, linearly independent matrices.
/// Throws ResidualTooLarge if the span is not bracket-closed at tolerance.
LieBasis make_lie_basis(const std::vector<Matrix>& mats, double tol = 1e-9);

/// Killing form K_ij = trace(ad b_i . ad b_j) in the structure-constant
/// representation.
Matrix killing_form(const LieBasis& basis);

/// Basis of the span of all pairwise brackets.
LieBasis derived_subalgebra(const LieBasis& basis, double tol);

/// True iff the derived series reaches dimension zero.
bool is_solvable(const LieBasis& basis, double tol);

/// Maximal solvable ideal, computed as the Killing-orthogonal complement of
/// the derived subalgebra.  Throws SolvabilityCheckFailed if the computed
/// subspace is not solvable at the given tolerance.
LieBasis radical(const LieBasis& basis, double tol);

/// Semi-simple complement of the radical, by iterative lifting along the
/// derived series of the radical.  Throws LiftingSingular if a correction
/// system is rank-deficient beyond tolerance.
LieBasis levi_complement(const LieBasis& basis, const LieBasis& rad, double tol);

/// Expresses each generator in the concatenated (radical, levi) basis.
/// Throws ResidualTooLarge if any reconstruction residual exceeds tol.
LeviDecomposition split_generators(const GeneratorSet& gens, const LieBasis& rad,
                                   const LieBasis& levi, double tol);

/// Full pipeline: closure, radical, Levi complement, generator splits.
LeviDecomposition levi_decompose(const GeneratorSet& gens, double rank_tol = 1e-9,
                                 double split_tol = 1e-9);

/// Max norm of the Jacobi identity residual over all basis triples,
/// evaluated on the structure constants.
double jacobi_residual(const LieBasis& basis);

/// Max residual of projecting [g_i, m_j] onto the span of `ideal`,
/// over all pairs; zero for an exact ideal.
double ideal_residual(const LieBasis& algebra, const LieBasis& ideal);

} // namespace liestab

#endif
