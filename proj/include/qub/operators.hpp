// Finite-dimensional complex operator algebra: validated operator types,
// spectral decomposition, tensor products, partial trace and channel action.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qub {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermitian = 1e-9;        // max-abs asymmetry
inline constexpr double trace_one = 1e-9;
inline constexpr double density_eig = 1e-9;      // allowed eigenvalue negativity
inline constexpr double measurement_eig = 1e-9;  // allowed [0,1] overshoot
inline constexpr double idempotent = 1e-8;
inline constexpr double kraus_complete = 1e-8;
inline constexpr double reconstruction = 1e-8;
inline constexpr double unit_norm = 1e-9;
inline constexpr double eig_zero = 1e-12;        // spectrum support cutoff
inline constexpr double dilate_spectrum = 1e-6;  // admissible drift before clipping
inline constexpr double bound_slack = 1e-8;      // slack for inequality checks
}  // namespace tol

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// d x d complex matrix validated to be Hermitian (max-abs tolerance 1e-9).
/// The stored matrix is symmetrized so downstream eigensolvers see an exactly
/// self-adjoint operand.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw std::invalid_argument("HermitianOperator: matrix must be square and non-empty");
    }
    const double asym = max_abs(m - m.adjoint());
    if (asym > tol::hermitian) {
      throw std::invalid_argument("HermitianOperator: not Hermitian, max asymmetry " +
                                  std::to_string(asym));
    }
    m_ = 0.5 * (m + m.adjoint().eval());
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  static HermitianOperator identity(int d) {
    return HermitianOperator(Matrix::Identity(d, d));
  }
  static HermitianOperator zero(int d) {
    return HermitianOperator(Matrix::Zero(d, d));
  }

 private:
  Matrix m_;
};

/// Spectral decomposition into rank-1 pieces, eigenvalues sorted descending.
/// Degenerate eigenvalues are kept split; sums over rank-1 pairs are invariant
/// under the split.
struct SpectralDecomposition {
  RealVector eigenvalues;  // descending
  Matrix eigenvectors;     // column k pairs with eigenvalues[k]

  int dim() const { return static_cast<int>(eigenvectors.rows()); }

  Matrix projector(int k) const {
    return eigenvectors.col(k) * eigenvectors.col(k).adjoint();
  }

  Matrix reconstruct() const {
    Matrix out = Matrix::Zero(dim(), dim());
    for (int k = 0; k < dim(); ++k) out += eigenvalues[k] * projector(k);
    return out;
  }
};

inline SpectralDecomposition spectral_decompose(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("spectral_decompose: eigensolver failed");
  }
  const int d = op.dim();
  SpectralDecomposition out;
  out.eigenvalues = RealVector(d);
  out.eigenvectors = Matrix(d, d);
  for (int k = 0; k < d; ++k) {  // Eigen returns ascending order
    out.eigenvalues[k] = solver.eigenvalues()[d - 1 - k];
    out.eigenvectors.col(k) = solver.eigenvectors().col(d - 1 - k);
  }
  const double err = max_abs(out.reconstruct() - op.matrix());
  if (err > tol::reconstruction) {
    throw std::runtime_error("spectral_decompose: reconstruction error " + std::to_string(err));
  }
  return out;
}

/// Rebuild a Hermitian matrix with a scalar function applied to its spectrum.
template <typename Fn>
Matrix apply_spectral_function(const HermitianOperator& op, Fn&& fn) {
  const SpectralDecomposition sd = spectral_decompose(op);
  Matrix out = Matrix::Zero(op.dim(), op.dim());
  for (int k = 0; k < op.dim(); ++k) out += fn(sd.eigenvalues[k]) * sd.projector(k);
  return out;
}

/// Positive semi-definite unit-trace operator. Eigenvalues in [-1e-9, 0) are
/// clipped to zero and the result is renormalized to unit trace; anything more
/// negative is rejected.
class DensityOperator {
 public:
  explicit DensityOperator(HermitianOperator base) : base_(std::move(base)) {
    const double tr = base_.matrix().trace().real();
    if (std::abs(tr - 1.0) > tol::trace_one) {
      throw std::invalid_argument("DensityOperator: trace " + std::to_string(tr) + " != 1");
    }
    SpectralDecomposition sd = spectral_decompose(base_);
    const double min_eig = sd.eigenvalues.minCoeff();
    if (min_eig < -tol::density_eig) {
      throw std::invalid_argument("DensityOperator: eigenvalue " + std::to_string(min_eig) +
                                  " below -1e-9");
    }
    if (min_eig < 0.0) {
      Matrix m = Matrix::Zero(base_.dim(), base_.dim());
      for (int k = 0; k < base_.dim(); ++k) {
        m += std::max(sd.eigenvalues[k], 0.0) * sd.projector(k);
      }
      base_ = HermitianOperator(m / m.trace().real());
    } else {
      base_ = HermitianOperator(base_.matrix() / tr);
    }
  }
  explicit DensityOperator(Matrix m) : DensityOperator(HermitianOperator(std::move(m))) {}

  int dim() const { return base_.dim(); }
  const Matrix& matrix() const { return base_.matrix(); }
  const HermitianOperator& base() const { return base_; }

  static DensityOperator maximally_mixed(int d) {
    return DensityOperator(Matrix(Matrix::Identity(d, d) / static_cast<double>(d)));
  }

 private:
  HermitianOperator base_;
};

/// Operator with spectrum in [0, 1] up to 1e-9.
class MeasurementOperator {
 public:
  explicit MeasurementOperator(HermitianOperator base) : base_(std::move(base)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(base_.matrix());
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < -tol::measurement_eig || hi > 1.0 + tol::measurement_eig) {
      throw std::invalid_argument("MeasurementOperator: spectrum [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "] outside [0, 1]");
    }
  }
  explicit MeasurementOperator(Matrix m) : MeasurementOperator(HermitianOperator(std::move(m))) {}

  int dim() const { return base_.dim(); }
  const Matrix& matrix() const { return base_.matrix(); }
  const HermitianOperator& base() const { return base_; }

 private:
  HermitianOperator base_;
};

/// Idempotent measurement operator. rank counts eigenvalues >= 1/2.
class Projector {
 public:
  explicit Projector(MeasurementOperator base) : base_(std::move(base)), rank_(0) {
    const Matrix& p = base_.matrix();
    const double idem = max_abs(p * p - p);
    if (idem > tol::idempotent) {
      throw std::invalid_argument("Projector: ||P^2 - P||_max = " + std::to_string(idem));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(p);
    for (int k = 0; k < base_.dim(); ++k) {
      if (solver.eigenvalues()[k] >= 0.5) ++rank_;
    }
  }
  explicit Projector(Matrix m) : Projector(MeasurementOperator(std::move(m))) {}

  int dim() const { return base_.dim(); }
  int rank() const { return rank_; }
  const Matrix& matrix() const { return base_.matrix(); }
  const MeasurementOperator& base() const { return base_; }

  Projector complement() const {
    return Projector(Matrix(Matrix::Identity(dim(), dim()) - matrix()));
  }

  static Projector identity(int d) { return Projector(Matrix(Matrix::Identity(d, d))); }
  static Projector zero(int d) { return Projector(Matrix(Matrix::Zero(d, d))); }

 private:
  MeasurementOperator base_;
  int rank_;
};

/// Unit vector (tolerance 1e-9). An unnormalized variant is allowed explicitly
/// for homogeneous-scaling checks.
class PureState {
 public:
  explicit PureState(Vector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() < 1) throw std::invalid_argument("PureState: empty vector");
    const double norm = amps_.norm();
    if (std::abs(norm - 1.0) > tol::unit_norm) {
      throw std::invalid_argument("PureState: norm " + std::to_string(norm) + " != 1");
    }
  }

  static PureState unnormalized(Vector amplitudes) {
    PureState s(Vector::Unit(amplitudes.size(), 0));
    s.amps_ = std::move(amplitudes);
    return s;
  }

  static PureState basis_state(int dim, int k) { return PureState(Vector::Unit(dim, k)); }

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }

  Matrix projector() const { return amps_ * amps_.adjoint(); }
  DensityOperator density() const {
    return DensityOperator(Matrix(projector() / amps_.squaredNorm()));
  }

 private:
  Vector amps_;
};

/// Completely positive trace-preserving map given by Kraus operators.
class QuantumChannel {
 public:
  QuantumChannel(int dim_in, int dim_out, std::vector<Matrix> kraus)
      : dim_in_(dim_in), dim_out_(dim_out), kraus_(std::move(kraus)) {
    if (dim_in_ < 1 || dim_out_ < 1 || kraus_.empty()) {
      throw std::invalid_argument("QuantumChannel: need positive dims and >= 1 Kraus operator");
    }
    Matrix sum = Matrix::Zero(dim_in_, dim_in_);
    for (const Matrix& k : kraus_) {
      if (k.rows() != dim_out_ || k.cols() != dim_in_) {
        throw std::invalid_argument("QuantumChannel: Kraus operator shape mismatch");
      }
      sum += k.adjoint() * k;
    }
    const double err = max_abs(sum - Matrix::Identity(dim_in_, dim_in_));
    if (err > tol::kraus_complete) {
      throw std::invalid_argument("QuantumChannel: sum K^dag K - I deviation " +
                                  std::to_string(err));
    }
  }

  int dim_in() const { return dim_in_; }
  int dim_out() const { return dim_out_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  Matrix apply(const Matrix& rho) const {
    Matrix out = Matrix::Zero(dim_out_, dim_out_);
    for (const Matrix& k : kraus_) out += k * rho * k.adjoint();
    return out;
  }

  static QuantumChannel identity(int d) {
    return QuantumChannel(d, d, {Matrix::Identity(d, d)});
  }

  /// Kraus family {|i><j| / sqrt(d)}: maps every input to I/d.
  static QuantumChannel completely_depolarizing(int d) {
    std::vector<Matrix> ks;
    ks.reserve(static_cast<size_t>(d) * d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        Matrix k = Matrix::Zero(d, d);
        k(i, j) = s;
        ks.push_back(k);
      }
    }
    return QuantumChannel(d, d, std::move(ks));
  }

 private:
  int dim_in_;
  int dim_out_;
  std::vector<Matrix> kraus_;
};

// ---------------------------------------------------------------------------
// Tensor-product plumbing
// ---------------------------------------------------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kron(a.matrix(), b.matrix()));
}

namespace detail {

inline long long check_dims(const Matrix& m, const std::vector<int>& dims) {
  long long total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("subsystem dims must be positive");
    total *= d;
  }
  if (total != m.rows() || m.rows() != m.cols()) {
    throw std::invalid_argument("operator dimension does not match product of subsystem dims");
  }
  return total;
}

// Row-major strides: index = sum_k digit_k * stride_k.
inline std::vector<long long> strides(const std::vector<int>& dims) {
  std::vector<long long> s(dims.size());
  long long acc = 1;
  for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
    s[static_cast<size_t>(k)] = acc;
    acc *= dims[static_cast<size_t>(k)];
  }
  return s;
}

}  // namespace detail

/// Partial trace keeping the subsystems listed in `keep` (strictly increasing,
/// order of kept factors preserved).
inline Matrix partial_trace(const Matrix& m, const std::vector<int>& dims,
                            const std::vector<int>& keep) {
  detail::check_dims(m, dims);
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(static_cast<size_t>(n), false);
  for (size_t i = 0; i < keep.size(); ++i) {
    const int k = keep[i];
    if (k < 0 || k >= n || kept[static_cast<size_t>(k)] ||
        (i > 0 && keep[i] <= keep[i - 1])) {
      throw std::invalid_argument("partial_trace: keep must be a strictly increasing subset");
    }
    kept[static_cast<size_t>(k)] = true;
  }
  const std::vector<long long> stride = detail::strides(dims);
  long long dim_keep = 1, dim_tr = 1;
  std::vector<int> keep_sites, tr_sites;
  for (int k = 0; k < n; ++k) {
    if (kept[static_cast<size_t>(k)]) {
      dim_keep *= dims[static_cast<size_t>(k)];
      keep_sites.push_back(k);
    } else {
      dim_tr *= dims[static_cast<size_t>(k)];
      tr_sites.push_back(k);
    }
  }
  // Offset of each kept (resp. traced) multi-index inside the full index.
  auto offsets = [&](const std::vector<int>& sites, long long count) {
    std::vector<long long> out(static_cast<size_t>(count));
    for (long long idx = 0; idx < count; ++idx) {
      long long rem = idx, off = 0;
      for (int s = static_cast<int>(sites.size()) - 1; s >= 0; --s) {
        const int site = sites[static_cast<size_t>(s)];
        const int d = dims[static_cast<size_t>(site)];
        off += (rem % d) * stride[static_cast<size_t>(site)];
        rem /= d;
      }
      out[static_cast<size_t>(idx)] = off;
    }
    return out;
  };
  const std::vector<long long> keep_off = offsets(keep_sites, dim_keep);
  const std::vector<long long> tr_off = offsets(tr_sites, dim_tr);

  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  for (long long r = 0; r < dim_keep; ++r) {
    for (long long c = 0; c < dim_keep; ++c) {
      Complex acc(0.0, 0.0);
      for (long long t = 0; t < dim_tr; ++t) {
        acc += m(keep_off[static_cast<size_t>(r)] + tr_off[static_cast<size_t>(t)],
                 keep_off[static_cast<size_t>(c)] + tr_off[static_cast<size_t>(t)]);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

inline HermitianOperator partial_trace(const HermitianOperator& op, const std::vector<int>& dims,
                                       const std::vector<int>& keep) {
  return HermitianOperator(partial_trace(op.matrix(), dims, keep));
}

/// Reorder tensor factors: output factor i is input factor perm[i].
inline Matrix permute_subsystems(const Matrix& m, const std::vector<int>& dims,
                                 const std::vector<int>& perm) {
  const long long total = detail::check_dims(m, dims);
  const int n = static_cast<int>(dims.size());
  if (static_cast<int>(perm.size()) != n) {
    throw std::invalid_argument("permute_subsystems: permutation length mismatch");
  }
  std::vector<bool> seen(static_cast<size_t>(n), false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<size_t>(p)]) {
      throw std::invalid_argument("permute_subsystems: not a permutation");
    }
    seen[static_cast<size_t>(p)] = true;
  }
  const std::vector<long long> stride_in = detail::strides(dims);
  std::vector<int> dims_out(perm.size());
  for (int i = 0; i < n; ++i) dims_out[static_cast<size_t>(i)] = dims[static_cast<size_t>(perm[i])];
  const std::vector<long long> stride_out = detail::strides(dims_out);

  // map[idx_in] = idx_out
  std::vector<long long> map(static_cast<size_t>(total));
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx, out_idx = 0;
    std::vector<long long> digit(static_cast<size_t>(n));
    for (int k = n - 1; k >= 0; --k) {
      digit[static_cast<size_t>(k)] = rem % dims[static_cast<size_t>(k)];
      rem /= dims[static_cast<size_t>(k)];
    }
    for (int i = 0; i < n; ++i) {
      out_idx += digit[static_cast<size_t>(perm[i])] * stride_out[static_cast<size_t>(i)];
    }
    map[static_cast<size_t>(idx)] = out_idx;
  }
  Matrix out(total, total);
  for (long long r = 0; r < total; ++r) {
    for (long long c = 0; c < total; ++c) {
      out(map[static_cast<size_t>(r)], map[static_cast<size_t>(c)]) = m(r, c);
    }
  }
  return out;
}

/// Embed an operator acting on the listed sites (in the given order) into the
/// full product space, acting as identity elsewhere.
inline Matrix embed_operator(const Matrix& op, const std::vector<int>& dims,
                             const std::vector<int>& sites) {
  const int n = static_cast<int>(dims.size());
  long long op_dim = 1;
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (int s : sites) {
    if (s < 0 || s >= n || used[static_cast<size_t>(s)]) {
      throw std::invalid_argument("embed_operator: bad site list");
    }
    used[static_cast<size_t>(s)] = true;
    op_dim *= dims[static_cast<size_t>(s)];
  }
  if (op.rows() != op_dim || op.cols() != op_dim) {
    throw std::invalid_argument("embed_operator: operator dim does not match sites");
  }
  // Reordered space: sites first, the rest after; then permute back.
  std::vector<int> order(sites);
  long long rest_dim = 1;
  for (int k = 0; k < n; ++k) {
    if (!used[static_cast<size_t>(k)]) {
      order.push_back(k);
      rest_dim *= dims[static_cast<size_t>(k)];
    }
  }
  Matrix lifted = kron(op, Matrix::Identity(rest_dim, rest_dim));
  std::vector<int> dims_reordered(order.size());
  std::vector<int> inverse(order.size());
  for (int j = 0; j < n; ++j) {
    dims_reordered[static_cast<size_t>(j)] = dims[static_cast<size_t>(order[j])];
  }
  for (int j = 0; j < n; ++j) {
    inverse[static_cast<size_t>(order[j])] = j;
  }
  return permute_subsystems(lifted, dims_reordered, inverse);
}

/// Apply a channel to one subsystem of a product-space state.
inline DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& state,
                                     int subsystem, const std::vector<int>& dims) {
  detail::check_dims(state.matrix(), dims);
  if (subsystem < 0 || subsystem >= static_cast<int>(dims.size())) {
    throw std::invalid_argument("apply_channel: subsystem index out of range");
  }
  if (dims[static_cast<size_t>(subsystem)] != ch.dim_in()) {
    throw std::invalid_argument("apply_channel: channel input dim does not match subsystem");
  }
  long long pre = 1, post = 1;
  for (int k = 0; k < subsystem; ++k) pre *= dims[static_cast<size_t>(k)];
  for (int k = subsystem + 1; k < static_cast<int>(dims.size()); ++k) {
    post *= dims[static_cast<size_t>(k)];
  }
  const Matrix ipre = Matrix::Identity(pre, pre);
  const Matrix ipost = Matrix::Identity(post, post);
  long long out_dim = pre * ch.dim_out() * post;
  Matrix out = Matrix::Zero(out_dim, out_dim);
  for (const Matrix& k : ch.kraus()) {
    const Matrix lifted = kron(kron(ipre, k), ipost);
    out += lifted * state.matrix() * lifted.adjoint();
  }
  return DensityOperator(out);
}

inline DensityOperator apply_channel(const QuantumChannel& ch, const DensityOperator& state) {
  return apply_channel(ch, state, 0, {state.dim()});
}

}  // namespace qub
