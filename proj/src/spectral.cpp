#include "chi2geo/spectral.hpp"

#include "chi2geo/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace chi2geo {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorCode::NotIdempotent: return "NotIdempotent";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
  }
  return "Unknown";
}

double max_asymmetry(const Eigen::MatrixXd& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
    }
  }
  return worst;
}

SymmetricOperator::SymmetricOperator(const Eigen::MatrixXd& entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    std::ostringstream msg;
    msg << "operator must be square with dim >= 1, got " << entries.rows() << "x"
        << entries.cols();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (!entries.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "operator has non-finite entries");
  }
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = max_asymmetry(entries);
  if (asym > kSymmetryTolerance * scale) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "operator is not symmetric: max |m_ij - m_ji| = " << asym;
    throw Error(ErrorCode::NonSymmetric, msg.str());
  }
  m_ = 0.5 * (entries + entries.transpose());
}

SymmetricOperator SymmetricOperator::identity(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymmetricOperator(Eigen::MatrixXd::Identity(k, k));
}

SymmetricOperator SymmetricOperator::zero(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  return SymmetricOperator(Eigen::MatrixXd::Zero(k, k));
}

SymmetricOperator SymmetricOperator::diagonal(const Eigen::VectorXd& diag) {
  return SymmetricOperator(Eigen::MatrixXd(diag.asDiagonal()));
}

double SpectralDecomposition::max_abs_eigenvalue() const {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

Subspace::Subspace(std::size_t ambient_dim, Eigen::MatrixXd basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
  if (basis_.cols() == 0) {
    basis_.resize(static_cast<Eigen::Index>(ambient_dim_), 0);
  }
  if (static_cast<std::size_t>(basis_.rows()) != ambient_dim_ ||
      static_cast<std::size_t>(basis_.cols()) > ambient_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "subspace basis has wrong shape");
  }
  const Eigen::Index k = basis_.cols();
  if (k == 0) {
    return;
  }
  const Eigen::MatrixXd gram = basis_.transpose() * basis_;
  if ((gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::InvalidArgument, "subspace basis is not orthonormal");
  }
}

Eigen::VectorXd Subspace::residual(const Eigen::VectorXd& v) const {
  if (basis_.cols() == 0) {
    return v;
  }
  return v - basis_ * (basis_.transpose() * v);
}

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j) {
        sum += a(i, j) * a(i, j);
      }
    }
  }
  return std::sqrt(sum);
}

// One Jacobi rotation annihilating a(p, q); v accumulates the rotations.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) {
    t = -t;
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == p || k == q) {
      continue;
    }
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = a(p, k) = c * akp - s * akq;
    a(k, q) = a(q, k) = s * akp + c * akq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SpectralDecomposition spectral_decompose(const SymmetricOperator& m) {
  const Eigen::Index n = static_cast<Eigen::Index>(m.dim());
  Eigen::MatrixXd a = m.matrix();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  const double target = 1e-14 * a.norm();
  const long max_sweeps = 100L * n * n;
  long sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (++sweep > max_sweeps) {
      throw Error(ErrorCode::ConvergenceFailure,
                  "Jacobi eigen-solver exceeded " + std::to_string(max_sweeps) + " sweeps");
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) {
          continue;
        }
        // Entries already negligible against both diagonals are dropped.
        const double g = 100.0 * std::abs(apq);
        if (sweep > 4 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        rotate(a, v, p, q);
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });

  SpectralDecomposition dec;
  dec.eigenvalues.resize(n);
  dec.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    dec.eigenvalues(k) = a(src, src);
    Eigen::VectorXd col = v.col(src);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > 1e-12) {
        if (col(i) < 0.0) {
          col = -col;
        }
        break;
      }
    }
    dec.eigenvectors.col(k) = col;
  }
  return dec;
}

SymmetricOperator projection_onto(const Subspace& w) {
  const auto n = static_cast<Eigen::Index>(w.ambient_dim());
  if (w.dim() == 0) {
    return SymmetricOperator(Eigen::MatrixXd::Zero(n, n));
  }
  Eigen::MatrixXd p = w.basis() * w.basis().transpose();
  return SymmetricOperator(0.5 * (p + p.transpose()));
}

double rank_threshold(const SpectralDecomposition& dec, double tol) {
  if (!(tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }
  return tol * std::max(1.0, dec.max_abs_eigenvalue());
}

namespace {

Subspace select_columns(const SpectralDecomposition& dec, double tol, bool image) {
  const double threshold = rank_threshold(dec, tol);
  const Eigen::Index n = static_cast<Eigen::Index>(dec.dim());
  std::vector<Eigen::Index> picked;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((std::abs(dec.eigenvalues(i)) > threshold) == image) {
      picked.push_back(i);
    }
  }
  Eigen::MatrixXd basis(n, static_cast<Eigen::Index>(picked.size()));
  for (std::size_t k = 0; k < picked.size(); ++k) {
    basis.col(static_cast<Eigen::Index>(k)) = dec.eigenvectors.col(picked[k]);
  }
  return Subspace(static_cast<std::size_t>(n), std::move(basis));
}

}  // namespace

Subspace image_subspace(const SpectralDecomposition& dec, double tol) {
  return select_columns(dec, tol, true);
}

Subspace kernel_subspace(const SpectralDecomposition& dec, double tol) {
  return select_columns(dec, tol, false);
}

Subspace image_subspace(const SymmetricOperator& m, double tol) {
  return image_subspace(spectral_decompose(m), tol);
}

Subspace kernel_subspace(const SymmetricOperator& m, double tol) {
  return kernel_subspace(spectral_decompose(m), tol);
}

}  // namespace chi2geo
