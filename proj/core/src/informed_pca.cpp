#include "mahal/informed_pca.hpp"

#include <cmath>

namespace mahal {
namespace {

constexpr int kMaxHalvings = 60;
constexpr double kCollapseNorm = 1e-12;

double reduced_objective(const Matrix& v, const Matrix& sh, double offset) {
  const Matrix m = Matrix::Identity(sh.rows(), sh.cols()) - v * v.transpose();
  const Matrix ms = m * sh;
  return offset + ms.cwiseProduct(m).sum();
}

Matrix reduced_gradient(const Matrix& v, const Matrix& sh) {
  const Matrix m = Matrix::Identity(sh.rows(), sh.cols()) - v * v.transpose();
  return -2.0 * (m * sh + sh * m) * v;
}

void require_finite(const Matrix& x, double r) {
  detail::require(x.allFinite() && std::isfinite(r), ErrorCode::divergence,
                  "constrained_pca: iterate became non-finite; use a smaller fixed step");
}

void finalize_columns(Matrix& u, bool orthonormalize, Index& collapsed) {
  collapsed = 0;
  for (Index j = 0; j < u.cols(); ++j) {
    if (orthonormalize) {
      for (Index i = 0; i < j; ++i) u.col(j) -= u.col(i).dot(u.col(j)) * u.col(i);
    }
    const double norm = u.col(j).norm();
    if (norm <= kCollapseNorm) {
      u.col(j).setZero();
      ++collapsed;
    } else {
      u.col(j) /= norm;
    }
  }
}

}  // namespace

PrincipalBasis pca_top_k(const Covariance& sigma, Index k, const std::string& context) {
  detail::require(k >= 1 && k <= sigma.dim(), ErrorCode::invalid_argument,
                  "pca_top_k: K must be in [1, m]");
  SymmetricEVD evd = top_eigenpairs(sigma, k);
  const double floor = kRelativeEigenFloor * std::max(evd.eigenvalues(0), 0.0);
  Index attainable = 0;
  while (attainable < k && evd.eigenvalues(attainable) > floor && evd.eigenvalues(attainable) > 0.0)
    ++attainable;
  if (attainable < k) throw RankDeficiencyError(k, attainable, context.empty() ? "pca_top_k" : context);
  PrincipalBasis out;
  out.directions = std::move(evd.eigenvectors);
  out.eigenvalues = std::move(evd.eigenvalues);
  return out;
}

Matrix project_onto_cluster_subspace(const Matrix& u, const IndicatorMatrix& h) {
  return h.project(u);
}

double reconstruction_error(const Matrix& u, const Covariance& sigma) {
  const Matrix b = sigma.apply(u);
  const Matrix utb = u.transpose() * b;
  const Matrix utu = u.transpose() * u;
  const double r = sigma.trace() - 2.0 * utb.trace() + utu.cwiseProduct(utb.transpose()).sum();
  return std::max(r, 0.0);
}

Matrix pca_gradient(const Matrix& u, const Covariance& sigma) {
  const Matrix b = sigma.apply(u);
  return -2.0 * (2.0 * b - u * (u.transpose() * b) - b * (u.transpose() * u));
}

Matrix compress_covariance(const Covariance& sigma, const IndicatorMatrix& h) {
  detail::require(h.rows() == sigma.dim(), ErrorCode::dimension_mismatch,
                  "compress_covariance: indicator rows differ from covariance size");
  if (sigma.is_factored()) {
    const Matrix g = h.compress(sigma.storage());
    return g * g.transpose();
  }
  const Matrix a = h.compress(sigma.storage());
  const Matrix c = h.compress(a.transpose());
  return 0.5 * (c + c.transpose());
}

PrincipalBasis constrained_pca(const Covariance& sigma, const IndicatorMatrix& h, Index k,
                               const PrincipalBasis& init, const ConstrainedPcaOptions& options) {
  const Index m = sigma.dim();
  detail::require(h.rows() == m, ErrorCode::dimension_mismatch,
                  "constrained_pca: indicator rows differ from covariance size");
  detail::require(init.directions.rows() == m, ErrorCode::dimension_mismatch,
                  "constrained_pca: init directions must have m rows");
  detail::require(k >= 1 && k <= init.directions.cols() && k <= init.eigenvalues.size(),
                  ErrorCode::invalid_argument, "constrained_pca: K exceeds the init basis");
  detail::require(options.max_iters >= 0, ErrorCode::invalid_argument,
                  "constrained_pca: max_iters must be >= 0");
  detail::require(options.step_rule != StepRule::fixed || options.fixed_step > 0.0,
                  ErrorCode::invalid_argument, "constrained_pca: fixed step must be > 0");
  const double tol = options.grad_tol.value_or(1e-6 * sigma.trace() / static_cast<double>(m));
  detail::require(tol > 0.0, ErrorCode::invalid_argument, "constrained_pca: grad_tol must be > 0");

  const Matrix u0 = init.directions.leftCols(k);
  PrincipalBasis out;
  out.informed = true;
  out.eigenvalues = init.eigenvalues.head(k);

  // The first gradient is taken at the (generally infeasible) init.
  const Matrix g0 = options.max_iters > 0 ? pca_gradient(u0, sigma) : Matrix();

  Matrix u;
  if (options.route == ConstrainedRoute::reduced) {
    const Matrix sh = compress_covariance(sigma, h);
    const double offset = sigma.trace() - sh.trace();
    Matrix v = h.compress(u0);
    double r = reduced_objective(v, sh, offset);
    if (options.record_trace) out.objective_trace.push_back(r);
    for (int it = 0; it < options.max_iters; ++it) {
      const Matrix g = it == 0 ? h.compress(g0) : reduced_gradient(v, sh);
      out.final_gradient_norm = g.norm();
      require_finite(g, r);
      // Stop tests start at the second iteration.
      if (out.final_gradient_norm < tol && it > 0) break;
      if (options.step_rule == StepRule::fixed) {
        v -= options.fixed_step * g;
        r = reduced_objective(v, sh, offset);
        require_finite(v, r);
      } else if (out.final_gradient_norm >= tol) {
        bool accepted = false;
        double alpha = 1.0;
        for (int s = 0; s < kMaxHalvings && !accepted; ++s, alpha *= 0.5) {
          Matrix cand = v - alpha * g;
          const double rc = reduced_objective(cand, sh, offset);
          if (rc < r) {
            v = std::move(cand);
            r = rc;
            accepted = true;
          }
        }
        if (!accepted && it > 0) break;
      }
      ++out.iterations_run;
      if (options.record_trace) out.objective_trace.push_back(r);
    }
    u = h.expand(v);
  } else {
    u = h.project(u0);
    double r = reconstruction_error(u, sigma);
    if (options.record_trace) out.objective_trace.push_back(r);
    for (int it = 0; it < options.max_iters; ++it) {
      const Matrix pg = h.project(it == 0 ? g0 : pca_gradient(u, sigma));
      out.final_gradient_norm = pg.norm();
      require_finite(pg, r);
      if (out.final_gradient_norm < tol && it > 0) break;
      if (options.step_rule == StepRule::fixed) {
        u -= options.fixed_step * pg;
        r = reconstruction_error(u, sigma);
        require_finite(u, r);
      } else if (out.final_gradient_norm >= tol) {
        bool accepted = false;
        double alpha = 1.0;
        for (int s = 0; s < kMaxHalvings && !accepted; ++s, alpha *= 0.5) {
          Matrix cand = u - alpha * pg;
          const double rc = reconstruction_error(cand, sigma);
          if (rc < r) {
            u = std::move(cand);
            r = rc;
            accepted = true;
          }
        }
        if (!accepted && it > 0) break;
      }
      ++out.iterations_run;
      if (options.record_trace) out.objective_trace.push_back(r);
    }
  }

  finalize_columns(u, options.orthonormalize, out.collapsed_directions);
  out.directions = std::move(u);
  return out;
}

}  // namespace mahal
