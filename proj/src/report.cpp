#include "chi2geo/report.hpp"

#include <cmath>
#include <sstream>

namespace chi2geo {

namespace {

using Json = nlohmann::ordered_json;

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

Json to_json(const ChiSquareVerdict& v) {
  Json j;
  j["is_chi_square"] = v.is_chi_square;
  j["df"] = optional_json(v.df);
  j["ncp"] = optional_json(v.ncp);
  j["ncp_lambda"] = optional_json(v.ncp_lambda());
  j["degenerate"] = v.degenerate;
  j["tol"] = v.tol;
  j["ambient_dim"] = v.ambient_dim;
  j["image_dim"] = v.image_dim;
  j["idempotency_residual"] = v.idempotency_residual;
  j["mean_residual"] = v.mean_residual;
  j["offending_eigenvalues"] = v.offending_eigenvalues;
  j["mean_outside_image"] = v.mean_outside_image;
  j["mean_outside_norm"] = v.mean_outside_norm;
  j["ncp_squared_from_eigenbasis"] = v.ncp_squared_from_eigenbasis;
  j["distance_to_projection"] = v.distance_to_projection;
  j["eigenvalues"] = v.eigenvalues;
  return j;
}

Json to_json(const CumulantEstimate& e) {
  Json j;
  j["count"] = e.count;
  j["values"] = e.values;
  j["standard_errors"] = e.standard_errors;
  return j;
}

Json to_json(const VerifyThresholds& t) {
  Json j;
  j["tol"] = t.tol;
  j["ks_alpha"] = t.ks_alpha;
  j["cumulant_z"] = t.cumulant_z;
  j["subspace_residual"] = t.subspace_residual;
  j["kernel_variance"] = t.kernel_variance;
  return j;
}

Json to_json(const CumulantMismatch& m) {
  Json j;
  j["order"] = m.order == 0 ? Json(nullptr) : Json(m.order);
  j["best_fit_df"] = m.best_fit_df;
  j["best_fit_ncp"] = m.best_fit_ncp;
  j["analytic"] = m.analytic;
  j["best_fit"] = m.best_fit;
  j["sample_z"] = optional_json(m.sample_z);
  return j;
}

Json to_json(const VerificationReport& r) {
  const auto gates = evaluate_gates(r);
  Json j;
  j["verdict"] = to_json(r.verdict);
  j["sample_count"] = r.sample_count;
  j["seed"] = r.seed;
  j["generator_id"] = r.generator_id;
  j["thresholds"] = to_json(r.thresholds);
  j["sample_cumulants"] = to_json(r.sample_cumulants);
  j["analytic_cumulants"] = r.analytic_cumulants;
  // Infinite z-scores (zero standard error, nonzero gap) serialize as null.
  j["cumulant_z"] = r.cumulant_z;
  j["ks_statistic"] = r.ks_statistic;
  j["ks_p_value"] = r.ks_p_value;
  j["ks_reference"] = r.ks_reference_df
                          ? Json{{"df", *r.ks_reference_df}, {"ncp", *r.ks_reference_ncp}}
                          : Json(nullptr);
  j["ks_gated"] = r.ks_gated;
  j["subspace_max_residual"] = r.subspace_max_residual;
  j["kernel_max_variance"] = r.kernel_max_variance;
  j["mean_z_score"] = r.mean_z_score;
  j["mismatch"] = r.mismatch ? to_json(*r.mismatch) : Json(nullptr);
  j["gates"] = Json{{"ks", gates.ks},
                    {"cumulants", gates.cumulants},
                    {"subspace", gates.subspace},
                    {"kernel", gates.kernel}};
  j["passed"] = r.passed;
  return j;
}

std::string render_human(const ChiSquareVerdict& v) {
  std::ostringstream os;
  os << "W = Image(C) has dimension " << v.image_dim << " in R^" << v.ambient_dim << ".\n";
  os << "mu " << (v.mean_outside_image ? "does not lie" : "lies") << " in W";
  if (v.mean_outside_image) {
    os << " (component outside W has norm " << fmt(v.mean_outside_norm) << ")";
  }
  os << ".\n";
  os << "Distance of C from the nearest orthogonal projection: " << fmt(v.distance_to_projection)
     << " (||C^2 - C||_F = " << fmt(v.idempotency_residual)
     << ", ||C mu - mu|| = " << fmt(v.mean_residual) << ").\n";
  if (v.is_chi_square) {
    os << "Verdict: ||X||^2 ~ chi^2(df = " << *v.df << ", nu = " << fmt(*v.ncp)
       << "), conventional noncentrality lambda = nu^2 = " << fmt(*v.ncp_lambda()) << ".\n";
    if (v.degenerate) {
      os << "Degenerate case: ||X||^2 is identically 0.\n";
    }
  } else {
    os << "Verdict: ||X||^2 is not chi-square distributed.\n";
    if (!v.offending_eigenvalues.empty()) {
      os << "Eigenvalues outside {0, 1}:";
      for (double l : v.offending_eigenvalues) {
        os << ' ' << fmt(l);
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string render_human(const VerificationReport& r) {
  std::ostringstream os;
  os << render_human(r.verdict);
  os << "Sampled " << r.sample_count << " draws (seed " << r.seed << ", " << r.generator_id
     << ").\n";
  for (std::size_t j = 0; j < r.analytic_cumulants.size(); ++j) {
    os << "  kappa_" << j + 1 << ": sample " << fmt(r.sample_cumulants.values[j]) << " +- "
       << fmt(r.sample_cumulants.standard_errors[j]) << ", analytic "
       << fmt(r.analytic_cumulants[j]) << ", z = " << fmt(r.cumulant_z[j]) << '\n';
  }
  if (r.ks_reference_df) {
    os << "KS vs chi^2(" << *r.ks_reference_df << ", " << fmt(*r.ks_reference_ncp)
       << "): D = " << fmt(r.ks_statistic) << ", p = " << fmt(r.ks_p_value)
       << (r.ks_gated ? "" : " (not gated)") << '\n';
  }
  if (r.mismatch && r.mismatch->order > 0) {
    os << "Closest chi-square law chi^2(" << r.mismatch->best_fit_df << ", "
       << fmt(r.mismatch->best_fit_ncp) << ") first disagrees at cumulant order "
       << r.mismatch->order << ": analytic " << fmt(r.mismatch->analytic) << " vs "
       << fmt(r.mismatch->best_fit) << ".\n";
  }
  os << "Max residual outside mu + W: " << fmt(r.subspace_max_residual)
     << "; max variance along Ker(C): " << fmt(r.kernel_max_variance) << ".\n";
  os << (r.passed ? "All gates passed.\n" : "A statistical gate FAILED.\n");
  return os.str();
}

}  // namespace chi2geo
