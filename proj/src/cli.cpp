#include "chi2geo/cli.hpp"

#include "chi2geo/characterizer.hpp"
#include "chi2geo/error.hpp"
#include "chi2geo/gaussian.hpp"
#include "chi2geo/moments.hpp"
#include "chi2geo/report.hpp"
#include "chi2geo/verifier.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace chi2geo::cli {

namespace {

using Json = nlohmann::ordered_json;

enum class Format { Json, Human };

struct Common {
  double tol = kDefaultTolerance;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string report;
  Generator generator = kDefaultGenerator;

  [[nodiscard]] Format resolved() const {
    return (report.empty() ? format : report) == "human" ? Format::Human : Format::Json;
  }
};

/// Usage problem detected after argument parsing.
class RangeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

double as_number(const nlohmann::json& v, const char* what) {
  if (!v.is_number()) {
    throw MalformedInput(std::string(what) + " must contain only numbers");
  }
  return v.get<double>();
}

nlohmann::json read_document(const std::string& path, std::istream& in) {
  try {
    if (path == "-") {
      return nlohmann::json::parse(in);
    }
    std::ifstream file(path);
    if (!file) {
      throw MalformedInput("cannot open input file '" + path + "'");
    }
    return nlohmann::json::parse(file);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedInput(std::string("invalid JSON: ") + e.what());
  }
}

GaussianSpec load_spec(const std::string& path, std::istream& in, SpecDocument* doc_out = nullptr) {
  SpecDocument doc = parse_spec_document(read_document(path, in));
  GaussianSpec spec = validate(doc.mu, doc.cov);
  if (doc_out != nullptr) {
    *doc_out = std::move(doc);
  }
  return spec;
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

Json header(const std::string& command, const Common& c, const SpecDocument& doc) {
  Json j;
  j["command"] = command;
  j["label"] = doc.label ? Json(*doc.label) : Json(nullptr);
  j["generator_id"] = std::string(generator_id(c.generator));
  j["tol"] = c.tol;
  return j;
}

void add_common(CLI::App* sub, Common& c, bool with_seed) {
  sub->add_option("--tol", c.tol, "Numerical tolerance")->capture_default_str();
  if (with_seed) {
    sub->add_option("--seed", c.seed, "PRNG seed")->capture_default_str();
  }
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "human"}))
      ->capture_default_str();
  sub->add_option("--report", c.report, "Alias for --format")
      ->check(CLI::IsMember({"json", "human"}));
}

int cmd_characterize(const std::string& input, const Common& c, std::istream& in,
                     std::ostream& out) {
  SpecDocument doc;
  const GaussianSpec spec = load_spec(input, in, &doc);
  const auto verdict = characterize(spec, c.tol);
  if (c.resolved() == Format::Human) {
    out << render_human(verdict);
  } else {
    Json j = header("characterize", c, doc);
    j["clamp_magnitude"] = spec.clamp_magnitude();
    j.update(to_json(verdict));
    emit(out, j);
  }
  return kExitOk;
}

int cmd_cumulants(const std::string& input, int order, const std::string& side, const Common& c,
                  std::istream& in, std::ostream& out) {
  if (order < 1 || order > kMaxCumulantOrder) {
    throw RangeError("--order must be in [1, " + std::to_string(kMaxCumulantOrder) + "]");
  }
  SpecDocument doc;
  const GaussianSpec spec = load_spec(input, in, &doc);
  const auto verdict = characterize(spec, c.tol);
  const auto norm = quadratic_norm_cumulants(spec, order);
  std::optional<CumulantSequence> chisq;
  if (verdict.is_chi_square && side != "norm") {
    chisq = chisq_cumulants(*verdict.df, *verdict.ncp, order);
  }
  std::optional<double> gap;
  if (chisq && side == "both") {
    double worst = 0.0;
    for (int j = 1; j <= order; ++j) {
      const double denom = std::max(std::abs((*chisq)[j]), 1e-300);
      worst = std::max(worst, std::abs(norm[j] - (*chisq)[j]) / denom);
    }
    gap = worst;
  }

  if (c.resolved() == Format::Human) {
    out << "Cumulants of ||X||^2 (order " << order << "):\n";
    for (int j = 1; j <= order; ++j) {
      out << "  kappa_" << j << " = " << norm[j];
      if (chisq) {
        out << "   chi^2(" << *verdict.df << ", " << *verdict.ncp << "): " << (*chisq)[j];
      }
      out << '\n';
    }
    if (!verdict.is_chi_square) {
      out << "||X||^2 is not chi-square distributed; no chi-square cumulants to compare.\n";
    }
    if (gap) {
      out << "Max relative gap: " << *gap << '\n';
    }
    return kExitOk;
  }
  Json j = header("cumulants", c, doc);
  j["order"] = order;
  j["side"] = side;
  j["is_chi_square"] = verdict.is_chi_square;
  j["df"] = verdict.df ? Json(*verdict.df) : Json(nullptr);
  j["ncp"] = verdict.ncp ? Json(*verdict.ncp) : Json(nullptr);
  if (side != "chisq") {
    j["norm_cumulants"] = norm.values;
  }
  if (side != "norm") {
    j["chisq_cumulants"] = chisq ? Json(chisq->values) : Json(nullptr);
  }
  if (side == "both") {
    j["max_relative_gap"] = gap ? Json(*gap) : Json(nullptr);
  }
  emit(out, j);
  return kExitOk;
}

int cmd_verify(const std::string& input, long long samples, double ks_alpha, const Common& c,
               std::istream& in, std::ostream& out) {
  if (samples < 10) {
    throw Error(ErrorCode::TooFewSamples,
                "--samples must be at least 10, got " + std::to_string(samples));
  }
  if (!(ks_alpha > 0.0 && ks_alpha < 1.0)) {
    throw RangeError("--ks-alpha must lie in (0, 1)");
  }
  SpecDocument doc;
  const GaussianSpec spec = load_spec(input, in, &doc);
  VerifyThresholds th;
  th.tol = c.tol;
  th.ks_alpha = ks_alpha;
  const auto report = verify(spec, static_cast<std::size_t>(samples), c.seed, th, c.generator);
  if (c.resolved() == Format::Human) {
    out << render_human(report);
  } else {
    Json j = header("verify", c, doc);
    j.update(to_json(report));
    emit(out, j);
  }
  return report.passed ? kExitOk : kExitGateFailed;
}

int cmd_generate(const GenerateOptions& g, const Common& c, std::ostream& out) {
  SpecDocument doc;
  try {
    doc = generate_spec(g, c.generator);
  } catch (const std::invalid_argument& e) {
    throw RangeError(e.what());
  }
  if (c.resolved() == Format::Human) {
    out << "Generated " << *doc.label << '\n' << to_json(doc).dump(2) << '\n';
  } else {
    emit(out, to_json(doc));
  }
  return kExitOk;
}

int fail(std::ostream& err, int code, const std::string& kind, const std::string& message) {
  Json j;
  j["error"] = {{"code", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << '\n';
  return code;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewSamples: return kExitMalformed;
    case ErrorCode::OrderTooLarge: return kExitRange;
    default: return kExitValidation;
  }
}

}  // namespace

SpecDocument parse_spec_document(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw MalformedInput("spec document must be a JSON object");
  }
  if (!doc.contains("mu") || !doc["mu"].is_array()) {
    throw MalformedInput("spec document needs an array field \"mu\"");
  }
  if (!doc.contains("cov") || !doc["cov"].is_array()) {
    throw MalformedInput("spec document needs an array-of-arrays field \"cov\"");
  }
  SpecDocument out;
  const auto& mu = doc["mu"];
  out.mu.resize(static_cast<Eigen::Index>(mu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out.mu(static_cast<Eigen::Index>(i)) = as_number(mu[i], "mu");
  }
  const auto& cov = doc["cov"];
  const std::size_t rows = cov.size();
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!cov[i].is_array()) {
      throw MalformedInput("every row of \"cov\" must be an array");
    }
    if (i == 0) {
      cols = cov[i].size();
    } else if (cov[i].size() != cols) {
      throw MalformedInput("\"cov\" rows have different lengths");
    }
  }
  out.cov.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out.cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          as_number(cov[i][j], "cov");
    }
  }
  if (doc.contains("label") && !doc["label"].is_null()) {
    if (!doc["label"].is_string()) {
      throw MalformedInput("\"label\" must be a string");
    }
    out.label = doc["label"].get<std::string>();
  }
  return out;
}

Json to_json(const SpecDocument& doc) {
  Json j;
  j["mu"] = std::vector<double>(doc.mu.data(), doc.mu.data() + doc.mu.size());
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < doc.cov.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(doc.cov.cols()));
    for (Eigen::Index k = 0; k < doc.cov.cols(); ++k) {
      row[static_cast<std::size_t>(k)] = doc.cov(i, k);
    }
    rows.push_back(row);
  }
  j["cov"] = rows;
  if (doc.label) {
    j["label"] = *doc.label;
  }
  return j;
}

SpecDocument generate_spec(const GenerateOptions& g, Generator gen) {
  if (g.dim < 1) {
    throw std::invalid_argument("--dim must be at least 1");
  }
  if (g.rank < 0 || g.rank > g.dim) {
    throw std::invalid_argument("--rank must lie in [0, dim]");
  }
  if (!(g.ncp >= 0.0) || !std::isfinite(g.ncp)) {
    throw std::invalid_argument("--ncp must be finite and >= 0");
  }
  if (g.rank == 0 && g.ncp > 0.0) {
    throw std::invalid_argument("--ncp must be 0 when --rank is 0 (mu must lie in W = {0})");
  }
  if (!(g.perturb >= 0.0) || !std::isfinite(g.perturb)) {
    throw std::invalid_argument("--perturb must be finite and >= 0");
  }
  const Eigen::Index n = g.dim;
  const Eigen::Index k = g.rank;

  NormalStream stream(gen, g.seed, 0);
  Eigen::MatrixXd gauss(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      gauss(row, col) = stream.next();
    }
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

  Eigen::MatrixXd cov;
  if (k == n) {
    cov = Eigen::MatrixXd::Identity(n, n);
  } else if (k == 0) {
    cov = Eigen::MatrixXd::Zero(n, n);
  } else {
    const Eigen::MatrixXd basis = q.leftCols(k);
    cov = basis * basis.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
  if (k > 0 && g.ncp > 0.0) {
    Eigen::VectorXd w(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      w(i) = stream.next();
    }
    const Eigen::VectorXd dir = (k == n ? Eigen::MatrixXd::Identity(n, n) : q).leftCols(k) * w;
    mu = g.ncp * dir / dir.norm();
  }
  if (g.perturb > 0.0) {
    const Eigen::VectorXd v = (k == n ? Eigen::MatrixXd::Identity(n, n) : q).col(k >= 1 ? 0 : k);
    cov += g.perturb * v * v.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
  }

  SpecDocument doc;
  doc.mu = mu;
  doc.cov = cov;
  std::ostringstream label;
  label.precision(17);
  label << "generated dim=" << g.dim << " rank=" << g.rank << " ncp=" << g.ncp
        << " seed=" << g.seed << " perturb=" << g.perturb;
  doc.label = label.str();
  return doc;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err, const std::optional<std::string>& generator_env) {
  CLI::App app{"Decide whether ||X||^2 is chi-square for X ~ N(mu, C) and verify it"};
  app.require_subcommand(1);

  Common common;
  std::string input;
  int order = 4;
  std::string side = "both";
  long long samples = 1'000'000;
  double ks_alpha = 0.01;
  GenerateOptions gen_opts;

  auto* characterize_cmd = app.add_subcommand("characterize", "Decide chi-square-ness of ||X||^2");
  characterize_cmd->add_option("input", input, "Spec document (JSON), or - for stdin")->required();
  add_common(characterize_cmd, common, false);

  auto* cumulants_cmd = app.add_subcommand("cumulants", "Exact cumulants of ||X||^2");
  cumulants_cmd->add_option("input", input, "Spec document (JSON), or - for stdin")->required();
  cumulants_cmd->add_option("--order", order, "Number of cumulants J")->capture_default_str();
  cumulants_cmd->add_option("--side", side, "Which cumulants to print")
      ->check(CLI::IsMember({"both", "norm", "chisq"}))
      ->capture_default_str();
  add_common(cumulants_cmd, common, false);

  auto* verify_cmd = app.add_subcommand("verify", "Monte Carlo verification of the verdict");
  verify_cmd->add_option("input", input, "Spec document (JSON), or - for stdin")->required();
  verify_cmd->add_option("--samples", samples, "Number of draws")->capture_default_str();
  verify_cmd->add_option("--ks-alpha", ks_alpha, "KS significance gate")->capture_default_str();
  add_common(verify_cmd, common, true);

  auto* generate_cmd = app.add_subcommand("generate", "Emit a random projection spec");
  generate_cmd->add_option("--dim", gen_opts.dim, "Ambient dimension n")->required();
  generate_cmd->add_option("--rank", gen_opts.rank, "Rank k of the projection")->required();
  generate_cmd->add_option("--ncp", gen_opts.ncp, "Length of mu")->capture_default_str();
  generate_cmd->add_option("--perturb", gen_opts.perturb, "Added to one eigenvalue")
      ->capture_default_str();
  add_common(generate_cmd, common, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) {
    reversed.pop_back();
  }
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kExitMalformed, "UsageError", e.what());
  }

  try {
    if (generator_env && !generator_env->empty()) {
      common.generator = parse_generator_id(*generator_env);
    }
  } catch (const Error& e) {
    return fail(err, kExitMalformed, "UnknownGenerator", e.what());
  }
  if (!(common.tol > 0.0)) {
    return fail(err, kExitRange, "RangeError", "--tol must be positive");
  }

  try {
    if (characterize_cmd->parsed()) {
      return cmd_characterize(input, common, in, out);
    }
    if (cumulants_cmd->parsed()) {
      return cmd_cumulants(input, order, side, common, in, out);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(input, samples, ks_alpha, common, in, out);
    }
    return cmd_generate(gen_opts, common, out);
  } catch (const MalformedInput& e) {
    return fail(err, kExitMalformed, "MalformedInput", e.what());
  } catch (const RangeError& e) {
    return fail(err, kExitRange, "RangeError", e.what());
  } catch (const Error& e) {
    return fail(err, exit_code_for(e.code()), std::string(to_string(e.code())), e.what());
  }
}

}  // namespace chi2geo::cli
