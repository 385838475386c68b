#include "dilab/report.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "dilab/blh.hpp"
#include "dilab/dilation.hpp"
#include "dilab/model.hpp"
#include "dilab/srkh.hpp"

namespace dilab {

using nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "certify") return Command::Certify;
  if (name == "dilate") return Command::Dilate;
  if (name == "model") return Command::Model;
  if (name == "blh") return Command::Blh;
  if (name == "quotient") return Command::Quotient;
  if (name == "srkh") return Command::Srkh;
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Certify: return "certify";
    case Command::Dilate: return "dilate";
    case Command::Model: return "model";
    case Command::Blh: return "blh";
    case Command::Quotient: return "quotient";
    case Command::Srkh: return "srkh";
  }
  return "?";
}

int exit_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::ArityMismatch:
    case ErrorCode::AxisOutOfRange:
    case ErrorCode::PointOutsideDisc:
      return kExitInputError;
    case ErrorCode::TailBoundTooLarge:
      return kExitTruncation;
    default:
      return kExitVerdictFalse;
  }
}

void Report::check(std::string name, double value, double threshold, double tail_slack) {
  identities.push_back({std::move(name), value, threshold, tail_slack, false, value <= threshold});
}

void Report::check_lower(std::string name, double value, double threshold) {
  identities.push_back({std::move(name), value, threshold, 0.0, true, value >= threshold});
}

bool Report::all_pass() const {
  for (const auto& i : identities) {
    if (!i.pass) return false;
  }
  return true;
}

json Report::to_json() const {
  json out;
  out["command"] = command;
  out["exit_code"] = exit_code;
  out["status"] = exit_code == kExitPass ? "pass" : "fail";
  if (error_code) out["error"] = {{"code", *error_code}, {"message", *error_message}};
  json ids = json::array();
  for (const auto& i : identities) {
    ids.push_back({{"name", i.name},
                   {"value", i.value},
                   {"threshold", i.threshold},
                   {"tail_slack", i.tail_slack},
                   {"bound", i.lower_bound ? "lower" : "upper"},
                   {"pass", i.pass}});
  }
  out["identities"] = std::move(ids);
  out["details"] = details;
  return out;
}

std::string Report::to_text() const {
  std::ostringstream os;
  char buf[256];
  os << "dilation-lab " << command << "\n";
  os << "status: " << (exit_code == kExitPass ? "PASS" : "FAIL") << " (exit " << exit_code << ")\n";
  if (error_code) os << "error: " << *error_message << "\n";
  if (details.contains("truncation")) {
    const json& t = details["truncation"];
    std::snprintf(buf, sizeof buf, "degree: %d (%s, epsilon %.1e); tail bound %.3e\n", t["degree"].get<int>(),
                  t["auto"].get<bool>() ? "auto" : "fixed", t["epsilon"].get<double>(), t["tail_bound"].get<double>());
    os << buf;
  }
  if (!identities.empty()) {
    std::snprintf(buf, sizeof buf, "%-34s %12s    %12s %12s  %s\n", "identity", "value", "threshold", "tail slack",
                  "result");
    os << buf;
    for (const auto& i : identities) {
      std::snprintf(buf, sizeof buf, "%-34s %12.4e %s %12.4e %12.4e  %s\n", i.name.c_str(), i.value,
                    i.lower_bound ? ">=" : "<=", i.threshold, i.tail_slack, i.pass ? "pass" : "FAIL");
      os << buf;
    }
  }
  if (!timings.empty()) {
    os << "timings:";
    for (const auto& [stage, secs] : timings) {
      std::snprintf(buf, sizeof buf, " %s %.3fs", stage.c_str(), secs);
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(Report& r) : report_(r), last_(std::chrono::steady_clock::now()) {}
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    report_.timings.emplace_back(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  Report& report_;
  std::chrono::steady_clock::time_point last_;
};

std::string axis_name(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i + 1) + "]"; }

json certificate_json(const Certificate& c) {
  json w = json::array();
  for (const auto& x : c.witnesses) {
    w.push_back({{"label", x.label},
                 {"value", x.value},
                 {"threshold", x.threshold},
                 {"bound", x.lower_bound ? "lower" : "upper"},
                 {"pass", x.pass}});
  }
  return {{"kind", to_string(c.kind)}, {"verdict", c.verdict}, {"witnesses", w}, {"spectral_radii", c.spectral_radii}};
}

void add_witnesses(Report& rep, const Certificate& c) {
  for (const auto& w : c.witnesses) {
    if (w.lower_bound) {
      rep.check_lower(w.label, w.value, w.threshold);
    } else {
      rep.check(w.label, w.value, w.threshold);
    }
  }
}

Tolerances resolve_tolerances(const ProblemFile& p, const RunOptions& o) {
  Tolerances tol = p.tolerances;
  if (o.tol_residual) tol.residual = *o.tol_residual;
  tol.validate();
  return tol;
}

OperatorTuple require_tuple(const ProblemFile& p, const char* command) {
  if (p.tuple.empty()) throw Error(ErrorCode::Schema, std::string("/tuple: required for ") + command);
  return OperatorTuple(p.tuple);
}

Weights require_weights(const ProblemFile& p, const char* command) {
  if (!p.weights) throw Error(ErrorCode::Schema, std::string("/weights: required for ") + command);
  return *p.weights;
}

struct DegreeChoice {
  std::optional<int> fixed;
  double epsilon = 1e-9;
};

DegreeChoice degree_choice(const ProblemFile& p, const RunOptions& o) {
  DegreeChoice d;
  d.fixed = p.truncation.degree;
  d.epsilon = o.epsilon.value_or(p.truncation.epsilon);
  if (!(d.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "--epsilon must be positive");
  if (o.degree) {
    if (*o.degree == "auto") {
      d.fixed.reset();
    } else {
      try {
        std::size_t used = 0;
        const int n = std::stoi(*o.degree, &used);
        if (used != o.degree->size() || n < 0 || n > kDefaultDegreeCap) throw std::invalid_argument("range");
        d.fixed = n;
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "--degree expects an integer in [0, 512] or 'auto'");
      }
    }
  }
  return d;
}

int resolve_degree(Report& rep, const ProblemFile& p, const RunOptions& o, const OperatorTuple& t,
                   const Weights& m) {
  const DegreeChoice d = degree_choice(p, o);
  const int degree = d.fixed ? *d.fixed : select_degree(t, m, d.epsilon);
  rep.details["truncation"] = {{"degree", degree},
                               {"auto", !d.fixed.has_value()},
                               {"epsilon", d.epsilon},
                               {"tail_bound", joint_tail_bound(t, m, degree)}};
  return degree;
}

CertificateKind default_kind(std::size_t n) {
  return n == 1 ? CertificateKind::Bm : CertificateKind::DoublyCommutingJoint;
}

CertificateKind kind_from_name(const std::string& s) {
  if (s == "Bm") return CertificateKind::Bm;
  if (s == "Hypercontraction") return CertificateKind::Hypercontraction;
  if (s == "JointBm") return CertificateKind::JointBm;
  return CertificateKind::DoublyCommutingJoint;
}

// Certifies, records the witnesses and reports whether the pipeline may go on.
bool certify_step(Report& rep, const OperatorTuple& t, const Weights& m, CertificateKind kind,
                  const Tolerances& tol) {
  const Certificate c = certify(t, m, kind, tol);
  rep.details["certificate"] = certificate_json(c);
  add_witnesses(rep, c);
  return c.verdict;
}

void run_certify(Report& rep, const ProblemFile& p, const RunOptions& o, Stopwatch& sw) {
  const Tolerances tol = resolve_tolerances(p, o);
  const OperatorTuple t = require_tuple(p, "certify");
  const Weights m = require_weights(p, "certify");
  const CertificateKind kind = p.certificate ? kind_from_name(*p.certificate) : default_kind(t.n());
  certify_step(rep, t, m, kind, tol);
  sw.lap("certify");
}

void run_dilate(Report& rep, const ProblemFile& p, const RunOptions& o, Stopwatch& sw) {
  const Tolerances tol = resolve_tolerances(p, o);
  const OperatorTuple t = require_tuple(p, "dilate");
  const Weights m = require_weights(p, "dilate");
  const bool ok = certify_step(rep, t, m, default_kind(t.n()), tol);
  sw.lap("certify");
  if (!ok) return;
  const int degree = resolve_degree(rep, p, o, t, m);
  const DilationMap v = t.n() == 1 ? agler_dilation(t, m, degree, tol) : joint_dilation(t, m, degree, tol);
  sw.lap("dilate");
  rep.details["defect_rank"] = v.target.coeff_dim();
  rep.details["target_dim"] = v.target.total_dim();

  const DilationReport dr = verify_dilation_identities(v, t, tol);
  rep.check("dil1-isometry", dr.isometry_residual, dr.isometry_threshold, 2.0 * v.tail_bound);
  for (std::size_t i = 0; i < t.n(); ++i) {
    rep.check(axis_name("dil1-intertwining", i), dr.intertwining_residuals[i], dr.intertwining_threshold,
              2.0 * v.tail_bound);
  }
  rep.check("dil1-kernel", dr.kernel_residual, dr.kernel_threshold, 4.0 * v.tail_bound);
  rep.details["kernel_samples"] = dr.kernel_samples;
  if (t.n() > 1) rep.check("dil1-stage-composition", v.construction_discrepancy, tol.residual);
  sw.lap("verify");

  std::vector<ModelProjection> r;
  for (std::size_t j = 0; j < t.n(); ++j) {
    r.push_back(model_projection(t, m, j, degree, tol));
    rep.check(axis_name("RD-invariance", j), r.back().invariance_residual(), tol.residual);
  }
  const ProductFormulaReport pf = verify_product_formula(v, r, tol);
  const double slack = 10.0 * v.tail_bound;
  rep.check("VR-commute", pf.commutator, pf.threshold, slack);
  rep.check("VR-idempotent", pf.idempotency, pf.threshold, slack);
  rep.check("VR-hermitian", pf.hermitian, pf.threshold, slack);
  rep.check("VR-product", pf.product_residual, pf.threshold, slack);
  sw.lap("product-formula");
}

json multiplier_json(const MultiplierPoly& theta) {
  json coeffs = json::array();
  for (const auto& c : theta.coeffs) coeffs.push_back(matrix_to_json(c));
  return {{"source_coeff_dim", theta.source_coeff_dim},
          {"target_coeff_dim", theta.target.coeff_dim()},
          {"weight", theta.target.weights()[0]},
          {"degree", theta.degree()},
          {"coeffs", std::move(coeffs)}};
}

void run_model(Report& rep, const ProblemFile& p, const RunOptions& o, Stopwatch& sw) {
  const Tolerances tol = resolve_tolerances(p, o);
  const OperatorTuple t = require_tuple(p, "model");
  const Weights m = require_weights(p, "model");
  const bool ok = certify_step(rep, t, m, default_kind(t.n()), tol);
  sw.lap("certify");
  if (!ok) return;
  const int degree = resolve_degree(rep, p, o, t, m);
  const ModelData md = model_space(t, m, degree, tol);
  sw.lap("model");
  const double tail = md.dilation.tail_bound;
  rep.details["model_dim"] = md.model_frame.dim();
  rep.check("dilH-unitary", md.unitary_residual, tol.residual + 2.0 * tail, 2.0 * tail);
  for (std::size_t i = 0; i < t.n(); ++i) {
    rep.check(axis_name("dilH-intertwining", i), md.intertwining_residuals[i], tol.residual + 2.0 * tail, 2.0 * tail);
    rep.check(axis_name("dilH-coinvariance", i), md.coinvariance_residuals[i], tol.residual + 2.0 * tail, 2.0 * tail);
  }
  const BeurlingComplement bc = beurling_complement(md, tol);
  sw.lap("complement");
  json axes = json::array();
  for (std::size_t i = 0; i < bc.axes.size(); ++i) {
    const auto& a = bc.axes[i];
    rep.check(axis_name("MTblh-range", i), a.one_variable_range_residual, bc.threshold, 10.0 * tail);
    rep.check(axis_name("MTblh-partial-isometry", i), a.blh.partial_isometry_residual, bc.threshold, 10.0 * tail);
    json entry = multiplier_json(a.blh.theta);
    entry["degenerate"] = a.degenerate;
    axes.push_back(std::move(entry));
  }
  rep.details["multipliers"] = std::move(axes);
  rep.check("MT-complement", bc.residual, bc.threshold, 10.0 * tail);
  if (bc.span_residual) {
    rep.check("PF-span", *bc.span_residual, bc.threshold, 10.0 * tail);
    rep.check("PF-complement", *bc.complement_residual, bc.threshold, 10.0 * tail);
  } else {
    rep.details["span_check"] = "skipped: intersection basis too large";
  }
}

SubspaceFrame require_subspace(const ProblemFile& p, const char* command, TruncatedSpace& space,
                               const Tolerances& tol) {
  if (!p.subspace) throw Error(ErrorCode::Schema, std::string("/subspace: required for ") + command);
  space = TruncatedSpace(p.subspace->weights, p.subspace->degree, p.subspace->coeff_dim);
  return SubspaceFrame::span_of(p.subspace->spanning, tol);
}

void run_blh(Report& rep, const ProblemFile& p, const RunOptions& o, Stopwatch& sw) {
  const Tolerances tol = resolve_tolerances(p, o);
  TruncatedSpace space;
  const SubspaceFrame s = require_subspace(p, "blh", space, tol);
  if (space.n() != 1) throw Error(ErrorCode::Schema, "/subspace/weights: blh expects a single weight");
  rep.details["subspace_dim"] = s.dim();
  const BlhResult b = blh_multiplier(space, s, tol);
  sw.lap("blh");
  rep.details["multiplier"] = multiplier_json(b.theta);
  rep.details["compressed_shift_spectral_radius"] = b.spectral_radius;
  rep.check("MTblh-invariance", b.invariance_residual, tol.residual);
  rep.check("MTblh-range", b.range_residual, tol.residual);
  rep.check("MTblh-range-full", b.range_residual_full, tol.residual);
  const PartialIsometryReport pi = verify_partial_isometry(b.theta, tol);
  rep.check("MTblh-partial-isometry", pi.partial_isometry, pi.threshold);
  rep.check("MTblh-intertwining", pi.intertwining, pi.threshold);
  rep.details["top_degree"] = {{"interior_degree", pi.interior_degree},
                               {"columns", pi.top_degree_columns},
                               {"partial_isometry", pi.partial_isometry_slack},
                               {"range", pi.range_slack},
                               {"intertwining", pi.intertwining_slack}};
  sw.lap("verify");
}

void run_quotient(Report& rep, const ProblemFile& p, const RunOptions& o, Stopwatch& sw) {
  const Tolerances tol = resolve_tolerances(p, o);
  TruncatedSpace space;
  const SubspaceFrame q = require_subspace(p, "quotient", space, tol);
  const QuotientAnalysis qa = quotient_analysis(q, space, tol);
  sw.lap("quotient");
  rep.details["subspace_dim"] = q.dim();
  rep.details["doubly_commuting"] = qa.doubly_commuting;
  rep.details["defect_rank"] = qa.defect_rank;
  if (!qa.note.empty()) rep.details["note"] = qa.note;
  rep.check("C-doubly-commuting", qa.dc_residual, tol.residual);
  rep.check("C-defect-identity", qa.defect_identity_residual, tol.residual);
  rep.check("C-rank", static_cast<double>(qa.defect_rank), 1.0);
  if (qa.factor_frames) {
    json factors = json::array();
    for (const auto& f : *qa.factor_frames) factors.push_back({{"dim", f.dim()}, {"frame", matrix_to_json(f.basis())}});
    rep.details["factors"] = std::move(factors);
    rep.check("quotient-factorization", qa.factorization_residual.value_or(0.0), 10.0 * tol.residual);
  } else if (qa.doubly_commuting) {
    rep.check("quotient-factorization", 1.0, 10.0 * tol.residual);
  }
}

DiagonalKernel kernel_for_axis(const std::vector<double>& c, std::size_t axis) {
  try {
    return DiagonalKernel(c);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, "/kernel_coeffs/" + std::to_string(axis) + ": " + e.what());
  }
}

void run_srkh(Report& rep, const ProblemFile& p, const RunOptions& o, Stopwatch& sw) {
  const Tolerances tol = resolve_tolerances(p, o);
  const OperatorTuple t = require_tuple(p, "srkh");
  if (!p.kernel_coeffs) throw Error(ErrorCode::Schema, "/kernel_coeffs: required for srkh");
  std::vector<DiagonalKernel> kernels;
  int available = kDefaultDegreeCap;
  for (std::size_t i = 0; i < p.kernel_coeffs->size(); ++i) {
    kernels.push_back(kernel_for_axis((*p.kernel_coeffs)[i], i));
    available = std::min(available, kernels.back().max_degree());
  }
  const DegreeChoice d = degree_choice(p, o);
  const int degree = d.fixed.value_or(available);
  if (degree > available) {
    throw Error(ErrorCode::Schema, "/kernel_coeffs: degree " + std::to_string(degree) +
                                       " needs coefficients up to that degree on every axis");
  }
  rep.details["degree"] = degree;

  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const ReciprocalSeries b = reciprocal_series(kernels[i], degree);
    rep.check(axis_name("srkh-reciprocal", i), b.convolution_residual, 1e-12);
    rep.details["reciprocal"].push_back(b.coeffs);
  }
  if (t.n() == 1) {
    const KContractCertificate c = k_contractivity(t[0], kernels[0], degree, tol);
    sw.lap("k-contractivity");
    rep.details["C"] = matrix_to_json(c.c);
    rep.check_lower("srkh-psd", c.min_eig, -tol.psd);
    rep.check("srkh-convergence", c.convergence_residual, tol.residual);
    rep.check("srkh-remainder", c.f_decay.back().norm, tol.residual);
    json decay = json::array();
    for (const auto& s : c.f_decay) decay.push_back({{"order", s.order}, {"norm", s.norm}});
    rep.details["f_decay"] = std::move(decay);
    if (!c.verdict) return;
    const KernelDilation kd = srkh_dilation(t[0], kernels[0], degree, tol);
    sw.lap("dilate");
    rep.check("srkh-isometry", kd.isometry_residual, tol.residual);
    rep.check("srkh-intertwining", kd.intertwining_residual, kd.threshold, kd.threshold - tol.residual);
    rep.details["defect_rank"] = kd.coeff_frame.dim();
    return;
  }
  const ProductKernelCertificate pk = product_kernel_certify(t, kernels, degree, tol);
  sw.lap("product-kernel");
  for (std::size_t i = 0; i < pk.axes.size(); ++i) {
    rep.check_lower(axis_name("srkh-psd", i), pk.axes[i].min_eig, -tol.psd);
    rep.check(axis_name("srkh-convergence", i), pk.axes[i].convergence_residual, tol.residual);
    rep.check(axis_name("srkh-remainder", i), pk.axes[i].f_decay.back().norm, tol.residual);
  }
  rep.check("srkh-product-commute", pk.commutator, tol.residual);
  rep.check_lower("srkh-product-psd", pk.min_eig, -tol.psd);
  rep.details["C_T"] = matrix_to_json(pk.c_t);
  if (pk.failing_axis >= 0) rep.details["failing_axis"] = pk.failing_axis + 1;
}

}  // namespace

Report run(Command command, const ProblemFile& problem, const RunOptions& options) {
  Report rep;
  rep.command = to_string(command);
  Stopwatch sw(rep);
  try {
    switch (command) {
      case Command::Certify: run_certify(rep, problem, options, sw); break;
      case Command::Dilate: run_dilate(rep, problem, options, sw); break;
      case Command::Model: run_model(rep, problem, options, sw); break;
      case Command::Blh: run_blh(rep, problem, options, sw); break;
      case Command::Quotient: run_quotient(rep, problem, options, sw); break;
      case Command::Srkh: run_srkh(rep, problem, options, sw); break;
    }
    rep.exit_code = rep.all_pass() ? kExitPass : kExitVerdictFalse;
  } catch (const Error& e) {
    rep.exit_code = exit_status_for(e.code());
    rep.error_code = std::string(to_string(e.code()));
    rep.error_message = e.what();
  }
  return rep;
}

}  // namespace dilab
