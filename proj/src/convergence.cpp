#include "dynbc/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "dynbc/error.hpp"

namespace dynbc {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

double norm_sq(const SparseMatrix& m, const Vector& v) { return std::max(m.energy(v), 0.0); }

}  // namespace

NormMatrices norm_matrices(const Mesh& mesh) {
  const BulkMatrices bulk = assemble_bulk(mesh, Diffusion(1.0), 0.0);
  const SurfaceMatrices surf = assemble_surface(mesh, 1.0, 0.0);
  return NormMatrices{bulk.mass, bulk.stiffness, surf.mass, surf.stiffness};
}

std::string norm_name(ErrorNorm norm) {
  switch (norm) {
    case ErrorNorm::UL2: return "err_u_L2";
    case ErrorNorm::PL2: return "err_p_L2";
    case ErrorNorm::UH1: return "err_u_H1";
    case ErrorNorm::PH1: return "err_p_H1";
  }
  return "?";
}

std::optional<double> ErrorRecord::error(ErrorNorm norm) const {
  switch (norm) {
    case ErrorNorm::UL2: return err_u_L2;
    case ErrorNorm::PL2: return err_p_L2;
    case ErrorNorm::UH1: return err_u_H1;
    case ErrorNorm::PH1: return err_p_H1;
  }
  return std::nullopt;
}

ErrorMonitor::ErrorMonitor(const ProblemSpec& spec, const Mesh& mesh, const NormMatrices& norms)
    : spec_(spec), mesh_(mesh), norms_(norms) {
  if (!spec.has_exact()) {
    throw UnsupportedError("problem '" + spec.name + "' has no exact solution to compare with");
  }
}

void ErrorMonitor::observe(const StepState& state) {
  const Vector e = state.full() - interpolate_exact(spec_, mesh_, state.t);
  const Vector ep = e.tail(static_cast<Eigen::Index>(mesh_.n_gamma));
  const double ul2 = norm_sq(norms_.mass_omega, e);
  const double pl2 = norm_sq(norms_.mass_gamma, ep);
  u_l2_ = std::max(u_l2_, std::sqrt(ul2));
  p_l2_ = std::max(p_l2_, std::sqrt(pl2));
  u_h1_ = std::max(u_h1_, std::sqrt(ul2 + norm_sq(norms_.stiff_omega, e)));
  p_h1_ = std::max(p_h1_, std::sqrt(pl2 + norm_sq(norms_.stiff_gamma, ep)));
}

StepObserver ErrorMonitor::observer() {
  return [this](std::size_t, const StepState& s) { observe(s); };
}

void ErrorMonitor::fill(ErrorRecord& record) const {
  record.err_u_L2 = u_l2_;
  record.err_p_L2 = p_l2_;
  record.err_u_H1 = u_h1_;
  record.err_p_H1 = p_h1_;
}

ErrorRecord compute_errors(const std::vector<StepState>& trajectory, const ProblemSpec& spec,
                           const Mesh& mesh) {
  const NormMatrices norms = norm_matrices(mesh);
  ErrorMonitor monitor(spec, mesh, norms);
  for (const auto& s : trajectory) monitor.observe(s);
  ErrorRecord r;
  r.problem = spec.name;
  r.h = mesh.metrics.h;
  if (trajectory.size() >= 2) r.tau = trajectory[1].t - trajectory[0].t;
  monitor.fill(r);
  return r;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) {
    double v = 0.0;
    if (!parse_double(part, v)) throw ArgumentError("not a number: '" + part + "'");
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("values must be positive: " + part);
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError("empty list");
  return out;
}

std::vector<double> parse_h_list(const std::string& text) {
  const std::string s = trim(text);
  if (s.rfind("auto:", 0) == 0) {
    const std::string count = s.substr(5);
    char* end = nullptr;
    const long k = std::strtol(count.c_str(), &end, 10);
    if (count.empty() || end != count.c_str() + count.size() || k < 1 || k > 12) {
      throw ArgumentError("auto:k needs an integer k in [1, 12]");
    }
    std::vector<double> out;
    for (long i = 0; i < k; ++i) out.push_back(0.25 / std::pow(std::sqrt(2.0), static_cast<double>(i)));
    return out;
  }
  return parse_number_list(s);
}

double coupled_tau(double h, double T) {
  if (!(h > 0.0) || !(T > 0.0)) throw ArgumentError("h and T must be positive");
  const double n = std::ceil(T / h * (1.0 - 1e-12));
  return T / std::max(n, 1.0);
}

TauRule TauRule::parse(const std::string& text) {
  TauRule rule;
  if (trim(text) == "coupled") return rule;
  rule.coupled = false;
  rule.taus = parse_number_list(text);
  return rule;
}

std::vector<double> TauRule::steps_for(double h, double T) const {
  if (coupled) return {coupled_tau(h, T)};
  std::vector<double> out = taus;
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<double> EocTable::eocs() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.eoc) out.push_back(*r.eoc);
  }
  return out;
}

std::optional<double> EocTable::median_eoc() const {
  std::vector<double> v = eocs();
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

EocTable make_eoc_table(const std::vector<ErrorRecord>& path, ErrorNorm norm, std::string label) {
  EocTable table;
  table.label = std::move(label);
  table.norm = norm;
  for (std::size_t k = 0; k < path.size(); ++k) {
    EocRow row{path[k].h, path[k].tau, path[k].error(norm), std::nullopt};
    if (k > 0) {
      const auto& prev = path[k - 1];
      const auto e0 = prev.error(norm);
      const auto e1 = row.error;
      if (e0 && e1 && *e0 > 0.0 && *e1 > 0.0 && prev.tau != row.tau) {
        row.eoc = std::log(*e0 / *e1) / std::log(prev.tau / row.tau);
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

std::vector<EocTable> ConvergenceResult::tables(ErrorNorm norm) const {
  std::vector<EocTable> out;
  for (const auto& path : paths) {
    std::string label = path.empty() ? "" : path.front().problem + " " + path.front().scheme;
    if (paths.size() > 1 && !path.empty()) label += " h=" + fmt_short(path.front().h);
    out.push_back(make_eoc_table(path, norm, label));
  }
  return out;
}

bool ConvergenceResult::any_failure() const {
  return std::any_of(records.begin(), records.end(),
                     [](const ErrorRecord& r) { return !r.failure.empty(); });
}

CflReport cfl_for(const ProblemSpec& spec, const Mesh& mesh, double tau, const EigConfig& eig) {
  const BlockSystem blocks = assemble_blocks(mesh, spec.kappa, 0.0, spec.beta, 0.0);
  const double c_M = estimate_cM(mesh, blocks, eig);
  const double c_inv = estimate_cinv(mesh, blocks, eig);
  return check_cfl(tau, mesh.metrics.h, c_M, c_inv, mesh.metrics.h_gamma);
}

ErrorRecord run_single(const ProblemSpec& spec, const Mesh& mesh, const BlockSystem& blocks,
                       SchemeKind scheme, double tau, const CflReport& cfl,
                       const ConvergenceOptions& options) {
  ErrorRecord rec;
  rec.problem = spec.name;
  rec.scheme = scheme_name(scheme);
  rec.h = mesh.metrics.h;
  rec.tau = tau;
  rec.cfl = cfl;
  try {
    const NormMatrices norms = norm_matrices(mesh);
    ErrorMonitor monitor(spec, mesh, norms);
    std::vector<StepObserver> observers{monitor.observer()};

    struct TraceRow {
      std::size_t n;
      double t;
      double norm_u;
      double norm_p;
    };
    std::vector<TraceRow> trace;
    if (options.trace_dir) {
      observers.emplace_back([&](std::size_t n, const StepState& s) {
        trace.push_back({n, s.t, std::sqrt(norm_sq(norms.mass_omega, s.full())),
                         std::sqrt(norm_sq(norms.mass_gamma, s.p))});
      });
    }

    const TrajectorySummary sum = integrate(spec, mesh, blocks, scheme, tau, observers, options.stepper);
    rec.blow_up = sum.blow_up;
    rec.newton_max_iterations = sum.newton_max_iterations;
    if (!sum.blow_up) monitor.fill(rec);

    if (options.trace_dir) {
      std::filesystem::create_directories(*options.trace_dir);
      const auto path = *options.trace_dir / ("trace_" + spec.name + "_" + rec.scheme + "_h" +
                                              fmt_short(rec.h) + "_tau" + fmt_short(tau) + ".csv");
      std::ofstream f(path);
      if (!f) throw ResourceError("cannot write " + path.string());
      f << "n,t,norm_u_M,norm_p_Mgamma,newton_iters\n";
      for (const auto& r : trace) {
        const std::size_t it = r.n == 0 ? 0 : sum.newton_per_step.at(r.n - 1);
        f << r.n << ',' << fmt17(r.t) << ',' << fmt17(r.norm_u) << ',' << fmt17(r.norm_p) << ','
          << it << '\n';
      }
    }
  } catch (const std::exception& e) {
    rec.err_u_L2.reset();
    rec.err_p_L2.reset();
    rec.err_u_H1.reset();
    rec.err_p_H1.reset();
    rec.failure = e.what();
  }
  return rec;
}

ConvergenceResult run_convergence(const ProblemSpec& spec, SchemeKind scheme,
                                  const std::vector<double>& h_targets, const TauRule& rule,
                                  const ConvergenceOptions& options) {
  if (h_targets.empty()) throw ArgumentError("no mesh sizes given");
  if (!rule.coupled && rule.taus.empty()) throw ArgumentError("no step sizes given");
  std::vector<double> targets = h_targets;
  std::sort(targets.begin(), targets.end(), std::greater<>());

  ConvergenceResult result;
  std::vector<ErrorRecord> coupled_path;
  for (const double target : targets) {
    std::vector<ErrorRecord> rows;
    try {
      const Mesh mesh = generate_disk_mesh(target);
      const BlockSystem blocks = assemble_for(spec, mesh);
      const CflReport base = cfl_for(spec, mesh, 1.0, options.eig);
      for (const double tau : rule.steps_for(mesh.metrics.h, spec.T)) {
        const CflReport cfl = check_cfl(tau, mesh.metrics.h, base.c_M, base.c_inv, mesh.metrics.h_gamma);
        rows.push_back(run_single(spec, mesh, blocks, scheme, tau, cfl, options));
      }
    } catch (const std::exception& e) {
      for (const double tau : rule.steps_for(target, spec.T)) {
        ErrorRecord rec;
        rec.problem = spec.name;
        rec.scheme = scheme_name(scheme);
        rec.h = target;
        rec.tau = tau;
        rec.failure = e.what();
        rows.push_back(rec);
      }
    }
    for (const auto& r : rows) result.records.push_back(r);
    if (rule.coupled) {
      coupled_path.insert(coupled_path.end(), rows.begin(), rows.end());
    } else {
      result.paths.push_back(rows);
    }
  }
  if (rule.coupled) result.paths.push_back(coupled_path);
  return result;
}

PlateauReport detect_plateau(const std::vector<ErrorRecord>& records, const ErrorRecord& floor,
                             ErrorNorm norm) {
  if (records.size() < 4) throw ArgumentError("plateau detection needs at least four step sizes");
  for (std::size_t k = 1; k < records.size(); ++k) {
    if (!(records[k].tau < records[k - 1].tau)) {
      throw ArgumentError("plateau sweep must be ordered by decreasing tau");
    }
  }
  PlateauReport rep;
  const auto a = records[records.size() - 2].error(norm);
  const auto b = records.back().error(norm);
  const auto f = floor.error(norm);
  if (!a || !b) {
    rep.message = "smallest step sizes have no error values";
    return rep;
  }
  if (!f || !(*f > 0.0)) {
    rep.message = "floor run has no positive error value";
    return rep;
  }
  rep.plateau = *b;
  rep.floor = *f;
  rep.ratio = *b / *f;
  if (std::abs(*a - *b) > 0.1 * std::max(*a, *b)) {
    rep.message = "errors still changing by more than 10% at the smallest step sizes";
    return rep;
  }
  rep.status = PlateauReport::Status::Reached;
  return rep;
}

std::string csv_header() {
  return "problem,scheme,h,tau,err_u_L2,err_p_L2,err_u_H1,err_p_H1,blow_up,c_M,c_inv,cfl_satisfied";
}

void write_csv(std::ostream& os, const std::vector<ErrorRecord>& records) {
  os << csv_header() << '\n';
  const auto opt = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); };
  for (const auto& r : records) {
    os << r.problem << ',' << r.scheme << ',' << fmt17(r.h) << ',' << fmt17(r.tau) << ','
       << opt(r.err_u_L2) << ',' << opt(r.err_p_L2) << ',' << opt(r.err_u_H1) << ','
       << opt(r.err_p_H1) << ',' << (r.blow_up ? 1 : 0) << ',' << fmt17(r.cfl.c_M) << ','
       << fmt17(r.cfl.c_inv) << ',' << (r.cfl.satisfied ? 1 : 0) << '\n';
  }
}

std::vector<ErrorRecord> read_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError(1, "missing CSV header");
  ++lineno;
  if (trim(line) != csv_header()) throw ParseError(lineno, "unexpected CSV header");

  std::vector<ErrorRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 12) {
      throw ParseError(lineno, "expected 12 fields, found " + std::to_string(f.size()));
    }
    const auto number = [&](std::size_t i) {
      double v = 0.0;
      if (!parse_double(f[i], v)) throw ParseError(lineno, "field " + std::to_string(i + 1) + " is not a number");
      return v;
    };
    const auto optional = [&](std::size_t i) -> std::optional<double> {
      if (trim(f[i]).empty()) return std::nullopt;
      return number(i);
    };
    const auto flag = [&](std::size_t i) {
      const std::string s = trim(f[i]);
      if (s != "0" && s != "1") throw ParseError(lineno, "field " + std::to_string(i + 1) + " must be 0 or 1");
      return s == "1";
    };
    ErrorRecord r;
    r.problem = trim(f[0]);
    r.scheme = trim(f[1]);
    r.h = number(2);
    r.tau = number(3);
    r.err_u_L2 = optional(4);
    r.err_p_L2 = optional(5);
    r.err_u_H1 = optional(6);
    r.err_p_H1 = optional(7);
    r.blow_up = flag(8);
    r.cfl.h = r.h;
    r.cfl.tau = r.tau;
    r.cfl.c_M = number(9);
    r.cfl.c_inv = number(10);
    r.cfl.satisfied = flag(11);
    if (r.cfl.c_M > 0.0 && r.cfl.c_inv > 0.0) r.cfl.tau_max = 3.0 * r.h / (7.0 * r.cfl.c_inv * r.cfl.c_M);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir,
                                                   const ConvergenceResult& result) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  if (result.records.empty()) return files;
  // group by mesh size, preserving grid order
  std::vector<std::pair<double, std::vector<const ErrorRecord*>>> groups;
  for (const auto& r : result.records) {
    if (groups.empty() || groups.back().first != r.h) groups.emplace_back(r.h, std::vector<const ErrorRecord*>{});
    groups.back().second.push_back(&r);
  }
  const auto& first = result.records.front();
  for (const ErrorNorm norm : all_error_norms) {
    const auto path = dir / (first.problem + "_" + first.scheme + "_" + norm_name(norm) + ".dat");
    std::ofstream f(path);
    if (!f) throw ResourceError("cannot write " + path.string());
    bool lead = false;
    for (const auto& [h, rows] : groups) {
      if (lead) f << "\n\n";
      lead = true;
      f << "# h = " << fmt17(h) << "\n# tau " << norm_name(norm) << '\n';
      for (const auto* r : rows) {
        const auto e = r->error(norm);
        if (e) f << fmt17(r->tau) << ' ' << fmt17(*e) << '\n';
      }
    }
    files.push_back(path);
  }
  return files;
}

void write_summary(std::ostream& os, const ConvergenceResult& result) {
  for (const ErrorNorm norm : all_error_norms) {
    for (const auto& table : result.tables(norm)) {
      os << "== " << table.label << " : " << norm_name(norm) << " ==\n";
      char buf[160];
      std::snprintf(buf, sizeof buf, "%12s %12s %14s %8s\n", "h", "tau", "error", "eoc");
      os << buf;
      for (const auto& row : table.rows) {
        const std::string err = row.error ? fmt_short(*row.error) : std::string("-");
        char eoc[32];
        if (row.eoc) {
          std::snprintf(eoc, sizeof eoc, "%8.3f", *row.eoc);
        } else {
          std::snprintf(eoc, sizeof eoc, "%8s", "-");
        }
        std::snprintf(buf, sizeof buf, "%12.6g %12.6g %14s %s\n", row.h, row.tau, err.c_str(), eoc);
        os << buf;
      }
      const auto med = table.median_eoc();
      os << "median eoc: " << (med ? fmt_short(*med) : std::string("-")) << "\n\n";
    }
  }
  bool header = false;
  for (const auto& r : result.records) {
    if (!r.blow_up && r.failure.empty()) continue;
    if (!header) {
      os << "== incomplete runs ==\n";
      header = true;
    }
    os << "h=" << fmt_short(r.h) << " tau=" << fmt_short(r.tau) << ": "
       << (r.blow_up ? std::string("blow-up") : "error: " + r.failure) << '\n';
  }
}

StabilityMonitor::StabilityMonitor(const ProblemSpec& spec, const Mesh& mesh,
                                   const BlockSystem& blocks, double tau, double c_M, double c_inv)
    : spec_(spec),
      mesh_(mesh),
      mass_(block_matrix(blocks.M11, blocks.M12, blocks.M21, blocks.M22)),
      stiff_(block_matrix(blocks.A11, blocks.A12, blocks.A21, blocks.A22)),
      mass_gamma_(blocks.M_gamma),
      stiff_gamma_(blocks.A_gamma),
      m22_(blocks.M22),
      tau_(tau) {
  const double h = mesh.metrics.h;
  if (!(tau > 0.0) || !(h > 0.0)) throw ArgumentError("stability monitor needs tau > 0 and mesh metrics");
  weight_ = 1.0 - 4.0 * c_M * h - c_M * spec.alpha_omega * tau * h - c_M * c_inv * tau / h;
}

void StabilityMonitor::observe(std::size_t n, const StepState& s) {
  const double energy = norm_sq(stiff_, s.full()) + norm_sq(stiff_gamma_, s.p);
  if (n == 0) {
    rhs_fixed_ = energy + 2.0 * tau_ * norm_sq(m22_, s.dp);
    return;
  }
  lhs_sum_ += tau_ * weight_ * norm_sq(mass_gamma_, s.dp);
  const Vector fo = nodal_f_omega(spec_, mesh_, s.t, s.full());
  const Vector fg = nodal_f_gamma(spec_, mesh_, s.t, s.p);
  rhs_sum_ += tau_ * (norm_sq(mass_, fo) + norm_sq(mass_gamma_, fg));
  lhs_.push_back(energy + lhs_sum_);
  rhs_.push_back(rhs_fixed_ + rhs_sum_);
}

StepObserver StabilityMonitor::observer() {
  return [this](std::size_t n, const StepState& s) { observe(n, s); };
}

bool StabilityMonitor::holds(double slack) const {
  for (std::size_t k = 0; k < lhs_.size(); ++k) {
    if (lhs_[k] > rhs_[k] * (1.0 + slack)) return false;
  }
  return true;
}

double StabilityMonitor::worst_ratio() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < lhs_.size(); ++k) {
    if (rhs_[k] > 0.0) worst = std::max(worst, lhs_[k] / rhs_[k]);
  }
  return worst;
}

}  // namespace dynbc
