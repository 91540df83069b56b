#ifndef DYNBC_CONVERGENCE_HPP
#define DYNBC_CONVERGENCE_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dynbc/assembly.hpp"
#include "dynbc/linalg.hpp"
#include "dynbc/mesh.hpp"
#include "dynbc/problems.hpp"
#include "dynbc/schemes.hpp"

namespace dynbc {

/// Matrices defining the error norms: mass matrices and the unit-coefficient
/// stiffness seminorms (kappa = 1, beta = 1, no reaction terms).
struct NormMatrices {
  SparseMatrix mass_omega;
  SparseMatrix stiff_omega;
  SparseMatrix mass_gamma;
  SparseMatrix stiff_gamma;
};

NormMatrices norm_matrices(const Mesh& mesh);

enum class ErrorNorm { UL2, PL2, UH1, PH1 };

inline constexpr std::array<ErrorNorm, 4> all_error_norms{ErrorNorm::UL2, ErrorNorm::PL2,
                                                          ErrorNorm::UH1, ErrorNorm::PH1};

/// "err_u_L2", "err_p_L2", "err_u_H1" or "err_p_H1".
std::string norm_name(ErrorNorm norm);

/// Maximum over all time levels of the error norms of one run. Blown-up or
/// failed runs carry no error values.
struct ErrorRecord {
  std::string problem;
  std::string scheme;
  double h = 0.0;
  double tau = 0.0;
  std::optional<double> err_u_L2;
  std::optional<double> err_p_L2;
  std::optional<double> err_u_H1;
  std::optional<double> err_p_H1;
  bool blow_up = false;
  CflReport cfl;
  std::string failure;  // non-empty when the run stopped with a hard error
  std::size_t newton_max_iterations = 0;

  std::optional<double> error(ErrorNorm norm) const;
  bool has_errors() const { return err_u_L2.has_value(); }
};

/// Observer accumulating the maximum nodal error against the exact solution.
class ErrorMonitor {
public:
  ErrorMonitor(const ProblemSpec& spec, const Mesh& mesh, const NormMatrices& norms);

  void observe(const StepState& state);
  StepObserver observer();

  double u_L2() const noexcept { return u_l2_; }
  double p_L2() const noexcept { return p_l2_; }
  double u_H1() const noexcept { return u_h1_; }
  double p_H1() const noexcept { return p_h1_; }
  /// Copies the four maxima into `record`.
  void fill(ErrorRecord& record) const;

private:
  const ProblemSpec& spec_;
  const Mesh& mesh_;
  const NormMatrices& norms_;
  double u_l2_ = 0.0;
  double p_l2_ = 0.0;
  double u_h1_ = 0.0;
  double p_h1_ = 0.0;
};

/// Error norms of a stored trajectory (states at t^0, ..., t^N).
ErrorRecord compute_errors(const std::vector<StepState>& trajectory, const ProblemSpec& spec,
                           const Mesh& mesh);

/// Time step rule: `coupled` gives tau = T / ceil(T / h), otherwise the
/// same explicit list is used for every h.
struct TauRule {
  bool coupled = true;
  std::vector<double> taus;

  static TauRule parse(const std::string& text);
  std::vector<double> steps_for(double h, double T) const;
};

/// Comma separated list of target mesh sizes, or `auto:k` for the k sizes
/// 0.25 / sqrt(2)^i, i = 0..k-1.
std::vector<double> parse_h_list(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

double coupled_tau(double h, double T);

struct EocRow {
  double h = 0.0;
  double tau = 0.0;
  std::optional<double> error;
  std::optional<double> eoc;
};

/// Errors along one refinement path with
/// eoc_k = log(e_{k-1} / e_k) / log(tau_{k-1} / tau_k).
struct EocTable {
  std::string label;
  ErrorNorm norm = ErrorNorm::UL2;
  std::vector<EocRow> rows;

  std::vector<double> eocs() const;
  std::optional<double> median_eoc() const;
};

EocTable make_eoc_table(const std::vector<ErrorRecord>& path, ErrorNorm norm, std::string label = {});

struct ConvergenceOptions {
  StepperOptions stepper;
  EigConfig eig;
  /// When set, one trace CSV per run is written into this directory.
  std::optional<std::filesystem::path> trace_dir;
};

struct ConvergenceResult {
  std::vector<ErrorRecord> records;
  /// Refinement paths: one for the coupled rule, one per mesh otherwise.
  std::vector<std::vector<ErrorRecord>> paths;

  std::vector<EocTable> tables(ErrorNorm norm) const;
  bool any_failure() const;
};

/// One run on a given mesh: integrates, measures errors and attaches the
/// CFL report. Blow-ups and hard errors are recorded in the returned row.
ErrorRecord run_single(const ProblemSpec& spec, const Mesh& mesh, const BlockSystem& blocks,
                       SchemeKind scheme, double tau, const CflReport& cfl,
                       const ConvergenceOptions& options = {});

/// c_M and c_inv of a mesh (diffusion of `spec`, reaction terms dropped)
/// with a CFL report for step size tau.
CflReport cfl_for(const ProblemSpec& spec, const Mesh& mesh, double tau, const EigConfig& eig = {});

/// Runs the grid (disk meshes of the given target sizes) x (steps of the
/// rule) in lexicographic order of (h, tau).
ConvergenceResult run_convergence(const ProblemSpec& spec, SchemeKind scheme,
                                  const std::vector<double>& h_targets, const TauRule& rule,
                                  const ConvergenceOptions& options = {});

struct PlateauReport {
  enum class Status { Reached, Inconclusive };
  Status status = Status::Inconclusive;
  double plateau = 0.0;
  double floor = 0.0;
  double ratio = 0.0;
  std::string message;

  bool reached() const noexcept { return status == Status::Reached; }
};

/// `records` is a fixed-h sweep ordered by decreasing tau (at least four
/// points); `floor` is the reference run at the smallest tau.
PlateauReport detect_plateau(const std::vector<ErrorRecord>& records, const ErrorRecord& floor,
                             ErrorNorm norm = ErrorNorm::UL2);

std::string csv_header();
void write_csv(std::ostream& os, const std::vector<ErrorRecord>& records);
std::vector<ErrorRecord> read_csv(std::istream& is);

/// One file `<problem>_<scheme>_<norm>.dat` per norm, with a `tau error`
/// block per mesh size (blocks separated by two blank lines).
std::vector<std::filesystem::path> write_plot_data(const std::filesystem::path& dir,
                                                   const ConvergenceResult& result);
void write_summary(std::ostream& os, const ConvergenceResult& result);

/// Evaluates both sides of the discrete energy estimate of the Lie scheme
/// after every step:
///
///   |u^{n+1}|_A^2 + |p^{n+1}|_AG^2 + tau sum_k w |dp^{k+1}|_MG^2
///     <= |u^0|_A^2 + |p^0|_AG^2 + 2 tau |dp^0|_M22^2
///        + tau sum_k (|f_Omega^{k+1}|_{M^-1}^2 + |f_Gamma^{k+1}|_{MG^-1}^2)
///
/// with w = 1 - 4 c_M h - c_M alpha_Omega tau h - c_M c_inv tau / h.
class StabilityMonitor {
public:
  StabilityMonitor(const ProblemSpec& spec, const Mesh& mesh, const BlockSystem& blocks, double tau,
                   double c_M, double c_inv);

  void observe(std::size_t n, const StepState& state);
  StepObserver observer();

  double weight() const noexcept { return weight_; }
  std::size_t checked_steps() const noexcept { return lhs_.size(); }
  const std::vector<double>& lhs() const noexcept { return lhs_; }
  const std::vector<double>& rhs() const noexcept { return rhs_; }
  /// True when lhs <= rhs * (1 + slack) at every observed step.
  bool holds(double slack = 1e-8) const;
  double worst_ratio() const;

private:
  const ProblemSpec& spec_;
  const Mesh& mesh_;
  SparseMatrix mass_;
  SparseMatrix stiff_;
  SparseMatrix mass_gamma_;
  SparseMatrix stiff_gamma_;
  SparseMatrix m22_;
  double tau_;
  double weight_;
  double lhs_sum_ = 0.0;
  double rhs_fixed_ = 0.0;
  double rhs_sum_ = 0.0;
  std::vector<double> lhs_;
  std::vector<double> rhs_;
};

}  // namespace dynbc

#endif
