#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace entroute {

enum class Sense { kLe, kGe, kEq };

struct LpTerm {
  int var;
  double coef;
};

struct LpConstraint {
  std::string name;
  std::vector<LpTerm> terms;
  Sense sense = Sense::kLe;
  double rhs = 0.0;
};

// max c^T x subject to the rows, 0 <= x <= upper.
struct LpModel {
  std::vector<std::string> var_names;
  std::vector<double> objective;
  std::vector<double> upper;
  std::vector<LpConstraint> constraints;

  int add_variable(std::string name, double obj = 0.0,
                   double ub = std::numeric_limits<double>::infinity());
  void add_constraint(std::string name, std::vector<LpTerm> terms, Sense sense, double rhs);
  int num_vars() const { return static_cast<int>(var_names.size()); }
  int num_rows() const { return static_cast<int>(constraints.size()); }
  // Largest violation of any row or bound at x.
  double max_violation(const std::vector<double>& x) const;
  double evaluate(const std::vector<double>& x) const;
};

struct SimplexOptions {
  int max_iterations = 0;        // 0: 50 * (rows + columns) + 1000
  int refactor_every = 64;       // basis reinversion period
  int degenerate_before_bland = 50;
  double tolerance = 1e-9;
};

struct LpSolution {
  double objective = 0.0;
  std::vector<double> values;     // per variable, clamped at 0 from -1e-9
  std::vector<double> duals;      // per constraint, sign as written
  std::vector<double> bound_duals;  // per variable upper bound
  int iterations = 0;
  double cs_residual = 0.0;       // largest complementary-slackness product
  double primal_residual = 0.0;   // largest row or bound violation
};

// Revised simplex over a sparse LU basis factorization with eta updates
// (Dantzig pricing, Bland's rule after a run of degenerate pivots, two
// phases when the slack basis is infeasible). NUMERICAL_FAILURE on the iteration cap, an
// infeasible or unbounded model, or a solution failing its certificate.
LpSolution solve_lp(const LpModel& model, const SimplexOptions& options = {});

enum class LpFormat { kLpText, kMps };

std::string format_lp(const LpModel& model, LpFormat format);
void export_lp(const LpModel& model, LpFormat format, const std::filesystem::path& path);

}  // namespace entroute
