#include "entroute/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "entroute/error.hpp"

namespace entroute {

int LpModel::add_variable(std::string name, double obj, double ub) {
  var_names.push_back(std::move(name));
  objective.push_back(obj);
  upper.push_back(ub);
  return num_vars() - 1;
}

void LpModel::add_constraint(std::string name, std::vector<LpTerm> terms, Sense sense,
                             double rhs) {
  constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

double LpModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, -x[j]);
    if (std::isfinite(upper[j])) worst = std::max(worst, x[j] - upper[j]);
  }
  for (const auto& c : constraints) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[t.var];
    switch (c.sense) {
      case Sense::kLe: worst = std::max(worst, lhs - c.rhs); break;
      case Sense::kGe: worst = std::max(worst, c.rhs - lhs); break;
      case Sense::kEq: worst = std::max(worst, std::fabs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

double LpModel::evaluate(const std::vector<double>& x) const {
  double v = 0.0;
  for (int j = 0; j < num_vars(); ++j) v += objective[j] * x[j];
  return v;
}

namespace {

using Entries = std::vector<std::pair<int, double>>;

// Basis factorization: sparse LU of the last refactored basis B0 followed by
// an eta file, B = B0 E_1 ... E_k.
class Basis {
 public:
  void factor(const std::vector<Entries>& cols, const std::vector<int>& basis, int m) {
    m_ = m;
    if (m_ == 0) return;
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      for (const auto& [r, v] : cols[basis[i]]) trip.emplace_back(r, i, v);
    }
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu_.compute(B);
    if (lu_.info() != Eigen::Success) {
      throw Error(ErrorCode::kNumericalFailure, "singular simplex basis");
    }
    etas_.clear();
  }

  Eigen::VectorXd ftran(const Eigen::VectorXd& a) const {
    if (m_ == 0) return a;
    Eigen::VectorXd x = lu_.solve(a);
    for (const Eta& e : etas_) {
      const double xr = x[e.r] / e.pivot;
      if (xr != 0.0) {
        for (const auto& [i, w] : e.w) x[i] -= w * xr;
      }
      x[e.r] = xr;
    }
    return x;
  }

  Eigen::VectorXd btran(Eigen::VectorXd c) const {
    if (m_ == 0) return c;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = c[it->r];
      for (const auto& [i, w] : it->w) s -= w * c[i];
      c[it->r] = s / it->pivot;
    }
    return lu_.transpose().solve(c);
  }

  // Column r of the basis replaced; w = B^{-1} a_q before the change.
  void update(int r, const Eigen::VectorXd& w) {
    Eta e{r, w[r], {}};
    for (int i = 0; i < m_; ++i) {
      if (i != r && w[i] != 0.0) e.w.emplace_back(i, w[i]);
    }
    etas_.push_back(std::move(e));
  }

  int etas() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int r;
    double pivot;
    Entries w;
  };
  int m_ = 0;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

class Simplex {
 public:
  Simplex(const LpModel& model, const SimplexOptions& opt) : model_(model), opt_(opt) {
    n_ = model.num_vars();
    // Rows: model constraints, then one row per finite upper bound.
    struct Row {
      std::vector<LpTerm> terms;
      Sense sense;
      double rhs;
    };
    std::vector<Row> rows;
    for (const auto& c : model.constraints) rows.push_back({c.terms, c.sense, c.rhs});
    bound_row_.assign(n_, -1);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(model.upper[j])) {
        bound_row_[j] = static_cast<int>(rows.size());
        rows.push_back({{{j, 1.0}}, Sense::kLe, model.upper[j]});
      }
    }
    m_ = static_cast<int>(rows.size());
    cols_.assign(n_, {});
    sign_.assign(m_, 1.0);
    b_ = Eigen::VectorXd::Zero(m_);
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      Row& r = rows[i];
      double s = 1.0;
      if (r.rhs < 0.0 || (r.rhs == 0.0 && r.sense == Sense::kGe)) s = -1.0;
      Sense sense = r.sense;
      if (s < 0.0 && sense == Sense::kLe) sense = Sense::kGe;
      else if (s < 0.0 && sense == Sense::kGe) sense = Sense::kLe;
      sign_[i] = s;
      b_[i] = s * r.rhs;
      for (const auto& t : r.terms) {
        if (t.coef != 0.0) cols_[t.var].push_back({i, s * t.coef});
      }
      if (sense != Sense::kEq) {
        cols_.push_back({{i, sense == Sense::kLe ? 1.0 : -1.0}});
        if (sense == Sense::kLe) basis_[i] = static_cast<int>(cols_.size()) - 1;
      }
    }
    first_artificial_ = static_cast<int>(cols_.size());
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < 0) {
        cols_.push_back({{i, 1.0}});
        basis_[i] = static_cast<int>(cols_.size()) - 1;
      }
    }
    // Merge duplicate (row) entries within a structural column.
    for (int j = 0; j < n_; ++j) {
      auto& c = cols_[j];
      std::sort(c.begin(), c.end());
      Entries merged;
      for (const auto& e : c) {
        if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
        else merged.push_back(e);
      }
      c = std::move(merged);
    }
    pos_.assign(cols_.size(), -1);
    for (int i = 0; i < m_; ++i) pos_[basis_[i]] = i;
    // Flow models are highly degenerate (almost every right-hand side is
    // zero). Solve with slightly relaxed rows first, then restore them.
    b_exact_ = b_;
    for (int i = 0; i < m_; ++i) {
      const double u = 0.5 + 0.5 * static_cast<double>((i * 2654435761u) % 1000u) / 1000.0;
      const double delta = 1e-7 * (1.0 + std::fabs(b_[i])) * u;
      const int slack = basis_[i] < first_artificial_ ? basis_[i] : -1;
      if (slack >= 0) b_[i] += delta;                    // <= row
      else if (b_[i] > 0.0 && sign_[i] != 0.0) b_[i] -= std::min(delta, 0.5 * b_[i]);
    }
    reinvert();
    max_iterations_ = opt.max_iterations > 0
                          ? opt.max_iterations
                          : 50 * (m_ + static_cast<int>(cols_.size())) + 1000;
  }

  LpSolution run() {
    const int total = static_cast<int>(cols_.size());
    if (first_artificial_ < total) {
      std::vector<double> cost(total, 0.0);
      for (int j = first_artificial_; j < total; ++j) cost[j] = -1.0;
      iterate(cost, total);
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] >= first_artificial_) infeas += xb_[i];
      }
      if (!(infeas <= 1e-7 * std::max(1.0, b_.cwiseAbs().maxCoeff()))) {
        throw Error(ErrorCode::kNumericalFailure, "LP is infeasible");
      }
      drive_out_artificials();
    }
    std::vector<double> cost(total, 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = model_.objective[j];
    iterate(cost, first_artificial_);
    b_ = b_exact_;
    reinvert();
    dual_cleanup(cost);
    iterate(cost, first_artificial_);
    reinvert();
    return extract(cost);
  }

 private:
  double column_dot(const Eigen::VectorXd& y, int j) const {
    double s = 0.0;
    for (const auto& [r, v] : cols_[j]) s += y[r] * v;
    return s;
  }

  Eigen::VectorXd column(int j) const {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(m_);
    for (const auto& [r, v] : cols_[j]) a[r] += v;
    return a;
  }

  Eigen::VectorXd duals(const std::vector<double>& cost) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
    return basis_lu_.btran(std::move(cb));
  }

  void reinvert() {
    basis_lu_.factor(cols_, basis_, m_);
    xb_ = basis_lu_.ftran(b_);
    for (int i = 0; i < m_; ++i) {
      if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
    }
  }

  void pivot(int r, int q, const Eigen::VectorXd& w) {
    const double theta = xb_[r] / w[r];
    xb_ -= theta * w;
    xb_[r] = theta;
    basis_lu_.update(r, w);
    pos_[basis_[r]] = -1;
    basis_[r] = q;
    pos_[q] = r;
    for (int i = 0; i < m_; ++i) {
      if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
    }
  }

  // Maximizes cost over columns [0, limit) plus whatever is basic.
  void iterate(const std::vector<double>& cost, int limit) {
    const double tol = opt_.tolerance;
    int degenerate = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= max_iterations_) {
        throw Error(ErrorCode::kNumericalFailure,
                    "simplex iteration cap reached (" + std::to_string(max_iterations_) + ")");
      }
      if (basis_lu_.etas() >= opt_.refactor_every) reinvert();
      const Eigen::VectorXd y = duals(cost);
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < limit; ++j) {
        if (pos_[j] >= 0) continue;
        const double d = cost[j] - column_dot(y, j);
        if (d <= tol * std::max(1.0, std::fabs(cost[j]))) continue;
        if (bland) {
          q = j;
          break;
        }
        if (d > best) {
          best = d;
          q = j;
        }
      }
      if (q < 0) return;
      const Eigen::VectorXd w = basis_lu_.ftran(column(q));
      if (!w.allFinite()) throw Error(ErrorCode::kNumericalFailure, "non-finite simplex column");
      // Harris ratio test: bound the step with slightly relaxed rows, then
      // take the largest pivot among rows blocking within that bound.
      const double kPivot = std::max(1e-7, 1e-7 * w.cwiseAbs().maxCoeff());
      constexpr double kRelax = 1e-9;
      double bound = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (w[i] > kPivot) bound = std::min(bound, (std::max(0.0, xb_[i]) + kRelax) / w[i]);
      }
      int r = -1;
      double ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (w[i] <= kPivot) continue;
        const double t = std::max(0.0, xb_[i]) / w[i];
        if (t > bound) continue;
        if (r < 0 || (bland ? basis_[i] < basis_[r] : w[i] > w[r])) {
          r = i;
          ratio = t;
        }
      }
      if (r < 0) throw Error(ErrorCode::kNumericalFailure, "LP is unbounded");
      pivot(r, q, w);
      ++iterations_;
      if (ratio <= 1e-12) {
        if (++degenerate >= opt_.degenerate_before_bland) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
    }
  }

  // Dual simplex pivots from an optimal basis made slightly infeasible by
  // restoring the exact right-hand side.
  void dual_cleanup(const std::vector<double>& cost) {
    constexpr double kFeasible = 1e-9;
    while (true) {
      if (iterations_ >= max_iterations_) {
        throw Error(ErrorCode::kNumericalFailure, "simplex iteration cap reached");
      }
      if (basis_lu_.etas() >= opt_.refactor_every) reinvert();
      int r = -1;
      double worst = -kFeasible;
      for (int i = 0; i < m_; ++i) {
        if (xb_[i] < worst) {
          worst = xb_[i];
          r = i;
        }
      }
      if (r < 0) return;
      const Eigen::VectorXd y = duals(cost);
      const Eigen::VectorXd rho = basis_lu_.btran(Eigen::VectorXd::Unit(m_, r));
      std::vector<std::pair<int, double>> row;
      double largest = 0.0;
      for (int j = 0; j < first_artificial_; ++j) {
        if (pos_[j] >= 0) continue;
        const double alpha = column_dot(rho, j);
        if (alpha < 0.0) {
          row.emplace_back(j, alpha);
          largest = std::max(largest, -alpha);
        }
      }
      const double tol = std::max(1e-9, 1e-7 * largest);
      int q = -1;
      double best = 0.0, best_alpha = 0.0;
      for (const auto& [j, alpha] : row) {
        if (-alpha <= tol) continue;
        const double d = std::max(0.0, column_dot(y, j) - cost[j]);
        const double t = d / -alpha;
        if (q < 0 || t < best - 1e-12 || (t <= best + 1e-12 && -alpha > -best_alpha)) {
          q = j;
          best = t;
          best_alpha = alpha;
        }
      }
      if (q < 0) throw Error(ErrorCode::kNumericalFailure, "LP is infeasible");
      pivot(r, q, basis_lu_.ftran(column(q)));
      ++iterations_;
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      const Eigen::VectorXd rho = basis_lu_.btran(Eigen::VectorXd::Unit(m_, i));
      for (int j = 0; j < first_artificial_; ++j) {
        if (pos_[j] >= 0) continue;
        if (std::fabs(column_dot(rho, j)) > 1e-7) {
          pivot(i, j, basis_lu_.ftran(column(j)));
          break;
        }
      }
    }
  }

  LpSolution extract(const std::vector<double>& cost) {
    LpSolution sol;
    sol.iterations = iterations_;
    std::vector<double> full(cols_.size(), 0.0);
    for (int i = 0; i < m_; ++i) full[basis_[i]] = xb_[i];
    sol.values.assign(full.begin(), full.begin() + n_);
    for (double& v : sol.values) {
      if (v < 0.0 && v >= -1e-9) v = 0.0;
    }
    sol.objective = model_.evaluate(sol.values);
    const Eigen::VectorXd y = duals(cost);
    const int rows = model_.num_rows();
    sol.duals.resize(rows);
    for (int i = 0; i < rows; ++i) sol.duals[i] = sign_[i] * y[i];
    sol.bound_duals.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (bound_row_[j] >= 0) sol.bound_duals[j] = y[bound_row_[j]];
    }
    double cs = 0.0, dual_infeas = 0.0;
    for (int j = 0; j < first_artificial_; ++j) {
      const double c = j < n_ ? cost[j] : 0.0;
      const double d = c - column_dot(y, j);
      dual_infeas = std::max(dual_infeas, d);
      cs = std::max(cs, std::fabs(full[j] * d));
    }
    sol.cs_residual = cs;
    sol.primal_residual = model_.max_violation(sol.values);
    const double scale = std::max(1.0, std::fabs(sol.objective));
    const bool certified = std::isfinite(sol.objective) && sol.primal_residual <= 1e-6 * scale &&
                           dual_infeas <= 1e-6 && cs <= 1e-6 * scale;
    if (!certified) {
      throw Error(ErrorCode::kNumericalFailure,
                  "simplex solution failed its optimality certificate");
    }
    return sol;
  }

  const LpModel& model_;
  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  int first_artificial_ = 0;
  int iterations_ = 0;
  int max_iterations_ = 0;
  std::vector<Entries> cols_;
  std::vector<double> sign_;
  std::vector<int> bound_row_;
  std::vector<int> basis_;
  std::vector<int> pos_;
  Eigen::VectorXd b_;
  Eigen::VectorXd b_exact_;
  Eigen::VectorXd xb_;
  Basis basis_lu_;
};

}  // namespace

LpSolution solve_lp(const LpModel& model, const SimplexOptions& options) {
  for (const auto& c : model.constraints) {
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= model.num_vars()) {
        throw Error(ErrorCode::kInvariantViolation, "constraint " + c.name + " names an unknown variable");
      }
    }
  }
  return Simplex(model, options).run();
}

}  // namespace entroute
