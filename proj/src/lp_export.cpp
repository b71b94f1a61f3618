#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "entroute/error.hpp"
#include "entroute/lp.hpp"
#include "entroute/netio.hpp"

namespace entroute {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> sorted_order(const std::vector<std::string>& names) {
  std::vector<int> idx(names.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return names[a] < names[b]; });
  return idx;
}

std::vector<std::string> row_names(const LpModel& m) {
  std::vector<std::string> names;
  for (const auto& c : m.constraints) names.push_back(c.name);
  return names;
}

// Terms sorted by variable name, duplicates merged.
std::vector<LpTerm> canonical_terms(const LpModel& m, const std::vector<LpTerm>& terms) {
  std::vector<LpTerm> t = terms;
  std::sort(t.begin(), t.end(), [&](const LpTerm& a, const LpTerm& b) {
    return m.var_names[a.var] < m.var_names[b.var];
  });
  std::vector<LpTerm> out;
  for (const auto& x : t) {
    if (!out.empty() && out.back().var == x.var) out.back().coef += x.coef;
    else out.push_back(x);
  }
  return out;
}

void write_expr(std::ostringstream& os, const LpModel& m, const std::vector<LpTerm>& terms) {
  int on_line = 0;
  if (terms.empty()) os << " 0 " << m.var_names.front();
  for (const auto& t : terms) {
    if (on_line == 6) {
      os << "\n   ";
      on_line = 0;
    }
    os << (t.coef < 0 ? " - " : " + ") << num(std::fabs(t.coef)) << ' ' << m.var_names[t.var];
    ++on_line;
  }
}

std::string lp_text(const LpModel& m) {
  std::ostringstream os;
  os << "\\ entroute hypergraph flow model\n";
  os << "Maximize\n obj:";
  std::vector<LpTerm> obj;
  for (int j : sorted_order(m.var_names)) {
    if (m.objective[j] != 0.0) obj.push_back({j, m.objective[j]});
  }
  write_expr(os, m, obj);
  os << "\nSubject To\n";
  for (int i : sorted_order(row_names(m))) {
    const auto& c = m.constraints[i];
    os << ' ' << c.name << ':';
    write_expr(os, m, canonical_terms(m, c.terms));
    os << (c.sense == Sense::kLe ? " <= " : c.sense == Sense::kGe ? " >= " : " = ")
       << num(c.rhs) << '\n';
  }
  os << "Bounds\n";
  for (int j : sorted_order(m.var_names)) {
    if (std::isfinite(m.upper[j])) {
      os << " 0 <= " << m.var_names[j] << " <= " << num(m.upper[j]) << '\n';
    }
  }
  os << "End\n";
  return os.str();
}

// Free MPS. Minimization is the one sense every reader agrees on, so the
// objective row carries the negated coefficients.
std::string mps(const LpModel& m) {
  std::ostringstream os;
  os << "* entroute hypergraph flow model\n";
  os << "* objective row is negated: minimizing obj maximizes total delivered rate\n";
  os << "NAME entroute\nROWS\n N obj\n";
  const auto rorder = sorted_order(row_names(m));
  for (int i : rorder) {
    const auto& c = m.constraints[i];
    os << ' ' << (c.sense == Sense::kLe ? 'L' : c.sense == Sense::kGe ? 'G' : 'E') << ' '
       << c.name << '\n';
  }
  std::vector<std::vector<std::pair<std::string, double>>> col(m.num_vars());
  for (int i : rorder) {
    for (const auto& t : canonical_terms(m, m.constraints[i].terms)) {
      if (t.coef != 0.0) col[t.var].push_back({m.constraints[i].name, t.coef});
    }
  }
  os << "COLUMNS\n";
  for (int j : sorted_order(m.var_names)) {
    if (m.objective[j] != 0.0) {
      os << ' ' << m.var_names[j] << " obj " << num(-m.objective[j]) << '\n';
    }
    for (const auto& [row, v] : col[j]) {
      os << ' ' << m.var_names[j] << ' ' << row << ' ' << num(v) << '\n';
    }
    if (m.objective[j] == 0.0 && col[j].empty()) {
      os << ' ' << m.var_names[j] << " obj 0\n";
    }
  }
  os << "RHS\n";
  for (int i : rorder) {
    const auto& c = m.constraints[i];
    if (c.rhs != 0.0) os << " rhs " << c.name << ' ' << num(c.rhs) << '\n';
  }
  os << "BOUNDS\n";
  for (int j : sorted_order(m.var_names)) {
    if (std::isfinite(m.upper[j])) {
      os << " UP bnd " << m.var_names[j] << ' ' << num(m.upper[j]) << '\n';
    }
  }
  os << "ENDATA\n";
  return os.str();
}

}  // namespace

std::string format_lp(const LpModel& model, LpFormat format) {
  if (model.num_vars() == 0) {
    // Readers reject empty models; emit a single inert variable instead.
    LpModel inert = model;
    inert.add_variable("z_empty", 0.0, 0.0);
    return format_lp(inert, format);
  }
  return format == LpFormat::kLpText ? lp_text(model) : mps(model);
}

void export_lp(const LpModel& model, LpFormat format, const std::filesystem::path& path) {
  write_text_file(path, format_lp(model, format));
}

}  // namespace entroute
