#include "entroute/grid.hpp"

#include <algorithm>
#include <cmath>

#include "entroute/error.hpp"
#include "entroute/network.hpp"

namespace entroute {

namespace {

double snap_tol(double x) { return DiscreteGrid::kSnap * std::max(1.0, std::fabs(x)); }

void require_ascending(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyGrid, "grid has no values");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw Error(ErrorCode::kInvariantViolation,
                  "grid values must be strictly ascending");
    }
  }
}

}  // namespace

DiscreteGrid::DiscreteGrid(std::vector<double> values)
    : values_(std::move(values)) {
  require_ascending(values_);
}

std::optional<std::size_t> DiscreteGrid::floor_index(double x) const {
  auto it = std::upper_bound(values_.begin(), values_.end(), x + snap_tol(x));
  if (it == values_.begin()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(values_.begin(), it) - 1);
}

std::optional<double> DiscreteGrid::floor(double x) const {
  auto i = floor_index(x);
  if (!i) return std::nullopt;
  return values_[*i];
}

std::optional<std::size_t> DiscreteGrid::ceil_index(double x) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), x - snap_tol(x));
  if (it == values_.end()) return std::nullopt;
  return static_cast<std::size_t>(std::distance(values_.begin(), it));
}

std::optional<std::size_t> DiscreteGrid::index_of(double x) const {
  auto i = floor_index(x);
  if (i && std::fabs(values_[*i] - x) <= snap_tol(x)) return i;
  return std::nullopt;
}

FidelityGrid::FidelityGrid(std::vector<double> values)
    : DiscreteGrid(std::move(values)) {
  if (min() < 0.5 || max() > 1.0) {
    throw Error(ErrorCode::kInvariantViolation,
                "fidelity grid must lie within [0.5, 1.0]");
  }
}

FidelityGrid FidelityGrid::uniform(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) {
    throw Error(ErrorCode::kDomainError, "invalid uniform grid bounds");
  }
  std::vector<double> v;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    // Round to 12 decimals so that e.g. 0.5 + 82 * 0.005 is exactly 0.91.
    double x = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
    v.push_back(std::min(x, hi));
  }
  return FidelityGrid(std::move(v));
}

FidelityGrid FidelityGrid::standard() { return uniform(0.5, 1.0, 0.005); }

RateGrid::RateGrid(std::vector<double> values) : DiscreteGrid(std::move(values)) {
  if (!(min() > 0.0)) {
    throw Error(ErrorCode::kInvariantViolation, "rate grid must be positive");
  }
}

RateGrid RateGrid::geometric(double max_rate, std::span<const double> extra) {
  std::vector<double> v;
  for (double r = 1.0; r <= max_rate * (1.0 + 1e-12); r *= 2.0) v.push_back(r);
  for (double e : extra) {
    if (e > 0.0) v.push_back(e);
  }
  if (v.empty()) v.push_back(max_rate > 0.0 ? max_rate : 1.0);
  std::sort(v.begin(), v.end());
  std::vector<double> uniq;
  for (double x : v) {
    if (uniq.empty() || x > uniq.back() * (1.0 + 1e-12)) uniq.push_back(x);
  }
  return RateGrid(std::move(uniq));
}

RateGrid RateGrid::for_network(const QuantumNetwork& net) {
  std::vector<double> rates;
  for (const auto& l : net.links()) rates.push_back(l.rate);
  return geometric(net.max_rate(), rates);
}

RateGrid RateGrid::integers(long max_count) {
  std::vector<double> v;
  for (long i = 1; i <= std::max(1L, max_count); ++i) {
    v.push_back(static_cast<double>(i));
  }
  return RateGrid(std::move(v));
}

}  // namespace entroute
