#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace entroute {

class QuantumNetwork;

// Strictly ascending finite lattice of reals with floor/ceil lookup.
// Lookups treat values within kSnap of a lattice point as equal to it so
// that formula results landing on a grid value in exact arithmetic are not
// pushed one cell down by rounding noise.
class DiscreteGrid {
 public:
  static constexpr double kSnap = 1e-12;

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

  // Index of the largest value <= x, or nullopt when x is below min().
  std::optional<std::size_t> floor_index(double x) const;
  std::optional<double> floor(double x) const;
  // Index of the smallest value >= x, or nullopt when x is above max().
  std::optional<std::size_t> ceil_index(double x) const;
  // Index of an exact member (within kSnap).
  std::optional<std::size_t> index_of(double x) const;

  friend bool operator==(const DiscreteGrid&, const DiscreteGrid&) = default;

 protected:
  DiscreteGrid() = default;
  explicit DiscreteGrid(std::vector<double> values);

  std::vector<double> values_;
};

class FidelityGrid : public DiscreteGrid {
 public:
  // Values must be strictly increasing within [0.5, 1.0].
  explicit FidelityGrid(std::vector<double> values);
  // Uniform lattice lo, lo+step, ..., hi (hi included when reachable).
  static FidelityGrid uniform(double lo, double hi, double step);
  // Step 0.005 over [0.5, 1.0] (101 values).
  static FidelityGrid standard();
};

class RateGrid : public DiscreteGrid {
 public:
  // Values must be strictly increasing and positive.
  explicit RateGrid(std::vector<double> values);
  // Geometric 1, 2, 4, ... up to `max_rate`, merged with `extra` values.
  static RateGrid geometric(double max_rate, std::span<const double> extra = {});
  // Geometric lattice up to the network's max link rate plus every link rate.
  static RateGrid for_network(const QuantumNetwork& net);
  // 1, 2, ..., max_count.
  static RateGrid integers(long max_count);
};

}  // namespace entroute
