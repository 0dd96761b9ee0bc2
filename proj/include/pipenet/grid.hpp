#pragma once

#include <cstddef>
#include <vector>

namespace pipenet {

/// Uniform grid on the unit edge 0 <= s <= 1.
class EdgeGrid {
 public:
  static constexpr std::size_t kMinPoints = 9;

  explicit EdgeGrid(std::size_t n_points = 257);

  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double node(std::size_t i) const { return static_cast<double>(i) * h_; }
  const std::vector<double>& nodes() const { return nodes_; }

  bool operator==(const EdgeGrid& o) const { return n_ == o.n_; }

 private:
  std::size_t n_;
  double h_;
  std::vector<double> nodes_;
};

}  // namespace pipenet
