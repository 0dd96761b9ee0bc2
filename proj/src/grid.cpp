#include "pipenet/grid.hpp"

#include <stdexcept>
#include <string>

namespace pipenet {

EdgeGrid::EdgeGrid(std::size_t n_points) : n_(n_points) {
  if (n_points < kMinPoints)
    throw std::invalid_argument("EdgeGrid needs at least " + std::to_string(kMinPoints) +
                                " points, got " + std::to_string(n_points));
  h_ = 1.0 / static_cast<double>(n_ - 1);
  nodes_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) nodes_[i] = node(i);
  nodes_.back() = 1.0;
}

}  // namespace pipenet
