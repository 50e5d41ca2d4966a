#pragma once

#include <vector>

#include "optreg/core/matrix.hpp"

namespace optreg {

/// K pairs (b⁽ᵏ⁾, x_true⁽ᵏ⁾).
struct TrainingSet {
  std::vector<Vector> b;
  std::vector<Vector> x;

  std::size_t size() const noexcept { return b.size(); }

  void add(Vector bk, Vector xk) {
    b.push_back(std::move(bk));
    x.push_back(std::move(xk));
  }

  /// The first k pairs.
  TrainingSet prefix(std::size_t k) const {
    require(k <= size(), ErrorKind::InvalidArgument, "prefix longer than the training set");
    return {std::vector<Vector>(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(k)),
            std::vector<Vector>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k))};
  }

  void validate(std::size_t data_len, std::size_t solution_len) const {
    require(!b.empty(), ErrorKind::InvalidArgument, "training set is empty");
    require(b.size() == x.size(), ErrorKind::InvalidArgument, "training set has unpaired entries");
    for (std::size_t k = 0; k < size(); ++k)
      require(b[k].size() == data_len && x[k].size() == solution_len, ErrorKind::InvalidArgument,
              "training pair " + std::to_string(k) + " has the wrong dimensions");
  }
};

}  // namespace optreg
