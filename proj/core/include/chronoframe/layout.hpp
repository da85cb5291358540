#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chronoframe/errors.hpp"

namespace chronoframe {

struct Factor {
  std::string label;
  long dim = 0;

  friend bool operator==(const Factor&, const Factor&) = default;
};

// Ordered list of labeled tensor factors. The order is fixed at construction
// and defines the index strides: factor 0 is slowest (Kronecker convention).
// Layout equality requires identical label order, so frame-dependent
// factorizations stay distinguishable.
class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<Factor> factors);

  long dim() const { return dim_; }
  std::size_t factor_count() const { return factors_.size(); }
  const Factor& factor(std::size_t i) const { return factors_.at(i); }
  const std::vector<Factor>& factors() const { return factors_; }

  bool has(std::string_view label) const;
  std::optional<std::size_t> find(std::string_view label) const;
  // Position of a label, or UnknownFactor.
  std::size_t require(std::string_view label) const;

  // Row-major stride of factor i (product of dims of the faster factors).
  long stride(std::size_t i) const;

  // Layout with one factor removed, order preserved.
  SpaceLayout without(std::string_view label) const;
  // Layout with a factor inserted at position `pos`.
  SpaceLayout inserted(std::size_t pos, Factor f) const;
  // Sub-layout of the given labels, in this layout's order.
  SpaceLayout subset(const std::vector<std::string>& labels) const;

  // Concatenation; throws LabelCollision on duplicate labels.
  static SpaceLayout concat(const SpaceLayout& a, const SpaceLayout& b);

  friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

 private:
  std::vector<Factor> factors_;
  long dim_ = 1;
};

}  // namespace chronoframe
