#pragma once

#include <algorithm>
#include <charconv>
#include <compare>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ghm/error.hpp"

namespace ghm {

/// Largest supported ambient dimension.
inline constexpr int max_dimension = 12;

/// Strictly increasing tuple of 0-based axes. Text form is 1-based and comma-joined ("1,2,4").
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> axes) : MultiIndex(std::vector<int>(axes)) {}
  explicit MultiIndex(std::vector<int> axes) : axes_(std::move(axes)) {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (axes_[i] < 0) throw InvalidArgument("multi-index axis must be nonnegative");
      if (i > 0 && axes_[i] <= axes_[i - 1]) throw InvalidArgument("multi-index must be strictly increasing");
    }
  }

  int degree() const { return static_cast<int>(axes_.size()); }
  int operator[](std::size_t i) const { return axes_[i]; }
  const std::vector<int>& axes() const { return axes_; }
  auto begin() const { return axes_.begin(); }
  auto end() const { return axes_.end(); }

  bool contains(int axis) const { return std::binary_search(axes_.begin(), axes_.end(), axis); }

  /// Slot of `axis`, or -1 when absent.
  int slot_of(int axis) const {
    auto it = std::lower_bound(axes_.begin(), axes_.end(), axis);
    return it != axes_.end() && *it == axis ? static_cast<int>(it - axes_.begin()) : -1;
  }

  MultiIndex without_slot(int slot) const {
    MultiIndex r;
    r.axes_.reserve(axes_.size() - 1);
    for (int i = 0; i < degree(); ++i)
      if (i != slot) r.axes_.push_back(axes_[i]);
    return r;
  }

  bool fits(int n) const { return axes_.empty() || axes_.back() < n; }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(axes_[i] + 1);
    }
    return s;
  }

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> axes_;
};

/// Sort an arbitrary axis tuple. Sign is the permutation parity, or 0 if an axis repeats.
inline std::pair<MultiIndex, int> sort_with_sign(std::vector<int> axes) {
  int sign = 1;
  // Insertion sort counting transpositions; tuples are short.
  for (std::size_t i = 1; i < axes.size(); ++i) {
    for (std::size_t j = i; j > 0 && axes[j - 1] > axes[j]; --j) {
      std::swap(axes[j - 1], axes[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < axes.size(); ++i)
    if (axes[i] == axes[i - 1]) return {MultiIndex{}, 0};
  return {MultiIndex(std::move(axes)), sign};
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<MultiIndex> combinations(int n, int k) {
  std::vector<MultiIndex> out;
  if (k < 0 || k > n) return out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.emplace_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == n - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

inline long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Parse "1,2,4" (1-based, strictly increasing) into a MultiIndex over dimension n.
inline MultiIndex parse_multi_index(std::string_view text, int n) {
  std::vector<int> axes;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(pos, comma - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
      throw InvalidArgument("malformed multi-index '" + std::string(text) + "'");
    if (v < 1 || v > n)
      throw InvalidArgument("multi-index '" + std::string(text) + "' has axis outside 1.." + std::to_string(n));
    axes.push_back(v - 1);
    pos = comma + 1;
  }
  for (std::size_t i = 1; i < axes.size(); ++i)
    if (axes[i] <= axes[i - 1])
      throw InvalidArgument("multi-index '" + std::string(text) + "' is not strictly increasing");
  return MultiIndex(std::move(axes));
}

}  // namespace ghm
