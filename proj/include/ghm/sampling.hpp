#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ghm/error.hpp"

namespace ghm {

/// Axis-aligned box; one closed interval per coordinate.
using Box = std::vector<std::pair<double, double>>;
using PointSet = std::vector<std::vector<double>>;

inline bool contains(const Box& box, std::span<const double> x, double slack = 0.0) {
  if (box.size() != x.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < box[i].first - slack || x[i] > box[i].second + slack) return false;
  return true;
}

/// Seeded sampler. Uses mt19937_64 and maps the top 53 bits to [0, 1) directly,
/// so streams are identical across standard library implementations.
class Sampler {
 public:
  static constexpr const char* name = "mt19937_64/v1";

  explicit Sampler(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi_inclusive) {
    return lo + static_cast<int>(uniform() * (hi_inclusive - lo + 1));
  }

  std::vector<double> point(const Box& box) {
    std::vector<double> x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) x[i] = uniform(box[i].first, box[i].second);
    return x;
  }

  std::vector<std::vector<double>> points(const Box& box, int count) {
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(point(box));
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

inline Box uniform_box(int n, double lo, double hi) { return Box(n, {lo, hi}); }

}  // namespace ghm
