#include "rwpi/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace rwpi {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t RngSeed::stream_seed(std::uint64_t index) const noexcept {
  return splitmix64(master ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

std::mt19937_64 RngSeed::stream(std::uint64_t index) const {
  return std::mt19937_64(stream_seed(index));
}

void fill_standard_normal(std::mt19937_64& gen, Eigen::Ref<Vector> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(gen);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  // shortest representation of the 12-digit value
  double rounded = std::strtod(buf, nullptr);
  char out[64];
  auto res = std::to_chars(out, out + sizeof out, rounded);
  return std::string(out, res.ptr);
}

}  // namespace rwpi
