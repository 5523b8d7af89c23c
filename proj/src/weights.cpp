#include "lppkit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lppkit {

std::string to_string(LatticePoint p) {
  return "(" + std::to_string(p.i) + "," + std::to_string(p.j) + ")";
}

namespace philox {
namespace {

constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;
constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

inline Counter round(Counter c, Key k) {
  std::uint32_t lo0, hi0, lo1, hi1;
  mulhilo(kM0, c[0], lo0, hi0);
  mulhilo(kM1, c[2], lo1, hi1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Counter philox4x32_10(Counter ctr, Key key) {
  for (int r = 0; r < 9; ++r) {
    ctr = round(ctr, key);
    key[0] += kW0;
    key[1] += kW1;
  }
  return round(ctr, key);
}

}  // namespace philox

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed ^ splitmix64(stream)) + index);
}

double uniform_open_closed(std::uint64_t bits) {
  // 53 random mantissa bits, shifted by one ulp so the range is (0, 1].
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

namespace {

philox::Key stream_key(std::uint64_t seed, WeightStream stream) {
  const std::uint64_t k = splitmix64(seed ^ (static_cast<std::uint64_t>(stream) << 56));
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

inline std::uint64_t draw_bits(std::int64_t i, std::int64_t j, const philox::Key& key) {
  const auto ui = static_cast<std::uint64_t>(i);
  const auto uj = static_cast<std::uint64_t>(j);
  const philox::Counter out = philox::philox4x32_10(
      {static_cast<std::uint32_t>(ui), static_cast<std::uint32_t>(ui >> 32),
       static_cast<std::uint32_t>(uj), static_cast<std::uint32_t>(uj >> 32)},
      key);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace

CoupledWeightField::CoupledWeightField(std::uint64_t master_seed, double alpha)
    : seed_(master_seed),
      alpha_(alpha),
      bulk_key_(stream_key(master_seed, WeightStream::Bulk)),
      boundary_key_(stream_key(master_seed, WeightStream::Boundary)) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("diagonal rate alpha must be positive and finite");
  }
}

double CoupledWeightField::bulk(std::int64_t i, std::int64_t j) const {
  return -std::log(uniform_open_closed(draw_bits(i, j, bulk_key_)));
}

double CoupledWeightField::boundary(std::int64_t i) const {
  return -std::log(uniform_open_closed(draw_bits(i, i, boundary_key_))) / alpha_;
}

double CoupledWeightField::weight_half(LatticePoint p) const {
  if (!in_half_plane(p)) throw OutsideHalfPlane(p);
  return p.i == p.j ? boundary(p.i) : bulk(p.i, p.j);
}

WeightWindow::WeightWindow(LatticeRect rect, double fill)
    : rect_(rect), bulk_(static_cast<std::size_t>(rect.cells()), fill) {
  init_diagonal_range();
  boundary_.assign(static_cast<std::size_t>(diag_hi_ - diag_lo_ + 1 > 0 ? diag_hi_ - diag_lo_ + 1 : 0),
                   fill);
}

WeightWindow::WeightWindow(const CoupledWeightField& field, LatticeRect rect)
    : rect_(rect), bulk_(static_cast<std::size_t>(rect.cells())) {
  std::size_t k = 0;
  for (std::int64_t j = rect.j0; j <= rect.j1; ++j) {
    for (std::int64_t i = rect.i0; i <= rect.i1; ++i) bulk_[k++] = field.bulk(i, j);
  }
  init_diagonal_range();
  for (std::int64_t i = diag_lo_; i <= diag_hi_; ++i) boundary_.push_back(field.boundary(i));
}

void WeightWindow::init_diagonal_range() {
  diag_lo_ = std::max(rect_.i0, rect_.j0);
  diag_hi_ = std::min(rect_.i1, rect_.j1);
}

void WeightWindow::set_bulk(LatticePoint p, double w) {
  if (!rect_.contains(p)) throw std::out_of_range("site " + to_string(p) + " outside weight window");
  bulk_[static_cast<std::size_t>((p.j - rect_.j0) * rect_.width() + (p.i - rect_.i0))] = w;
}

void WeightWindow::set_boundary(std::int64_t i, double u) {
  if (!has_boundary(i)) throw std::out_of_range("diagonal index outside weight window");
  boundary_[static_cast<std::size_t>(i - diag_lo_)] = u;
}

void WeightWindow::fill_boundary(double u) {
  for (double& v : boundary_) v = u;
}

}  // namespace lppkit
