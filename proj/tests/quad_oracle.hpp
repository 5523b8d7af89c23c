#pragma once

// Binary128 evaluation of the shape function and the diagonal deficits, used
// as an independent check of the long double kernels.

#include <quadmath.h>

#include <cstdint>

#include "lppkit/shape.hpp"

namespace oracle {

inline __float128 shape_q(std::int64_t di, std::int64_t dj) {
  const __float128 r = sqrtq(static_cast<__float128>(di + 1)) + sqrtq(static_cast<__float128>(dj + 1));
  return r * r;
}

inline __float128 shape_q(lppkit::LatticePoint p, lppkit::LatticePoint q) {
  return shape_q(q.i - p.i, q.j - p.j);
}

inline __float128 deficit_i_q(const lppkit::ShapeParams& p, std::int64_t i, std::int64_t j) {
  const auto x1 = p.barrier_start(), x2 = p.barrier_end();
  return shape_q(x1, {j, j}) + shape_q({i, i}, x2) - static_cast<__float128>(8 * p.M * p.n);
}

inline __float128 deficit_ii_q(const lppkit::ShapeParams& p, std::int64_t i, std::int64_t j, std::int64_t s,
                               std::int64_t t) {
  const auto x1 = p.barrier_start(), x2 = p.barrier_end();
  return shape_q(x1, {j, j}) + shape_q({i, i}, {t, t}) + shape_q({s, s}, x2) -
         static_cast<__float128>(8 * p.M * p.n);
}

}  // namespace oracle
