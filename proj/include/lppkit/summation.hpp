#pragma once

#include <cmath>

namespace lppkit {

/// Neumaier's variant of Kahan summation.
template <class T>
class NeumaierSum {
 public:
  void add(T v) {
    const T t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  NeumaierSum& operator+=(T v) {
    add(v);
    return *this;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_ = T(0);
  T comp_ = T(0);
};

}  // namespace lppkit
