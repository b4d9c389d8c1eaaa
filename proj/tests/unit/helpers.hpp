#pragma once

#include "ddgda/core.hpp"

#include <initializer_list>

namespace testing {

inline ddgda::Vec vec(std::initializer_list<double> values) {
  ddgda::Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double a : values)
    v[i++] = a;
  return v;
}

inline ddgda::Vec scalar(double a) { return ddgda::Vec::Constant(1, a); }

} // namespace testing
