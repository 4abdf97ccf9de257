#include "taskeval/core/matrix.hpp"

#include <stdexcept>

namespace taskeval {

void RealMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && values_.empty()) {
    cols_ = values.size();
  } else if (values.size() != cols_) {
    throw std::invalid_argument("row width " + std::to_string(values.size()) +
                                " does not match matrix width " + std::to_string(cols_));
  }
  values_.insert(values_.end(), values.begin(), values.end());
  ++rows_;
}

}  // namespace taskeval
