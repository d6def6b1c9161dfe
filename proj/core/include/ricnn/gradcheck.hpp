#pragma once

#include <functional>
#include <vector>

#include "ricnn/tensor.hpp"

namespace ricnn {

using ScalarFn = std::function<double(const Tensor<double>&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every element.
/// Throws NumericError if f returns a non-finite value.
Tensor<double> finite_diff_grad(const ScalarFn& f, const Tensor<double>& x, double h);

/// Discrete decisions taken by a forward pass (argmax picks, ReLU signs, ...).
using SignatureFn = std::function<std::vector<int>(const Tensor<double>&)>;

struct CheckedGradient {
  Tensor<double> gradient;
  /// 1 where both probes took the same decisions as x itself.
  std::vector<char> usable;
};

/// finite_diff_grad that also flags elements whose +/-h probes cross a kink,
/// i.e. change any entry of `signature` relative to the unperturbed input.
CheckedGradient finite_diff_grad_checked(const ScalarFn& f, const SignatureFn& signature,
                                         const Tensor<double>& x, double h);

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor);

}  // namespace ricnn
