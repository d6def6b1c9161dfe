#include "ricnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ricnn {

namespace {

double eval_finite(const ScalarFn& f, const Tensor<double>& x, std::size_t i) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw NumericError("finite-difference oracle: non-finite objective at element " + std::to_string(i));
  }
  return v;
}

}  // namespace

Tensor<double> finite_diff_grad(const ScalarFn& f, const Tensor<double>& x, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_grad: step must be positive");
  Tensor<double> probe = x;
  Tensor<double> grad(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = eval_finite(f, probe, i);
    probe[i] = orig - h;
    const double down = eval_finite(f, probe, i);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

CheckedGradient finite_diff_grad_checked(const ScalarFn& f, const SignatureFn& signature,
                                         const Tensor<double>& x, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_grad: step must be positive");
  const auto base = signature(x);
  Tensor<double> probe = x;
  CheckedGradient out{Tensor<double>(x.shape()), std::vector<char>(x.size(), 1)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = eval_finite(f, probe, i);
    const bool same_up = signature(probe) == base;
    probe[i] = orig - h;
    const double down = eval_finite(f, probe, i);
    const bool same_down = signature(probe) == base;
    probe[i] = orig;
    out.gradient[i] = (up - down) / (2.0 * h);
    out.usable[i] = same_up && same_down;
  }
  return out;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace ricnn
