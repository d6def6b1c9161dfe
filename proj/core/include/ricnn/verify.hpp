#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ricnn {

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t instances = 50;   // random instances per suite (per layer for gradients)
  bool perturb_origin = false;  // pool the origin over r < R only
};

struct SuiteResult {
  std::string name;
  std::string property;
  std::size_t instances = 0;
  std::size_t checks = 0;     // individual comparisons made
  std::size_t excluded = 0;   // gradient entries skipped next to a kink
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

/// Gradient comparisons use |a - b| / max(|a|, |b|, floor) with floor this
/// fraction of the largest analytic entry in the same tensor.
inline constexpr double kGradFloorFraction = 1e-2;
inline constexpr double kGradStep = 1e-6;

/// conic_forward(rot90(x, n)) == rot90(conic_forward(x), n) for R in
/// {1, 2, 3}, D in {1, 2}, all n; `instances` per (R, D). f64, abs < 1e-9.
SuiteResult verify_equivariance(const VerifyOptions& options);

/// Random RiCNN logits unchanged by quarter turns of the input, relative to
/// the largest logit: < 1e-9 in f64, < 1e-4 in f32.
SuiteResult verify_invariance_f64(const VerifyOptions& options);
SuiteResult verify_invariance_f32(const VerifyOptions& options);

/// Transition grid of rot90(a, n) equals the grid of a shifted by -nR.
SuiteResult verify_transition_shift(const VerifyOptions& options);

/// Fast 2D DFT against the double-sum oracle on power-of-two shapes.
SuiteResult verify_dft_oracle(const VerifyOptions& options);

/// |DFT| unchanged by every circular shift of its input.
SuiteResult verify_dft_shift(const VerifyOptions& options);

/// rot90(a * b) == rot90(a) * rot90(b) bit for bit.
SuiteResult verify_lemma(const VerifyOptions& options);

/// Backward of every layer against central differences, one suite per layer:
/// conic conv, standard conv, transition, |DFT|, dense, cross-entropy and the
/// whole model.
std::vector<SuiteResult> verify_gradients(const VerifyOptions& options);

std::vector<SuiteResult> run_all_suites(const VerifyOptions& options);

/// Fixed-width table, one line per suite, plus a summary line. Without
/// timings the text depends only on the options.
std::string format_report(const std::vector<SuiteResult>& results, const VerifyOptions& options,
                          bool timings = false);

}  // namespace ricnn
