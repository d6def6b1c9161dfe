#include <gtest/gtest.h>

#include "ricnn/verify.hpp"

using namespace ricnn;

TEST(Verify, SuitesPassOnSmallRuns) {
  const VerifyOptions opts{.seed = 4, .instances = 3};
  for (const auto& r : {verify_equivariance(opts), verify_invariance_f64(opts), verify_invariance_f32(opts),
                        verify_transition_shift(opts), verify_dft_oracle(opts), verify_dft_shift(opts),
                        verify_lemma(opts)}) {
    EXPECT_TRUE(r.passed) << r.name << " max error " << r.max_error;
    EXPECT_GT(r.checks, 0u) << r.name;
  }
}

TEST(Verify, GradientSuitesPass) {
  const VerifyOptions opts{.seed = 5, .instances = 2};
  const auto results = verify_gradients(opts);
  EXPECT_EQ(results.size(), 7u);
  for (const auto& r : results) EXPECT_TRUE(r.passed) << r.name << " max error " << r.max_error;
}

TEST(Verify, PerturbedOriginFailsEquivariance) {
  const VerifyOptions opts{.seed = 0, .instances = 3, .perturb_origin = true};
  EXPECT_FALSE(verify_equivariance(opts).passed);
  EXPECT_FALSE(verify_invariance_f64(opts).passed);
}

TEST(Verify, ReportIsDeterministic) {
  const VerifyOptions opts{.seed = 2, .instances = 2};
  const auto a = format_report({verify_lemma(opts), verify_dft_shift(opts)}, opts);
  const auto b = format_report({verify_lemma(opts), verify_dft_shift(opts)}, opts);
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("2 of 2 suites passed"), std::string::npos) << a;
}
