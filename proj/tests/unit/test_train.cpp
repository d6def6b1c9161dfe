#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "ricnn/train.hpp"

using namespace ricnn;

namespace {

LabeledDataset random_dataset(std::size_t n, std::size_t m, std::size_t classes, Rng& rng) {
  LabeledDataset d;
  d.images = Tensor<float>({n, m, m, 1}, 0.0f);
  for (auto& v : d.images.values()) v = static_cast<float>(rng.uniform());
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(static_cast<std::uint32_t>(i % classes));
  d.classes = classes;
  return d;
}

ModelConfig tiny_ricnn(std::size_t classes) {
  ModelConfig c;
  c.arch = Architecture::Ricnn;
  c.input_extent = 9;
  c.conv = {ConicConvSpec{.filters = 4, .kernel = 3, .subdivisions = 1, .downsample = 2}};
  c.transition = TransitionSpec{8, 1, Interp::Bilinear};
  c.hidden = {16};
  c.classes = classes;
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Sgd, DecayAndBiasExclusion) {
  Tensor<double> w({1}, 1.0), b({1}, 1.0);
  std::vector<ParamRef<double>> params{{"w", &w, true}, {"b", &b, false}};
  sgd_step(params, {Tensor<double>({1}, 0.0), Tensor<double>({1}, 0.0)}, 0.1, 0.5);
  EXPECT_DOUBLE_EQ(w[0], 0.95);
  EXPECT_DOUBLE_EQ(b[0], 1.0);
  sgd_step(params, {Tensor<double>({1}, 1.0), Tensor<double>({1}, 2.0)}, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(w[0], 0.85);
  EXPECT_DOUBLE_EQ(b[0], 0.8);
}

TEST(Sgd, NonFiniteGradientLeavesParametersUntouched) {
  Tensor<double> w({2}, 1.0), b({1}, 1.0);
  std::vector<ParamRef<double>> params{{"w", &w, true}, {"b", &b, false}};
  EXPECT_THROW(sgd_step(params, {Tensor<double>({2}, 1.0), Tensor<double>({1}, std::numeric_limits<double>::quiet_NaN())},
                        0.1, 0.0),
               NumericError);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(b[0], 1.0);
}

TEST(Sgd, ConvergesOnQuadraticBowl) {
  // f(p) = 0.5 |p - t|^2 has gradient p - t.
  Tensor<double> p({3}, 0.0);
  const Tensor<double> target({3}, std::vector<double>{1, -2, 0.5});
  std::vector<ParamRef<double>> params{{"p", &p, false}};
  for (int i = 0; i < 200; ++i) {
    Tensor<double> g = p;
    add_inplace(g, target, -1.0);
    sgd_step(params, {g}, 0.1, 0.0);
  }
  EXPECT_LT(max_abs_diff(p, target), 1e-8);
}

TEST(Augment, IdentityWhenDisabled) {
  Rng rng(60);
  Tensor<float> img({5, 5, 1}, 0.0f);
  img(0, 1, 0) = 1.0f;
  const auto [out, label] = augment(img, 7, rng, AugmentConfig{false, 0});
  EXPECT_EQ(out, img);
  EXPECT_EQ(label, 7u);
}

TEST(Augment, ProducesEveryQuarterTurn) {
  Rng rng(61);
  Tensor<float> img({5, 5, 1}, 0.0f);
  img(0, 1, 0) = 1.0f;
  std::vector<int> seen(4, 0);
  for (int t = 0; t < 200; ++t) {
    const auto [out, label] = augment(img, 0, rng, AugmentConfig{true, 0});
    int match = -1;
    for (int n = 0; n < 4; ++n) {
      if (out == rot90(img, n)) match = n;
    }
    ASSERT_GE(match, 0);
    ++seen[static_cast<std::size_t>(match)];
  }
  for (int c : seen) EXPECT_GT(c, 20);
}

TEST(Augment, JitterStaysInRange) {
  Rng rng(62);
  Tensor<float> img({9, 9, 1}, 0.0f);
  img(4, 4, 0) = 1.0f;
  for (int t = 0; t < 100; ++t) {
    const auto [out, label] = augment(img, 0, rng, AugmentConfig{false, 2});
    float total = 0;
    for (std::size_t i = 0; i < 9; ++i) {
      for (std::size_t j = 0; j < 9; ++j) {
        if (out(i, j, 0) != 0.0f) {
          EXPECT_LE(std::abs(static_cast<int>(i) - 4), 2);
          EXPECT_LE(std::abs(static_cast<int>(j) - 4), 2);
        }
        total += out(i, j, 0);
      }
    }
    EXPECT_EQ(total, 1.0f);
  }
}

TEST(Train, SeededRunIsReproducible) {
  Rng rng(63);
  const auto data = random_dataset(12, 9, 3, rng);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.max_steps = 12;
  tc.eval_every = 4;
  tc.seed = 5;
  Model<double> a(tiny_ricnn(3)), b(tiny_ricnn(3));
  a.initialize(1);
  b.initialize(1);
  const auto ra = train(a, data, nullptr, tc);
  const auto rb = train(b, data, nullptr, tc);
  ASSERT_EQ(ra.log.size(), 3u);
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    EXPECT_EQ(ra.log[i].step, rb.log[i].step);
    EXPECT_EQ(ra.log[i].loss, rb.log[i].loss);
    EXPECT_EQ(ra.log[i].eval_acc, rb.log[i].eval_acc);
  }
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i].value, *pb[i].value);
}

TEST(Train, SingleClassIsPerfect) {
  Rng rng(64);
  const auto data = random_dataset(5, 9, 1, rng);
  Model<float> m(tiny_ricnn(1));
  m.initialize(2);
  EXPECT_EQ(evaluate(m, data).accuracy, 1.0);
  TrainConfig tc;
  tc.batch_size = 5;
  tc.max_steps = 1;
  tc.eval_every = 1;
  EXPECT_EQ(train(m, data, nullptr, tc).best_eval_accuracy, 1.0);
}

TEST(Train, OverfitsTenImages) {
  Rng rng(65);
  const auto data = random_dataset(10, 9, 10, rng);
  Model<float> m(tiny_ricnn(10));
  m.initialize(3);
  TrainConfig tc;
  tc.batch_size = 10;
  tc.learning_rate = 0.05;
  tc.weight_decay = 0.0;
  tc.augment = AugmentConfig{false, 0};
  tc.max_steps = 500;
  tc.eval_every = 50;
  const auto r = train(m, data, nullptr, tc);
  EXPECT_EQ(r.best_eval_accuracy, 1.0);
}

TEST(Train, InvariancePersistsAfterTraining) {
  Rng rng(66);
  const auto data = random_dataset(8, 9, 4, rng);
  Model<float> m(tiny_ricnn(4));
  m.initialize(4);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.learning_rate = 0.05;
  tc.max_steps = 40;
  tc.eval_every = 40;
  train(m, data, nullptr, tc);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = m.prepare_input(data.image(i));
    const auto out = m.forward(x);
    for (int n = 1; n < 4; ++n) {
      EXPECT_LE(max_abs_diff(m.forward(rot90(x, n)), out), 1e-6 * std::max(1.0, max_abs(out)));
    }
  }
}

TEST(Train, NonFiniteLossAborts) {
  Rng rng(67);
  auto data = random_dataset(4, 9, 2, rng);
  data.images[0] = std::numeric_limits<float>::infinity();
  Model<double> m(tiny_ricnn(2));
  m.initialize(1);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.max_steps = 1;
  tc.eval_every = 1;
  tc.augment = AugmentConfig{false, 0};
  EXPECT_THROW(train(m, data, nullptr, tc), NumericError);
}

TEST(Train, ConfigValidation) {
  TrainConfig tc;
  tc.batch_size = 0;
  EXPECT_THROW(validate(tc), ValidationError);
  tc = TrainConfig{};
  tc.learning_rate = 0.0;
  EXPECT_THROW(validate(tc), ValidationError);
  EXPECT_NO_THROW(validate(TrainConfig{}));
}

TEST(Evaluate, PerfectPredictor) {
  Tensor<double> scores({4, 2}, std::vector<double>{0.9, 0.1, 0.2, 0.8, 0.7, 0.3, 0.4, 0.6});
  const auto r = evaluate_scores(scores, {0, 1, 0, 1}, 2);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.mean_ap, 1.0);
  EXPECT_EQ(r.per_class_count[0], 2u);
}

TEST(Evaluate, SingleCorrectExample) {
  const auto r = evaluate_scores(Tensor<double>({1, 3}, std::vector<double>{0.1, 0.7, 0.2}), {1}, 3);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_TRUE(std::isnan(r.per_class_ap[0]));
  EXPECT_EQ(r.per_class_ap[1], 1.0);
  EXPECT_EQ(r.mean_ap, 1.0);
}

TEST(Evaluate, HandComputedAveragePrecision) {
  // class 0 scores rank examples 2, 0, 3, 1; positives are 0 and 1.
  // precision at rank 2 is 1/2, at rank 4 is 2/4.
  Tensor<double> scores({4, 2}, std::vector<double>{0.8, 0.2, 0.1, 0.9, 0.9, 0.1, 0.5, 0.5});
  const auto r = evaluate_scores(scores, {0, 0, 1, 1}, 2);
  EXPECT_DOUBLE_EQ(r.per_class_ap[0], 0.5);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.25);  // only example 0 is right; the tie in example 3 goes to class 0
}

TEST(Evaluate, RandomScoresNearHalf) {
  Rng rng(68);
  const std::size_t n = 1000;
  Tensor<double> scores({n, 2}, 0.0);
  std::vector<std::uint32_t> labels;
  for (std::size_t i = 0; i < n; ++i) {
    scores(i, 0) = rng.uniform();
    scores(i, 1) = rng.uniform();
    labels.push_back(static_cast<std::uint32_t>(i % 2));
  }
  const double sigma = std::sqrt(0.25 / n);
  EXPECT_NEAR(evaluate_scores(scores, labels, 2).accuracy, 0.5, 3 * sigma);
}

TEST(Evaluate, EmptyInputThrows) {
  EXPECT_THROW(evaluate_scores(Tensor<double>({1, 2}, 0.0), {}, 2), ValidationError);
}

TEST(MetricsCsv, HeaderAndRows) {
  const auto path = std::filesystem::temp_directory_path() / "ricnn_metrics_test.csv";
  write_metrics_csv(path, {{10, 1.5, 0.25}, {20, 1.25, 0.5}});
  EXPECT_EQ(read_file(path), "step,loss,eval_acc\n10,1.5,0.250000\n20,1.25,0.500000\n");
  std::filesystem::remove(path);
}
