// Acceptance runner: one PASS/FAIL/NOT RUN line per criterion. Exits 1 if
// any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ricnn/verify.hpp"

namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, NotRun };

struct Line {
  int id;
  Outcome outcome;
  std::string detail;
};

struct Env {
  std::string cli;
  fs::path work;
  fs::path configs;
  std::uint64_t seed = 0;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fix(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs the CLI with output appended to `log`; returns the exit status.
int run_cli(const Env& env, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + env.cli + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Highest eval_acc in a metrics.csv, or -1 if unreadable.
double best_eval_accuracy(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  if (!std::getline(in, line)) return -1.0;
  double best = -1.0;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) continue;
    best = std::max(best, std::stod(line.substr(comma + 1)));
  }
  return best;
}

// Every regular file under `dir`, relative path -> bytes.
std::vector<std::pair<std::string, std::string>> tree(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  }
  std::sort(files.begin(), files.end());
  return files;
}

Line suite_line(int id, const std::vector<ricnn::SuiteResult>& results, double seconds, double budget) {
  bool ok = seconds < budget;
  std::ostringstream d;
  for (const auto& r : results) {
    ok = ok && r.passed;
    d << r.name << " max " << sci(r.max_error) << " (tol " << sci(r.tolerance) << ", " << r.instances
      << " instances) ";
  }
  d << "in " << fix(seconds, 1) << " s";
  if (budget < 1e9) d << " (budget " << fix(budget, 0) << " s)";
  return {id, ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

Line criterion1(const Env& env) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = ricnn::verify_equivariance({.seed = env.seed, .instances = 50});
  return suite_line(1, {r}, since(t0), 60.0);
}

Line criterion2(const Env& env) {
  const auto t0 = std::chrono::steady_clock::now();
  const ricnn::VerifyOptions o{.seed = env.seed, .instances = 20};
  return suite_line(2, {ricnn::verify_invariance_f64(o), ricnn::verify_invariance_f32(o)}, since(t0), 1e18);
}

Line criterion3(const Env& env) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = ricnn::verify_gradients({.seed = env.seed, .instances = 50});
  return suite_line(3, results, since(t0), 300.0);
}

Line criterion4(const Env& env) {
  const auto t0 = std::chrono::steady_clock::now();
  const ricnn::VerifyOptions o{.seed = env.seed, .instances = 50};
  return suite_line(4, {ricnn::verify_dft_oracle(o), ricnn::verify_dft_shift(o)}, since(t0), 1e18);
}

Line criterion5(const Env& env) {
  const auto t0 = std::chrono::steady_clock::now();
  return suite_line(5, {ricnn::verify_lemma({.seed = env.seed, .instances = 50})}, since(t0), 1e18);
}

Line criterion6(const Env& env) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = env.work / "synthetic";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";
  const std::string cfg = "--config \"" + (env.configs / "synthetic.json").string() + "\" --seed " + std::to_string(env.seed);
  if (run_cli(env, "generate " + cfg + " --out \"" + (dir / "data").string() + "\"", log) != 0) {
    return {6, Outcome::Fail, "generate failed, see " + log.string()};
  }
  double acc[2] = {-1, -1};
  const char* arch[2] = {"ricnn", "cnn"};
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / arch[i];
    const int rc = run_cli(env,
                           "train " + cfg + " --arch " + arch[i] + " --train \"" + (dir / "data" / "train").string() +
                               "\" --test \"" + (dir / "data" / "test").string() + "\" --out \"" + out.string() + "\"",
                           log);
    if (rc != 0) return {6, Outcome::Fail, std::string("train ") + arch[i] + " exited " + std::to_string(rc)};
    acc[i] = best_eval_accuracy(out / "metrics.csv");
  }
  const bool ok = acc[0] > acc[1] && acc[0] > 0.20;
  return {6, ok ? Outcome::Pass : Outcome::Fail,
          "best test accuracy ricnn " + fix(acc[0]) + " vs cnn " + fix(acc[1]) + " (need ricnn > cnn and > 0.2000), " +
              fix(since(t0) / 60.0, 1) + " min"};
}

Line criterion7(const Env& env) {
  const char* root = std::getenv("RICNN_MNIST_DIR");
  if (!root || !*root) return {7, Outcome::NotRun, "set RICNN_MNIST_DIR to the rotated MNIST .amat directory"};
  const fs::path train = fs::path(root) / "mnist_all_rotation_normalized_float_train_valid.amat";
  const fs::path test = fs::path(root) / "mnist_all_rotation_normalized_float_test.amat";
  if (!fs::exists(train) || !fs::exists(test)) {
    return {7, Outcome::NotRun, "expected " + train.filename().string() + " and " + test.filename().string() + " in " + root};
  }
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir = env.work / "mnist";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";
  const std::string cfg = "--config \"" + (env.configs / "mnist.json").string() + "\" --seed " + std::to_string(env.seed);
  double err[2] = {-1, -1};
  const char* arch[2] = {"ricnn", "cnn"};
  for (int i = 0; i < 2; ++i) {
    const fs::path out = dir / arch[i];
    int rc = run_cli(env, "train " + cfg + " --arch " + arch[i] + " --train \"" + train.string() + "\" --out \"" +
                              out.string() + "\"",
                     log);
    if (rc != 0) return {7, Outcome::Fail, std::string("train ") + arch[i] + " exited " + std::to_string(rc)};
    rc = run_cli(env, "evaluate " + cfg + " --checkpoint \"" + (out / "best").string() + "\" --test \"" + test.string() +
                          "\" --out \"" + (out / "eval").string() + "\"",
                 log);
    if (rc != 0) return {7, Outcome::Fail, std::string("evaluate ") + arch[i] + " exited " + std::to_string(rc)};
    err[i] = nlohmann::json::parse(slurp(out / "eval" / "evaluation.json")).at("test_error_percent").get<double>();
  }
  const bool ok = err[0] <= 15.0 && err[0] < err[1];
  return {7, ok ? Outcome::Pass : Outcome::Fail,
          "test error ricnn " + fix(err[0], 2) + "% vs cnn " + fix(err[1], 2) + "% (need <= 15% and lower), " +
              fix(since(t0) / 60.0, 1) + " min"};
}

Line criterion8(const Env& env) {
  const fs::path dir = env.work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";
  const std::string cfg = "--config \"" + (env.configs / "tiny.json").string() + "\" --seed " + std::to_string(env.seed + 1);
  // Both runs use the same command lines and output paths; the first is
  // moved aside before the second starts.
  const fs::path base = dir / "run";
  for (const char* run : {"a", "b"}) {
    if (run_cli(env, "generate " + cfg + " --out \"" + (base / "data").string() + "\"", log) != 0 ||
        run_cli(env, "train " + cfg + " --train \"" + (base / "data" / "train").string() + "\" --test \"" +
                         (base / "data" / "test").string() + "\" --out \"" + (base / "train").string() + "\"",
                log) != 0 ||
        run_cli(env, "evaluate " + cfg + " --checkpoint \"" + (base / "train" / "best").string() + "\" --test \"" +
                         (base / "data" / "test").string() + "\" --out \"" + (base / "eval").string() + "\"",
                log) != 0 ||
        run_cli(env, "verify --instances 3 --seed " + std::to_string(env.seed) + " --out \"" + (base / "verify").string() + "\"",
                log) != 0) {
      return {8, Outcome::Fail, "a command failed, see " + log.string()};
    }
    fs::rename(base, dir / run);
  }
  std::size_t files = 0;
  for (const char* part : {"data", "train", "eval", "verify"}) {
    const auto a = tree(dir / "a" / part);
    const auto b = tree(dir / "b" / part);
    if (a.empty()) return {8, Outcome::Fail, std::string(part) + " produced no files"};
    if (a.size() != b.size()) return {8, Outcome::Fail, std::string(part) + ": different file sets"};
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) return {8, Outcome::Fail, std::string(part) + "/" + a[i].first + " differs"};
      ++files;
    }
  }
  return {8, Outcome::Pass, std::to_string(files) + " files byte-identical across two seeded runs of generate, train, evaluate, verify"};
}

Line criterion9(const Env& env) {
  const fs::path dir = env.work / "negative_control";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path log = dir / "log.txt";
  const int rc = run_cli(env, "verify --perturb-origin --seed " + std::to_string(env.seed) + " --out \"" + dir.string() + "\"", log);
  const auto report = slurp(dir / "verify_report.txt");
  bool equivariance_failed = false;
  std::istringstream lines(report);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("equivariance ", 0) == 0 && line.find("FAIL") != std::string::npos) equivariance_failed = true;
  }
  const bool ok = rc == 2 && equivariance_failed;
  return {9, ok ? Outcome::Pass : Outcome::Fail,
          "verify --perturb-origin exited " + std::to_string(rc) + ", equivariance suite " +
              (equivariance_failed ? "FAIL" : "did not fail")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  Env env;
  std::string only;
  app.add_option("--cli", env.cli, "Path to the ricnn executable")->required();
  app.add_option("--work", env.work, "Scratch directory")->required();
  app.add_option("--configs", env.configs, "Directory holding synthetic.json, mnist.json and tiny.json")->required();
  app.add_option("--seed", env.seed, "Seed for every criterion");
  app.add_option("--only", only, "Comma-separated criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) selected.insert(std::stoi(tok));
  }
  fs::create_directories(env.work);

  const std::vector<std::function<Line(const Env&)>> criteria = {criterion1, criterion2, criterion3,
                                                                  criterion4, criterion5, criterion6,
                                                                  criterion7, criterion8, criterion9};
  bool failed = false;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Line line;
    try {
      line = criteria[i](env);
    } catch (const std::exception& e) {
      line = {id, Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = line.outcome == Outcome::Pass ? "PASS" : line.outcome == Outcome::Fail ? "FAIL" : "NOT RUN";
    std::cout << "criterion " << id << ": " << tag << "  " << line.detail << std::endl;
    failed = failed || line.outcome == Outcome::Fail;
  }
  return failed ? 1 : 0;
}
