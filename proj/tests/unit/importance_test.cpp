#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "emailad/error.hpp"
#include "emailad/importance.hpp"
#include "emailad/learners.hpp"
#include "support.hpp"

using namespace emailad;

namespace {

ImportanceReport report_of(const std::vector<double>& drops) {
  ImportanceReport r;
  for (std::size_t i = 0; i < drops.size(); ++i) r.features.push_back({"f" + std::to_string(i), drops[i], 0.0, 1});
  return r;
}

// Column 0 is the label (0/1), column 1 pure noise.
Matrix label_and_noise(std::size_t n, std::vector<int>& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix X(n, 2);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    X(i, 0) = y[i];
    X(i, 1) = g(rng);
  }
  return X;
}

}  // namespace

TEST_SUITE("importance") {
  TEST_CASE("zero-weight feature has zero drop") {
    auto X = testing::gaussian_matrix(200, 3, 1);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = X(i, 0) + X(i, 2) > 0;
    TrainedModel m;
    m.spec.algorithm = Algorithm::LogReg;
    m.parameters = LinearModel{{1.0, 0.0, 1.0}, 0.0};
    std::vector<std::string> names = {"a", "b", "c"};
    auto r = permutation_importance(m, X, y, names, 20, 5);
    CHECK(r.baseline_accuracy == 1.0);
    CHECK(r.features[1].mean_drop == 0.0);
    CHECK(r.features[1].stddev == 0.0);
    CHECK(r.features[0].mean_drop > 0.1);
    CHECK(r.features[1].repeats == 20);
  }

  TEST_CASE("label column under a stump drops by one half, noise by nothing") {
    std::vector<int> y;
    auto X = label_and_noise(400, y, 2);
    ModelSpec spec;
    spec.algorithm = Algorithm::DecisionTree;
    spec.hyperparameters = {{"max_depth", 1}};
    auto m = train(spec, X, y);
    std::vector<std::string> names = {"label", "noise"};
    auto r = permutation_importance(m, X, y, names, 20, 3);
    CHECK(std::fabs(r.features[0].mean_drop - 0.5) <= 0.05);
    CHECK(std::fabs(r.features[1].mean_drop) < 0.02);
    CHECK(r.ranking() == std::vector<std::size_t>{0, 1});
  }

  TEST_CASE("noise features barely move a forest") {
    std::vector<int> y;
    auto X = label_and_noise(300, y, 4);
    ModelSpec spec;
    spec.algorithm = Algorithm::RandomForest;
    spec.hyperparameters = {{"n_trees", 30}};
    auto m = train(spec, X, y);
    std::vector<std::string> names = {"label", "noise"};
    auto r = permutation_importance(m, X, y, names, 20, 6);
    CHECK(std::fabs(r.features[1].mean_drop) < 0.02);
  }

  TEST_CASE("importance is seeded and checks the fingerprint") {
    std::vector<int> y;
    auto X = label_and_noise(100, y, 8);
    X.schema_fingerprint = 5;
    ModelSpec spec;
    spec.algorithm = Algorithm::KNN;
    auto m = train(spec, X, y);
    std::vector<std::string> names = {"label", "noise"};
    CHECK(permutation_importance(m, X, y, names, 5, 1) == permutation_importance(m, X, y, names, 5, 1));
    X.schema_fingerprint = 6;
    CHECK_THROWS_AS(permutation_importance(m, X, y, names, 5, 1), FingerprintMismatch);
    X.schema_fingerprint = 5;
    CHECK_THROWS_AS(permutation_importance(m, X, y, names, 0, 1), InvalidArgument);
  }

  TEST_CASE("average_importance") {
    auto a = report_of({0.2, 0.0}), b = report_of({0.4, 0.1});
    a.baseline_accuracy = 0.9;
    b.baseline_accuracy = 0.7;
    std::vector<ImportanceReport> both = {a, b};
    auto avg = average_importance(both);
    CHECK(avg.features[0].mean_drop == doctest::Approx(0.3));
    CHECK(avg.features[1].mean_drop == doctest::Approx(0.05));
    CHECK(avg.baseline_accuracy == doctest::Approx(0.8));
  }

  TEST_CASE("select_top_m") {
    std::vector<double> drops(94);
    for (std::size_t i = 0; i < 94; ++i) drops[i] = static_cast<double>((i * 37) % 94) / 100.0;
    auto r = report_of(drops);
    auto top = select_top_m(r, 30);
    REQUIRE(top.size() == 30);
    for (std::size_t i = 1; i < 30; ++i) {
      auto idx = [&](const std::string& n) { return static_cast<std::size_t>(std::stoul(n.substr(1))); };
      CHECK(drops[idx(top[i - 1])] >= drops[idx(top[i])]);
    }
    CHECK(select_top_m(r, 1) == std::vector<std::string>{"f" + std::to_string(std::max_element(drops.begin(), drops.end()) - drops.begin())});

    auto zero = report_of(std::vector<double>(10, 0.0));
    CHECK(select_top_m(zero, 3) == std::vector<std::string>{"f0", "f1", "f2"});

    std::ostringstream diag;
    CHECK(select_top_m(zero, 30, &diag).size() == 10);
    CHECK_FALSE(diag.str().empty());
  }
}
