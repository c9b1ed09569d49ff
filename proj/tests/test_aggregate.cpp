#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "voiceaudit/aggregate.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"

using namespace voiceaudit;

namespace {

std::vector<double> random_list(Rng& rng) {
  std::vector<double> v(1 + rng.below(40));
  for (auto& x : v) x = rng.uniform(-100.0, 100.0);
  return v;
}

RecordFeatures features(double sim, std::size_t missing, std::size_t extra, double len,
                        double speed) {
  return {sim, missing, extra, len, speed};
}

}  // namespace

TEST_CASE("stats7 examples") {
  const std::vector<double> single = {2.0};
  const auto s = stats7(single);
  CHECK(s == StatVector{2, 2, 2, 2, 2, 0, 0});

  const std::vector<double> four = {1, 2, 3, 4};
  const auto f = stats7(four);
  CHECK(f.sum == 10.0);
  CHECK(f.maximum == 4.0);
  CHECK(f.minimum == 1.0);
  CHECK(f.average == 2.5);
  CHECK(f.median == 2.5);
  CHECK(f.variance == 1.25);
  CHECK(f.std_dev == doctest::Approx(1.118034).epsilon(1e-6));

  CHECK_THROWS_AS(stats7(std::vector<double>{}), Error);
}

TEST_CASE("stats7 matches the recompute oracle") {
  Rng rng(10);
  for (int t = 0; t < 2000; ++t) {
    const auto v = random_list(rng);
    const auto s = stats7(v);
    const auto o = oracle::stats(v);
    CHECK(std::abs(s.sum - o.sum) <= 1e-12 * std::max(1.0, std::abs(o.sum)));
    CHECK(s.maximum == o.max);
    CHECK(s.minimum == o.min);
    CHECK(std::abs(s.average - o.avg) <= 1e-12);
    CHECK(s.median == o.median);
    CHECK(std::abs(s.variance - o.var) <= 1e-12 * std::max(1.0, o.var));
    CHECK(std::abs(s.std_dev - o.std) <= 1e-12 * std::max(1.0, o.std));
  }
}

TEST_CASE("stats7 is exactly permutation invariant") {
  Rng rng(12);
  for (int t = 0; t < 500; ++t) {
    auto v = random_list(rng);
    const auto s = stats7(v);
    rng.shuffle(v);
    CHECK(stats7(v) == s);
    std::reverse(v.begin(), v.end());
    CHECK(stats7(v) == s);
  }
}

TEST_CASE("stats7 is scale equivariant") {
  Rng rng(13);
  for (int t = 0; t < 500; ++t) {
    const auto v = random_list(rng);
    const double c = rng.uniform(0.01, 50.0);
    std::vector<double> w(v);
    for (auto& x : w) x *= c;
    const auto a = stats7(v);
    const auto b = stats7(w);
    auto close = [](double x, double y) {
      return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y));
    };
    CHECK(close(b.sum, c * a.sum));
    CHECK(close(b.maximum, c * a.maximum));
    CHECK(close(b.minimum, c * a.minimum));
    CHECK(close(b.average, c * a.average));
    CHECK(close(b.median, c * a.median));
    CHECK(close(b.std_dev, c * a.std_dev));
    CHECK(close(b.variance, c * c * a.variance));
  }
}

TEST_CASE("feature-set schema") {
  CHECK(dimension(FeatureSet::set3) == 21);
  CHECK(dimension(FeatureSet::set5) == 35);
  CHECK(dimension(FeatureSet::set5_mfcc) == 48);
  for (auto fs : {FeatureSet::set3, FeatureSet::set5, FeatureSet::set5_mfcc}) {
    CHECK(parse_feature_set(to_string(fs)) == fs);
    CHECK(dim_names(fs).size() == dimension(fs));
  }
  CHECK(parse_feature_set("set5+mfcc") == FeatureSet::set5_mfcc);
  CHECK_THROWS_AS(parse_feature_set("set4"), Error);
  const auto names = dim_names(FeatureSet::set5_mfcc);
  CHECK(names.front() == "similarity_sum");
  CHECK(names[7] == "missing_count_sum");
  CHECK(names[34] == "speed_var");
  CHECK(names.back() == "mfcc_12");
}

TEST_CASE("user_vector on one record collapses each statistic") {
  const std::vector<RecordFeatures> one = {features(0.9, 2, 3, 4.0, 12.5)};
  const auto v = user_vector("u", one, std::nullopt, FeatureSet::set5);
  REQUIRE(v.values.size() == 35);
  const double per_feature[] = {0.9, 2, 3, 4.0, 12.5};
  for (std::size_t f = 0; f < 5; ++f) {
    for (std::size_t s = 0; s < 5; ++s) CHECK(v.values[f * 7 + s] == per_feature[f]);
    CHECK(v.values[f * 7 + 5] == 0.0);
    CHECK(v.values[f * 7 + 6] == 0.0);
  }
  CHECK(!v.label);
}

TEST_CASE("user_vector set3 drops the count features") {
  const std::vector<RecordFeatures> two = {features(0.5, 9, 9, 1.0, 10.0),
                                           features(1.0, 9, 9, 3.0, 20.0)};
  const auto v = user_vector("u", two, std::nullopt, FeatureSet::set3);
  REQUIRE(v.values.size() == 21);
  CHECK(v.values[0] == 1.5);    // similarity sum
  CHECK(v.values[7] == 4.0);    // frame_length sum
  CHECK(v.values[14] == 30.0);  // speed sum
  for (double x : v.values) CHECK(x != 18.0);  // no missing/extra sums
}

TEST_CASE("user_vector with mfcc means") {
  const std::vector<RecordFeatures> one = {features(1, 0, 0, 1, 1)};
  std::vector<double> means(13);
  for (std::size_t i = 0; i < 13; ++i) means[i] = static_cast<double>(i);
  const auto v = user_vector("u", one, means, FeatureSet::set5_mfcc);
  REQUIRE(v.values.size() == 48);
  for (std::size_t i = 0; i < 13; ++i) CHECK(v.values[35 + i] == static_cast<double>(i));

  CHECK_THROWS_AS(user_vector("u", one, std::nullopt, FeatureSet::set5_mfcc), Error);
  CHECK_THROWS_AS(user_vector("u", one, std::vector<double>(12), FeatureSet::set5_mfcc),
                  DimensionError);
  CHECK_THROWS_AS(user_vector("u", std::vector<RecordFeatures>{}, std::nullopt, FeatureSet::set5),
                  Error);
}

TEST_CASE("user_vector ignores record order") {
  Rng rng(14);
  std::vector<RecordFeatures> recs;
  for (int i = 0; i < 9; ++i) {
    recs.push_back(features(rng.uniform(), rng.below(5), rng.below(5), rng.uniform(1, 5),
                            rng.uniform(10, 18)));
  }
  const auto a = user_vector("u", recs, std::nullopt, FeatureSet::set5);
  for (int t = 0; t < 20; ++t) {
    rng.shuffle(recs);
    CHECK(user_vector("u", recs, std::nullopt, FeatureSet::set5) == a);
  }
}

TEST_CASE("label_users") {
  std::vector<UserFeatureVector> v = {{"a", {1.0}, std::nullopt}, {"b", {2.0}, std::nullopt}};
  const auto labeled = label_users(v, {"a"});
  CHECK(labeled[0].label == Membership::member);
  CHECK(labeled[1].label == Membership::nonmember);
  CHECK(label_users(labeled, {"a"}) == labeled);

  for (const auto& u : label_users(v, {})) CHECK(u.label == Membership::nonmember);
}

TEST_CASE("user vectors round-trip through CSV") {
  testing::TempDir dir;
  std::vector<UserFeatureVector> v = {{"a", {0.1, 1.0 / 3.0, -2.5e-17}, Membership::member},
                                      {"b,c", {4.0, 5.0, 6.0}, Membership::nonmember},
                                      {"d", {7.0, 8.0, 9.0}, std::nullopt}};
  save_user_vectors(v, dir.file("v.csv"));
  CHECK(load_user_vectors(dir.file("v.csv")) == v);
  CHECK(testing::read_text(dir.file("v.csv")).rfind("user_id,f0,f1,f2,label\n", 0) == 0);
}
