#pragma once

// Binary auditor classifiers: CART decision tree, random forest, k-nearest
// neighbours and Gaussian naive Bayes. Labels follow Membership
// (member = 0, nonmember = 1); "member" is the positive class, and exact
// vote ties resolve to member.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "voiceaudit/aggregate.hpp"

namespace voiceaudit {

enum class Algorithm { decision_tree, random_forest, knn, gaussian_nb };

std::string_view to_string(Algorithm algorithm);
/// Accepts "dt", "rf", "knn" (also "3nn"), "gnb" (also "nb").
Algorithm parse_algorithm(std::string_view text);

struct TrainingTable {
  std::vector<std::vector<double>> x;
  std::vector<Membership> y;
  std::vector<std::string> dim_names;
  std::optional<FeatureSet> feature_set;

  std::size_t size() const { return y.size(); }
  std::size_t dims() const { return x.empty() ? dim_names.size() : x.front().size(); }

  /// Labeled vectors only; throws Error on an unlabeled row or ragged shape.
  static TrainingTable from_vectors(std::span<const UserFeatureVector> vectors,
                                    std::optional<FeatureSet> fs);
};

struct TreeConfig {
  int max_depth = 12;  // 0 = unbounded
  std::size_t min_samples_leaf = 2;
};

struct ForestConfig {
  std::size_t n_trees = 100;
  std::size_t max_features = 0;  // 0 = ceil(sqrt(D))
  bool bootstrap = true;
  TreeConfig tree{0, 1};
};

struct TrainConfig {
  std::uint64_t seed = 0;
  TreeConfig dt;
  ForestConfig rf;
  std::size_t k = 3;
  double var_smoothing = 1e-9;  // GNB floor = var_smoothing * max per-dim variance
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double member_share = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double member_share(std::span<const double> x) const;
  int depth() const;
};

struct ForestParams {
  std::vector<Tree> trees;
};

struct KnnParams {
  std::size_t k = 3;
  std::vector<std::vector<double>> x;  // z-scored
  std::vector<Membership> y;
};

struct GnbParams {
  double prior_member = 0.5;
  std::vector<double> mean_member, var_member;
  std::vector<double> mean_nonmember, var_nonmember;
};

struct Normalization {
  std::vector<double> mean;
  std::vector<double> std;
};

struct Prediction {
  Membership label = Membership::member;
  double member_vote_fraction = 0.0;
};

class AuditorModel {
 public:
  using Params = std::variant<Tree, ForestParams, KnnParams, GnbParams>;

  AuditorModel(Algorithm algorithm, std::optional<FeatureSet> fs,
               std::vector<std::string> dim_names, TrainConfig config,
               std::optional<Normalization> normalization, Params params);

  Algorithm algorithm() const { return algorithm_; }
  const std::optional<FeatureSet>& feature_set() const { return feature_set_; }
  const std::vector<std::string>& dim_names() const { return dim_names_; }
  std::size_t dims() const { return dim_names_.size(); }
  const TrainConfig& config() const { return config_; }
  const std::optional<Normalization>& normalization() const { return normalization_; }
  const Params& params() const { return params_; }

  /// Throws DimensionError if x has the wrong length.
  Prediction predict(std::span<const double> x) const;

 private:
  Algorithm algorithm_;
  std::optional<FeatureSet> feature_set_;
  std::vector<std::string> dim_names_;
  TrainConfig config_;
  std::optional<Normalization> normalization_;
  Params params_;
};

/// Deterministic given (table, config.seed). Throws Error if only one class
/// is present or any value is non-finite.
AuditorModel train(const TrainingTable& table, Algorithm algorithm, const TrainConfig& config);

inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const AuditorModel& model);
AuditorModel deserialize_model(const std::string& text);
void save_model(const AuditorModel& model, const std::string& path);
/// Throws VersionMismatch for another format version, Error for corrupt files.
AuditorModel load_model(const std::string& path);

namespace detail {

/// CART on the given row indices (duplicates allowed, as in a bootstrap
/// sample). `max_features` < D draws that many candidate dims per split.
Tree grow_tree(const TrainingTable& table, std::span<const std::size_t> rows,
               const TreeConfig& config, std::size_t max_features, std::uint64_t seed);

}  // namespace detail

}  // namespace voiceaudit
