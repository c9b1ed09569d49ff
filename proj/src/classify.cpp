#include "voiceaudit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"

namespace voiceaudit {

using json = nlohmann::json;

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::decision_tree:
      return "dt";
    case Algorithm::random_forest:
      return "rf";
    case Algorithm::knn:
      return "knn";
    case Algorithm::gaussian_nb:
      return "gnb";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "dt") return Algorithm::decision_tree;
  if (text == "rf") return Algorithm::random_forest;
  if (text == "knn" || text == "3nn") return Algorithm::knn;
  if (text == "gnb" || text == "nb") return Algorithm::gaussian_nb;
  throw Error("unknown algorithm '" + std::string(text) + "'");
}

TrainingTable TrainingTable::from_vectors(std::span<const UserFeatureVector> vectors,
                                          std::optional<FeatureSet> fs) {
  TrainingTable t;
  t.feature_set = fs;
  for (const auto& v : vectors) {
    if (!v.label) throw Error("training vector for '" + v.user_id + "' has no label");
    if (!t.x.empty() && v.values.size() != t.x.front().size()) {
      throw DimensionError("training vectors have inconsistent dimensions");
    }
    t.x.push_back(v.values);
    t.y.push_back(*v.label);
  }
  const std::size_t d = t.x.empty() ? (fs ? dimension(*fs) : 0) : t.x.front().size();
  if (fs) {
    if (d != dimension(*fs)) {
      throw DimensionError("vectors have " + std::to_string(d) + " dims but feature set " +
                           std::string(to_string(*fs)) + " needs " +
                           std::to_string(dimension(*fs)));
    }
    t.dim_names = voiceaudit::dim_names(*fs);
  } else {
    for (std::size_t i = 0; i < d; ++i) t.dim_names.push_back("f" + std::to_string(i));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Trees

double Tree::member_share(std::span<const double> x) const {
  int id = 0;
  while (nodes[id].feature >= 0) {
    const auto& n = nodes[id];
    id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[id].member_share;
}

int Tree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  // children always follow their parent in `nodes`
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature >= 0) {
      d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
      deepest = std::max(deepest, d[i] + 1);
    }
  }
  return deepest;
}

namespace {

double gini(double members, double total) {
  if (total <= 0.0) return 0.0;
  const double p = members / total;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

class TreeGrower {
 public:
  TreeGrower(const TrainingTable& table, const TreeConfig& config, std::size_t max_features,
             std::uint64_t seed)
      : table_(table), config_(config), max_features_(max_features), rng_(seed) {}

  Tree grow(std::span<const std::size_t> rows) {
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    build(idx, 0);
    return std::move(tree_);
  }

 private:
  int build(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::size_t members = 0;
    for (auto r : rows) members += table_.y[r] == Membership::member;
    const double n = static_cast<double>(rows.size());
    tree_.nodes[id].member_share = static_cast<double>(members) / n;

    const bool pure = members == 0 || members == rows.size();
    const bool depth_cap = config_.max_depth > 0 && depth >= config_.max_depth;
    if (pure || depth_cap || rows.size() < 2 * std::max<std::size_t>(config_.min_samples_leaf, 1)) {
      return id;
    }
    const auto split = best_split(rows, static_cast<double>(members));
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (table_.x[r][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = split.feature;
    tree_.nodes[id].threshold = split.threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, double members) {
    const std::size_t dims = table_.dims();
    std::vector<std::size_t> order(dims);
    std::iota(order.begin(), order.end(), 0);
    std::size_t take = dims;
    if (max_features_ > 0 && max_features_ < dims) {
      rng_.shuffle(order);
      take = max_features_;
    }
    // Candidates are evaluated in ascending dim order; if none of the drawn
    // dims admits a split, keep drawing until one does.
    Split best;
    std::size_t next = 0;
    while (next < dims) {
      const std::size_t end = next == 0 ? take : next + 1;
      std::vector<std::size_t> batch(order.begin() + next, order.begin() + end);
      std::sort(batch.begin(), batch.end());
      for (auto d : batch) scan_dim(rows, members, d, best);
      next = end;
      if (best.feature >= 0) break;
    }
    return best;
  }

  void scan_dim(const std::vector<std::size_t>& rows, double members, std::size_t dim,
                Split& best) {
    values_.clear();
    for (auto r : rows) values_.emplace_back(table_.x[r][dim], table_.y[r] == Membership::member);
    std::sort(values_.begin(), values_.end());
    const double n = static_cast<double>(rows.size());
    const double parent = gini(members, n);
    const std::size_t min_leaf = std::max<std::size_t>(config_.min_samples_leaf, 1);
    double left_members = 0.0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      left_members += values_[i].second ? 1.0 : 0.0;
      const std::size_t n_left = i + 1;
      if (values_[i].first == values_[i + 1].first) continue;
      if (n_left < min_leaf || rows.size() - n_left < min_leaf) continue;
      const double nl = static_cast<double>(n_left);
      const double nr = n - nl;
      const double child =
          (nl * gini(left_members, nl) + nr * gini(members - left_members, nr)) / n;
      const double gain = parent - child;
      // strict improvement keeps the lowest dim, then the lowest threshold
      if (gain > best.gain + 1e-12) {
        const double a = values_[i].first, b = values_[i + 1].first;
        double mid = a + (b - a) / 2.0;
        if (!(mid < b)) mid = a;
        best = {static_cast<int>(dim), mid, gain};
      }
    }
  }

  const TrainingTable& table_;
  TreeConfig config_;
  std::size_t max_features_;
  Rng rng_;
  Tree tree_;
  std::vector<std::pair<double, bool>> values_;
};

void check_table(const TrainingTable& table) {
  if (table.x.size() != table.y.size()) throw DimensionError("rows of X and y differ");
  if (table.size() < 2) throw Error("training needs at least 2 samples");
  const auto d = table.dims();
  if (d == 0) throw DimensionError("training table has no dimensions");
  if (!table.dim_names.empty() && table.dim_names.size() != d) {
    throw DimensionError("dim_names does not match X");
  }
  bool has_member = false, has_nonmember = false;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.x[i].size() != d) throw DimensionError("ragged training matrix");
    for (double v : table.x[i]) {
      if (!std::isfinite(v)) throw Error("training matrix contains NaN or infinity");
    }
    (table.y[i] == Membership::member ? has_member : has_nonmember) = true;
  }
  if (!has_member || !has_nonmember) {
    throw Error("training table must contain both member and nonmember samples");
  }
}

Normalization fit_zscore(const TrainingTable& table) {
  const auto d = table.dims();
  const auto n = static_cast<double>(table.size());
  Normalization z{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& row : table.x) {
    for (std::size_t j = 0; j < d; ++j) z.mean[j] += row[j];
  }
  for (auto& m : z.mean) m /= n;
  for (const auto& row : table.x) {
    for (std::size_t j = 0; j < d; ++j) z.std[j] += (row[j] - z.mean[j]) * (row[j] - z.mean[j]);
  }
  for (auto& s : z.std) {
    s = std::sqrt(s / n);
    if (!(s > 0.0)) s = 1.0;
  }
  return z;
}

std::vector<double> zscore(const Normalization& z, std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - z.mean[j]) / z.std[j];
  return out;
}

Prediction from_fraction(double fraction) {
  return {fraction >= 0.5 ? Membership::member : Membership::nonmember, fraction};
}

GnbParams fit_gnb(const TrainingTable& table, double var_smoothing) {
  const auto d = table.dims();
  GnbParams p;
  p.mean_member.assign(d, 0.0);
  p.var_member.assign(d, 0.0);
  p.mean_nonmember.assign(d, 0.0);
  p.var_nonmember.assign(d, 0.0);
  double n_member = 0.0, n_nonmember = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const bool m = table.y[i] == Membership::member;
    auto& mean = m ? p.mean_member : p.mean_nonmember;
    (m ? n_member : n_nonmember) += 1.0;
    for (std::size_t j = 0; j < d; ++j) mean[j] += table.x[i][j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    p.mean_member[j] /= n_member;
    p.mean_nonmember[j] /= n_nonmember;
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    const bool m = table.y[i] == Membership::member;
    const auto& mean = m ? p.mean_member : p.mean_nonmember;
    auto& var = m ? p.var_member : p.var_nonmember;
    for (std::size_t j = 0; j < d; ++j) {
      var[j] += (table.x[i][j] - mean[j]) * (table.x[i][j] - mean[j]);
    }
  }
  // Floor relative to the largest per-dimension variance of the whole table.
  const auto overall = fit_zscore(table);
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double v = 0.0;
    for (const auto& row : table.x) v += (row[j] - overall.mean[j]) * (row[j] - overall.mean[j]);
    max_var = std::max(max_var, v / static_cast<double>(table.size()));
  }
  double floor = var_smoothing * max_var;
  if (!(floor > 0.0)) floor = var_smoothing > 0.0 ? var_smoothing : 1e-9;
  for (std::size_t j = 0; j < d; ++j) {
    p.var_member[j] = p.var_member[j] / n_member + floor;
    p.var_nonmember[j] = p.var_nonmember[j] / n_nonmember + floor;
  }
  p.prior_member = n_member / (n_member + n_nonmember);
  return p;
}

double gnb_member_posterior(const GnbParams& p, std::span<const double> x) {
  auto log_likelihood = [&](const std::vector<double>& mean, const std::vector<double>& var) {
    double ll = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double diff = x[j] - mean[j];
      ll += -0.5 * std::log(2.0 * std::numbers::pi * var[j]) - diff * diff / (2.0 * var[j]);
    }
    return ll;
  };
  const double a = std::log(p.prior_member) + log_likelihood(p.mean_member, p.var_member);
  const double b =
      std::log(1.0 - p.prior_member) + log_likelihood(p.mean_nonmember, p.var_nonmember);
  // sigmoid(a - b), computed on the stable side
  const double diff = a - b;
  if (diff >= 0.0) return 1.0 / (1.0 + std::exp(-diff));
  const double e = std::exp(diff);
  return e / (1.0 + e);
}

}  // namespace

namespace detail {

Tree grow_tree(const TrainingTable& table, std::span<const std::size_t> rows,
               const TreeConfig& config, std::size_t max_features, std::uint64_t seed) {
  return TreeGrower(table, config, max_features, seed).grow(rows);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model

AuditorModel::AuditorModel(Algorithm algorithm, std::optional<FeatureSet> fs,
                           std::vector<std::string> dim_names, TrainConfig config,
                           std::optional<Normalization> normalization, Params params)
    : algorithm_(algorithm),
      feature_set_(fs),
      dim_names_(std::move(dim_names)),
      config_(config),
      normalization_(std::move(normalization)),
      params_(std::move(params)) {
  if (feature_set_ && dim_names_.size() != dimension(*feature_set_)) {
    throw DimensionError("model dim_names do not match its feature set");
  }
}

Prediction AuditorModel::predict(std::span<const double> x) const {
  if (x.size() != dims()) {
    throw DimensionError("model expects " + std::to_string(dims()) + " dims, got " +
                         std::to_string(x.size()));
  }
  switch (algorithm_) {
    case Algorithm::decision_tree:
      return from_fraction(std::get<Tree>(params_).member_share(x));
    case Algorithm::random_forest: {
      const auto& forest = std::get<ForestParams>(params_);
      std::size_t votes = 0;
      for (const auto& tree : forest.trees) votes += tree.member_share(x) >= 0.5;
      return from_fraction(static_cast<double>(votes) /
                           static_cast<double>(forest.trees.size()));
    }
    case Algorithm::knn: {
      const auto& p = std::get<KnnParams>(params_);
      const auto z = zscore(*normalization_, x);
      std::vector<std::pair<double, std::size_t>> dist(p.x.size());
      for (std::size_t i = 0; i < p.x.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) s += (z[j] - p.x[i][j]) * (z[j] - p.x[i][j]);
        dist[i] = {s, i};
      }
      const auto k = std::min(p.k, dist.size());
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      std::size_t members = 0;
      for (std::size_t i = 0; i < k; ++i) members += p.y[dist[i].second] == Membership::member;
      return from_fraction(static_cast<double>(members) / static_cast<double>(k));
    }
    case Algorithm::gaussian_nb:
      return from_fraction(gnb_member_posterior(std::get<GnbParams>(params_), x));
  }
  throw Error("unknown algorithm");
}

AuditorModel train(const TrainingTable& table, Algorithm algorithm, const TrainConfig& config) {
  check_table(table);
  auto names = table.dim_names;
  if (names.empty()) {
    for (std::size_t i = 0; i < table.dims(); ++i) names.push_back("f" + std::to_string(i));
  }
  std::vector<std::size_t> all(table.size());
  std::iota(all.begin(), all.end(), 0);

  switch (algorithm) {
    case Algorithm::decision_tree: {
      auto tree = detail::grow_tree(table, all, config.dt, 0, config.seed);
      return AuditorModel(algorithm, table.feature_set, names, config, std::nullopt,
                          std::move(tree));
    }
    case Algorithm::random_forest: {
      if (config.rf.n_trees == 0) throw Error("random forest needs at least one tree");
      const auto d = table.dims();
      const auto max_features =
          config.rf.max_features > 0
              ? config.rf.max_features
              : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
      ForestParams forest;
      forest.trees.reserve(config.rf.n_trees);
      for (std::size_t t = 0; t < config.rf.n_trees; ++t) {
        const auto tree_seed = derive_seed(config.seed, t);
        std::vector<std::size_t> rows = all;
        if (config.rf.bootstrap) {
          Rng rng(tree_seed);
          for (auto& r : rows) r = static_cast<std::size_t>(rng.below(table.size()));
        }
        forest.trees.push_back(detail::grow_tree(table, rows, config.rf.tree, max_features,
                                                 derive_seed(tree_seed, 1)));
      }
      return AuditorModel(algorithm, table.feature_set, names, config, std::nullopt,
                          std::move(forest));
    }
    case Algorithm::knn: {
      if (config.k == 0 || config.k % 2 == 0) throw Error("k must be odd");
      auto z = fit_zscore(table);
      KnnParams p;
      p.k = config.k;
      p.y = table.y;
      for (const auto& row : table.x) p.x.push_back(zscore(z, row));
      return AuditorModel(algorithm, table.feature_set, names, config, std::move(z),
                          std::move(p));
    }
    case Algorithm::gaussian_nb:
      return AuditorModel(algorithm, table.feature_set, names, config, std::nullopt,
                          fit_gnb(table, config.var_smoothing));
  }
  throw Error("unknown algorithm");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json tree_to_json(const Tree& tree) {
  json j;
  std::vector<int> feature, left, right;
  std::vector<double> threshold, share;
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    share.push_back(n.member_share);
  }
  j["feature"] = feature;
  j["threshold"] = threshold;
  j["left"] = left;
  j["right"] = right;
  j["member_share"] = share;
  return j;
}

Tree tree_from_json(const json& j) {
  const auto feature = j.at("feature").get<std::vector<int>>();
  const auto threshold = j.at("threshold").get<std::vector<double>>();
  const auto left = j.at("left").get<std::vector<int>>();
  const auto right = j.at("right").get<std::vector<int>>();
  const auto share = j.at("member_share").get<std::vector<double>>();
  const auto n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
      share.size() != n) {
    throw Error("corrupt model: inconsistent tree arrays");
  }
  Tree tree;
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0) {
      const auto in_range = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(n); };
      if (!in_range(left[i]) || !in_range(right[i])) throw Error("corrupt model: bad child index");
    }
    tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], share[i]});
  }
  return tree;
}

std::vector<int> labels_to_ints(const std::vector<Membership>& y) {
  std::vector<int> out;
  for (auto m : y) out.push_back(static_cast<int>(m));
  return out;
}

json config_to_json(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"dt", {{"max_depth", c.dt.max_depth}, {"min_samples_leaf", c.dt.min_samples_leaf}}},
          {"rf",
           {{"n_trees", c.rf.n_trees},
            {"max_features", c.rf.max_features},
            {"bootstrap", c.rf.bootstrap},
            {"max_depth", c.rf.tree.max_depth},
            {"min_samples_leaf", c.rf.tree.min_samples_leaf}}},
          {"k", c.k},
          {"var_smoothing", c.var_smoothing}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.dt.max_depth = j.at("dt").at("max_depth").get<int>();
  c.dt.min_samples_leaf = j.at("dt").at("min_samples_leaf").get<std::size_t>();
  c.rf.n_trees = j.at("rf").at("n_trees").get<std::size_t>();
  c.rf.max_features = j.at("rf").at("max_features").get<std::size_t>();
  c.rf.bootstrap = j.at("rf").at("bootstrap").get<bool>();
  c.rf.tree.max_depth = j.at("rf").at("max_depth").get<int>();
  c.rf.tree.min_samples_leaf = j.at("rf").at("min_samples_leaf").get<std::size_t>();
  c.k = j.at("k").get<std::size_t>();
  c.var_smoothing = j.at("var_smoothing").get<double>();
  return c;
}

}  // namespace

std::string serialize_model(const AuditorModel& model) {
  json j;
  j["format"] = "voiceaudit-auditor";
  j["version"] = kModelFormatVersion;
  j["rng"] = std::string(kRngName);
  j["algorithm"] = std::string(to_string(model.algorithm()));
  j["feature_set"] = model.feature_set() ? json(std::string(to_string(*model.feature_set())))
                                         : json(nullptr);
  j["dim_names"] = model.dim_names();
  j["config"] = config_to_json(model.config());
  if (model.normalization()) {
    j["normalization"] = {{"mean", model.normalization()->mean},
                          {"std", model.normalization()->std}};
  } else {
    j["normalization"] = nullptr;
  }
  json params;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Tree>) {
          params["tree"] = tree_to_json(p);
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          params["trees"] = json::array();
          for (const auto& t : p.trees) params["trees"].push_back(tree_to_json(t));
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          params["k"] = p.k;
          params["x"] = p.x;
          params["y"] = labels_to_ints(p.y);
        } else {
          params["prior_member"] = p.prior_member;
          params["mean_member"] = p.mean_member;
          params["var_member"] = p.var_member;
          params["mean_nonmember"] = p.mean_nonmember;
          params["var_nonmember"] = p.var_nonmember;
        }
      },
      model.params());
  j["params"] = std::move(params);
  return j.dump(1) + "\n";
}

AuditorModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt model file: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "voiceaudit-auditor") {
      throw Error("not an auditor model file");
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw VersionMismatch("model format version " + std::to_string(version) +
                            ", this build reads version " + std::to_string(kModelFormatVersion));
    }
    if (j.at("rng").get<std::string>() != kRngName) {
      throw VersionMismatch("model was trained with RNG '" + j.at("rng").get<std::string>() + "'");
    }
    const auto algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    std::optional<FeatureSet> fs;
    if (!j.at("feature_set").is_null()) fs = parse_feature_set(j.at("feature_set").get<std::string>());
    auto names = j.at("dim_names").get<std::vector<std::string>>();
    const auto config = config_from_json(j.at("config"));
    std::optional<Normalization> norm;
    if (!j.at("normalization").is_null()) {
      norm = Normalization{j.at("normalization").at("mean").get<std::vector<double>>(),
                           j.at("normalization").at("std").get<std::vector<double>>()};
      if (norm->mean.size() != names.size() || norm->std.size() != names.size()) {
        throw Error("corrupt model: normalization size");
      }
    }
    const auto& p = j.at("params");
    const auto d = names.size();
    auto check_len = [&](const std::vector<double>& v) {
      if (v.size() != d) throw Error("corrupt model: parameter vector size");
      return v;
    };
    AuditorModel::Params params;
    switch (algorithm) {
      case Algorithm::decision_tree:
        params = tree_from_json(p.at("tree"));
        break;
      case Algorithm::random_forest: {
        ForestParams f;
        for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
        if (f.trees.empty()) throw Error("corrupt model: empty forest");
        params = std::move(f);
        break;
      }
      case Algorithm::knn: {
        KnnParams k;
        k.k = p.at("k").get<std::size_t>();
        k.x = p.at("x").get<std::vector<std::vector<double>>>();
        for (int label : p.at("y").get<std::vector<int>>()) {
          if (label != 0 && label != 1) throw Error("corrupt model: bad label");
          k.y.push_back(static_cast<Membership>(label));
        }
        if (k.x.size() != k.y.size() || k.x.empty() || !norm) throw Error("corrupt model: knn data");
        for (const auto& row : k.x) check_len(row);
        params = std::move(k);
        break;
      }
      case Algorithm::gaussian_nb: {
        GnbParams g;
        g.prior_member = p.at("prior_member").get<double>();
        g.mean_member = check_len(p.at("mean_member").get<std::vector<double>>());
        g.var_member = check_len(p.at("var_member").get<std::vector<double>>());
        g.mean_nonmember = check_len(p.at("mean_nonmember").get<std::vector<double>>());
        g.var_nonmember = check_len(p.at("var_nonmember").get<std::vector<double>>());
        params = std::move(g);
        break;
      }
    }
    return AuditorModel(algorithm, fs, std::move(names), config, std::move(norm),
                        std::move(params));
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const AuditorModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << serialize_model(model);
}

AuditorModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace voiceaudit
