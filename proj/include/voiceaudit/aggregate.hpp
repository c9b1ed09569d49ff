#pragma once

// User-level samples: seven summary statistics per record feature, the
// feature-set schema, and membership labels.

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voiceaudit/features.hpp"

namespace voiceaudit {

struct StatVector {
  double sum = 0.0;
  double maximum = 0.0;
  double minimum = 0.0;
  double average = 0.0;
  double median = 0.0;
  double std_dev = 0.0;
  double variance = 0.0;  // population

  bool operator==(const StatVector&) const = default;
};

inline constexpr std::array<std::string_view, 7> kStatNames = {"sum", "max",    "min", "avg",
                                                                "median", "std", "var"};

/// Throws Error on an empty list.
StatVector stats7(std::span<const double> values);

enum class FeatureSet { set3, set5, set5_mfcc };

inline constexpr std::size_t kMfccCoefficients = 13;

std::size_t dimension(FeatureSet fs);
std::string_view to_string(FeatureSet fs);
/// Accepts "set3", "set5", "set5_mfcc" (also "set5+mfcc").
FeatureSet parse_feature_set(std::string_view text);
/// Column names in vector order, e.g. "similarity_sum", ..., "mfcc_12".
std::vector<std::string> dim_names(FeatureSet fs);

enum class Membership : int { member = 0, nonmember = 1 };

struct UserFeatureVector {
  std::string user_id;
  std::vector<double> values;
  std::optional<Membership> label;

  bool operator==(const UserFeatureVector&) const = default;
};

/// Stats of each selected feature, in the order
/// [similarity, missing_count, extra_count, frame_length, speed]
/// (set3: [similarity, frame_length, speed]), then the MFCC means.
UserFeatureVector user_vector(const std::string& user_id, std::span<const RecordFeatures> records,
                              const std::optional<std::vector<double>>& mfcc_means,
                              FeatureSet fs);

/// member iff user_id is in training_user_ids.
std::vector<UserFeatureVector> label_users(std::vector<UserFeatureVector> vectors,
                                           const std::set<std::string>& training_user_ids);

/// CSV: user_id,f0..f{D-1},label (label 0, 1 or empty).
void save_user_vectors(std::span<const UserFeatureVector> vectors, const std::string& path);
std::vector<UserFeatureVector> load_user_vectors(const std::string& path);

}  // namespace voiceaudit
