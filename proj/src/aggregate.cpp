#include "voiceaudit/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "voiceaudit/csv.hpp"
#include "voiceaudit/error.hpp"

namespace voiceaudit {

StatVector stats7(std::span<const double> values) {
  if (values.empty()) throw Error("stats7: empty value list");
  // Sorting first makes every statistic, including the floating-point sums,
  // independent of input order.
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto m = v.size();

  StatVector s;
  for (double x : v) s.sum += x;
  s.minimum = v.front();
  s.maximum = v.back();
  s.average = s.sum / static_cast<double>(m);
  s.median = m % 2 ? v[m / 2] : (v[m / 2 - 1] + v[m / 2]) / 2.0;
  double ss = 0.0;
  for (double x : v) ss += (x - s.average) * (x - s.average);
  s.variance = ss / static_cast<double>(m);
  s.std_dev = std::sqrt(s.variance);
  return s;
}

std::size_t dimension(FeatureSet fs) {
  switch (fs) {
    case FeatureSet::set3:
      return 3 * kStatNames.size();
    case FeatureSet::set5:
      return 5 * kStatNames.size();
    case FeatureSet::set5_mfcc:
      return 5 * kStatNames.size() + kMfccCoefficients;
  }
  return 0;
}

std::string_view to_string(FeatureSet fs) {
  switch (fs) {
    case FeatureSet::set3:
      return "set3";
    case FeatureSet::set5:
      return "set5";
    case FeatureSet::set5_mfcc:
      return "set5_mfcc";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view text) {
  if (text == "set3") return FeatureSet::set3;
  if (text == "set5") return FeatureSet::set5;
  if (text == "set5_mfcc" || text == "set5+mfcc") return FeatureSet::set5_mfcc;
  throw Error("unknown feature set '" + std::string(text) + "'");
}

namespace {

std::vector<std::string_view> selected_features(FeatureSet fs) {
  if (fs == FeatureSet::set3) return {"similarity", "frame_length", "speed"};
  return {"similarity", "missing_count", "extra_count", "frame_length", "speed"};
}

double feature_value(const RecordFeatures& r, std::string_view name) {
  if (name == "similarity") return r.similarity;
  if (name == "missing_count") return static_cast<double>(r.missing_count);
  if (name == "extra_count") return static_cast<double>(r.extra_count);
  if (name == "frame_length") return r.frame_length;
  return r.speed;
}

}  // namespace

std::vector<std::string> dim_names(FeatureSet fs) {
  std::vector<std::string> names;
  for (auto feature : selected_features(fs)) {
    for (auto stat : kStatNames) names.push_back(std::string(feature) + "_" + std::string(stat));
  }
  if (fs == FeatureSet::set5_mfcc) {
    for (std::size_t c = 0; c < kMfccCoefficients; ++c) names.push_back("mfcc_" + std::to_string(c));
  }
  return names;
}

UserFeatureVector user_vector(const std::string& user_id, std::span<const RecordFeatures> records,
                              const std::optional<std::vector<double>>& mfcc_means,
                              FeatureSet fs) {
  if (records.empty()) throw Error("user_vector: user '" + user_id + "' has no records");
  const bool wants_mfcc = fs == FeatureSet::set5_mfcc;
  if (wants_mfcc != mfcc_means.has_value()) {
    throw DimensionError(std::string("user_vector: MFCC means ") +
                         (wants_mfcc ? "required" : "not allowed") + " for feature set " +
                         std::string(to_string(fs)));
  }
  if (wants_mfcc && mfcc_means->size() != kMfccCoefficients) {
    throw DimensionError("user_vector: expected 13 MFCC means, got " +
                         std::to_string(mfcc_means->size()));
  }

  UserFeatureVector out;
  out.user_id = user_id;
  out.values.reserve(dimension(fs));
  std::vector<double> column(records.size());
  for (auto feature : selected_features(fs)) {
    for (std::size_t i = 0; i < records.size(); ++i) column[i] = feature_value(records[i], feature);
    const auto s = stats7(column);
    out.values.insert(out.values.end(),
                      {s.sum, s.maximum, s.minimum, s.average, s.median, s.std_dev, s.variance});
  }
  if (wants_mfcc) out.values.insert(out.values.end(), mfcc_means->begin(), mfcc_means->end());
  return out;
}

std::vector<UserFeatureVector> label_users(std::vector<UserFeatureVector> vectors,
                                           const std::set<std::string>& training_user_ids) {
  for (auto& v : vectors) {
    v.label = training_user_ids.count(v.user_id) ? Membership::member : Membership::nonmember;
  }
  return vectors;
}

void save_user_vectors(std::span<const UserFeatureVector> vectors, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const std::size_t dims = vectors.empty() ? 0 : vectors.front().values.size();
  csv::Row header{"user_id"};
  for (std::size_t d = 0; d < dims; ++d) header.push_back("f" + std::to_string(d));
  header.push_back("label");
  csv::write_row(out, header);
  for (const auto& v : vectors) {
    if (v.values.size() != dims) throw DimensionError("save_user_vectors: ragged vectors");
    csv::Row row{v.user_id};
    for (double x : v.values) row.push_back(csv::format_double(x));
    row.push_back(v.label ? std::to_string(static_cast<int>(*v.label)) : "");
    csv::write_row(out, row);
  }
}

std::vector<UserFeatureVector> load_user_vectors(const std::string& path) {
  const auto table = csv::read_file(path);
  std::vector<UserFeatureVector> out;
  if (table.header.empty()) return out;
  const auto c_user = table.require_column("user_id", path);
  const auto c_label = table.require_column("label", path);
  std::vector<std::size_t> feature_cols;
  for (std::size_t d = 0;; ++d) {
    const auto c = table.column("f" + std::to_string(d));
    if (c == std::string::npos) break;
    feature_cols.push_back(c);
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    UserFeatureVector v;
    v.user_id = row[c_user];
    for (auto c : feature_cols) v.values.push_back(csv::parse_double(row[c], path, table.lines[i]));
    const auto& label = row[c_label];
    if (label == "0") {
      v.label = Membership::member;
    } else if (label == "1") {
      v.label = Membership::nonmember;
    } else if (!label.empty()) {
      throw ParseError(path, table.lines[i], "label must be 0, 1 or empty");
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace voiceaudit
