#include "voiceaudit/features.hpp"

#include <algorithm>
#include <cmath>

#include "voiceaudit/align.hpp"
#include "voiceaudit/error.hpp"

namespace voiceaudit {

namespace {

// Mean of in-vocabulary token vectors; empty if none.
std::vector<double> sentence_vector(const std::string& text, const EmbeddingTable& table) {
  std::vector<double> sum(table.dimension, 0.0);
  std::size_t known = 0;
  for (const auto& token : split_whitespace(to_lower(text))) {
    if (const auto* v = table.find(token)) {
      for (std::size_t d = 0; d < table.dimension; ++d) sum[d] += (*v)[d];
      ++known;
    }
  }
  if (known == 0) return {};
  for (auto& x : sum) x /= static_cast<double>(known);
  return sum;
}

}  // namespace

double similarity_embedding(const std::string& reference, const std::string& hypothesis,
                            const EmbeddingTable& table) {
  const auto a = sentence_vector(reference, table);
  const auto b = sentence_vector(hypothesis, table);
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    dot += a[d] * b[d];
    na += a[d] * a[d];
    nb += b[d] * b[d];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double similarity_char(const std::string& reference, const std::string& hypothesis) {
  const auto longest = std::max(reference.size(), hypothesis.size());
  if (longest == 0) return 1.0;
  const auto distance = char_align(reference, hypothesis).distance;
  return 1.0 - static_cast<double>(distance) / static_cast<double>(longest);
}

SimilarityProvider SimilarityProvider::embedding(std::shared_ptr<const EmbeddingTable> table) {
  if (!table || table->dimension == 0) {
    throw Error("embedding similarity requires a loaded embedding table");
  }
  return SimilarityProvider(std::move(table));
}

double SimilarityProvider::score(const std::string& reference,
                                 const std::string& hypothesis) const {
  if (table_) return similarity_embedding(reference, hypothesis, *table_);
  return similarity_char(to_upper(reference), to_upper(hypothesis));
}

RecordFeatures record_features(const AudioRecord& record, const std::string& hypothesis,
                               const SimilarityProvider& provider) {
  validate(record);
  const auto ref = to_upper(record.reference_text);
  const auto hyp = to_upper(hypothesis);
  const auto alignment = char_align(ref, hyp);

  RecordFeatures f;
  f.similarity = provider.kind() == SimilarityProvider::Kind::char_edit
                     ? similarity_char(ref, hyp)
                     : provider.score(record.reference_text, hypothesis);
  f.missing_count = alignment.missing_chars.size();
  f.extra_count = alignment.extra_chars.size();
  f.frame_length = record.duration_seconds;
  f.speed = static_cast<double>(trim(record.reference_text).size()) / record.duration_seconds;
  return f;
}

}  // namespace voiceaudit
