#pragma once

// Record-level features of one queried audio: similarity between reference
// and transcription, missing/extra character counts, frame length and
// speaking speed.

#include <cstddef>
#include <memory>
#include <string>

#include "voiceaudit/corpus.hpp"

namespace voiceaudit {

struct RecordFeatures {
  double similarity = 0.0;
  std::size_t missing_count = 0;
  std::size_t extra_count = 0;
  double frame_length = 0.0;  // seconds
  double speed = 0.0;         // reference characters per second

  bool operator==(const RecordFeatures&) const = default;
};

/// Cosine similarity of the mean token vectors of both sentences. Tokens are
/// lowercased and split on whitespace; out-of-vocabulary tokens are skipped.
/// Returns 0 if either sentence has no known token or a zero mean vector.
double similarity_embedding(const std::string& reference, const std::string& hypothesis,
                            const EmbeddingTable& table);

/// 1 - distance / max(len); 1 for two empty strings.
double similarity_char(const std::string& reference, const std::string& hypothesis);

class SimilarityProvider {
 public:
  enum class Kind { char_edit, embedding };

  /// Character edit similarity on the uppercased texts.
  static SimilarityProvider char_edit() { return SimilarityProvider(nullptr); }
  static SimilarityProvider embedding(std::shared_ptr<const EmbeddingTable> table);

  Kind kind() const { return table_ ? Kind::embedding : Kind::char_edit; }
  const EmbeddingTable* table() const { return table_.get(); }

  double score(const std::string& reference, const std::string& hypothesis) const;

 private:
  explicit SimilarityProvider(std::shared_ptr<const EmbeddingTable> table)
      : table_(std::move(table)) {}

  std::shared_ptr<const EmbeddingTable> table_;
};

RecordFeatures record_features(const AudioRecord& record, const std::string& hypothesis,
                               const SimilarityProvider& provider);

}  // namespace voiceaudit
