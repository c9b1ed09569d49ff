#pragma once

#include <set>
#include <string>

#include "voiceaudit/corpus.hpp"

namespace voiceaudit {

/// One shadow model's labeled outputs: user-disjoint train/test splits and
/// the transcriptions of every record in both.
struct ShadowRun {
  Dataset shadow_train;
  Dataset shadow_test;
  TranscriptionTable transcripts;

  /// Throws Error if the splits share a user or a record, or a transcription
  /// is missing.
  void validate() const;
};

/// A target model whose member users may have records on both sides: `train`
/// holds the records the model was trained on, `test` holds unseen records
/// of member users plus every record of nonmember users.
struct TargetRun {
  Dataset train;
  Dataset test;
  TranscriptionTable transcripts;

  std::set<std::string> member_users() const { return train.user_set(); }
};

}  // namespace voiceaudit
