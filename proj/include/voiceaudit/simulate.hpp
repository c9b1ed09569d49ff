#pragma once

// Synthetic stand-in for an ASR system. The transcription error rate of a
// record depends on whether the record, or its speaker, was trained on.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voiceaudit/corpus.hpp"
#include "voiceaudit/shadow_run.hpp"

namespace voiceaudit {

struct SpeakerProfile {
  std::string user_id;
  double base_speed = 14.0;  // reference characters per second
  int min_words = 5;
  int max_words = 14;
  double personal_error_scale = 1.0;
  double pitch_hz = 150.0;
};

struct ErrorMix {
  double substitution = 0.6;
  double deletion = 0.2;
  double insertion = 0.2;
};

struct ErrorModel {
  double member_cer = 0.05;
  double nonmember_cer = 0.09;
  double noise_multiplier = 1.0;
  ErrorMix mix;
  /// Unseen records of a member speaker are transcribed at
  /// nonmember_cer - speaker_familiarity * (nonmember_cer - member_cer).
  double speaker_familiarity = 0.5;

  double member_unseen_cer() const {
    return nonmember_cer - speaker_familiarity * (nonmember_cer - member_cer);
  }

  /// Throws Error unless rates lie in [0, 1), member_cer <= nonmember_cer,
  /// noise_multiplier >= 1, familiarity in [0, 1] and the mix sums to 1.
  void validate() const;

  static ErrorModel noisy() {
    ErrorModel m;
    m.noise_multiplier = 2.0;
    return m;
  }
};

struct CorpusSpec {
  std::size_t n_users = 100;
  int min_records = 4;
  int max_records = 12;
  double min_speed = 10.0;
  double max_speed = 18.0;
  int min_words = 4;
  int max_words = 16;
  /// log-normal spread of personal_error_scale
  double error_scale_sigma = 0.25;
  std::string user_prefix = "spk";
};

struct SimulatedCorpus {
  Dataset dataset;
  std::map<std::string, SpeakerProfile> speakers;

  double error_scale(const std::string& user_id) const;
};

/// At least 50 distinct non-empty words, else Error. Words are uppercased.
std::vector<std::string> load_wordlist(const std::string& path);

SimulatedCorpus generate_corpus(const CorpusSpec& spec, const std::vector<std::string>& words,
                                std::uint64_t seed);
SimulatedCorpus generate_corpus(std::size_t n_users, int min_records, int max_records,
                                const std::string& wordlist_path, std::uint64_t seed);

/// Applies independent per-character edits at `rate` (capped at 1) with the
/// given mix. Replacement and inserted characters come from the reference's
/// own character set.
std::string inject_errors(const std::string& reference, double rate, const ErrorMix& mix,
                          std::uint64_t seed);

/// Seed for one record: a function of the run seed and the record key only.
std::uint64_t record_seed(std::uint64_t seed, const AudioRecord& record);

std::string simulate_transcription(const AudioRecord& record, bool is_member_record,
                                   const ErrorModel& model, std::uint64_t seed,
                                   double personal_error_scale = 1.0);

/// User-disjoint split; train side transcribed at member_cer, test side at
/// nonmember_cer. Needs at least 4 users.
ShadowRun simulate_shadow_run(const SimulatedCorpus& corpus, double train_fraction,
                              const ErrorModel& model, std::uint64_t seed);

/// floor(member_fraction * M) member users; each keeps
/// min(floor(holdout_fraction * n), n - 1) of its n records out of training.
TargetRun simulate_target_run(const SimulatedCorpus& corpus, double member_fraction,
                              double holdout_fraction, const ErrorModel& model,
                              std::uint64_t seed);

/// Independent standard-normal vectors for each word (lowercased). A
/// stand-in for pretrained vectors when none are available.
EmbeddingTable synthetic_embeddings(const std::vector<std::string>& words, std::size_t dimension,
                                    std::uint64_t seed);

/// Voiced-like test signal for a record: harmonics of the speaker pitch plus
/// a little noise, `duration_seconds` long.
AudioSignal synthesize_audio(const AudioRecord& record, const SpeakerProfile& speaker,
                             int sample_rate_hz, std::uint64_t seed);

}  // namespace voiceaudit
