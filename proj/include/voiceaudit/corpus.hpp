#pragma once

// Data model and file ingestion: audio manifests, transcription tables,
// word-embedding files and PCM16 WAV audio.
//
// Manifest and transcription files are CSV with a header row:
//
//   user_id,audio_id,duration_seconds,reference_text[,audio_path]
//   user_id,audio_id,hypothesis_text
//
// Column order is free; names are not. Text is stored exactly as written.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace voiceaudit {

struct AudioRecord {
  std::string user_id;
  std::string audio_id;
  std::string reference_text;
  double duration_seconds = 0.0;
  std::optional<std::string> audio_path;

  bool operator==(const AudioRecord&) const = default;
};

/// Throws Error unless the record satisfies the AudioRecord invariants
/// (positive finite duration, non-blank reference).
void validate(const AudioRecord& record);

class Dataset {
 public:
  Dataset() = default;
  /// Validates every record and rejects duplicate (user_id, audio_id) keys.
  Dataset(std::string name, std::vector<AudioRecord> records);

  const std::string& name() const { return name_; }
  const std::vector<AudioRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Distinct user ids in order of first appearance.
  std::vector<std::string> users() const;
  std::set<std::string> user_set() const;
  /// Records of each user, in dataset order.
  std::map<std::string, std::vector<AudioRecord>> by_user() const;

 private:
  std::string name_;
  std::vector<AudioRecord> records_;
};

using RecordKey = std::pair<std::string, std::string>;  // (user_id, audio_id)

class TranscriptionTable {
 public:
  void set(const std::string& user_id, const std::string& audio_id, std::string hypothesis);
  /// Throws Error if the key is absent.
  const std::string& at(const std::string& user_id, const std::string& audio_id) const;
  const std::string& at(const AudioRecord& record) const {
    return at(record.user_id, record.audio_id);
  }
  bool contains(const std::string& user_id, const std::string& audio_id) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<RecordKey, std::string>& entries() const { return entries_; }

  /// Throws Error naming the first key that no dataset contains.
  void check_covered_by(const std::vector<const Dataset*>& datasets) const;

 private:
  std::map<RecordKey, std::string> entries_;
};

struct EmbeddingTable {
  std::size_t dimension = 0;
  std::map<std::string, std::vector<double>> vectors;  // lowercase tokens
  std::size_t duplicate_tokens = 0;

  const std::vector<double>* find(const std::string& lowercase_token) const;
};

struct AudioSignal {
  int sample_rate_hz = 0;
  std::vector<double> samples;  // mono, in [-1, 1]
};

Dataset load_manifest(const std::string& path);
void save_manifest(const Dataset& dataset, const std::string& path);

TranscriptionTable load_transcriptions(const std::string& path);
/// Entries are written in (user_id, audio_id) order.
void save_transcriptions(const TranscriptionTable& table, const std::string& path);

/// User-level split: each user's records land wholly on one side. The train
/// side receives floor(train_fraction * M) users chosen by `seed`.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);

/// Whitespace separated "token v1 ... vD" lines. Tokens are lowercased.
/// Duplicate tokens: last occurrence wins, counted in duplicate_tokens.
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingTable& table, const std::string& path);

/// RIFF/WAVE PCM 16-bit mono only. Samples are scaled by 1/32768.
AudioSignal read_wav(const std::string& path);
/// Writes PCM16 mono; samples are clamped to [-1, 1) before quantization.
void write_wav(const AudioSignal& signal, const std::string& path);

std::string trim(const std::string& text);
std::string to_upper(std::string text);
std::string to_lower(std::string text);
std::vector<std::string> split_whitespace(const std::string& text);

}  // namespace voiceaudit
