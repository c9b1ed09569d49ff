#pragma once

// The audit pipeline. Shadow-model outputs become a labeled user-level
// training table; the auditor trained on it classifies target-model users.
// Metrics, repeated trials and sweeps live here too.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voiceaudit/aggregate.hpp"
#include "voiceaudit/classify.hpp"
#include "voiceaudit/features.hpp"
#include "voiceaudit/mfcc.hpp"
#include "voiceaudit/shadow_run.hpp"
#include "voiceaudit/simulate.hpp"

namespace voiceaudit {

// ---------------------------------------------------------------------------
// Metrics (member is the positive class)

struct Metrics {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  std::size_t total() const { return tp + tn + fp + fn; }

  /// Derives the rates; a ratio with a zero denominator stays empty, and f1
  /// is empty whenever precision or recall is.
  static Metrics from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);
};

Metrics score_predictions(std::span<const Membership> truth, std::span<const Membership> predicted);

/// Every vector must carry a label.
Metrics evaluate(const AuditorModel& model, std::span<const UserFeatureVector> labeled);

// ---------------------------------------------------------------------------
// Building user vectors

/// Computes the per-record MFCC matrix for a record; needed only for the
/// set5_mfcc feature set.
using MfccSource = std::function<Matrix(const AudioRecord&)>;

/// Reads record.audio_path and runs mfcc() with default settings.
MfccSource mfcc_from_audio_files(const MfccConfig& config = {});

struct BuildStats {
  std::size_t records_without_transcript = 0;
  std::size_t users_excluded = 0;
};

/// One unlabeled vector per user of `records` (sorted by user id). With a
/// cap, users with more records keep `audios_per_user` of them, chosen by
/// seed and user id.
std::vector<UserFeatureVector> user_vectors(const std::vector<AudioRecord>& records,
                                            const TranscriptionTable& transcripts,
                                            const SimilarityProvider& provider, FeatureSet fs,
                                            std::optional<std::size_t> audios_per_user,
                                            std::uint64_t seed, const MfccSource* mfcc = nullptr,
                                            BuildStats* stats = nullptr);

/// Rows of every run concatenated in run order; each run's users are labeled
/// member iff they belong to that run's shadow_train.
TrainingTable build_training_table(std::span<const ShadowRun> runs,
                                   const SimilarityProvider& provider, FeatureSet fs,
                                   std::optional<std::size_t> audios_per_user, std::uint64_t seed,
                                   const MfccSource* mfcc = nullptr, BuildStats* stats = nullptr);

/// n_users/2 members and n_users/2 nonmembers drawn without replacement;
/// rows keep their original relative order.
TrainingTable balance_and_sample(const TrainingTable& table, std::size_t n_users,
                                 std::uint64_t seed);

/// Same policy on user vectors (all must be labeled).
std::vector<UserFeatureVector> balance_and_sample(std::span<const UserFeatureVector> vectors,
                                                  std::size_t n_users, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Auditing

struct AuditVerdict {
  std::string user_id;
  Membership label = Membership::member;
  double member_vote_fraction = 0.0;
  std::size_t n_query_audios = 0;
};

AuditVerdict audit_user(const AuditorModel& model, std::span<const AudioRecord> user_records,
                        std::span<const std::string> hypotheses,
                        const SimilarityProvider& provider, const MfccSource* mfcc = nullptr);

struct MemberScenarios {
  std::map<std::string, std::vector<AudioRecord>> queries;
  std::size_t skipped_users = 0;
};

/// For each member user (a user of target_train) with at least k_in training
/// records and m_out unseen records: k_in seen plus m_out unseen audios.
/// (k, 0) is the pure in-set case, (0, m) the pure out-of-set case.
MemberScenarios build_member_scenarios(const Dataset& target_train, const Dataset& target_test,
                                       std::size_t k_in, std::size_t m_out, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiments on the simulator

struct ExperimentConfig {
  std::string wordlist_path;  // empty: the bundled list
  std::optional<std::string> embeddings_path;
  /// With no embeddings_path, a positive value selects embedding similarity
  /// over synthetic_embeddings(wordlist, dim, embedding_seed).
  std::size_t synthetic_embedding_dim = 0;
  std::uint64_t embedding_seed = 0;
  CorpusSpec shadow_corpus;
  CorpusSpec target_corpus;
  ErrorModel shadow_error;
  ErrorModel target_error;
  double shadow_split = 0.5;
  std::size_t n_shadow_models = 1;
  double target_member_fraction = 0.5;
  double target_holdout = 0.0;
  /// Member query scenario (seen, unseen audios); unset queries all records.
  std::optional<std::pair<std::size_t, std::size_t>> member_query;
  FeatureSet feature_set = FeatureSet::set5;
  Algorithm algorithm = Algorithm::random_forest;
  TrainConfig train;
  std::size_t train_users = 500;
  std::size_t test_users = 200;
  std::optional<std::size_t> audios_per_user;
  int mfcc_sample_rate_hz = 8000;

  ExperimentConfig();
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct TrialResult {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  Metrics metrics;
  std::size_t skipped_member_users = 0;
};

/// One full pipeline run: shadow corpora and runs, auditor training, target
/// corpus and run, balanced test users, evaluation.
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t defined = 0;

  double std_error() const;
};

struct TrialSummary {
  MetricSummary accuracy, precision, recall, f1;
};

TrialSummary summarize(std::span<const TrialResult> trials);

struct RepeatedResult {
  std::vector<TrialResult> trials;
  TrialSummary summary;
};

/// Repeat i runs with seed derive_seed(base_seed, i).
RepeatedResult repeated_trials(const ExperimentConfig& config, std::size_t repeats,
                               std::uint64_t base_seed);

inline constexpr std::array<std::size_t, 11> kDefaultTrainingSizes = {
    10, 30, 50, 80, 100, 200, 500, 1000, 2000, 5000, 10000};

struct SweepRow {
  std::size_t size = 0;
  TrialSummary summary;
};

/// Sizes must be ascending and fit the shadow user pool.
std::vector<SweepRow> sweep_training_size(std::span<const std::size_t> sizes,
                                          const ExperimentConfig& config, std::size_t repeats,
                                          std::uint64_t base_seed);

void write_trials_csv(std::span<const TrialResult> trials, const std::string& path);
void write_summary_csv(const TrialSummary& summary, std::size_t repeats, const std::string& path);
/// Header: size,acc_mean,acc_std,prec_mean,prec_std,rec_mean,rec_std,f1_mean,f1_std
void write_sweep_csv(std::span<const SweepRow> rows, const std::string& path);
void write_metrics_csv(const Metrics& metrics, const std::string& path);

std::string default_wordlist_path();

}  // namespace voiceaudit
