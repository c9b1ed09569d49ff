#include "voiceaudit/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "voiceaudit/csv.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"

namespace voiceaudit {

using json = nlohmann::json;

void ShadowRun::validate() const {
  const auto train_users = shadow_train.user_set();
  for (const auto& u : shadow_test.user_set()) {
    if (train_users.count(u)) throw Error("shadow run: user '" + u + "' appears on both sides");
  }
  for (const auto* d : {&shadow_train, &shadow_test}) {
    for (const auto& r : d->records()) {
      if (!transcripts.contains(r.user_id, r.audio_id)) {
        throw Error("shadow run: no transcription for " + r.user_id + "/" + r.audio_id);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics

Metrics Metrics::from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.tn = tn;
  m.fp = fp;
  m.fn = fn;
  const auto total = m.total();
  m.accuracy = total ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
  if (tp + fp) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision && m.recall) {
    const double denom = static_cast<double>(2 * tp + fp + fn);
    m.f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  return m;
}

Metrics score_predictions(std::span<const Membership> truth,
                          std::span<const Membership> predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("truth/prediction length mismatch");
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool actual = truth[i] == Membership::member;
    const bool said = predicted[i] == Membership::member;
    if (actual && said) ++tp;
    if (!actual && !said) ++tn;
    if (!actual && said) ++fp;
    if (actual && !said) ++fn;
  }
  return Metrics::from_counts(tp, tn, fp, fn);
}

Metrics evaluate(const AuditorModel& model, std::span<const UserFeatureVector> labeled) {
  std::vector<Membership> truth, predicted;
  for (const auto& v : labeled) {
    if (!v.label) throw Error("evaluate: vector for '" + v.user_id + "' has no label");
    truth.push_back(*v.label);
    predicted.push_back(model.predict(v.values).label);
  }
  return score_predictions(truth, predicted);
}

// ---------------------------------------------------------------------------
// User vectors

MfccSource mfcc_from_audio_files(const MfccConfig& config) {
  return [config](const AudioRecord& record) {
    if (!record.audio_path) {
      throw Error("record " + record.user_id + "/" + record.audio_id + " has no audio_path");
    }
    return mfcc(read_wav(*record.audio_path), config);
  };
}

std::vector<UserFeatureVector> user_vectors(const std::vector<AudioRecord>& records,
                                            const TranscriptionTable& transcripts,
                                            const SimilarityProvider& provider, FeatureSet fs,
                                            std::optional<std::size_t> audios_per_user,
                                            std::uint64_t seed, const MfccSource* mfcc,
                                            BuildStats* stats) {
  if (audios_per_user && *audios_per_user == 0) throw Error("audios_per_user must be positive");
  if (fs == FeatureSet::set5_mfcc && (!mfcc || !*mfcc)) {
    throw Error("feature set set5_mfcc needs an MFCC source");
  }
  std::map<std::string, std::vector<const AudioRecord*>> grouped;
  for (const auto& r : records) {
    if (!transcripts.contains(r.user_id, r.audio_id)) {
      if (stats) ++stats->records_without_transcript;
      grouped[r.user_id];
      continue;
    }
    grouped[r.user_id].push_back(&r);
  }

  std::vector<UserFeatureVector> out;
  for (auto& [user, recs] : grouped) {
    if (recs.empty()) {
      if (stats) ++stats->users_excluded;
      continue;
    }
    if (audios_per_user && recs.size() > *audios_per_user) {
      Rng rng(derive_seed(seed, hash_string(user)));
      auto picks = rng.sample_indices(recs.size(), *audios_per_user);
      std::sort(picks.begin(), picks.end());
      std::vector<const AudioRecord*> chosen;
      for (auto i : picks) chosen.push_back(recs[i]);
      recs = std::move(chosen);
    }
    std::vector<RecordFeatures> feats;
    std::vector<Matrix> mats;
    for (const auto* r : recs) {
      feats.push_back(record_features(*r, transcripts.at(*r), provider));
      if (fs == FeatureSet::set5_mfcc) mats.push_back((*mfcc)(*r));
    }
    std::optional<std::vector<double>> means;
    if (fs == FeatureSet::set5_mfcc) means = user_mfcc_means(mats);
    out.push_back(user_vector(user, feats, means, fs));
  }
  return out;
}

TrainingTable build_training_table(std::span<const ShadowRun> runs,
                                   const SimilarityProvider& provider, FeatureSet fs,
                                   std::optional<std::size_t> audios_per_user, std::uint64_t seed,
                                   const MfccSource* mfcc, BuildStats* stats) {
  if (runs.empty()) throw Error("build_training_table: no shadow runs");
  std::vector<UserFeatureVector> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    std::vector<AudioRecord> all = run.shadow_train.records();
    all.insert(all.end(), run.shadow_test.records().begin(), run.shadow_test.records().end());
    auto vectors = label_users(user_vectors(all, run.transcripts, provider, fs, audios_per_user,
                                            derive_seed(seed, i), mfcc, stats),
                               run.shadow_train.user_set());
    rows.insert(rows.end(), std::make_move_iterator(vectors.begin()),
                std::make_move_iterator(vectors.end()));
  }
  return TrainingTable::from_vectors(rows, fs);
}

namespace {

std::vector<std::size_t> balanced_indices(std::span<const Membership> labels, std::size_t n_users,
                                          std::uint64_t seed) {
  if (n_users == 0 || n_users % 2 != 0) {
    throw Error("balanced sample size must be a positive even number, got " +
                std::to_string(n_users));
  }
  std::vector<std::size_t> members, nonmembers;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == Membership::member ? members : nonmembers).push_back(i);
  }
  const auto half = n_users / 2;
  if (members.size() < half || nonmembers.size() < half) {
    throw Error("cannot draw " + std::to_string(half) + " users per class: pool has " +
                std::to_string(members.size()) + " members and " +
                std::to_string(nonmembers.size()) + " nonmembers");
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (auto i : rng.sample_indices(members.size(), half)) chosen.push_back(members[i]);
  for (auto i : rng.sample_indices(nonmembers.size(), half)) chosen.push_back(nonmembers[i]);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

TrainingTable balance_and_sample(const TrainingTable& table, std::size_t n_users,
                                 std::uint64_t seed) {
  TrainingTable out;
  out.dim_names = table.dim_names;
  out.feature_set = table.feature_set;
  for (auto i : balanced_indices(table.y, n_users, seed)) {
    out.x.push_back(table.x[i]);
    out.y.push_back(table.y[i]);
  }
  return out;
}

std::vector<UserFeatureVector> balance_and_sample(std::span<const UserFeatureVector> vectors,
                                                  std::size_t n_users, std::uint64_t seed) {
  std::vector<Membership> labels;
  for (const auto& v : vectors) {
    if (!v.label) throw Error("balance_and_sample: vector for '" + v.user_id + "' has no label");
    labels.push_back(*v.label);
  }
  std::vector<UserFeatureVector> out;
  for (auto i : balanced_indices(labels, n_users, seed)) out.push_back(vectors[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Auditing

AuditVerdict audit_user(const AuditorModel& model, std::span<const AudioRecord> user_records,
                        std::span<const std::string> hypotheses,
                        const SimilarityProvider& provider, const MfccSource* mfcc) {
  if (user_records.empty()) throw Error("audit_user: no query audios");
  if (user_records.size() != hypotheses.size()) {
    throw DimensionError("audit_user: " + std::to_string(user_records.size()) + " records but " +
                         std::to_string(hypotheses.size()) + " hypotheses");
  }
  const auto& user = user_records.front().user_id;
  for (const auto& r : user_records) {
    if (r.user_id != user) throw Error("audit_user: records belong to more than one user");
  }
  if (!model.feature_set()) throw Error("audit_user: model has no feature-set schema");
  const auto fs = *model.feature_set();
  if (fs == FeatureSet::set5_mfcc && (!mfcc || !*mfcc)) {
    throw Error("audit_user: model uses MFCC features but no audio source was given");
  }

  std::vector<RecordFeatures> feats;
  std::vector<Matrix> mats;
  for (std::size_t i = 0; i < user_records.size(); ++i) {
    feats.push_back(record_features(user_records[i], hypotheses[i], provider));
    if (fs == FeatureSet::set5_mfcc) mats.push_back((*mfcc)(user_records[i]));
  }
  std::optional<std::vector<double>> means;
  if (fs == FeatureSet::set5_mfcc) means = user_mfcc_means(mats);
  const auto vec = user_vector(user, feats, means, fs);
  const auto p = model.predict(vec.values);
  return {user, p.label, p.member_vote_fraction, user_records.size()};
}

MemberScenarios build_member_scenarios(const Dataset& target_train, const Dataset& target_test,
                                       std::size_t k_in, std::size_t m_out, std::uint64_t seed) {
  if (k_in + m_out == 0) throw Error("member scenario needs at least one query audio");
  const auto seen = target_train.by_user();
  const auto unseen = target_test.by_user();
  MemberScenarios out;
  for (const auto& [user, seen_recs] : seen) {
    const auto it = unseen.find(user);
    const std::size_t n_unseen = it == unseen.end() ? 0 : it->second.size();
    if (seen_recs.size() < k_in || n_unseen < m_out) {
      ++out.skipped_users;
      continue;
    }
    Rng rng(derive_seed(seed, hash_string(user)));
    std::vector<AudioRecord> query;
    for (auto i : rng.sample_indices(seen_recs.size(), k_in)) query.push_back(seen_recs[i]);
    if (m_out > 0) {
      for (auto i : rng.sample_indices(n_unseen, m_out)) query.push_back(it->second[i]);
    }
    out.queries.emplace(user, std::move(query));
  }
  if (out.queries.empty()) {
    throw Error("no member user has " + std::to_string(k_in) + " seen and " +
                std::to_string(m_out) + " unseen audios");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration

std::string default_wordlist_path() { return std::string(VOICEAUDIT_DATA_DIR) + "/wordlist.txt"; }

ExperimentConfig::ExperimentConfig() {
  shadow_corpus.n_users = 600;
  shadow_corpus.user_prefix = "shd";
  target_corpus.n_users = 400;
  target_corpus.user_prefix = "tgt";
}

namespace {

json corpus_to_json(const CorpusSpec& c) {
  return {{"n_users", c.n_users},         {"min_records", c.min_records},
          {"max_records", c.max_records}, {"min_speed", c.min_speed},
          {"max_speed", c.max_speed},     {"min_words", c.min_words},
          {"max_words", c.max_words},     {"error_scale_sigma", c.error_scale_sigma},
          {"user_prefix", c.user_prefix}};
}

void corpus_from_json(const json& j, CorpusSpec& c) {
  c.n_users = j.value("n_users", c.n_users);
  c.min_records = j.value("min_records", c.min_records);
  c.max_records = j.value("max_records", c.max_records);
  c.min_speed = j.value("min_speed", c.min_speed);
  c.max_speed = j.value("max_speed", c.max_speed);
  c.min_words = j.value("min_words", c.min_words);
  c.max_words = j.value("max_words", c.max_words);
  c.error_scale_sigma = j.value("error_scale_sigma", c.error_scale_sigma);
  c.user_prefix = j.value("user_prefix", c.user_prefix);
}

json error_to_json(const ErrorModel& e) {
  return {{"member_cer", e.member_cer},
          {"nonmember_cer", e.nonmember_cer},
          {"noise_multiplier", e.noise_multiplier},
          {"speaker_familiarity", e.speaker_familiarity},
          {"mix",
           {{"substitution", e.mix.substitution},
            {"deletion", e.mix.deletion},
            {"insertion", e.mix.insertion}}}};
}

void error_from_json(const json& j, ErrorModel& e) {
  e.member_cer = j.value("member_cer", e.member_cer);
  e.nonmember_cer = j.value("nonmember_cer", e.nonmember_cer);
  e.noise_multiplier = j.value("noise_multiplier", e.noise_multiplier);
  e.speaker_familiarity = j.value("speaker_familiarity", e.speaker_familiarity);
  if (j.contains("mix")) {
    const auto& m = j.at("mix");
    e.mix.substitution = m.value("substitution", e.mix.substitution);
    e.mix.deletion = m.value("deletion", e.mix.deletion);
    e.mix.insertion = m.value("insertion", e.mix.insertion);
  }
  e.validate();
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["wordlist_path"] = c.wordlist_path;
  j["embeddings_path"] = c.embeddings_path ? json(*c.embeddings_path) : json(nullptr);
  j["synthetic_embedding_dim"] = c.synthetic_embedding_dim;
  j["embedding_seed"] = c.embedding_seed;
  j["shadow_corpus"] = corpus_to_json(c.shadow_corpus);
  j["target_corpus"] = corpus_to_json(c.target_corpus);
  j["shadow_error"] = error_to_json(c.shadow_error);
  j["target_error"] = error_to_json(c.target_error);
  j["shadow_split"] = c.shadow_split;
  j["n_shadow_models"] = c.n_shadow_models;
  j["target_member_fraction"] = c.target_member_fraction;
  j["target_holdout"] = c.target_holdout;
  j["member_query"] = c.member_query
                          ? json({{"seen", c.member_query->first}, {"unseen", c.member_query->second}})
                          : json(nullptr);
  j["feature_set"] = std::string(to_string(c.feature_set));
  j["algorithm"] = std::string(to_string(c.algorithm));
  j["train"] = {{"seed", c.train.seed},
                {"dt_max_depth", c.train.dt.max_depth},
                {"dt_min_samples_leaf", c.train.dt.min_samples_leaf},
                {"rf_n_trees", c.train.rf.n_trees},
                {"rf_max_features", c.train.rf.max_features},
                {"rf_bootstrap", c.train.rf.bootstrap},
                {"k", c.train.k},
                {"var_smoothing", c.train.var_smoothing}};
  j["train_users"] = c.train_users;
  j["test_users"] = c.test_users;
  j["audios_per_user"] = c.audios_per_user ? json(*c.audios_per_user) : json(nullptr);
  j["mfcc_sample_rate_hz"] = c.mfcc_sample_rate_hz;
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ExperimentConfig c;
  try {
    const auto j = json::parse(text);
    c.wordlist_path = j.value("wordlist_path", c.wordlist_path);
    if (j.contains("embeddings_path") && !j.at("embeddings_path").is_null()) {
      c.embeddings_path = j.at("embeddings_path").get<std::string>();
    }
    c.synthetic_embedding_dim = j.value("synthetic_embedding_dim", c.synthetic_embedding_dim);
    c.embedding_seed = j.value("embedding_seed", c.embedding_seed);
    if (j.contains("shadow_corpus")) corpus_from_json(j.at("shadow_corpus"), c.shadow_corpus);
    if (j.contains("target_corpus")) corpus_from_json(j.at("target_corpus"), c.target_corpus);
    if (j.contains("error")) {
      error_from_json(j.at("error"), c.shadow_error);
      error_from_json(j.at("error"), c.target_error);
    }
    if (j.contains("shadow_error")) error_from_json(j.at("shadow_error"), c.shadow_error);
    if (j.contains("target_error")) error_from_json(j.at("target_error"), c.target_error);
    c.shadow_split = j.value("shadow_split", c.shadow_split);
    c.n_shadow_models = j.value("n_shadow_models", c.n_shadow_models);
    c.target_member_fraction = j.value("target_member_fraction", c.target_member_fraction);
    c.target_holdout = j.value("target_holdout", c.target_holdout);
    if (j.contains("member_query") && !j.at("member_query").is_null()) {
      c.member_query = std::make_pair(j.at("member_query").at("seen").get<std::size_t>(),
                                      j.at("member_query").at("unseen").get<std::size_t>());
    }
    if (j.contains("feature_set")) c.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.train.seed = t.value("seed", c.train.seed);
      c.train.dt.max_depth = t.value("dt_max_depth", c.train.dt.max_depth);
      c.train.dt.min_samples_leaf = t.value("dt_min_samples_leaf", c.train.dt.min_samples_leaf);
      c.train.rf.n_trees = t.value("rf_n_trees", c.train.rf.n_trees);
      c.train.rf.max_features = t.value("rf_max_features", c.train.rf.max_features);
      c.train.rf.bootstrap = t.value("rf_bootstrap", c.train.rf.bootstrap);
      c.train.k = t.value("k", c.train.k);
      c.train.var_smoothing = t.value("var_smoothing", c.train.var_smoothing);
    }
    c.train_users = j.value("train_users", c.train_users);
    c.test_users = j.value("test_users", c.test_users);
    if (j.contains("audios_per_user") && !j.at("audios_per_user").is_null()) {
      c.audios_per_user = j.at("audios_per_user").get<std::size_t>();
    }
    c.mfcc_sample_rate_hz = j.value("mfcc_sample_rate_hz", c.mfcc_sample_rate_hz);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return experiment_config_from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Trials

namespace {

// Stream ids under a trial seed.
enum Stream : std::uint64_t {
  kShadowCorpus = 1,
  kShadowRun,
  kTrainTable,
  kTrainSample,
  kTargetCorpus,
  kTargetRun,
  kScenario,
  kTestVectors,
  kTestSample,
  kAudio,
  kNonmemberQuery,
};

SimilarityProvider make_provider(const ExperimentConfig& config,
                                 const std::vector<std::string>& words) {
  if (config.embeddings_path) {
    return SimilarityProvider::embedding(
        std::make_shared<const EmbeddingTable>(load_embeddings(*config.embeddings_path)));
  }
  if (config.synthetic_embedding_dim > 0) {
    return SimilarityProvider::embedding(std::make_shared<const EmbeddingTable>(
        synthetic_embeddings(words, config.synthetic_embedding_dim, config.embedding_seed)));
  }
  return SimilarityProvider::char_edit();
}

MfccSource synthetic_mfcc(std::shared_ptr<const std::map<std::string, SpeakerProfile>> speakers,
                          int rate, std::uint64_t seed) {
  return [speakers, rate, seed](const AudioRecord& r) {
    const auto it = speakers->find(r.user_id);
    if (it == speakers->end()) throw Error("no speaker profile for '" + r.user_id + "'");
    return mfcc(synthesize_audio(r, it->second, rate, seed));
  };
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed) {
  const auto words =
      load_wordlist(config.wordlist_path.empty() ? default_wordlist_path() : config.wordlist_path);
  const auto provider = make_provider(config, words);
  const bool wants_mfcc = config.feature_set == FeatureSet::set5_mfcc;
  auto speakers = std::make_shared<std::map<std::string, SpeakerProfile>>();

  if (config.n_shadow_models == 0) throw Error("need at least one shadow model");
  std::vector<ShadowRun> runs;
  for (std::size_t s = 0; s < config.n_shadow_models; ++s) {
    auto spec = config.shadow_corpus;
    spec.user_prefix += std::to_string(s) + "_";
    const auto corpus = generate_corpus(spec, words, derive_seed(derive_seed(seed, kShadowCorpus), s));
    runs.push_back(simulate_shadow_run(corpus, config.shadow_split, config.shadow_error,
                                       derive_seed(derive_seed(seed, kShadowRun), s)));
    if (wants_mfcc) speakers->insert(corpus.speakers.begin(), corpus.speakers.end());
  }

  const auto target_corpus =
      generate_corpus(config.target_corpus, words, derive_seed(seed, kTargetCorpus));
  if (wants_mfcc) speakers->insert(target_corpus.speakers.begin(), target_corpus.speakers.end());
  MfccSource mfcc_source;
  if (wants_mfcc) {
    mfcc_source = synthetic_mfcc(speakers, config.mfcc_sample_rate_hz, derive_seed(seed, kAudio));
  }
  const MfccSource* mfcc = wants_mfcc ? &mfcc_source : nullptr;

  const auto pool = build_training_table(runs, provider, config.feature_set,
                                         config.audios_per_user, derive_seed(seed, kTrainTable),
                                         mfcc);
  const auto table = balance_and_sample(pool, config.train_users, derive_seed(seed, kTrainSample));
  auto train_config = config.train;
  train_config.seed = derive_seed(config.train.seed, seed);
  const auto model = train(table, config.algorithm, train_config);

  const auto target = simulate_target_run(target_corpus, config.target_member_fraction,
                                          config.target_holdout, config.target_error,
                                          derive_seed(seed, kTargetRun));
  const auto members = target.member_users();

  // Query sets per target user.
  std::vector<AudioRecord> queries;
  TrialResult result;
  if (config.member_query) {
    const auto [k_in, m_out] = *config.member_query;
    const auto scenarios = build_member_scenarios(target.train, target.test, k_in, m_out,
                                                  derive_seed(seed, kScenario));
    result.skipped_member_users = scenarios.skipped_users;
    for (const auto& [user, recs] : scenarios.queries) queries.insert(queries.end(), recs.begin(), recs.end());
    // nonmembers are queried with the same number of audios where available
    Rng rng(derive_seed(seed, kNonmemberQuery));
    for (const auto& [user, recs] : target.test.by_user()) {
      if (members.count(user)) continue;
      for (auto i : rng.sample_indices(recs.size(), k_in + m_out)) queries.push_back(recs[i]);
    }
  } else {
    queries = target.train.records();
    queries.insert(queries.end(), target.test.records().begin(), target.test.records().end());
  }

  const auto test_vectors = label_users(
      user_vectors(queries, target.transcripts, provider, config.feature_set,
                   config.member_query ? std::nullopt : config.audios_per_user,
                   derive_seed(seed, kTestVectors), mfcc),
      members);
  const auto test = balance_and_sample(test_vectors, config.test_users, derive_seed(seed, kTestSample));

  result.seed = seed;
  result.metrics = evaluate(model, test);
  return result;
}

double MetricSummary::std_error() const {
  return defined ? std / std::sqrt(static_cast<double>(defined)) : 0.0;
}

namespace {

MetricSummary summarize_values(const std::vector<double>& values) {
  MetricSummary s;
  s.defined = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace

TrialSummary summarize(std::span<const TrialResult> trials) {
  std::vector<double> acc, prec, rec, f1;
  for (const auto& t : trials) {
    acc.push_back(t.metrics.accuracy);
    if (t.metrics.precision) prec.push_back(*t.metrics.precision);
    if (t.metrics.recall) rec.push_back(*t.metrics.recall);
    if (t.metrics.f1) f1.push_back(*t.metrics.f1);
  }
  return {summarize_values(acc), summarize_values(prec), summarize_values(rec),
          summarize_values(f1)};
}

RepeatedResult repeated_trials(const ExperimentConfig& config, std::size_t repeats,
                               std::uint64_t base_seed) {
  if (repeats == 0) throw Error("repeats must be at least 1");
  RepeatedResult out;
  for (std::size_t i = 0; i < repeats; ++i) {
    auto trial = run_trial(config, derive_seed(base_seed, i));
    trial.repeat = i;
    out.trials.push_back(std::move(trial));
  }
  out.summary = summarize(out.trials);
  return out;
}

std::vector<SweepRow> sweep_training_size(std::span<const std::size_t> sizes,
                                          const ExperimentConfig& config, std::size_t repeats,
                                          std::uint64_t base_seed) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw Error("sweep sizes must be ascending");
  const std::size_t pool = config.n_shadow_models * config.shadow_corpus.n_users;
  for (auto size : sizes) {
    if (size > pool) {
      throw Error("training size " + std::to_string(size) + " exceeds the " +
                  std::to_string(pool) + " available shadow users");
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    auto c = config;
    c.train_users = sizes[i];
    rows.push_back({sizes[i], repeated_trials(c, repeats, derive_seed(base_seed, i)).summary});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

std::string opt(const std::optional<double>& v) { return v ? csv::format_double(*v) : ""; }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void append_summary(csv::Row& row, const TrialSummary& s) {
  for (const auto* m : {&s.accuracy, &s.precision, &s.recall, &s.f1}) {
    row.push_back(m->defined ? csv::format_double(m->mean) : "");
    row.push_back(m->defined ? csv::format_double(m->std) : "");
  }
}

const csv::Row kSummaryColumns = {"acc_mean", "acc_std",  "prec_mean", "prec_std",
                                  "rec_mean", "rec_std",  "f1_mean",   "f1_std"};

}  // namespace

void write_trials_csv(std::span<const TrialResult> trials, const std::string& path) {
  auto out = open_out(path);
  csv::write_row(out, {"repeat", "seed", "tp", "tn", "fp", "fn", "accuracy", "precision", "recall",
                       "f1", "skipped_member_users"});
  for (const auto& t : trials) {
    const auto& m = t.metrics;
    csv::write_row(out, {std::to_string(t.repeat), std::to_string(t.seed), std::to_string(m.tp),
                         std::to_string(m.tn), std::to_string(m.fp), std::to_string(m.fn),
                         csv::format_double(m.accuracy), opt(m.precision), opt(m.recall),
                         opt(m.f1), std::to_string(t.skipped_member_users)});
  }
}

void write_summary_csv(const TrialSummary& summary, std::size_t repeats, const std::string& path) {
  auto out = open_out(path);
  csv::Row header{"repeats"};
  header.insert(header.end(), kSummaryColumns.begin(), kSummaryColumns.end());
  csv::write_row(out, header);
  csv::Row row{std::to_string(repeats)};
  append_summary(row, summary);
  csv::write_row(out, row);
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::string& path) {
  auto out = open_out(path);
  csv::Row header{"size"};
  header.insert(header.end(), kSummaryColumns.begin(), kSummaryColumns.end());
  csv::write_row(out, header);
  for (const auto& r : rows) {
    csv::Row row{std::to_string(r.size)};
    append_summary(row, r.summary);
    csv::write_row(out, row);
  }
}

void write_metrics_csv(const Metrics& m, const std::string& path) {
  auto out = open_out(path);
  csv::write_row(out, {"tp", "tn", "fp", "fn", "accuracy", "precision", "recall", "f1"});
  csv::write_row(out, {std::to_string(m.tp), std::to_string(m.tn), std::to_string(m.fp),
                       std::to_string(m.fn), csv::format_double(m.accuracy), opt(m.precision),
                       opt(m.recall), opt(m.f1)});
}

}  // namespace voiceaudit
