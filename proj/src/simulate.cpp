#include "voiceaudit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"

namespace voiceaudit {

void ErrorModel::validate() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r < 1.0; };
  if (!rate_ok(member_cer) || !rate_ok(nonmember_cer)) {
    throw Error("error rates must lie in [0, 1)");
  }
  if (member_cer > nonmember_cer) throw Error("member_cer must not exceed nonmember_cer");
  if (!(noise_multiplier >= 1.0)) throw Error("noise_multiplier must be >= 1");
  if (!(speaker_familiarity >= 0.0 && speaker_familiarity <= 1.0)) {
    throw Error("speaker_familiarity must lie in [0, 1]");
  }
  if (mix.substitution < 0 || mix.deletion < 0 || mix.insertion < 0 ||
      std::abs(mix.substitution + mix.deletion + mix.insertion - 1.0) > 1e-9) {
    throw Error("error mix proportions must be non-negative and sum to 1");
  }
}

double SimulatedCorpus::error_scale(const std::string& user_id) const {
  const auto it = speakers.find(user_id);
  return it == speakers.end() ? 1.0 : it->second.personal_error_scale;
}

std::vector<std::string> load_wordlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open wordlist '" + path + "'");
  std::vector<std::string> words;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    auto w = to_upper(trim(line));
    if (!w.empty() && seen.insert(w).second) words.push_back(w);
  }
  if (words.size() < 50) {
    throw Error("wordlist '" + path + "' has " + std::to_string(words.size()) +
                " distinct words; at least 50 are required");
  }
  return words;
}

SimulatedCorpus generate_corpus(const CorpusSpec& spec, const std::vector<std::string>& words,
                                std::uint64_t seed) {
  if (words.size() < 50) throw Error("generate_corpus needs at least 50 words");
  if (spec.n_users < 2) throw Error("generate_corpus needs at least 2 users");
  if (spec.min_records < 1 || spec.max_records < spec.min_records) {
    throw Error("invalid records-per-user range");
  }
  if (spec.min_words < 1 || spec.max_words < spec.min_words) throw Error("invalid words range");
  if (!(spec.min_speed > 0.0) || spec.max_speed < spec.min_speed) throw Error("invalid speed range");

  Rng rng(seed);
  SimulatedCorpus out;
  std::vector<AudioRecord> records;
  char id[64];
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    std::snprintf(id, sizeof(id), "%s%05zu", spec.user_prefix.c_str(), u);
    SpeakerProfile p;
    p.user_id = id;
    p.base_speed = rng.uniform(spec.min_speed, spec.max_speed);
    p.min_words = static_cast<int>(rng.between(spec.min_words, spec.max_words));
    p.max_words = static_cast<int>(rng.between(p.min_words, spec.max_words));
    p.personal_error_scale = std::exp(spec.error_scale_sigma * rng.normal());
    p.pitch_hz = rng.uniform(90.0, 250.0);

    const auto n_records = rng.between(spec.min_records, spec.max_records);
    for (long long r = 0; r < n_records; ++r) {
      const auto n_words = rng.between(p.min_words, p.max_words);
      std::string text;
      for (long long w = 0; w < n_words; ++w) {
        if (w) text.push_back(' ');
        text += words[static_cast<std::size_t>(rng.below(words.size()))];
      }
      AudioRecord rec;
      rec.user_id = p.user_id;
      std::snprintf(id, sizeof(id), "%s-%03lld", p.user_id.c_str(), r);
      rec.audio_id = id;
      rec.reference_text = to_upper(text);
      const double speed = p.base_speed * (1.0 + rng.uniform(-0.1, 0.1));
      rec.duration_seconds = static_cast<double>(trim(rec.reference_text).size()) / speed;
      records.push_back(std::move(rec));
    }
    out.speakers.emplace(p.user_id, p);
  }
  out.dataset = Dataset("simulated", std::move(records));
  return out;
}

SimulatedCorpus generate_corpus(std::size_t n_users, int min_records, int max_records,
                                const std::string& wordlist_path, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_users = n_users;
  spec.min_records = min_records;
  spec.max_records = max_records;
  return generate_corpus(spec, load_wordlist(wordlist_path), seed);
}

std::string inject_errors(const std::string& reference, double rate, const ErrorMix& mix,
                          std::uint64_t seed) {
  const double p = std::clamp(rate, 0.0, 1.0);
  if (p == 0.0) return reference;

  std::string alphabet;
  {
    std::set<char> chars(reference.begin(), reference.end());
    alphabet.assign(chars.begin(), chars.end());
  }
  if (alphabet.size() < 2) alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";

  Rng rng(seed);
  auto other_than = [&](char c) {
    char pick = c;
    while (pick == c) pick = alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))];
    return pick;
  };
  std::string out;
  out.reserve(reference.size() + 8);
  for (char c : reference) {
    if (rng.uniform() >= p) {
      out.push_back(c);
      continue;
    }
    const double op = rng.uniform() * (mix.substitution + mix.deletion + mix.insertion);
    if (op < mix.substitution) {
      out.push_back(other_than(c));
    } else if (op < mix.substitution + mix.deletion) {
      // dropped
    } else {
      out.push_back(c);
      out.push_back(alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))]);
    }
  }
  return out;
}

std::uint64_t record_seed(std::uint64_t seed, const AudioRecord& record) {
  return derive_seed(seed, hash_string(record.user_id + '\x1f' + record.audio_id));
}

namespace {

std::string transcribe_at(const AudioRecord& record, double base_rate, const ErrorModel& model,
                          std::uint64_t seed, double scale) {
  return inject_errors(record.reference_text, base_rate * scale * model.noise_multiplier,
                       model.mix, record_seed(seed, record));
}

}  // namespace

std::string simulate_transcription(const AudioRecord& record, bool is_member_record,
                                   const ErrorModel& model, std::uint64_t seed,
                                   double personal_error_scale) {
  validate(record);
  return transcribe_at(record, is_member_record ? model.member_cer : model.nonmember_cer, model,
                       seed, personal_error_scale);
}

ShadowRun simulate_shadow_run(const SimulatedCorpus& corpus, double train_fraction,
                              const ErrorModel& model, std::uint64_t seed) {
  model.validate();
  if (corpus.dataset.user_set().size() < 4) {
    throw Error("simulate_shadow_run needs at least 4 users");
  }
  auto [train, test] = split_dataset(corpus.dataset, train_fraction, derive_seed(seed, 0));
  ShadowRun run{std::move(train), std::move(test), {}};
  const auto transcribe_seed = derive_seed(seed, 1);
  for (const auto& r : run.shadow_train.records()) {
    run.transcripts.set(r.user_id, r.audio_id,
                        transcribe_at(r, model.member_cer, model, transcribe_seed,
                                      corpus.error_scale(r.user_id)));
  }
  for (const auto& r : run.shadow_test.records()) {
    run.transcripts.set(r.user_id, r.audio_id,
                        transcribe_at(r, model.nonmember_cer, model, transcribe_seed,
                                      corpus.error_scale(r.user_id)));
  }
  return run;
}

TargetRun simulate_target_run(const SimulatedCorpus& corpus, double member_fraction,
                              double holdout_fraction, const ErrorModel& model,
                              std::uint64_t seed) {
  model.validate();
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw Error("holdout_fraction must lie in [0, 1)");
  }
  const auto [members_side, nonmembers_side] =
      split_dataset(corpus.dataset, member_fraction, derive_seed(seed, 0));
  const auto member_users = members_side.user_set();

  Rng rng(derive_seed(seed, 2));
  std::set<RecordKey> held_out;
  for (const auto& [user, recs] : members_side.by_user()) {
    const auto n = recs.size();
    const auto n_out = std::min(
        static_cast<std::size_t>(std::floor(holdout_fraction * static_cast<double>(n))), n - 1);
    for (auto i : rng.sample_indices(n, n_out)) held_out.emplace(user, recs[i].audio_id);
  }

  std::vector<AudioRecord> train, test;
  TranscriptionTable transcripts;
  const auto transcribe_seed = derive_seed(seed, 1);
  for (const auto& r : corpus.dataset.records()) {
    const bool member_user = member_users.count(r.user_id) != 0;
    const bool seen = member_user && !held_out.count({r.user_id, r.audio_id});
    const double rate = seen          ? model.member_cer
                        : member_user ? model.member_unseen_cer()
                                      : model.nonmember_cer;
    transcripts.set(r.user_id, r.audio_id,
                    transcribe_at(r, rate, model, transcribe_seed, corpus.error_scale(r.user_id)));
    (seen ? train : test).push_back(r);
  }
  return {Dataset("target/train", std::move(train)), Dataset("target/test", std::move(test)),
          std::move(transcripts)};
}

EmbeddingTable synthetic_embeddings(const std::vector<std::string>& words, std::size_t dimension,
                                    std::uint64_t seed) {
  if (dimension == 0) throw Error("embedding dimension must be positive");
  EmbeddingTable table;
  table.dimension = dimension;
  for (const auto& w : words) {
    const auto token = to_lower(w);
    Rng rng(derive_seed(seed, hash_string(token)));
    std::vector<double> v(dimension);
    for (auto& x : v) x = rng.normal();
    table.vectors.insert_or_assign(token, std::move(v));
  }
  return table;
}

AudioSignal synthesize_audio(const AudioRecord& record, const SpeakerProfile& speaker,
                             int sample_rate_hz, std::uint64_t seed) {
  if (sample_rate_hz <= 0) throw Error("sample rate must be positive");
  Rng rng(record_seed(seed, record));
  AudioSignal s;
  s.sample_rate_hz = sample_rate_hz;
  const auto n = static_cast<std::size_t>(record.duration_seconds * sample_rate_hz);
  s.samples.resize(std::max<std::size_t>(n, 1));
  const double nyquist = sample_rate_hz / 2.0;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    const double t = static_cast<double>(i) / sample_rate_hz;
    double v = 0.0;
    for (int h = 1; h <= 8 && h * speaker.pitch_hz < nyquist; ++h) {
      v += std::sin(2.0 * std::numbers::pi * h * speaker.pitch_hz * t) / h;
    }
    s.samples[i] = std::clamp(0.25 * v + 0.01 * rng.normal(), -1.0, 1.0);
  }
  return s;
}

}  // namespace voiceaudit
