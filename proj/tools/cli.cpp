#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voiceaudit/csv.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"
#include "voiceaudit/version.hpp"
#include "voiceaudit/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace voiceaudit;

namespace {

// Record-feature CSV columns written by `features` and read by `aggregate`.
const csv::Row kFeatureColumns = {"user_id",      "audio_id",    "similarity", "missing_count",
                                  "extra_count",  "frame_length", "speed"};
constexpr const char* kMfccFramesColumn = "mfcc_frames";

struct Options {
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  // simulate
  std::size_t users = 100;
  int min_records = 4;
  int max_records = 12;
  std::string wordlist;
  double split = 0.5;
  double member_cer = 0.05;
  double nonmember_cer = 0.09;
  double noise = 1.0;
  std::size_t embedding_dim = 0;
  int audio_rate = 0;

  // inputs
  std::string manifest;
  std::string transcripts;
  std::string embeddings;
  std::string features;
  std::string members;
  std::string vectors;
  std::string model;
  std::string config;

  // feature / model settings
  std::string feature_set = "set5";
  std::string algorithm = "rf";
  std::size_t audios_per_user = 0;
  std::size_t balance = 0;
  std::size_t trees = 100;
  int max_depth = 12;
  std::size_t k = 3;
  bool mfcc = false;

  // experiments
  std::size_t repeats = 1;
  std::vector<std::size_t> sizes;
};

std::string path_in(const Options& o, const std::string& name) {
  return (fs::path(o.out_dir) / name).string();
}

void ensure_out_dir(const Options& o) {
  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + o.out_dir + "': " + ec.message());
}

/// Full option values of the subcommand (given or defaulted), the seed and
/// the tool version; written next to every output.
void write_run_block(const CLI::App& sub, const Options& o, int argc, char** argv,
                     const ordered_json& extra = {}) {
  ordered_json j;
  j["tool"] = "voiceaudit";
  j["version"] = std::string(kVersion);
  j["rng"] = std::string(kRngName);
  j["subcommand"] = sub.get_name();
  j["argv"] = std::vector<std::string>(argv, argv + argc);
  ordered_json opts = ordered_json::object();
  for (const auto* opt : sub.get_options()) {
    if (opt->get_name() == "--help") continue;
    const auto name = opt->get_single_name();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      opts[name] = r.size() == 1 ? ordered_json(r.front()) : ordered_json(r);
    } else {
      opts[name] = opt->get_default_str();
    }
  }
  j["options"] = opts;
  j["seeds"] = {{"seed", o.seed}};
  if (!extra.is_null()) j["details"] = extra;
  const auto path = path_in(o, "run_" + sub.get_name() + ".json");
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

SimilarityProvider provider_for(const Options& o) {
  if (o.embeddings.empty()) return SimilarityProvider::char_edit();
  return SimilarityProvider::embedding(
      std::make_shared<const EmbeddingTable>(load_embeddings(o.embeddings)));
}

std::string require_path(const std::string& path, const char* what) {
  if (path.empty()) throw Error(std::string("missing ") + what);
  if (!fs::exists(path)) throw Error(std::string(what) + " '" + path + "' does not exist");
  return path;
}

// ---------------------------------------------------------------------------

void cmd_simulate(const Options& o) {
  const auto words = load_wordlist(o.wordlist.empty() ? default_wordlist_path() : o.wordlist);
  CorpusSpec spec;
  spec.n_users = o.users;
  spec.min_records = o.min_records;
  spec.max_records = o.max_records;
  const auto corpus = generate_corpus(spec, words, derive_seed(o.seed, 0));
  ErrorModel model;
  model.member_cer = o.member_cer;
  model.nonmember_cer = o.nonmember_cer;
  model.noise_multiplier = o.noise;
  auto run = simulate_shadow_run(corpus, o.split, model, derive_seed(o.seed, 1));

  if (o.audio_rate > 0) {
    const auto audio_dir = fs::path(o.out_dir) / "audio";
    fs::create_directories(audio_dir);
    auto attach = [&](const Dataset& d) {
      std::vector<AudioRecord> recs = d.records();
      for (auto& r : recs) {
        const auto file = audio_dir / (r.audio_id + ".wav");
        write_wav(synthesize_audio(r, corpus.speakers.at(r.user_id), o.audio_rate,
                                   derive_seed(o.seed, 2)),
                  file.string());
        r.audio_path = fs::absolute(file).string();
      }
      return Dataset(d.name(), std::move(recs));
    };
    run.shadow_train = attach(run.shadow_train);
    run.shadow_test = attach(run.shadow_test);
  }

  std::vector<AudioRecord> all = run.shadow_train.records();
  all.insert(all.end(), run.shadow_test.records().begin(), run.shadow_test.records().end());
  save_manifest(Dataset("corpus", all), path_in(o, "manifest.csv"));
  save_manifest(run.shadow_train, path_in(o, "shadow_train.csv"));
  save_manifest(run.shadow_test, path_in(o, "shadow_test.csv"));
  save_transcriptions(run.transcripts, path_in(o, "transcripts.csv"));
  if (o.embedding_dim > 0) {
    save_embeddings(synthetic_embeddings(words, o.embedding_dim, derive_seed(o.seed, 3)),
                    path_in(o, "embeddings.txt"));
  }
  std::cout << "simulated " << corpus.dataset.user_set().size() << " users, "
            << corpus.dataset.size() << " records (" << run.shadow_train.user_set().size()
            << " shadow-train users)\n";
}

void cmd_features(const Options& o) {
  const auto dataset = load_manifest(require_path(o.manifest, "manifest"));
  const auto hyps = load_transcriptions(require_path(o.transcripts, "transcriptions"));
  const auto provider = provider_for(o);
  const auto mfcc_source = o.mfcc ? mfcc_from_audio_files() : MfccSource{};

  const auto path = path_in(o, "record_features.csv");
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  auto header = kFeatureColumns;
  if (o.mfcc) {
    header.push_back(kMfccFramesColumn);
    for (std::size_t c = 0; c < kMfccCoefficients; ++c) header.push_back("mfcc_" + std::to_string(c));
  }
  csv::write_row(out, header);

  std::size_t written = 0, skipped = 0;
  for (const auto& r : dataset.records()) {
    if (!hyps.contains(r.user_id, r.audio_id)) {
      ++skipped;
      continue;
    }
    const auto f = record_features(r, hyps.at(r), provider);
    csv::Row row = {r.user_id,
                    r.audio_id,
                    csv::format_double(f.similarity),
                    std::to_string(f.missing_count),
                    std::to_string(f.extra_count),
                    csv::format_double(f.frame_length),
                    csv::format_double(f.speed)};
    if (o.mfcc) {
      const auto m = mfcc_source(r);
      const std::vector<Matrix> one = {m};
      const auto means = user_mfcc_means(one);
      row.push_back(std::to_string(m.size()));
      for (double v : means) row.push_back(csv::format_double(v));
    }
    csv::write_row(out, row);
    ++written;
  }
  std::cout << "wrote " << written << " record feature rows";
  if (skipped) std::cout << " (" << skipped << " records without a transcription skipped)";
  std::cout << '\n';
}

struct FeatureRow {
  RecordFeatures features;
  std::size_t mfcc_frames = 0;
  std::vector<double> mfcc_means;
};

void cmd_aggregate(const Options& o) {
  const auto fset = parse_feature_set(o.feature_set);
  const auto source = require_path(o.features, "record feature file");
  const auto table = csv::read_file(source);
  std::vector<std::size_t> cols;
  for (const auto& name : kFeatureColumns) cols.push_back(table.require_column(name, source));
  const bool want_mfcc = fset == FeatureSet::set5_mfcc;
  std::size_t c_frames = 0;
  std::vector<std::size_t> c_mfcc;
  if (want_mfcc) {
    c_frames = table.require_column(kMfccFramesColumn, source);
    for (std::size_t c = 0; c < kMfccCoefficients; ++c) {
      c_mfcc.push_back(table.require_column("mfcc_" + std::to_string(c), source));
    }
  }

  std::map<std::string, std::vector<FeatureRow>> by_user;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto line = table.lines[i];
    FeatureRow fr;
    fr.features.similarity = csv::parse_double(row[cols[2]], source, line);
    fr.features.missing_count = static_cast<std::size_t>(csv::parse_int(row[cols[3]], source, line));
    fr.features.extra_count = static_cast<std::size_t>(csv::parse_int(row[cols[4]], source, line));
    fr.features.frame_length = csv::parse_double(row[cols[5]], source, line);
    fr.features.speed = csv::parse_double(row[cols[6]], source, line);
    if (want_mfcc) {
      fr.mfcc_frames = static_cast<std::size_t>(csv::parse_int(row[c_frames], source, line));
      for (auto c : c_mfcc) fr.mfcc_means.push_back(csv::parse_double(row[c], source, line));
    }
    by_user[row[cols[0]]].push_back(std::move(fr));
  }

  std::set<std::string> member_ids;
  if (!o.members.empty()) member_ids = load_manifest(require_path(o.members, "members manifest")).user_set();

  std::vector<UserFeatureVector> vectors;
  for (auto& [user, rows] : by_user) {
    if (o.audios_per_user > 0 && rows.size() > o.audios_per_user) {
      Rng rng(derive_seed(o.seed, hash_string(user)));
      auto picks = rng.sample_indices(rows.size(), o.audios_per_user);
      std::sort(picks.begin(), picks.end());
      std::vector<FeatureRow> chosen;
      for (auto i : picks) chosen.push_back(rows[i]);
      rows = std::move(chosen);
    }
    std::vector<RecordFeatures> feats;
    std::optional<std::vector<double>> means;
    if (want_mfcc) means = std::vector<double>(kMfccCoefficients, 0.0);
    std::size_t frames = 0;
    for (const auto& r : rows) {
      feats.push_back(r.features);
      if (want_mfcc) {
        for (std::size_t c = 0; c < kMfccCoefficients; ++c) {
          (*means)[c] += r.mfcc_means[c] * static_cast<double>(r.mfcc_frames);
        }
        frames += r.mfcc_frames;
      }
    }
    if (want_mfcc) {
      if (frames == 0) throw Error("user '" + user + "' has no MFCC frames");
      for (auto& m : *means) m /= static_cast<double>(frames);
    }
    vectors.push_back(user_vector(user, feats, means, fset));
  }
  if (!o.members.empty()) vectors = label_users(std::move(vectors), member_ids);
  save_user_vectors(vectors, path_in(o, "user_vectors.csv"));
  std::cout << "wrote " << vectors.size() << " user vectors (" << to_string(fset) << ", "
            << dimension(fset) << " dims)\n";
}

void cmd_train(const Options& o) {
  const auto fset = parse_feature_set(o.feature_set);
  const auto algorithm = parse_algorithm(o.algorithm);
  const auto vectors = load_user_vectors(require_path(o.vectors, "user vector file"));
  for (const auto& v : vectors) {
    if (v.values.size() != dimension(fset)) {
      throw DimensionError("user vectors have " + std::to_string(v.values.size()) +
                           " dims but feature set " + std::string(to_string(fset)) + " needs " +
                           std::to_string(dimension(fset)));
    }
  }
  auto table = TrainingTable::from_vectors(vectors, fset);
  if (o.balance > 0) table = balance_and_sample(table, o.balance, derive_seed(o.seed, 0));
  TrainConfig config;
  config.seed = o.seed;
  config.rf.n_trees = o.trees;
  config.dt.max_depth = o.max_depth;
  config.k = o.k;
  const auto model = train(table, algorithm, config);
  save_model(model, path_in(o, "model.json"));
  std::cout << "trained " << to_string(algorithm) << " on " << table.size() << " users\n";
}

void print_metrics(const Metrics& m) {
  auto opt = [](const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string("undefined");
  };
  std::cout << "accuracy=" << csv::format_double(m.accuracy) << " precision=" << opt(m.precision)
            << " recall=" << opt(m.recall) << " f1=" << opt(m.f1) << " (tp=" << m.tp
            << " tn=" << m.tn << " fp=" << m.fp << " fn=" << m.fn << ")\n";
}

void cmd_eval(const Options& o) {
  const auto model = load_model(require_path(o.model, "model file"));
  const auto vectors = load_user_vectors(require_path(o.vectors, "user vector file"));
  const auto metrics = evaluate(model, vectors);
  write_metrics_csv(metrics, path_in(o, "metrics.csv"));
  print_metrics(metrics);
}

void cmd_audit(const Options& o) {
  const auto model = load_model(require_path(o.model, "model file"));
  const auto dataset = load_manifest(require_path(o.manifest, "query manifest"));
  const auto hyps = load_transcriptions(require_path(o.transcripts, "transcriptions"));
  const auto provider = provider_for(o);
  const auto mfcc_source = mfcc_from_audio_files();
  const bool wants_mfcc = model.feature_set() == FeatureSet::set5_mfcc;

  const auto path = path_in(o, "verdicts.csv");
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  const csv::Row header = {"user_id", "label", "vote_fraction", "n_query_audios"};
  csv::write_row(out, header);
  for (const auto& [user, recs] : dataset.by_user()) {
    std::vector<std::string> texts;
    for (const auto& r : recs) texts.push_back(hyps.at(r));
    const auto v = audit_user(model, recs, texts, provider, wants_mfcc ? &mfcc_source : nullptr);
    const csv::Row row = {v.user_id, v.label == Membership::member ? "member" : "nonmember",
                          csv::format_double(v.member_vote_fraction),
                          std::to_string(v.n_query_audios)};
    csv::write_row(out, row);
    csv::write_row(std::cout, row);
  }
}

ExperimentConfig experiment_config(const Options& o) {
  return o.config.empty() ? ExperimentConfig{} : load_experiment_config(o.config);
}

void cmd_experiment(const Options& o, ordered_json& details) {
  const auto config = experiment_config(o);
  details["experiment_config"] = ordered_json::parse(experiment_config_to_json(config));
  const auto result = repeated_trials(config, o.repeats, o.seed);
  write_trials_csv(result.trials, path_in(o, "trials.csv"));
  write_summary_csv(result.summary, o.repeats, path_in(o, "summary.csv"));
  const auto& a = result.summary.accuracy;
  std::cout << "accuracy mean=" << csv::format_double(a.mean) << " std=" << csv::format_double(a.std)
            << " over " << o.repeats << " repeats\n";
}

void cmd_sweep(const Options& o, ordered_json& details) {
  const auto config = experiment_config(o);
  details["experiment_config"] = ordered_json::parse(experiment_config_to_json(config));
  std::vector<std::size_t> sizes = o.sizes;
  if (sizes.empty()) sizes.assign(kDefaultTrainingSizes.begin(), kDefaultTrainingSizes.end());
  details["sizes"] = sizes;
  const auto rows = sweep_training_size(sizes, config, o.repeats, o.seed);
  write_sweep_csv(rows, path_in(o, "sweep.csv"));
  for (const auto& r : rows) {
    std::cout << "size=" << r.size << " acc_mean=" << csv::format_double(r.summary.accuracy.mean)
              << '\n';
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"voiceaudit: user-level membership auditing of speech recognition outputs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-o,--out-dir", o.out_dir, "Output directory");
    sub->add_option("--seed", o.seed, "Seed for every random choice");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a corpus and one shadow run");
  common(simulate);
  simulate->add_option("--users", o.users, "Number of speakers")->check(CLI::Range(4, 1000000));
  simulate->add_option("--min-records", o.min_records, "Fewest records per speaker")->check(CLI::PositiveNumber);
  simulate->add_option("--max-records", o.max_records, "Most records per speaker")->check(CLI::PositiveNumber);
  simulate->add_option("--wordlist", o.wordlist, "Word list (default: bundled)");
  simulate->add_option("--split", o.split, "Fraction of users on the shadow-train side");
  simulate->add_option("--member-cer", o.member_cer, "Error rate on training records");
  simulate->add_option("--nonmember-cer", o.nonmember_cer, "Error rate on unseen records");
  simulate->add_option("--noise", o.noise, "Error-rate multiplier (>= 1)");
  simulate->add_option("--embedding-dim", o.embedding_dim,
                       "Also write synthetic word vectors of this size");
  simulate->add_option("--audio-rate", o.audio_rate,
                       "Also synthesize WAV audio at this sample rate");

  auto* features = app.add_subcommand("features", "Records + transcriptions -> record features");
  common(features);
  features->add_option("--manifest", o.manifest, "Record manifest CSV")->required();
  features->add_option("--transcripts", o.transcripts, "Transcription CSV")->required();
  features->add_option("--embeddings", o.embeddings, "Word vectors (default: character similarity)");
  features->add_flag("--mfcc", o.mfcc, "Add per-record MFCC means from audio_path");

  auto* aggregate = app.add_subcommand("aggregate", "Record features -> user vectors");
  common(aggregate);
  aggregate->add_option("--features", o.features, "Record feature CSV")->required();
  aggregate->add_option("--feature-set", o.feature_set, "set3, set5 or set5_mfcc");
  aggregate->add_option("--members", o.members, "Manifest whose users are labeled member");
  aggregate->add_option("--audios-per-user", o.audios_per_user, "Cap on records per user (0: all)");

  auto* train_cmd = app.add_subcommand("train", "User vectors -> auditor model");
  common(train_cmd);
  train_cmd->add_option("--vectors", o.vectors, "Labeled user vector CSV")->required();
  train_cmd->add_option("--algorithm", o.algorithm, "dt, rf, knn or gnb");
  train_cmd->add_option("--feature-set", o.feature_set, "set3, set5 or set5_mfcc");
  train_cmd->add_option("--balance", o.balance, "Balanced sample of this many users (0: all)");
  train_cmd->add_option("--trees", o.trees, "Random forest size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-depth", o.max_depth, "Decision tree depth (0: unbounded)");
  train_cmd->add_option("--k", o.k, "Neighbours for knn (odd)");

  auto* audit = app.add_subcommand("audit", "Classify each user of a query manifest");
  common(audit);
  audit->add_option("--model", o.model, "Model file")->required();
  audit->add_option("--manifest", o.manifest, "Query manifest CSV")->required();
  audit->add_option("--transcripts", o.transcripts, "Transcription CSV")->required();
  audit->add_option("--embeddings", o.embeddings, "Word vectors used at training time");

  auto* eval = app.add_subcommand("eval", "Score a model on labeled user vectors");
  common(eval);
  eval->add_option("--model", o.model, "Model file")->required();
  eval->add_option("--vectors", o.vectors, "Labeled user vector CSV")->required();

  auto* experiment = app.add_subcommand("experiment", "Repeated simulator trials");
  common(experiment);
  experiment->add_option("--config", o.config, "Experiment config JSON (default: built-in)");
  experiment->add_option("--repeats", o.repeats, "Number of repeats")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Accuracy versus training-set size");
  common(sweep);
  sweep->add_option("--config", o.config, "Experiment config JSON (default: built-in)");
  sweep->add_option("--sizes", o.sizes, "Ascending training sizes (default: 10 ... 10000)")
      ->delimiter(',');
  sweep->add_option("--repeats", o.repeats, "Repeats per size")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    ensure_out_dir(o);
    ordered_json details;
    if (sub == simulate) cmd_simulate(o);
    else if (sub == features) cmd_features(o);
    else if (sub == aggregate) cmd_aggregate(o);
    else if (sub == train_cmd) cmd_train(o);
    else if (sub == audit) cmd_audit(o);
    else if (sub == eval) cmd_eval(o);
    else if (sub == experiment) cmd_experiment(o, details);
    else if (sub == sweep) cmd_sweep(o, details);
    write_run_block(*sub, o, argc, argv, details);
  } catch (const std::exception& e) {
    std::cerr << "voiceaudit: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
