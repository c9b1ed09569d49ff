#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "voiceaudit/csv.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"
#include "voiceaudit/workflow.hpp"

using namespace voiceaudit;

namespace {

const auto kChar = SimilarityProvider::char_edit();

/// Run with `users` users of `per_user` records; the first `n_train` users
/// are on the train side. Train-side transcripts are perfect, test-side ones
/// lose their last character.
ShadowRun tiny_run(const std::string& prefix, std::size_t users, std::size_t n_train,
                   std::size_t per_user = 3) {
  std::vector<AudioRecord> train, test;
  TranscriptionTable t;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t r = 0; r < per_user; ++r) {
      AudioRecord rec{prefix + std::to_string(u), "a" + std::to_string(r), "HELLO THERE WORLD",
                      1.0 + static_cast<double>(r), std::nullopt};
      const bool in = u < n_train;
      t.set(rec.user_id, rec.audio_id, in ? rec.reference_text : "HELLO THERE WORL");
      (in ? train : test).push_back(rec);
    }
  }
  return {Dataset("train", train), Dataset("test", test), t};
}

std::vector<Membership> labels(std::initializer_list<int> v) {
  std::vector<Membership> out;
  for (int x : v) out.push_back(static_cast<Membership>(x));
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.shadow_corpus.n_users = 120;
  c.target_corpus.n_users = 80;
  c.train_users = 100;
  c.test_users = 60;
  c.train.rf.n_trees = 20;
  return c;
}

}  // namespace

TEST_CASE("metrics from hand-counted confusion matrices") {
  const auto m = Metrics::from_counts(1, 5, 1, 3);
  CHECK(m.total() == 10);
  CHECK(m.accuracy == 0.6);
  REQUIRE(m.precision);
  REQUIRE(m.recall);
  REQUIRE(m.f1);
  CHECK(*m.precision == 0.5);
  CHECK(*m.recall == 0.25);
  CHECK(*m.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  const auto perfect = Metrics::from_counts(4, 6, 0, 0);
  CHECK(perfect.accuracy == 1.0);
  CHECK(*perfect.f1 == 1.0);

  const auto none_predicted = Metrics::from_counts(0, 5, 0, 5);
  CHECK(!none_predicted.precision);
  REQUIRE(none_predicted.recall);
  CHECK(*none_predicted.recall == 0.0);
  CHECK(!none_predicted.f1);

  const auto no_members = Metrics::from_counts(0, 5, 3, 0);
  CHECK(*no_members.precision == 0.0);
  CHECK(!no_members.recall);
}

TEST_CASE("score_predictions matches a brute-force recount") {
  Rng rng(40);
  for (int t = 0; t < 300; ++t) {
    const auto n = 1 + rng.below(50);
    std::vector<Membership> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<Membership>(rng.below(2));
      pred[i] = static_cast<Membership>(rng.below(2));
    }
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool t_member = truth[i] == Membership::member;
      const bool p_member = pred[i] == Membership::member;
      tp += t_member && p_member;
      tn += !t_member && !p_member;
      fp += !t_member && p_member;
      fn += t_member && !p_member;
    }
    const auto m = score_predictions(truth, pred);
    CHECK(m.tp == tp);
    CHECK(m.tn == tn);
    CHECK(m.fp == fp);
    CHECK(m.fn == fn);
    CHECK(m.total() == n);
    CHECK(m.accuracy == static_cast<double>(tp + tn) / static_cast<double>(n));
    if (tp + fp) CHECK(*m.precision == static_cast<double>(tp) / static_cast<double>(tp + fp));
    if (tp + fn) CHECK(*m.recall == static_cast<double>(tp) / static_cast<double>(tp + fn));
  }
  CHECK_THROWS_AS(score_predictions(labels({0}), labels({0, 1})), DimensionError);
}

TEST_CASE("evaluate counts member as the positive class") {
  TrainingTable t;
  t.dim_names = {"x"};
  for (int i = 0; i < 5; ++i) {
    t.x.push_back({-1.0});
    t.y.push_back(Membership::member);
    t.x.push_back({1.0});
    t.y.push_back(Membership::nonmember);
  }
  const auto model = train(t, Algorithm::decision_tree, {});
  const std::vector<UserFeatureVector> v = {{"a", {-1.0}, Membership::member},
                                            {"b", {-1.0}, Membership::nonmember},
                                            {"c", {1.0}, Membership::member},
                                            {"d", {1.0}, Membership::nonmember}};
  const auto m = evaluate(model, v);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 1);
  std::vector<UserFeatureVector> unlabeled = {{"a", {0.0}, std::nullopt}};
  CHECK_THROWS_AS(evaluate(model, unlabeled), Error);
}

TEST_CASE("build_training_table labels by shadow_train membership") {
  const std::vector<ShadowRun> one = {tiny_run("u", 4, 2)};
  const auto t = build_training_table(one, kChar, FeatureSet::set5, std::nullopt, 1);
  REQUIRE(t.size() == 4);
  CHECK(t.y == labels({0, 0, 1, 1}));
  CHECK(t.dims() == 35);
  CHECK(t.feature_set == FeatureSet::set5);

  const std::vector<ShadowRun> three = {tiny_run("a", 4, 2), tiny_run("b", 4, 2),
                                        tiny_run("c", 4, 2)};
  const auto combined = build_training_table(three, kChar, FeatureSet::set3, std::nullopt, 1);
  CHECK(combined.size() == 12);
  CHECK(combined.dims() == 21);
  CHECK(std::count(combined.y.begin(), combined.y.end(), Membership::member) == 6);
}

TEST_CASE("records without transcripts are skipped and empty users excluded") {
  auto run = tiny_run("u", 4, 2);
  TranscriptionTable partial;
  for (const auto& [key, hyp] : run.transcripts.entries()) {
    if (key.first == "u3") continue;                        // whole user missing
    if (key.first == "u0" && key.second == "a0") continue;  // one record missing
    partial.set(key.first, key.second, hyp);
  }
  run.transcripts = partial;
  BuildStats stats;
  const std::vector<ShadowRun> runs = {run};
  const auto t = build_training_table(runs, kChar, FeatureSet::set5, std::nullopt, 1, nullptr,
                                      &stats);
  CHECK(t.size() == 3);
  CHECK(stats.records_without_transcript == 4);
  CHECK(stats.users_excluded == 1);
}

TEST_CASE("audios_per_user caps each user at a seed-chosen subset") {
  const auto run = tiny_run("u", 6, 3, 62);
  const std::vector<ShadowRun> runs = {run};
  const auto t = build_training_table(runs, kChar, FeatureSet::set5, 5, 9);
  REQUIRE(t.size() == 6);
  std::set<std::vector<double>> distinct_durations;
  for (const auto& row : t.x) {
    // frame_length stats start at dim 21; sum of durations 1..62 over 5 picks.
    const double min = row[21 + 2], max = row[21 + 1];
    CHECK(min >= 1.0);
    CHECK(max <= 62.0);
    CHECK(row[21 + 3] * 5.0 == doctest::Approx(row[21 + 0]));
    distinct_durations.insert({row[21], row[22], row[23]});
  }
  CHECK(distinct_durations.size() > 1);
  // Members have perfect transcripts: similarity sum counts the records used.
  CHECK(t.x[0][0] == 5.0);

  const auto again = build_training_table(runs, kChar, FeatureSet::set5, 5, 9);
  CHECK(again.x == t.x);
  const auto other = build_training_table(runs, kChar, FeatureSet::set5, 5, 10);
  CHECK(other.x != t.x);
  CHECK_THROWS_AS(build_training_table(runs, kChar, FeatureSet::set5, 0, 9), Error);
}

TEST_CASE("balance_and_sample draws equal halves") {
  TrainingTable pool;
  for (int i = 0; i < 1200; ++i) {
    pool.x.push_back({static_cast<double>(i)});
    pool.y.push_back(i % 2 ? Membership::nonmember : Membership::member);
  }
  const auto a = balance_and_sample(pool, 500, 1);
  CHECK(a.size() == 500);
  CHECK(std::count(a.y.begin(), a.y.end(), Membership::member) == 250);
  CHECK(std::is_sorted(a.x.begin(), a.x.end()));
  const auto b = balance_and_sample(pool, 500, 2);
  CHECK(std::count(b.y.begin(), b.y.end(), Membership::member) == 250);
  CHECK(a.x != b.x);
  CHECK(balance_and_sample(pool, 500, 1).x == a.x);

  CHECK_THROWS_AS(balance_and_sample(pool, 3, 1), Error);
  CHECK_THROWS_AS(balance_and_sample(pool, 1202, 1), Error);
}

TEST_CASE("member scenarios") {
  CorpusSpec spec;
  spec.n_users = 30;
  spec.min_records = 10;
  spec.max_records = 12;
  const auto corpus = generate_corpus(spec, load_wordlist(default_wordlist_path()), 1);
  const auto run = simulate_target_run(corpus, 0.5, 0.5, {}, 2);
  const auto members = run.member_users();
  const auto seen_keys = [&] {
    std::set<RecordKey> k;
    for (const auto& r : run.train.records()) k.emplace(r.user_id, r.audio_id);
    return k;
  }();

  for (auto [k_in, m_out] : {std::pair<std::size_t, std::size_t>{5, 0}, {0, 5}, {3, 2}}) {
    const auto s = build_member_scenarios(run.train, run.test, k_in, m_out, 3);
    CHECK(s.queries.size() + s.skipped_users == members.size());
    CHECK(s.queries.size() == members.size());
    for (const auto& [user, recs] : s.queries) {
      CHECK(members.count(user) == 1);
      REQUIRE(recs.size() == k_in + m_out);
      std::size_t seen = 0;
      std::set<std::string> ids;
      for (const auto& r : recs) {
        CHECK(r.user_id == user);
        seen += seen_keys.count({r.user_id, r.audio_id});
        ids.insert(r.audio_id);
      }
      CHECK(seen == k_in);
      CHECK(ids.size() == recs.size());
    }
  }

  const auto some = build_member_scenarios(run.train, run.test, 0, 6, 3);
  CHECK(some.skipped_users > 0);
  CHECK_THROWS_AS(build_member_scenarios(run.train, run.test, 50, 0, 3), Error);
  CHECK_THROWS_AS(build_member_scenarios(run.train, run.test, 0, 0, 3), Error);
}

TEST_CASE("audit_user") {
  const std::vector<ShadowRun> runs = {tiny_run("u", 40, 20, 9)};
  const auto model =
      train(build_training_table(runs, kChar, FeatureSet::set5, std::nullopt, 1),
            Algorithm::random_forest, {});
  std::vector<AudioRecord> recs;
  std::vector<std::string> hyps;
  for (int i = 0; i < 9; ++i) {
    recs.push_back({"q", "a" + std::to_string(i), "HELLO THERE WORLD", 1.0 + i, std::nullopt});
    hyps.push_back("HELLO THERE WORLD");
  }
  const auto v = audit_user(model, recs, hyps, kChar);
  CHECK(v.user_id == "q");
  CHECK(v.n_query_audios == 9);
  CHECK(v.label == Membership::member);

  hyps.pop_back();
  CHECK_THROWS_AS(audit_user(model, recs, hyps, kChar), DimensionError);
  hyps.push_back("X");
  recs[3].user_id = "other";
  CHECK_THROWS_AS(audit_user(model, recs, hyps, kChar), Error);
}

TEST_CASE("audit_user on the frozen member fixture") {
  // Fixture: one simulated speaker transcribed at a low member error rate,
  // exported once and checked in. The auditor comes from a seeded run.
  const std::string dir = VOICEAUDIT_TEST_DATA_DIR;
  const auto records = load_manifest(dir + "/golden_member_manifest.csv");
  const auto hyps_table = load_transcriptions(dir + "/golden_member_hypotheses.csv");
  REQUIRE(records.size() == 9);
  std::vector<std::string> hyps;
  for (const auto& r : records.records()) hyps.push_back(hyps_table.at(r));

  CorpusSpec spec;
  spec.n_users = 300;
  const auto corpus = generate_corpus(spec, load_wordlist(default_wordlist_path()), 2024);
  const std::vector<ShadowRun> runs = {simulate_shadow_run(corpus, 0.5, {}, 2025)};
  TrainConfig cfg;
  cfg.seed = 7;
  cfg.rf.n_trees = 50;
  const auto model = train(build_training_table(runs, kChar, FeatureSet::set5, 9, 1),
                           Algorithm::random_forest, cfg);
  const auto verdict = audit_user(model, records.records(), hyps, kChar);
  CHECK(verdict.label == Membership::member);
  CHECK(verdict.n_query_audios == 9);
  CHECK(verdict.member_vote_fraction == doctest::Approx(0.92));
}

TEST_CASE("repeated trials: single repeat and determinism") {
  const auto c = small_config();
  const auto one = repeated_trials(c, 1, 5);
  REQUIRE(one.trials.size() == 1);
  CHECK(one.summary.accuracy.mean == one.trials[0].metrics.accuracy);
  CHECK(one.summary.accuracy.std == 0.0);
  CHECK(one.trials[0].seed == derive_seed(5, 0));

  const auto a = repeated_trials(c, 3, 99);
  const auto b = repeated_trials(c, 3, 99);
  CHECK(a.summary.accuracy.mean == b.summary.accuracy.mean);
  CHECK(a.summary.accuracy.std == b.summary.accuracy.std);
  CHECK(a.trials.size() == 3);
  CHECK_THROWS_AS(repeated_trials(c, 0, 1), Error);
}

TEST_CASE("sweep_training_size") {
  auto c = small_config();
  c.shadow_corpus.n_users = 200;
  const std::vector<std::size_t> sizes = {10, 30, 50};
  const auto rows = sweep_training_size(sizes, c, 2, 1);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rows[i].size == sizes[i]);

  testing::TempDir dir;
  write_sweep_csv(rows, dir.file("sweep.csv"));
  const auto table = csv::read_file(dir.file("sweep.csv"));
  CHECK(table.header == csv::Row{"size", "acc_mean", "acc_std", "prec_mean", "prec_std",
                                 "rec_mean", "rec_std", "f1_mean", "f1_std"});
  CHECK(table.rows.size() == 3);

  const std::vector<std::size_t> descending = {30, 10};
  CHECK_THROWS_AS(sweep_training_size(descending, c, 1, 1), Error);
  const std::vector<std::size_t> too_big = {10, 400};
  CHECK_THROWS_AS(sweep_training_size(too_big, c, 1, 1), Error);

  // The default size list is accepted as long as the pool is large enough.
  c.shadow_corpus.n_users = 10000;
  CHECK(std::is_sorted(kDefaultTrainingSizes.begin(), kDefaultTrainingSizes.end()));
  CHECK(kDefaultTrainingSizes.back() == 10000);
}

TEST_CASE("experiment config JSON round-trip") {
  auto c = small_config();
  c.feature_set = FeatureSet::set3;
  c.algorithm = Algorithm::gaussian_nb;
  c.member_query = std::pair<std::size_t, std::size_t>{3, 2};
  c.audios_per_user = 9;
  c.shadow_error.member_cer = 0.02;
  c.synthetic_embedding_dim = 16;
  const auto text = experiment_config_to_json(c);
  const auto back = experiment_config_from_json(text);
  CHECK(experiment_config_to_json(back) == text);
  CHECK(back.member_query == c.member_query);
  CHECK(back.audios_per_user == 9u);
  CHECK_THROWS_AS(experiment_config_from_json("{\"feature_set\": \"set9\"}"), Error);
  CHECK_THROWS_AS(experiment_config_from_json("[1,2"), Error);
}

TEST_CASE("result CSVs are reproducible and parse back") {
  testing::TempDir dir;
  const auto c = small_config();
  const auto a = repeated_trials(c, 2, 3);
  const auto b = repeated_trials(c, 2, 3);
  write_trials_csv(a.trials, dir.file("a.csv"));
  write_trials_csv(b.trials, dir.file("b.csv"));
  CHECK(testing::read_text(dir.file("a.csv")) == testing::read_text(dir.file("b.csv")));
  const auto t = csv::read_file(dir.file("a.csv"));
  CHECK(t.rows.size() == 2);
  CHECK(t.column("accuracy") != std::string::npos);

  write_summary_csv(a.summary, 2, dir.file("s.csv"));
  CHECK(csv::read_file(dir.file("s.csv")).rows.size() == 1);
  write_metrics_csv(a.trials[0].metrics, dir.file("m.csv"));
  CHECK(csv::read_file(dir.file("m.csv")).rows.size() == 1);
}
