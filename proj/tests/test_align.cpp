#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "voiceaudit/align.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"

using namespace voiceaudit;

namespace {

std::string random_string(Rng& rng, std::size_t max_len, const std::string& alphabet) {
  std::string s(rng.below(max_len + 1), ' ');
  for (auto& c : s) c = alphabet[rng.below(alphabet.size())];
  return s;
}

}  // namespace

TEST_CASE("char_align reproduces the KAFFAR'S example") {
  const auto r = char_align("THAT IS KAFFAR'S KNIFE", "THAT IS CALF OUR'S KNIFE");
  CHECK(r.missing_chars == "KFA");
  CHECK(r.extra_chars == "CL OU");
  CHECK(r.distance == 5);
}

TEST_CASE("char_align identity and pure insertion") {
  const auto same = char_align("ABC", "ABC");
  CHECK(same.distance == 0);
  CHECK(same.missing_chars.empty());
  CHECK(same.extra_chars.empty());

  const auto ins = char_align("", "AB");
  CHECK(ins.distance == 2);
  CHECK(ins.missing_chars.empty());
  CHECK(ins.extra_chars == "AB");
  CHECK(ins.insertions == 2);
}

TEST_CASE("char_align distance matches the recursive oracle on short strings") {
  const auto strings = oracle::all_strings("AB ", 4);
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      REQUIRE(char_align(a, b).distance == oracle::edit_distance(a, b));
    }
  }
}

TEST_CASE("char_align bookkeeping is consistent") {
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_string(rng, 12, "ABC ");
    const auto b = random_string(rng, 12, "ABC ");
    const auto r = char_align(a, b);
    CHECK(r.missing_chars.size() == r.deletions + r.substitutions);
    CHECK(r.extra_chars.size() == r.insertions + r.substitutions);
    CHECK(r.distance == r.substitutions + r.deletions + r.insertions);
    CHECK((r.distance == 0) == (r.missing_chars.empty() && r.extra_chars.empty()));
    // Count difference is fixed by the lengths whatever optimal path is taken.
    CHECK(static_cast<long>(r.missing_chars.size()) - static_cast<long>(r.extra_chars.size()) ==
          static_cast<long>(a.size()) - static_cast<long>(b.size()));
  }
}

TEST_CASE("char_align is deterministic under the default tie-break") {
  // "AB"/"BA" admits optimal scripts with different missing counts; the
  // traceback must always pick the same one.
  const auto first = char_align("AB", "BA");
  for (int i = 0; i < 5; ++i) {
    const auto again = char_align("AB", "BA");
    CHECK(again.missing_chars == first.missing_chars);
    CHECK(again.extra_chars == first.extra_chars);
  }
  CHECK(first.distance == 2);
  CHECK(first.substitutions == 2);
}

TEST_CASE("char_align distance is symmetric with missing and extra swapped") {
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_string(rng, 10, "AB ");
    const auto b = random_string(rng, 10, "AB ");
    const auto ab = char_align(a, b);
    const auto ba = char_align(b, a);
    CHECK(ab.distance == ba.distance);
    CHECK(ab.missing_chars.size() + ba.missing_chars.size() ==
          ab.extra_chars.size() + ba.extra_chars.size());
  }
}

TEST_CASE("char_align distance obeys the triangle inequality") {
  Rng rng(5);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_string(rng, 12, "ABC ");
    const auto b = random_string(rng, 12, "ABC ");
    const auto c = random_string(rng, 12, "ABC ");
    CHECK(char_align(a, c).distance <= char_align(a, b).distance + char_align(b, c).distance);
  }
}

TEST_CASE("appending a common suffix never increases distance") {
  Rng rng(7);
  for (int t = 0; t < 2000; ++t) {
    const auto a = random_string(rng, 8, "AB ");
    const auto b = random_string(rng, 8, "AB ");
    const auto c = random_string(rng, 6, "AB ");
    CHECK(char_align(a + c, b + c).distance <= char_align(a, b).distance);
  }
}

TEST_CASE("word_align examples") {
  const auto same = word_align("A B C", "A B C");
  CHECK(same.wer == 0.0);
  CHECK(same.reference_words == 3);

  const auto si = word_align("A B", "A X Y");
  CHECK(si.substitutions == 1);
  CHECK(si.insertions == 1);
  CHECK(si.deletions == 0);
  CHECK(si.wer == 1.0);

  const auto del = word_align("A", "");
  CHECK(del.deletions == 1);
  CHECK(del.wer == 1.0);

  CHECK_THROWS_AS(word_align("   ", "A"), Error);
}

TEST_CASE("word_align on distinct words agrees with char_align on word indices") {
  // Map each word to one character; distinct reference words make the
  // mapping injective on the reference side.
  const std::vector<std::string> vocab = {"ALPHA", "BRAVO", "CHARLIE", "DELTA", "ECHO", "FOXTROT"};
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::size_t> order(vocab.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const auto n_ref = 1 + rng.below(vocab.size());
    std::string ref_words, ref_codes;
    for (std::size_t i = 0; i < n_ref; ++i) {
      ref_words += (i ? " " : "") + vocab[order[i]];
      ref_codes.push_back(static_cast<char>('a' + order[i]));
    }
    std::string hyp_words, hyp_codes;
    const auto n_hyp = rng.below(8);
    for (std::size_t i = 0; i < n_hyp; ++i) {
      const auto w = rng.below(vocab.size());
      hyp_words += (i ? " " : "") + vocab[w];
      hyp_codes.push_back(static_cast<char>('a' + w));
    }
    const auto w = word_align(ref_words, hyp_words);
    const auto c = char_align(ref_codes, hyp_codes);
    CHECK(w.errors() == c.distance);
    CHECK(w.substitutions == c.substitutions);
    CHECK(w.deletions == c.deletions);
    CHECK(w.insertions == c.insertions);
  }
}

TEST_CASE("corpus_wer pools errors over reference words") {
  const std::vector<std::pair<std::string, std::string>> same = {{"A B", "A B"}, {"A B", "A B"}};
  CHECK(corpus_wer(same) == 0.0);

  const std::vector<std::pair<std::string, std::string>> mixed = {{"A B", "A B"}, {"C D", "C X"}};
  CHECK(corpus_wer(mixed) == doctest::Approx(0.25).epsilon(1e-15));

  const std::vector<std::pair<std::string, std::string>> single = {{"A", "B"}};
  CHECK(corpus_wer(single) == 1.0);

  CHECK_THROWS_AS(corpus_wer(std::span<const std::pair<std::string, std::string>>{}), Error);
}

TEST_CASE("overfitting_gap") {
  const double gap = overfitting_gap(0.0506, 0.0908);
  CHECK(gap == doctest::Approx(-0.0402).epsilon(1e-12));
  CHECK(std::abs(std::round(std::abs(gap) * 100.0) / 100.0 - 0.04) < 1e-12);
  CHECK(overfitting_gap(0.3, 0.3) == 0.0);
  for (double t : {0.0, 0.01, 0.2, 0.5}) {
    CHECK(overfitting_gap(0.14 + t, t) == doctest::Approx(0.14).epsilon(1e-12));
  }
}
