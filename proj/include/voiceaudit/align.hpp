#pragma once

// Unit-cost edit-distance alignment at character and word level.
//
// Traceback runs from the ends of both sequences with the fixed preference
// match > substitution > deletion > insertion, so the missing/extra strings
// are reproducible. A substitution contributes its reference symbol to
// `missing` and its hypothesis symbol to `extra`.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace voiceaudit {

enum class EditOp : unsigned char { match, substitute, remove, insert };

struct AlignmentResult {
  std::size_t distance = 0;
  std::string missing_chars;  // reference order
  std::string extra_chars;    // hypothesis order
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
};

struct WerReport {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_words = 0;
  double wer = 0.0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

namespace detail {

/// Optimal edit script (reference-to-hypothesis order) under unit costs.
template <typename T>
std::vector<EditOp> edit_script(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t width = m + 1;
  std::vector<std::size_t> cost((n + 1) * width);
  for (std::size_t j = 0; j <= m; ++j) cost[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cost[i * width] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[(i - 1) * width + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t up = cost[(i - 1) * width + j] + 1;
      const std::size_t left = cost[i * width + j - 1] + 1;
      cost[i * width + j] = std::min({diag, up, left});
    }
  }

  std::vector<EditOp> ops;
  ops.reserve(n + m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = cost[i * width + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      const std::size_t diag = cost[(i - 1) * width + j - 1];
      if (same && diag == here) {
        ops.push_back(EditOp::match);
        --i, --j;
        continue;
      }
      if (!same && diag + 1 == here) {
        ops.push_back(EditOp::substitute);
        --i, --j;
        continue;
      }
    }
    if (i > 0 && cost[(i - 1) * width + j] + 1 == here) {
      ops.push_back(EditOp::remove);
      --i;
      continue;
    }
    ops.push_back(EditOp::insert);
    --j;
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

}  // namespace detail

AlignmentResult char_align(std::string_view reference, std::string_view hypothesis);

/// Word-level S/D/I over whitespace-separated tokens. Throws Error when the
/// reference has no tokens.
WerReport word_align(const std::string& reference, const std::string& hypothesis);

/// Pooled WER: total word errors over total reference words.
double corpus_wer(std::span<const std::pair<std::string, std::string>> pairs);

/// wer_train - wer_test, as defined; callers report the magnitude.
double overfitting_gap(double wer_train, double wer_test);

}  // namespace voiceaudit
