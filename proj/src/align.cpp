#include "voiceaudit/align.hpp"

#include "voiceaudit/corpus.hpp"
#include "voiceaudit/error.hpp"

namespace voiceaudit {

AlignmentResult char_align(std::string_view reference, std::string_view hypothesis) {
  const auto ops = detail::edit_script<char>(reference, hypothesis);
  AlignmentResult out;
  std::size_t i = 0, j = 0;
  for (const auto op : ops) {
    switch (op) {
      case EditOp::match:
        ++i, ++j;
        break;
      case EditOp::substitute:
        out.missing_chars.push_back(reference[i++]);
        out.extra_chars.push_back(hypothesis[j++]);
        ++out.substitutions;
        break;
      case EditOp::remove:
        out.missing_chars.push_back(reference[i++]);
        ++out.deletions;
        break;
      case EditOp::insert:
        out.extra_chars.push_back(hypothesis[j++]);
        ++out.insertions;
        break;
    }
  }
  out.distance = out.substitutions + out.deletions + out.insertions;
  return out;
}

WerReport word_align(const std::string& reference, const std::string& hypothesis) {
  const auto ref = split_whitespace(reference);
  const auto hyp = split_whitespace(hypothesis);
  if (ref.empty()) throw Error("word_align: reference has no words");
  WerReport report;
  for (const auto op : detail::edit_script<std::string>(ref, hyp)) {
    if (op == EditOp::substitute) ++report.substitutions;
    if (op == EditOp::remove) ++report.deletions;
    if (op == EditOp::insert) ++report.insertions;
  }
  report.reference_words = ref.size();
  report.wer = static_cast<double>(report.errors()) / static_cast<double>(ref.size());
  return report;
}

double corpus_wer(std::span<const std::pair<std::string, std::string>> pairs) {
  if (pairs.empty()) throw Error("corpus_wer: no pairs");
  std::size_t errors = 0, words = 0;
  for (const auto& [ref, hyp] : pairs) {
    const auto r = word_align(ref, hyp);
    errors += r.errors();
    words += r.reference_words;
  }
  return static_cast<double>(errors) / static_cast<double>(words);
}

double overfitting_gap(double wer_train, double wer_test) { return wer_train - wer_test; }

}  // namespace voiceaudit
