#include "voiceaudit/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "voiceaudit/csv.hpp"
#include "voiceaudit/error.hpp"
#include "voiceaudit/rng.hpp"

namespace voiceaudit {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n\f\v");
  return text.substr(first, last - first + 1);
}

std::string to_upper(std::string text) {
  for (auto& c : text) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return text;
}

std::string to_lower(std::string text) {
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return text;
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

void validate(const AudioRecord& record) {
  if (!(record.duration_seconds > 0.0) || !std::isfinite(record.duration_seconds)) {
    throw Error("record " + record.user_id + "/" + record.audio_id +
                ": duration_seconds must be positive");
  }
  if (trim(record.reference_text).empty()) {
    throw Error("record " + record.user_id + "/" + record.audio_id +
                ": reference_text is empty");
  }
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::string name, std::vector<AudioRecord> records)
    : name_(std::move(name)), records_(std::move(records)) {
  std::set<RecordKey> seen;
  for (const auto& r : records_) {
    validate(r);
    if (!seen.emplace(r.user_id, r.audio_id).second) {
      throw Error("duplicate record " + r.user_id + "/" + r.audio_id + " in dataset '" +
                  name_ + "'");
    }
  }
}

std::vector<std::string> Dataset::users() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records_) {
    if (seen.insert(r.user_id).second) out.push_back(r.user_id);
  }
  return out;
}

std::set<std::string> Dataset::user_set() const {
  std::set<std::string> out;
  for (const auto& r : records_) out.insert(r.user_id);
  return out;
}

std::map<std::string, std::vector<AudioRecord>> Dataset::by_user() const {
  std::map<std::string, std::vector<AudioRecord>> out;
  for (const auto& r : records_) out[r.user_id].push_back(r);
  return out;
}

// ---------------------------------------------------------------------------
// TranscriptionTable

void TranscriptionTable::set(const std::string& user_id, const std::string& audio_id,
                             std::string hypothesis) {
  entries_[{user_id, audio_id}] = std::move(hypothesis);
}

const std::string& TranscriptionTable::at(const std::string& user_id,
                                          const std::string& audio_id) const {
  const auto it = entries_.find({user_id, audio_id});
  if (it == entries_.end()) {
    throw Error("no transcription for " + user_id + "/" + audio_id);
  }
  return it->second;
}

bool TranscriptionTable::contains(const std::string& user_id, const std::string& audio_id) const {
  return entries_.count({user_id, audio_id}) != 0;
}

void TranscriptionTable::check_covered_by(const std::vector<const Dataset*>& datasets) const {
  std::set<RecordKey> known;
  for (const auto* d : datasets) {
    for (const auto& r : d->records()) known.emplace(r.user_id, r.audio_id);
  }
  for (const auto& [key, hyp] : entries_) {
    if (!known.count(key)) {
      throw Error("transcription " + key.first + "/" + key.second +
                  " refers to no known record");
    }
  }
}

const std::vector<double>* EmbeddingTable::find(const std::string& lowercase_token) const {
  const auto it = vectors.find(lowercase_token);
  return it == vectors.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Manifests

Dataset load_manifest(const std::string& path) {
  const auto table = csv::read_file(path);
  std::vector<AudioRecord> records;
  if (table.header.empty()) return Dataset(path, {});

  const auto c_user = table.require_column("user_id", path);
  const auto c_audio = table.require_column("audio_id", path);
  const auto c_dur = table.require_column("duration_seconds", path);
  const auto c_text = table.require_column("reference_text", path);
  const auto c_path = table.column("audio_path");

  std::set<RecordKey> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto line = table.lines[i];
    AudioRecord r;
    r.user_id = row[c_user];
    r.audio_id = row[c_audio];
    r.reference_text = row[c_text];
    r.duration_seconds = csv::parse_double(row[c_dur], path, line);
    if (c_path != std::string::npos && !row[c_path].empty()) r.audio_path = row[c_path];
    if (r.user_id.empty() || r.audio_id.empty()) {
      throw ParseError(path, line, "empty user_id or audio_id");
    }
    if (!(r.duration_seconds > 0.0) || !std::isfinite(r.duration_seconds)) {
      throw ParseError(path, line, "duration_seconds must be positive");
    }
    if (trim(r.reference_text).empty()) throw ParseError(path, line, "empty reference_text");
    if (!seen.emplace(r.user_id, r.audio_id).second) {
      throw ParseError(path, line, "duplicate record " + r.user_id + "/" + r.audio_id);
    }
    records.push_back(std::move(r));
  }
  return Dataset(path, std::move(records));
}

void save_manifest(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  csv::write_row(out, {"user_id", "audio_id", "duration_seconds", "reference_text", "audio_path"});
  for (const auto& r : dataset.records()) {
    csv::write_row(out, {r.user_id, r.audio_id, csv::format_double(r.duration_seconds),
                         r.reference_text, r.audio_path.value_or("")});
  }
}

TranscriptionTable load_transcriptions(const std::string& path) {
  const auto table = csv::read_file(path);
  TranscriptionTable out;
  if (table.header.empty()) return out;
  const auto c_user = table.require_column("user_id", path);
  const auto c_audio = table.require_column("audio_id", path);
  const auto c_hyp = table.require_column("hypothesis_text", path);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (out.contains(row[c_user], row[c_audio])) {
      throw ParseError(path, table.lines[i],
                       "duplicate transcription " + row[c_user] + "/" + row[c_audio]);
    }
    out.set(row[c_user], row[c_audio], row[c_hyp]);
  }
  return out;
}

void save_transcriptions(const TranscriptionTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  csv::write_row(out, {"user_id", "audio_id", "hypothesis_text"});
  for (const auto& [key, hyp] : table.entries()) {
    csv::write_row(out, {key.first, key.second, hyp});
  }
}

// ---------------------------------------------------------------------------
// Splitting

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train_fraction must lie in (0, 1)");
  }
  auto users = dataset.users();
  if (users.size() < 2) {
    throw Error("split_dataset needs at least 2 users, got " + std::to_string(users.size()));
  }
  std::sort(users.begin(), users.end());
  Rng rng(seed);
  rng.shuffle(users);
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(users.size())));
  const std::set<std::string> train_users(users.begin(), users.begin() + n_train);

  std::vector<AudioRecord> train, test;
  for (const auto& r : dataset.records()) {
    (train_users.count(r.user_id) ? train : test).push_back(r);
  }
  return {Dataset(dataset.name() + "/train", std::move(train)),
          Dataset(dataset.name() + "/test", std::move(test))};
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) throw ParseError(path, line_no, "token without vector");
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      vec.push_back(csv::parse_double(fields[i], path, line_no));
    }
    if (table.dimension == 0) {
      table.dimension = vec.size();
    } else if (vec.size() != table.dimension) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(table.dimension) + " values, got " +
                           std::to_string(vec.size()));
    }
    auto [it, inserted] = table.vectors.insert_or_assign(to_lower(fields[0]), std::move(vec));
    if (!inserted) ++table.duplicate_tokens;
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  for (const auto& [token, vec] : table.vectors) {
    out << token;
    for (double x : vec) out << ' ' << csv::format_double(x);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

void put16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
  out.write(b.data(), 2);
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
    throw UnsupportedFormat(path + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  AudioSignal signal;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + pos, bytes.begin() + pos + 4);
    const std::uint32_t size = le32(&bytes[pos + 4]);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw Error(path + ": truncated fmt chunk");
      const auto format = le16(&bytes[body]);
      const auto channels = le16(&bytes[body + 2]);
      const auto rate = le32(&bytes[body + 4]);
      const auto bits = le16(&bytes[body + 14]);
      if (format != 1) {
        throw UnsupportedFormat(path + ": only PCM is supported (format tag " +
                                std::to_string(format) + ")");
      }
      if (channels != 1) {
        throw UnsupportedFormat(path + ": only mono is supported (" + std::to_string(channels) +
                                " channels)");
      }
      if (bits != 16) {
        throw UnsupportedFormat(path + ": only 16-bit samples are supported (" +
                                std::to_string(bits) + " bits)");
      }
      if (rate == 0) throw UnsupportedFormat(path + ": zero sample rate");
      signal.sample_rate_hz = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw UnsupportedFormat(path + ": data chunk before fmt chunk");
      if (body + size > bytes.size() || size % 2 != 0) {
        throw Error(path + ": truncated data chunk");
      }
      signal.samples.resize(size / 2);
      for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(le16(&bytes[body + 2 * i]));
        signal.samples[i] = static_cast<double>(raw) / 32768.0;
      }
      if (signal.samples.empty()) throw Error(path + ": no samples");
      return signal;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw Error(path + ": truncated file (no fmt chunk)");
  throw Error(path + ": truncated file (no data chunk)");
}

void write_wav(const AudioSignal& signal, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  out.write("RIFF", 4);
  put32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
  put32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, data_bytes);
  for (double s : signal.samples) {
    const double q = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
  }
}

}  // namespace voiceaudit
