#include "emosid/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "emosid/errors.hpp"
#include "emosid/wav.hpp"

namespace emosid {

namespace {

constexpr const char *kHeader = "file_path,speaker_id,gender,emotion,sentence_id,repetition,split";

std::vector<std::string> split_fields(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_int(const std::string &s, const char *what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ParseError(std::string("bad ") + what + " value '" + s + "'");
  }
}

}  // namespace

char gender_to_char(Gender g) { return g == Gender::Male ? 'M' : 'F'; }

Gender gender_from_char(char c) {
  if (c == 'M') return Gender::Male;
  if (c == 'F') return Gender::Female;
  throw ParseError(std::string("unknown gender '") + c + "'");
}

std::size_t gender_index(Gender g) { return g == Gender::Male ? 0 : 1; }

int emotion_index_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEmotionNames.size(); ++i)
    if (kEmotionNames[i] == name) return static_cast<int>(i);
  throw ParseError("unknown emotion '" + std::string(name) + "'");
}

Split split_for_sentence(int sentence_id, int n_sentences) {
  return sentence_id <= (n_sentences + 1) / 2 ? Split::Train : Split::Test;
}

bool is_csd_shaped(const CorpusManifest &manifest) {
  return manifest.dims == CorpusDims{25, 6, 8, 9} &&
         static_cast<long>(manifest.records.size()) == manifest.dims.expected_records();
}

std::vector<UtteranceRecord> build_records(const CorpusDims &dims) {
  if (dims.speakers_per_gender <= 0 || dims.emotions <= 0 || dims.sentences <= 0 ||
      dims.repetitions <= 0)
    throw InvariantViolation("corpus dimensions must be positive");
  if (dims.emotions > static_cast<int>(kEmotionNames.size()))
    throw InvariantViolation("at most " + std::to_string(kEmotionNames.size()) +
                             " emotions are supported");

  std::vector<UtteranceRecord> records;
  records.reserve(static_cast<std::size_t>(dims.expected_records()));
  for (Gender gender : kGenders)
    for (int speaker = 1; speaker <= dims.speakers_per_gender; ++speaker)
      for (int emotion = 0; emotion < dims.emotions; ++emotion)
        for (int sentence = 1; sentence <= dims.sentences; ++sentence)
          for (int repetition = 1; repetition <= dims.repetitions; ++repetition) {
            UtteranceRecord record;
            std::ostringstream path;
            path << "wav/" << gender_to_char(gender) << speaker << '_'
                 << kEmotionNames[static_cast<std::size_t>(emotion)] << "_s" << sentence
                 << "_r" << repetition << ".wav";
            record.file_path = path.str();
            record.speaker_id = speaker;
            record.gender = gender;
            record.emotion = emotion;
            record.sentence_id = sentence;
            record.repetition = repetition;
            record.split = split_for_sentence(sentence, dims.sentences);
            records.push_back(std::move(record));
          }
  return records;
}

CorpusManifest load_manifest(const std::filesystem::path &path,
                             const ManifestLoadOptions &options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ParseError("empty manifest " + path.string());
  if (line != kHeader)
    throw ParseError("unexpected manifest header '" + line + "'");

  CorpusManifest manifest;
  manifest.root = path.parent_path();

  std::set<std::tuple<int, int, int, int, int>> keys;
  int max_sentence = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7)
      throw ParseError("expected 7 columns, got " + std::to_string(fields.size()));

    UtteranceRecord record;
    record.file_path = fields[0];
    record.speaker_id = parse_int(fields[1], "speaker_id");
    if (fields[2].size() != 1) throw ParseError("bad gender field '" + fields[2] + "'");
    record.gender = gender_from_char(fields[2][0]);
    record.emotion = emotion_index_from_name(fields[3]);
    record.sentence_id = parse_int(fields[4], "sentence_id");
    record.repetition = parse_int(fields[5], "repetition");
    if (record.speaker_id < 1 || record.sentence_id < 1 || record.repetition < 1)
      throw InvariantViolation("ids must start at 1 in " + line);

    if (fields[6] == "train")
      record.split = Split::Train;
    else if (fields[6] == "test")
      record.split = Split::Test;
    else
      throw ParseError("bad split field '" + fields[6] + "'");

    const auto key = std::make_tuple(static_cast<int>(gender_index(record.gender)),
                                     record.speaker_id, record.emotion, record.sentence_id,
                                     record.repetition);
    if (!keys.insert(key).second)
      throw InvariantViolation("duplicate record key in line '" + line + "'");

    max_sentence = std::max(max_sentence, record.sentence_id);
    manifest.records.push_back(std::move(record));
    manifest.dims.speakers_per_gender =
        std::max(manifest.dims.speakers_per_gender, manifest.records.back().speaker_id);
    manifest.dims.emotions =
        std::max(manifest.dims.emotions, manifest.records.back().emotion + 1);
    manifest.dims.repetitions =
        std::max(manifest.dims.repetitions, manifest.records.back().repetition);
  }
  manifest.dims.sentences = max_sentence;

  // Split is a pure function of the sentence id; a stored field that
  // disagrees was edited by hand.
  for (const auto &record : manifest.records) {
    if (record.split != split_for_sentence(record.sentence_id, manifest.dims.sentences))
      throw InvariantViolation("split field disagrees with the sentence rule for " +
                               record.file_path);
    if (options.verify_files && !std::filesystem::exists(manifest.resolve(record)))
      throw InvariantViolation("missing audio file " + manifest.resolve(record).string());
  }
  return manifest;
}

void save_manifest(const CorpusManifest &manifest, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kHeader << '\n';
  for (const auto &record : manifest.records) {
    out << record.file_path << ',' << record.speaker_id << ',' << gender_to_char(record.gender)
        << ',' << kEmotionNames[static_cast<std::size_t>(record.emotion)] << ','
        << record.sentence_id << ',' << record.repetition << ','
        << (record.split == Split::Train ? "train" : "test") << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

AudioBuffer ingest_wav(const std::filesystem::path &path) {
  AudioBuffer audio = read_wav(path);
  validate_audio(audio);
  return audio;
}

}  // namespace emosid
