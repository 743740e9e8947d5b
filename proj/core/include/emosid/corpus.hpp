#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emosid/audio.hpp"

namespace emosid {

enum class Gender { Male, Female };
inline constexpr std::array<Gender, 2> kGenders = {Gender::Male, Gender::Female};

char gender_to_char(Gender g);
Gender gender_from_char(char c);
std::size_t gender_index(Gender g);

/// Canonical emotion ordering; a corpus with m emotions uses the first m.
inline constexpr std::array<std::string_view, 6> kEmotionNames = {
    "neutral", "anger", "sadness", "happiness", "disgust", "fear"};

int emotion_index_from_name(std::string_view name);

enum class Split { Train, Test };

/// Sentences in the first half of the script train, the rest evaluate
/// (first four of eight for a full-shape corpus).
Split split_for_sentence(int sentence_id, int n_sentences);

struct UtteranceRecord {
  std::string file_path;  // relative to the manifest directory
  int speaker_id = 1;     // 1..n within the gender
  Gender gender = Gender::Male;
  int emotion = 0;  // index into kEmotionNames
  int sentence_id = 1;
  int repetition = 1;
  Split split = Split::Train;
};

struct CorpusDims {
  int speakers_per_gender = 0;
  int emotions = 0;
  int sentences = 0;
  int repetitions = 0;

  long expected_records() const {
    return 2L * speakers_per_gender * emotions * sentences * repetitions;
  }
  friend bool operator==(const CorpusDims &, const CorpusDims &) = default;
};

struct CorpusManifest {
  std::vector<UtteranceRecord> records;
  CorpusDims dims;
  std::filesystem::path root;  // directory the file paths are relative to

  std::filesystem::path resolve(const UtteranceRecord &record) const {
    return root / record.file_path;
  }
};

bool is_csd_shaped(const CorpusManifest &manifest);

/// One record per (gender, speaker, emotion, sentence, repetition) cell with
/// the standard relative path layout; split assigned by the sentence rule.
std::vector<UtteranceRecord> build_records(const CorpusDims &dims);

struct ManifestLoadOptions {
  bool verify_files = true;
};

/// Parses and fully validates a manifest: header, column types, key
/// uniqueness, the split rule, and (optionally) that every file exists.
CorpusManifest load_manifest(const std::filesystem::path &path,
                             const ManifestLoadOptions &options = {});

void save_manifest(const CorpusManifest &manifest, const std::filesystem::path &path);

/// Decodes a 16 kHz mono 16-bit PCM WAV into a validated AudioBuffer.
AudioBuffer ingest_wav(const std::filesystem::path &path);

}  // namespace emosid
