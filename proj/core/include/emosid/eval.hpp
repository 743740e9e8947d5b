#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emosid/identify.hpp"

namespace emosid {

struct LabeledResult {
  Label truth;
  IdentificationResult result;
};

struct PerformanceRow {
  double male_pct = 0.0;
  double female_pct = 0.0;
  double average() const { return 0.5 * (male_pct + female_pct); }
};

/// Per-emotion speaker identification percentages, one row per emotion.
struct PerformanceTable {
  std::vector<std::string> emotion_names;
  std::vector<PerformanceRow> rows;
  double grand_average() const;
};

/// Mean over all 2m cells, sample standard deviation over the m per-emotion
/// averages, n = cell count: the summary convention the reference
/// performance tables use.
struct TableSummary {
  double mean = 0.0;
  double sd = 0.0;
  long n = 0;
};

TableSummary table_summary(const PerformanceTable &table);

/// How speaker correctness is judged. The worst-case protocol forces a wrong
/// gender, so there the speaker index alone is compared.
enum class SpeakerMatch { GenderAndId, IdOnly };

PerformanceTable performance_table(std::span<const LabeledResult> results,
                                   const std::vector<std::string> &emotion_names,
                                   SpeakerMatch match = SpeakerMatch::GenderAndId);

/// Column-normalized percentages; the true class runs down the columns.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> cells;  // [predicted][true]
};

enum class ConfusionStage { Gender, Emotion };

ConfusionMatrix confusion_matrix(std::span<const LabeledResult> results, ConfusionStage stage,
                                 const std::vector<std::string> &emotion_names,
                                 std::optional<Gender> gender_filter = {});

enum class TTestMethod { Welch, Pooled };

struct TTestResult {
  double t_value = 0.0;
  TTestMethod method = TTestMethod::Welch;
  double mean1 = 0.0, sd1 = 0.0;
  long n1 = 0;
  double mean2 = 0.0, sd2 = 0.0;
  long n2 = 0;
  double critical_value_0_05 = 1.645;  // one-sided, 0.05 level
};

/// Two-sample t on the (approach1, approach2) summaries; the sign follows
/// mean2 - mean1. Both standard deviations zero with equal means gives 0.
TTestResult students_t(double mean1, double sd1, long n1, double mean2, double sd2, long n2,
                       TTestMethod method = TTestMethod::Welch);

struct AlphaSweepPoint {
  double alpha = 0.0;
  std::vector<double> per_emotion_pct;  // speaker accuracy per true emotion
  double overall_pct = 0.0;
  double emotion_stage_pct = 0.0;
};

struct AlphaSweep {
  std::vector<AlphaSweepPoint> points;
};

/// 0.0, 0.1, ..., 1.0.
std::vector<double> default_alpha_grid();

struct EvalOptions {
  Approach approach = Approach::ThreeStage;
  double alpha = 0.5;
  bool normalize = true;
  bool worst_case = false;  // wrong gender + cyclically deranged emotion overrides
  int threads = 1;
};

/// The forced-false emotion of the worst-case protocol: i -> i+1 mod m.
int derange_emotion(int emotion, int n_emotions);

/// Classifies every utterance of the chosen split independently.
std::vector<LabeledResult> evaluate_split(const ModelRegistry &registry,
                                          const CorpusManifest &manifest, Split split,
                                          const EvalOptions &options);

/// Re-scores the test split at each grid point; alpha only enters the score
/// fusion, so no retraining happens.
AlphaSweep alpha_sweep(const ModelRegistry &registry, const CorpusManifest &manifest,
                       std::span<const double> alphas, const EvalOptions &base);

/// Experiment-6 style evaluation: every stage handoff is forced false, then
/// speaker accuracy is tabulated by index.
PerformanceTable worst_case_eval(const ModelRegistry &registry, const CorpusManifest &manifest,
                                 Alpha alpha, const EvalOptions &base);

// Report output: CSV for machines, aligned text for humans, 2 decimals.
std::string format_performance_table(const PerformanceTable &table);
void write_performance_csv(const PerformanceTable &table, const std::filesystem::path &path);
PerformanceTable read_performance_csv(const std::filesystem::path &path);
void write_confusion_csv(const ConfusionMatrix &matrix, const std::filesystem::path &path);
void write_sweep_csv(const AlphaSweep &sweep, const std::vector<std::string> &emotion_names,
                     const std::filesystem::path &path);
void write_ttest_report(const TTestResult &result, const std::filesystem::path &path,
                        std::string_view extra_note = {});

}  // namespace emosid
