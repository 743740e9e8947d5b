#include "emosid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "emosid/errors.hpp"
#include "emosid/parallel.hpp"

namespace emosid {

namespace {

bool speaker_correct(const LabeledResult &r, SpeakerMatch match) {
  if (r.result.predicted.speaker_id != r.truth.speaker_id) return false;
  return match == SpeakerMatch::IdOnly || r.result.predicted.gender == r.truth.gender;
}

std::string pct(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

}  // namespace

double PerformanceTable::grand_average() const {
  if (rows.empty()) return 0.0;
  double acc = 0.0;
  for (const auto &row : rows) acc += row.average();
  return acc / static_cast<double>(rows.size());
}

TableSummary table_summary(const PerformanceTable &table) {
  if (table.rows.empty()) throw EmptyEvaluation("summary of an empty table");
  TableSummary summary;
  summary.n = static_cast<long>(2 * table.rows.size());
  double cell_sum = 0.0;
  for (const auto &row : table.rows) cell_sum += row.male_pct + row.female_pct;
  summary.mean = cell_sum / static_cast<double>(summary.n);

  const double avg_mean = table.grand_average();
  double scatter = 0.0;
  for (const auto &row : table.rows) {
    const double dev = row.average() - avg_mean;
    scatter += dev * dev;
  }
  summary.sd = table.rows.size() > 1
                   ? std::sqrt(scatter / static_cast<double>(table.rows.size() - 1))
                   : 0.0;
  return summary;
}

PerformanceTable performance_table(std::span<const LabeledResult> results,
                                   const std::vector<std::string> &emotion_names,
                                   SpeakerMatch match) {
  if (results.empty()) throw EmptyEvaluation("no identification results to tabulate");

  const std::size_t m = emotion_names.size();
  std::vector<std::array<long, 2>> total(m, {0, 0}), correct(m, {0, 0});
  for (const auto &r : results) {
    if (r.truth.emotion < 0 || static_cast<std::size_t>(r.truth.emotion) >= m)
      throw InvariantViolation("result ground truth emotion outside the emotion list");
    const std::size_t e = static_cast<std::size_t>(r.truth.emotion);
    const std::size_t g = gender_index(r.truth.gender);
    total[e][g]++;
    if (speaker_correct(r, match)) correct[e][g]++;
  }

  PerformanceTable table;
  table.emotion_names = emotion_names;
  table.rows.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    for (std::size_t g = 0; g < 2; ++g) {
      if (total[e][g] == 0)
        throw EmptyEvaluation("no test utterances for emotion '" + emotion_names[e] + "'");
      const double value = 100.0 * static_cast<double>(correct[e][g]) /
                           static_cast<double>(total[e][g]);
      (g == 0 ? table.rows[e].male_pct : table.rows[e].female_pct) = value;
    }
  }
  return table;
}

ConfusionMatrix confusion_matrix(std::span<const LabeledResult> results, ConfusionStage stage,
                                 const std::vector<std::string> &emotion_names,
                                 std::optional<Gender> gender_filter) {
  ConfusionMatrix matrix;
  if (stage == ConfusionStage::Gender)
    matrix.classes = {"M", "F"};
  else
    matrix.classes = emotion_names;
  const std::size_t k = matrix.classes.size();

  std::vector<std::vector<long>> counts(k, std::vector<long>(k, 0));
  std::vector<long> column_totals(k, 0);
  for (const auto &r : results) {
    if (gender_filter && r.truth.gender != *gender_filter) continue;
    std::size_t truth_class = 0, predicted_class = 0;
    if (stage == ConfusionStage::Gender) {
      truth_class = gender_index(r.truth.gender);
      predicted_class = gender_index(r.result.predicted.gender);
    } else {
      if (r.result.predicted.emotion < 0)
        throw InvariantViolation("result carries no emotion prediction");
      truth_class = static_cast<std::size_t>(r.truth.emotion);
      predicted_class = static_cast<std::size_t>(r.result.predicted.emotion);
    }
    counts[predicted_class][truth_class]++;
    column_totals[truth_class]++;
  }

  for (std::size_t c = 0; c < k; ++c)
    if (column_totals[c] == 0)
      throw UndefinedColumn("no test utterances of class '" + matrix.classes[c] + "'");

  matrix.cells.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t c = 0; c < k; ++c)
      matrix.cells[p][c] =
          100.0 * static_cast<double>(counts[p][c]) / static_cast<double>(column_totals[c]);
  return matrix;
}

TTestResult students_t(double mean1, double sd1, long n1, double mean2, double sd2, long n2,
                       TTestMethod method) {
  if (n1 < 2 || n2 < 2) throw InvariantViolation("t test needs n >= 2 per sample");
  if (sd1 < 0.0 || sd2 < 0.0) throw InvariantViolation("negative standard deviation");

  TTestResult result;
  result.method = method;
  result.mean1 = mean1;
  result.sd1 = sd1;
  result.n1 = n1;
  result.mean2 = mean2;
  result.sd2 = sd2;
  result.n2 = n2;

  const double diff = mean2 - mean1;
  double denom = 0.0;
  if (method == TTestMethod::Welch) {
    denom = std::sqrt(sd1 * sd1 / static_cast<double>(n1) +
                      sd2 * sd2 / static_cast<double>(n2));
  } else {
    const double pooled_var =
        ((static_cast<double>(n1 - 1)) * sd1 * sd1 + (static_cast<double>(n2 - 1)) * sd2 * sd2) /
        static_cast<double>(n1 + n2 - 2);
    denom = std::sqrt(pooled_var) *
            std::sqrt(1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
  }
  if (denom == 0.0)
    result.t_value = diff == 0.0 ? 0.0
                                 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  else
    result.t_value = diff / denom;
  return result;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

int derange_emotion(int emotion, int n_emotions) {
  if (n_emotions < 2)
    throw InvariantViolation("a derangement needs at least two emotions");
  return (emotion + 1) % n_emotions;
}

namespace {

IdentificationResult run_identify(const ModelRegistry &registry, const AnalyzedUtterance &u,
                                  const Label &truth, const EvalOptions &options) {
  const Alpha alpha(options.alpha);
  switch (options.approach) {
    case Approach::OneStage:
      return identify_one_stage(registry, u.features, u.prosody, alpha, options.normalize);
    case Approach::ThreeStage: {
      StageOverrides overrides;
      if (options.worst_case) {
        overrides.gender = truth.gender == Gender::Male ? Gender::Female : Gender::Male;
        overrides.emotion = derange_emotion(truth.emotion, registry.emotions());
      }
      return identify_three_stage(registry, u.features, u.prosody, alpha, options.normalize,
                                  overrides);
    }
    case Approach::Exp1:
    case Approach::Exp2:
    case Approach::Exp3:
      return identify_ablation(registry, options.approach, u.features, u.prosody, alpha,
                               options.normalize);
  }
  throw InvariantViolation("unhandled approach");
}

}  // namespace

std::vector<LabeledResult> evaluate_split(const ModelRegistry &registry,
                                          const CorpusManifest &manifest, Split split,
                                          const EvalOptions &options) {
  std::vector<const UtteranceRecord *> records;
  for (const auto &record : manifest.records)
    if (record.split == split) records.push_back(&record);

  std::vector<LabeledResult> results(records.size());
  parallel_for(records.size(), options.threads, [&](std::size_t i) {
    const UtteranceRecord &record = *records[i];
    const AnalyzedUtterance analyzed =
        analyze_utterance(ingest_wav(manifest.resolve(record)));
    const Label truth{record.gender, record.emotion, record.speaker_id};
    results[i] = {truth, run_identify(registry, analyzed, truth, options)};
  });
  return results;
}

AlphaSweep alpha_sweep(const ModelRegistry &registry, const CorpusManifest &manifest,
                       std::span<const double> alphas, const EvalOptions &base) {
  for (std::size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1]))
      throw InvariantViolation("alpha grid must be strictly increasing");

  std::vector<const UtteranceRecord *> records;
  for (const auto &record : manifest.records)
    if (record.split == Split::Test) records.push_back(&record);
  if (records.empty()) throw EmptyEvaluation("no test utterances to sweep");

  std::vector<AnalyzedUtterance> analyzed(records.size());
  parallel_for(records.size(), base.threads, [&](std::size_t i) {
    analyzed[i] = analyze_utterance(ingest_wav(manifest.resolve(*records[i])));
  });

  AlphaSweep sweep;
  for (double alpha : alphas) {
    EvalOptions options = base;
    options.alpha = alpha;

    std::vector<LabeledResult> results(records.size());
    parallel_for(records.size(), base.threads, [&](std::size_t i) {
      const UtteranceRecord &record = *records[i];
      const Label truth{record.gender, record.emotion, record.speaker_id};
      results[i] = {truth, run_identify(registry, analyzed[i], truth, options)};
    });

    const PerformanceTable table = performance_table(results, registry.emotion_names);
    AlphaSweepPoint point;
    point.alpha = alpha;
    for (const auto &row : table.rows) point.per_emotion_pct.push_back(row.average());
    point.overall_pct = table.grand_average();
    long emotion_correct = 0;
    for (const auto &r : results)
      if (r.result.predicted.emotion == r.truth.emotion) emotion_correct++;
    point.emotion_stage_pct =
        100.0 * static_cast<double>(emotion_correct) / static_cast<double>(results.size());
    sweep.points.push_back(std::move(point));
  }
  return sweep;
}

PerformanceTable worst_case_eval(const ModelRegistry &registry, const CorpusManifest &manifest,
                                 Alpha alpha, const EvalOptions &base) {
  EvalOptions options = base;
  options.approach = Approach::ThreeStage;
  options.alpha = alpha.value();
  options.worst_case = true;
  const auto results = evaluate_split(registry, manifest, Split::Test, options);
  return performance_table(results, registry.emotion_names, SpeakerMatch::IdOnly);
}

std::string format_performance_table(const PerformanceTable &table) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "Emotion" << std::right << std::setw(10) << "Males(%)"
      << std::setw(12) << "Females(%)" << std::setw(12) << "Average(%)" << '\n';
  for (std::size_t e = 0; e < table.rows.size(); ++e) {
    out << std::left << std::setw(12) << table.emotion_names[e] << std::right << std::setw(10)
        << pct(table.rows[e].male_pct) << std::setw(12) << pct(table.rows[e].female_pct)
        << std::setw(12) << pct(table.rows[e].average()) << '\n';
  }
  out << std::left << std::setw(12) << "average" << std::right << std::setw(34)
      << pct(table.grand_average()) << '\n';
  return out.str();
}

void write_performance_csv(const PerformanceTable &table, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "emotion,male_pct,female_pct,average_pct\n";
  for (std::size_t e = 0; e < table.rows.size(); ++e)
    out << table.emotion_names[e] << ',' << pct(table.rows[e].male_pct) << ','
        << pct(table.rows[e].female_pct) << ',' << pct(table.rows[e].average()) << '\n';
  out << "average,,," << pct(table.grand_average()) << '\n';
}

PerformanceTable read_performance_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "emotion,male_pct,female_pct,average_pct")
    throw ParseError("not a performance report: " + path.string());

  PerformanceTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string emotion, male, female, average;
    std::getline(ss, emotion, ',');
    std::getline(ss, male, ',');
    std::getline(ss, female, ',');
    std::getline(ss, average, ',');
    if (emotion == "average") continue;  // derived row
    try {
      table.rows.push_back({std::stod(male), std::stod(female)});
    } catch (const std::exception &) {
      throw ParseError("bad percentage in " + path.string() + ": " + line);
    }
    table.emotion_names.push_back(emotion);
  }
  if (table.rows.empty()) throw ParseError("empty performance report " + path.string());
  return table;
}

void write_confusion_csv(const ConfusionMatrix &matrix, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "predicted";
  for (const auto &name : matrix.classes) out << ",true_" << name;
  out << '\n';
  for (std::size_t p = 0; p < matrix.classes.size(); ++p) {
    out << matrix.classes[p];
    for (std::size_t c = 0; c < matrix.classes.size(); ++c) out << ',' << pct(matrix.cells[p][c]);
    out << '\n';
  }
}

void write_sweep_csv(const AlphaSweep &sweep, const std::vector<std::string> &emotion_names,
                     const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "alpha";
  for (const auto &name : emotion_names) out << ',' << name << "_pct";
  out << ",overall_pct,emotion_stage_pct\n";
  for (const auto &point : sweep.points) {
    out << std::setprecision(3) << point.alpha;
    for (double value : point.per_emotion_pct) out << ',' << pct(value);
    out << ',' << pct(point.overall_pct) << ',' << pct(point.emotion_stage_pct) << '\n';
  }
}

void write_ttest_report(const TTestResult &result, const std::filesystem::path &path,
                        std::string_view extra_note) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const char *method = result.method == TTestMethod::Welch ? "welch" : "pooled";
  out << "method," << method << '\n';
  out << "mean1," << result.mean1 << "\nsd1," << result.sd1 << "\nn1," << result.n1 << '\n';
  out << "mean2," << result.mean2 << "\nsd2," << result.sd2 << "\nn2," << result.n2 << '\n';
  out << "t," << std::fixed << std::setprecision(4) << result.t_value << '\n';
  out << "critical_value_0_05," << result.critical_value_0_05 << '\n';
  out << "significant," << (result.t_value > result.critical_value_0_05 ? "yes" : "no") << '\n';
  if (result.method == TTestMethod::Welch)
    out << "# t = (mean2 - mean1) / sqrt(sd1^2/n1 + sd2^2/n2)\n";
  else
    out << "# t = (mean2 - mean1) / (sp * sqrt(1/n1 + 1/n2)), sp^2 pooled\n";
  if (!extra_note.empty()) out << "# " << extra_note << '\n';
}

}  // namespace emosid
