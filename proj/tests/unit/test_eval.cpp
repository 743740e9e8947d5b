#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "emosid/errors.hpp"
#include "emosid/eval.hpp"
#include "fixture.hpp"

using namespace emosid;
using namespace emosid::test;
namespace fs = std::filesystem;

namespace {

LabeledResult make_result(Gender gender, int emotion, int speaker, Gender predicted_gender,
                          int predicted_emotion, int predicted_speaker) {
  LabeledResult r;
  r.truth = {gender, emotion, speaker};
  r.result.predicted = {predicted_gender, predicted_emotion, predicted_speaker};
  r.result.approach = Approach::ThreeStage;
  return r;
}

std::vector<LabeledResult> all_correct_results(const std::vector<std::string> &emotions) {
  std::vector<LabeledResult> results;
  for (Gender g : kGenders)
    for (int e = 0; e < static_cast<int>(emotions.size()); ++e)
      for (int s = 1; s <= 2; ++s) results.push_back(make_result(g, e, s, g, e, s));
  return results;
}

// The twelve per-gender cells of the reference one-stage table.
PerformanceTable reference_table_one_stage() {
  PerformanceTable table;
  table.emotion_names = {"neutral", "anger", "sadness", "happiness", "disgust", "fear"};
  table.rows = {{92, 93}, {71, 70}, {75, 75}, {78, 79}, {75, 73}, {79, 79}};
  return table;
}

}  // namespace

TEST_CASE("performance table extremes") {
  const std::vector<std::string> emotions = {"neutral", "anger"};
  auto correct = all_correct_results(emotions);
  const PerformanceTable perfect = performance_table(correct, emotions);
  for (const auto &row : perfect.rows) {
    CHECK(row.male_pct == 100.0);
    CHECK(row.female_pct == 100.0);
  }
  CHECK(perfect.grand_average() == 100.0);

  for (auto &r : correct) r.result.predicted.speaker_id = r.truth.speaker_id + 7;
  const PerformanceTable zero = performance_table(correct, emotions);
  CHECK(zero.grand_average() == 0.0);

  CHECK_THROWS_AS(performance_table({}, emotions), EmptyEvaluation);
}

TEST_CASE("speaker match mode controls gender checking") {
  const std::vector<std::string> emotions = {"neutral"};
  std::vector<LabeledResult> results;
  // Right speaker index, wrong gender.
  results.push_back(make_result(Gender::Male, 0, 1, Gender::Female, 0, 1));
  results.push_back(make_result(Gender::Female, 0, 1, Gender::Male, 0, 1));
  CHECK(performance_table(results, emotions, SpeakerMatch::GenderAndId).grand_average() == 0.0);
  CHECK(performance_table(results, emotions, SpeakerMatch::IdOnly).grand_average() == 100.0);
}

TEST_CASE("the reference table summarizes to the known mean and deviation") {
  const TableSummary summary = table_summary(reference_table_one_stage());
  CHECK(summary.mean == doctest::Approx(78.25).epsilon(1e-12));
  CHECK(std::abs(summary.sd - 7.64) <= 0.01);
  CHECK(summary.n == 12);
}

TEST_CASE("confusion matrix of a perfect classifier is the identity") {
  const std::vector<std::string> emotions = {"neutral", "anger", "sadness"};
  std::vector<LabeledResult> results;
  for (Gender g : kGenders)
    for (int e = 0; e < 3; ++e)
      for (int s = 1; s <= 3; ++s) results.push_back(make_result(g, e, s, g, e, s));
  const ConfusionMatrix matrix = confusion_matrix(results, ConfusionStage::Emotion, emotions);
  for (std::size_t p = 0; p < 3; ++p)
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(matrix.cells[p][c] == (p == c ? 100.0 : 0.0));
}

TEST_CASE("confusion columns always sum to 100") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> emotion(0, 2), speaker(1, 3), flip(0, 1);
  const std::vector<std::string> emotions = {"neutral", "anger", "sadness"};
  std::vector<LabeledResult> results;
  for (int i = 0; i < 500; ++i) {
    const Gender g = flip(rng) ? Gender::Female : Gender::Male;
    results.push_back(
        make_result(g, emotion(rng), speaker(rng), g, emotion(rng), speaker(rng)));
  }
  for (auto stage : {ConfusionStage::Gender, ConfusionStage::Emotion}) {
    const ConfusionMatrix matrix = confusion_matrix(results, stage, emotions);
    for (std::size_t c = 0; c < matrix.classes.size(); ++c) {
      double column = 0.0;
      for (std::size_t p = 0; p < matrix.classes.size(); ++p) column += matrix.cells[p][c];
      CHECK(column == doctest::Approx(100.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("the reference anger confusion column sums to 100") {
  const double column[] = {4, 81, 3, 0, 10, 2};
  double sum = 0.0;
  for (double v : column) sum += v;
  CHECK(sum == 100.0);
}

TEST_CASE("a class with no test utterances has an undefined column") {
  const std::vector<std::string> emotions = {"neutral", "anger"};
  std::vector<LabeledResult> results;
  results.push_back(make_result(Gender::Male, 0, 1, Gender::Male, 0, 1));
  CHECK_THROWS_AS(confusion_matrix(results, ConfusionStage::Emotion, emotions),
                  UndefinedColumn);
}

TEST_CASE("welch t on the reference summaries") {
  const TTestResult result = students_t(78.25, 7.64, 12, 83.75, 7.55, 12);
  CHECK(std::abs(result.t_value - 1.774) <= 0.001);
  CHECK(result.critical_value_0_05 == 1.645);
  CHECK(result.t_value > result.critical_value_0_05);
}

TEST_CASE("pooled t equals welch t for equal sample sizes") {
  const TTestResult welch = students_t(78.25, 7.64, 12, 83.75, 7.55, 12, TTestMethod::Welch);
  const TTestResult pooled = students_t(78.25, 7.64, 12, 83.75, 7.55, 12, TTestMethod::Pooled);
  CHECK(welch.t_value == doctest::Approx(pooled.t_value).epsilon(1e-12));
}

TEST_CASE("t is zero at equality and antisymmetric") {
  CHECK(students_t(50.0, 5.0, 10, 50.0, 5.0, 10).t_value == 0.0);
  CHECK(students_t(50.0, 0.0, 10, 50.0, 0.0, 10).t_value == 0.0);
  const double forward = students_t(40.0, 4.0, 9, 47.0, 6.0, 11).t_value;
  const double backward = students_t(47.0, 6.0, 11, 40.0, 4.0, 9).t_value;
  CHECK(forward == doctest::Approx(-backward).epsilon(1e-12));
  CHECK_THROWS_AS(students_t(1.0, 1.0, 1, 2.0, 1.0, 5), InvariantViolation);
}

TEST_CASE("emotion derangement is a fixed cycle") {
  CHECK(derange_emotion(0, 3) == 1);
  CHECK(derange_emotion(1, 3) == 2);
  CHECK(derange_emotion(2, 3) == 0);
  for (int e = 0; e < 6; ++e) CHECK(derange_emotion(e, 6) != e);
  CHECK_THROWS_AS(derange_emotion(0, 1), InvariantViolation);
}

TEST_CASE("default alpha grid has the eleven canonical points") {
  const auto grid = default_alpha_grid();
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(grid[i] - grid[i - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("single-point sweep equals a direct evaluation") {
  const auto &f = micro_fixture();
  EvalOptions options;
  options.alpha = 0.5;
  options.threads = 2;
  const double grid[] = {0.5};
  const AlphaSweep sweep = alpha_sweep(f.registry, f.manifest, grid, options);
  REQUIRE(sweep.points.size() == 1);

  const auto results = evaluate_split(f.registry, f.manifest, Split::Test, options);
  const PerformanceTable table = performance_table(results, f.registry.emotion_names);
  CHECK(sweep.points[0].overall_pct == doctest::Approx(table.grand_average()).epsilon(1e-12));
}

TEST_CASE("sweeps demand a strictly increasing grid") {
  const auto &f = micro_fixture();
  const double bad[] = {0.5, 0.5};
  CHECK_THROWS_AS(alpha_sweep(f.registry, f.manifest, bad, {}), InvariantViolation);
}

TEST_CASE("evaluation is thread-count independent") {
  const auto &f = micro_fixture();
  EvalOptions serial;
  serial.threads = 1;
  EvalOptions parallel;
  parallel.threads = 2;
  const auto a = evaluate_split(f.registry, f.manifest, Split::Test, serial);
  const auto b = evaluate_split(f.registry, f.manifest, Split::Test, parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].result.predicted == b[i].result.predicted);
}

TEST_CASE("report files round trip") {
  const fs::path dir = fs::temp_directory_path() / "emosid_unit" / "reports";
  fs::create_directories(dir);

  const PerformanceTable table = reference_table_one_stage();
  write_performance_csv(table, dir / "perf.csv");
  const PerformanceTable loaded = read_performance_csv(dir / "perf.csv");
  REQUIRE(loaded.rows.size() == table.rows.size());
  for (std::size_t e = 0; e < table.rows.size(); ++e) {
    CHECK(loaded.emotion_names[e] == table.emotion_names[e]);
    CHECK(loaded.rows[e].male_pct == doctest::Approx(table.rows[e].male_pct).epsilon(0.01));
  }

  const TTestResult t = students_t(78.25, 7.64, 12, 83.75, 7.55, 12);
  write_ttest_report(t, dir / "ttest.csv", "note goes here");
  std::ifstream in(dir / "ttest.csv");
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  CHECK(contents.find("t,1.7738") != std::string::npos);
  CHECK(contents.find("method,welch") != std::string::npos);
  CHECK(contents.find("note goes here") != std::string::npos);
}
