#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "emosid/errors.hpp"
#include "emosid/hmm.hpp"

namespace emosid {

namespace {

constexpr const char *kMagic = "EMOSID_HMM";
constexpr int kFormatVersion = 1;

// Shortest representation that round-trips exactly.
void write_double(std::ostream &out, double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.write(buf, res.ptr - buf);
  out.put(' ');
}

double read_double(std::istream &in) {
  std::string token;
  if (!(in >> token)) throw ParseError("unexpected end of model file");
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw ParseError("bad numeric token '" + token + "' in model file");
  return value;
}

std::string read_token(std::istream &in) {
  std::string token;
  if (!(in >> token)) throw ParseError("unexpected end of model file");
  return token;
}

void expect_token(std::istream &in, const std::string &expected) {
  const std::string got = read_token(in);
  if (got != expected)
    throw ParseError("expected '" + expected + "', got '" + got + "'");
}

long read_count(std::istream &in) {
  const std::string token = read_token(in);
  long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size() || value < 0)
    throw ParseError("bad count '" + token + "' in model file");
  return value;
}

}  // namespace

void save_hmm(const GmmHmm &model, std::ostream &out) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "states " << model.n_states << " dim " << model.feature_dim << " mixtures "
      << model.emissions.front().components() << '\n';
  out << "variance_floor ";
  for (double v : model.variance_floor) write_double(out, v);
  out << "\ninitial ";
  for (double p : model.initial_probs) write_double(out, p);
  out << "\ntransitions ";
  for (const auto &row : model.transitions)
    for (double a : row) write_double(out, a);
  out << '\n';
  for (std::size_t s = 0; s < model.emissions.size(); ++s) {
    const GaussianMixture &mixture = model.emissions[s];
    out << "state " << s << "\nweights ";
    for (double w : mixture.weights) write_double(out, w);
    out << '\n';
    for (std::size_t k = 0; k < mixture.components(); ++k) {
      out << "mean ";
      for (double m : mixture.means[k]) write_double(out, m);
      out << "\nvar ";
      for (double v : mixture.variances[k]) write_double(out, v);
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError("failed writing model");
}

GmmHmm load_hmm(std::istream &in) {
  expect_token(in, kMagic);
  const long version = read_count(in);
  if (version != kFormatVersion)
    throw UnsupportedFormat("model format version " + std::to_string(version));

  GmmHmm model;
  expect_token(in, "states");
  model.n_states = static_cast<int>(read_count(in));
  expect_token(in, "dim");
  model.feature_dim = static_cast<int>(read_count(in));
  expect_token(in, "mixtures");
  const auto k_mix = static_cast<std::size_t>(read_count(in));

  const auto n = static_cast<std::size_t>(model.n_states);
  const auto dim = static_cast<std::size_t>(model.feature_dim);

  expect_token(in, "variance_floor");
  model.variance_floor.resize(dim);
  for (double &v : model.variance_floor) v = read_double(in);
  expect_token(in, "initial");
  model.initial_probs.resize(n);
  for (double &p : model.initial_probs) p = read_double(in);
  expect_token(in, "transitions");
  model.transitions.assign(n, std::vector<double>(n));
  for (auto &row : model.transitions)
    for (double &a : row) a = read_double(in);

  model.emissions.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    expect_token(in, "state");
    if (static_cast<std::size_t>(read_count(in)) != s)
      throw ParseError("state blocks out of order");
    GaussianMixture &mixture = model.emissions[s];
    mixture.weights.resize(k_mix);
    mixture.means.assign(k_mix, std::vector<double>(dim));
    mixture.variances.assign(k_mix, std::vector<double>(dim));
    expect_token(in, "weights");
    for (double &w : mixture.weights) w = read_double(in);
    for (std::size_t k = 0; k < k_mix; ++k) {
      expect_token(in, "mean");
      for (double &m : mixture.means[k]) m = read_double(in);
      expect_token(in, "var");
      for (double &v : mixture.variances[k]) v = read_double(in);
    }
  }
  expect_token(in, "end");
  validate_hmm(model);
  return model;
}

void save_hmm(const GmmHmm &model, const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_hmm(model, out);
}

GmmHmm load_hmm(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_hmm(in);
}

}  // namespace emosid
