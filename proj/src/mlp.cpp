#include "stealth/mlp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "stealth/errors.hpp"

namespace stealth {

namespace {

class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) toks_.push_back(tok);
    }
  }

  bool done() const { return pos_ >= toks_.size(); }

  std::string word() {
    if (done()) throw ParameterError("mlp: unexpected end of file");
    return toks_[pos_++];
  }

  void expect(const std::string& w) {
    const auto got = word();
    if (got != w) throw ParameterError("mlp: expected '" + w + "', got '" + got + "'");
  }

  double number() {
    const auto w = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used != w.size()) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      throw ParameterError("mlp: expected a number, got '" + w + "'");
    }
  }

  std::size_t count() {
    const double v = number();
    if (v < 1 || v != std::floor(v)) throw ParameterError("mlp: expected a positive integer");
    return static_cast<std::size_t>(v);
  }

 private:
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

void MlpModel::validate() const {
  if (sizes.size() < 2) throw ParameterError("mlp: need at least an input and an output layer");
  if (sizes.back() != 1) throw ParameterError("mlp: the output layer must have one unit");
  if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1) {
    throw ParameterError("mlp: layer count does not match sizes");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (weights[l].size() != sizes[l + 1] * sizes[l] || biases[l].size() != sizes[l + 1]) {
      throw ParameterError("mlp: layer " + std::to_string(l) + " has the wrong shape");
    }
  }
}

double MlpModel::evaluate(std::span<const double> x) const {
  if (x.size() != sizes.front()) throw DimensionError("mlp: input has the wrong dimension");
  std::vector<double> cur(x.begin(), x.end()), next;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l], out = sizes[l + 1];
    next.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      double s = biases[l][o];
      const double* row = &weights[l][o * in];
      for (std::size_t i = 0; i < in; ++i) s += row[i] * cur[i];
      const bool hidden = l + 2 < sizes.size();
      if (hidden) s = activation == Activation::Relu ? std::max(0.0, s) : std::tanh(s);
      next[o] = s;
    }
    cur.swap(next);
  }
  return cur[0];
}

MlpModel parse_mlp(std::istream& in) {
  Tokens t(in);
  t.expect("stealth-mlp");
  t.expect("v1");
  MlpModel m;
  t.expect("sizes");
  const std::size_t n = t.count();
  for (std::size_t i = 0; i < n; ++i) m.sizes.push_back(t.count());
  t.expect("activation");
  const auto act = t.word();
  if (act == "relu") {
    m.activation = Activation::Relu;
  } else if (act == "tanh") {
    m.activation = Activation::Tanh;
  } else {
    throw ParameterError("mlp: unknown activation '" + act + "'");
  }
  t.expect("threshold");
  m.threshold = t.number();
  for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    t.expect("W");
    const std::size_t rows = t.count(), cols = t.count();
    if (rows != m.sizes[l + 1] || cols != m.sizes[l]) {
      throw ParameterError("mlp: W block " + std::to_string(l) + " has the wrong shape");
    }
    std::vector<double> w(rows * cols);
    for (double& v : w) v = t.number();
    t.expect("b");
    if (t.count() != rows) throw ParameterError("mlp: bias length mismatch");
    std::vector<double> b(rows);
    for (double& v : b) v = t.number();
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  if (!t.done()) throw ParameterError("mlp: trailing tokens after the last layer");
  m.validate();
  return m;
}

MlpModel load_mlp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParameterError("mlp: cannot open '" + path + "'");
  return parse_mlp(f);
}

void write_mlp(std::ostream& out, const MlpModel& m) {
  m.validate();
  out << "stealth-mlp v1\n";
  out << "sizes " << m.sizes.size();
  for (auto s : m.sizes) out << ' ' << s;
  out << "\nactivation " << (m.activation == Activation::Relu ? "relu" : "tanh") << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "threshold " << m.threshold << '\n';
  for (std::size_t l = 0; l + 1 < m.sizes.size(); ++l) {
    const std::size_t rows = m.sizes[l + 1], cols = m.sizes[l];
    out << "W " << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) out << (c ? " " : "") << m.weights[l][r * cols + c];
      out << '\n';
    }
    out << "b " << rows << '\n';
    for (std::size_t r = 0; r < rows; ++r) out << (r ? " " : "") << m.biases[l][r];
    out << '\n';
  }
}

MlpOracle::MlpOracle(MlpModel model, std::optional<double> grid)
    : model_(std::move(model)), grid_(grid) {
  model_.validate();
  if (grid_) (void)grid_levels(*grid_);
}

Verdict MlpOracle::decide(std::span<const double> p) {
  return model_.evaluate(p) >= model_.threshold ? Verdict::Flagged : Verdict::Safe;
}

OracleDescriptor MlpOracle::descriptor() const {
  return {model_.sizes.front(), grid_, kProtocolVersion};
}

}  // namespace stealth
