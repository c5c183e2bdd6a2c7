#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stealth/oracle.hpp"

namespace stealth {

enum class Activation { Relu, Tanh };

// A small feed-forward network read from the text format documented in
// docs/mlp_format.md. Hidden layers apply `activation`; the last layer is
// linear with a single output, flagged iff output >= threshold.
struct MlpModel {
  std::vector<std::size_t> sizes;          // input, hidden..., 1
  std::vector<std::vector<double>> weights;  // per layer, row-major out x in
  std::vector<std::vector<double>> biases;
  Activation activation = Activation::Relu;
  double threshold = 0.0;

  double evaluate(std::span<const double> x) const;
  void validate() const;
};

MlpModel parse_mlp(std::istream& in);
MlpModel load_mlp(const std::string& path);
void write_mlp(std::ostream& out, const MlpModel& m);

class MlpOracle final : public DecisionOracle {
 public:
  explicit MlpOracle(MlpModel model, std::optional<double> grid = std::nullopt);
  Verdict decide(std::span<const double> p) override;
  OracleDescriptor descriptor() const override;
  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
  std::optional<double> grid_;
};

}  // namespace stealth
