#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stealth/errors.hpp"
#include "stealth/mlp.hpp"

using namespace stealth;

namespace {

const char* kTiny = R"(stealth-mlp v1
sizes 3 2 2 1
activation relu
threshold 0.5
# first hidden layer
W 2 2
1 -1
0.5 0.5
b 2
0 0.1
W 1 2
2 -1
b 1
0
)";

}  // namespace

TEST_CASE("parse and evaluate a hand-built network") {
  std::istringstream in(kTiny);
  const MlpModel m = parse_mlp(in);
  CHECK(m.sizes == std::vector<std::size_t>{2, 2, 1});
  CHECK(m.activation == Activation::Relu);
  // h = relu([x0 - x1, 0.5 x0 + 0.5 x1 + 0.1]); y = 2 h0 - h1
  const Vec x{0.9, 0.1};
  const double h0 = 0.8, h1 = 0.6;
  CHECK(m.evaluate(x) == doctest::Approx(2 * h0 - h1));
  MlpOracle o(m);
  CHECK(o.decide(x) == Verdict::Flagged);
  CHECK(o.decide(Vec{0.1, 0.9}) == Verdict::Safe);
  CHECK(o.descriptor().dimension == 2);
}

TEST_CASE("write then parse round-trips exactly") {
  std::istringstream in(kTiny);
  MlpModel m = parse_mlp(in);
  m.activation = Activation::Tanh;
  m.weights[0][0] = 0.1 + 1e-17 + 1.0 / 3;
  std::ostringstream out;
  write_mlp(out, m);
  std::istringstream back(out.str());
  const MlpModel r = parse_mlp(back);
  CHECK(r.weights == m.weights);
  CHECK(r.biases == m.biases);
  CHECK(r.activation == Activation::Tanh);
  CHECK(r.evaluate(Vec{0.3, 0.7}) == m.evaluate(Vec{0.3, 0.7}));
}

TEST_CASE("malformed files are rejected") {
  auto bad = [](std::string text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_mlp(in), ParameterError);
  };
  std::string s = kTiny;
  bad("not-a-model v1");
  bad(std::string(kTiny).replace(s.find("relu"), 4, "gelu"));
  bad(std::string(kTiny).replace(s.find("W 1 2"), 5, "W 1 3"));
  bad(std::string(kTiny) + "7\n");
  bad(std::string(kTiny).substr(0, s.find("b 1")));
  bad("stealth-mlp v1\nsizes 2 2 2\nactivation relu\nthreshold 0\nW 2 2\n1 0 0 1\nb 2\n0 0\n");
}
