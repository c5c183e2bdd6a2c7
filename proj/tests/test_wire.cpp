#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <functional>
#include <random>
#include <thread>

#include <json.hpp>

#include "fixtures.hpp"
#include "stealth/attacks.hpp"
#include "stealth/errors.hpp"
#include "stealth/wire.hpp"

using namespace stealth;
using nlohmann::json;

namespace {

// One-connection server answering each request line with script(line).
class ScriptedServer {
 public:
  explicit ScriptedServer(std::function<std::string(const std::string&)> script)
      : script_(std::move(script)) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    REQUIRE(::listen(fd_, 1) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] {
      const int c = ::accept(fd_, nullptr, nullptr);
      if (c < 0) return;
      LineSocket sock(c);
      std::string line;
      try {
        while (sock.read_line(line)) sock.send_line(script_(line));
      } catch (const ConnectionError&) {
      }
    });
  }
  ~ScriptedServer() {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    thread_.join();
  }
  Endpoint endpoint() const { return {"127.0.0.1", port_}; }

 private:
  std::function<std::string(const std::string&)> script_;
  int fd_;
  std::uint16_t port_;
  std::thread thread_;
};

std::string hello_reply(std::size_t dim, std::optional<double> grid) {
  return json{{"dim", dim}, {"grid", grid ? json(*grid) : json()}, {"protocol_version", 1}}.dump();
}

}  // namespace

TEST_CASE("handshake carries dim and grid") {
  ScriptedServer srv([](const std::string&) { return hello_reply(4, 1.0 / 255); });
  auto conn = connect_remote(srv.endpoint());
  CHECK(conn.descriptor.dimension == 4);
  REQUIRE(conn.descriptor.quantization_grid.has_value());
  CHECK(*conn.descriptor.quantization_grid == doctest::Approx(1.0 / 255));
  CHECK(conn.oracle->descriptor().dimension == 4);
}

TEST_CASE("reply with an unknown id is a protocol error") {
  ScriptedServer srv([](const std::string& line) {
    const json req = json::parse(line);
    if (req.contains("hello")) return hello_reply(2, std::nullopt);
    return json{{"id", req["id"].get<std::uint64_t>() + 100}, {"flagged", true}}.dump();
  });
  auto conn = connect_remote(srv.endpoint());
  CHECK_THROWS_AS(conn.oracle->decide(Vec{0.1, 0.2}), ProtocolError);
}

TEST_CASE("malformed handshakes are protocol errors") {
  for (std::string bad : {std::string("not json"), std::string(R"({"dim":3})"),
                          std::string(R"({"dim":3,"protocol_version":2})"),
                          std::string(R"({"dim":0,"protocol_version":1})"),
                          std::string(R"({"dim":3,"grid":0.3,"protocol_version":1})")}) {
    ScriptedServer srv([bad](const std::string&) { return bad; });
    CHECK_THROWS_AS(connect_remote(srv.endpoint()), ProtocolError);
  }
}

TEST_CASE("unreachable endpoint is a connection error") {
  std::uint16_t port;
  {
    LinearOracle lin(Vec{1.0}, -0.5);
    OracleServer tmp(lin);
    port = tmp.port();
  }
  CHECK_THROWS_AS(connect_remote({"127.0.0.1", port}), ConnectionError);
  CHECK_THROWS_AS(Endpoint::parse("nohostport"), ParameterError);
}

TEST_CASE("remote linear oracle agrees with the local one on 100 random points") {
  std::mt19937_64 rng(21);
  const auto inst = fixtures::linear_instance(16, 3);
  auto local = inst.oracle();
  auto served = inst.oracle();
  OracleServer server(served);
  server.start();
  auto conn = connect_remote({"127.0.0.1", server.port()});
  CHECK(conn.descriptor.dimension == 16);
  CHECK_FALSE(conn.descriptor.quantization_grid.has_value());
  int flagged = 0;
  for (int i = 0; i < 100; ++i) {
    // Points spread around the boundary so both verdicts occur.
    const Point p = clip_unit(axpy(inst.x, std::uniform_real_distribution<double>(0, 0.6)(rng),
                                   unit_gaussian(16, rng)));
    const Verdict v = local.decide(p);
    flagged += v == Verdict::Flagged;
    CHECK(conn.oracle->decide(p) == v);
  }
  CHECK(flagged > 0);
  CHECK(flagged < 100);
  server.stop();
}

TEST_CASE("server rejects off-grid and malformed requests") {
  LinearOracle lin(Vec{1, 1}, -1.0, true, 1.0 / 255);
  OracleServer server(lin);
  auto err = [&](const std::string& line) { return json::parse(server.handle_line(line)); };
  const json hello = err(R"({"hello":1})");
  CHECK(hello["dim"] == 2);
  CHECK(hello["grid"].get<double>() == doctest::Approx(1.0 / 255));
  CHECK(err(R"({"id":5,"x":[0.5,0.5]})").contains("error"));
  CHECK(err(R"({"id":5,"x":[0.5,0.5]})")["id"] == 5);
  const json ok = err(json{{"id", 6}, {"x", {128.0 / 255, 200.0 / 255}}}.dump());
  CHECK(ok["flagged"] == true);
  CHECK(err(R"({"id":7,"x":[0.5]})").contains("error"));
  CHECK(err("garbage").contains("error"));
  CHECK(err(R"({"x":[0,0]})").contains("error"));

  // Through the client, the error reply surfaces as a protocol error.
  server.start();
  auto conn = connect_remote({"127.0.0.1", server.port()});
  CHECK(conn.oracle->decide(Vec{128.0 / 255, 0.0}) == Verdict::Safe);
  CHECK_THROWS_AS(conn.oracle->decide(Vec{0.5, 0.5}), ProtocolError);
  server.stop();
}

TEST_CASE("attacking a served oracle reproduces the native trace") {
  const auto inst = fixtures::linear_instance(12, 5);
  auto native = inst.oracle();
  auto served = inst.oracle();
  OracleServer server(served);
  server.start();
  auto conn = connect_remote({"127.0.0.1", server.port()});
  AttackConfig cfg;
  cfg.flagged_budget = 60;
  cfg.rng_seed = 3;
  for (const char* name : {"rays", "stealthy-hsja"}) {
    cfg.norm = find_attack(name).norms.front();
    cfg.strategy = std::string(name) == "stealthy-hsja"
                       ? std::optional(SearchStrategy::line(1e-2)) : std::nullopt;
    const auto a = find_attack(name).fn(native, inst.x, cfg);
    const auto b = find_attack(name).fn(*conn.oracle, inst.x, cfg);
    CHECK(a.events == b.events);
    CHECK(a.summary.ledger == b.summary.ledger);
  }
  server.stop();
}
