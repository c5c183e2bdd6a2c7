#pragma once

// Newline-delimited JSON over TCP.
//   handshake: {"hello": v}            -> {"dim": d, "grid": g|null, "protocol_version": v}
//   query:     {"id": n, "x": [...]}   -> {"id": n, "flagged": bool}
//   error:                                {"id": n, "error": "..."}

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

#include "stealth/oracle.hpp"

namespace stealth {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  static Endpoint parse(const std::string& s);  // "host:port"
  std::string str() const;
};

// Buffered line I/O over a connected socket. Owns the descriptor.
class LineSocket {
 public:
  explicit LineSocket(int fd) : fd_(fd) {}
  ~LineSocket();
  LineSocket(const LineSocket&) = delete;
  LineSocket& operator=(const LineSocket&) = delete;
  LineSocket(LineSocket&& o) noexcept : fd_(o.fd_), buf_(std::move(o.buf_)) { o.fd_ = -1; }

  void send_line(const std::string& line);
  // False on orderly EOF before any byte of a new line.
  bool read_line(std::string& line);

 private:
  int fd_;
  std::string buf_;
};

class RemoteOracle final : public DecisionOracle {
 public:
  RemoteOracle(LineSocket sock, OracleDescriptor desc);
  Verdict decide(std::span<const double> p) override;
  OracleDescriptor descriptor() const override { return desc_; }

 private:
  LineSocket sock_;
  OracleDescriptor desc_;
  std::uint64_t next_id_ = 1;
};

struct RemoteConnection {
  std::unique_ptr<RemoteOracle> oracle;
  OracleDescriptor descriptor;
};

/// Throws ConnectionError when the endpoint is unreachable and ProtocolError
/// on a version mismatch or a malformed handshake.
RemoteConnection connect_remote(const Endpoint& endpoint);

// Serves one DecisionOracle on a TCP port. Connections are handled one at a
// time; requests on a connection are answered in order.
class OracleServer {
 public:
  // port 0 picks an ephemeral port; see port().
  OracleServer(DecisionOracle& oracle, std::uint16_t port = 0, const std::string& host = "127.0.0.1");
  ~OracleServer();
  OracleServer(const OracleServer&) = delete;
  OracleServer& operator=(const OracleServer&) = delete;

  std::uint16_t port() const { return port_; }
  void start();       // background thread
  void serve_forever();  // blocks
  void stop();

  // Exposed for tests: one request line in, one reply line out.
  std::string handle_line(const std::string& line);

 private:
  void serve_connection(int fd);

  DecisionOracle& oracle_;
  OracleDescriptor desc_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

}  // namespace stealth
