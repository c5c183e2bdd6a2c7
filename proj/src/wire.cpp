#include "stealth/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <json.hpp>
#include <unordered_set>

#include "stealth/errors.hpp"

namespace stealth {

using nlohmann::json;

Endpoint Endpoint::parse(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw ParameterError("endpoint must be host:port, got '" + s + "'");
  Endpoint e;
  e.host = s.substr(0, colon);
  const auto port = std::stol(s.substr(colon + 1));
  if (port < 0 || port > 65535) throw ParameterError("port out of range in '" + s + "'");
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

std::string Endpoint::str() const { return host + ":" + std::to_string(port); }

LineSocket::~LineSocket() {
  if (fd_ >= 0) ::close(fd_);
}

void LineSocket::send_line(const std::string& line) {
  std::string out = line;
  out.push_back('\n');
  std::size_t sent = 0;
  while (sent < out.size()) {
    const ssize_t n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool LineSocket::read_line(std::string& line) {
  for (;;) {
    if (auto nl = buf_.find('\n'); nl != std::string::npos) {
      line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      return true;
    }
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ConnectionError(std::string("recv failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      if (buf_.empty()) return false;
      throw ConnectionError("connection closed mid-line");
    }
    buf_.append(chunk, static_cast<std::size_t>(n));
  }
}

namespace {

json parse_reply(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    throw ProtocolError("malformed JSON reply", line);
  }
  if (!j.is_object()) throw ProtocolError("reply is not a JSON object", line);
  return j;
}

std::string read_reply(LineSocket& sock) {
  std::string line;
  if (!sock.read_line(line)) throw ConnectionError("server closed the connection");
  return line;
}

int tcp_connect(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const auto port = std::to_string(ep.port);
  if (int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ConnectionError("cannot resolve " + ep.str() + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ConnectionError("cannot connect to " + ep.str());
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace

RemoteOracle::RemoteOracle(LineSocket sock, OracleDescriptor desc)
    : sock_(std::move(sock)), desc_(desc) {}

Verdict RemoteOracle::decide(std::span<const double> p) {
  const std::uint64_t id = next_id_++;
  json req = {{"id", id}, {"x", std::vector<double>(p.begin(), p.end())}};
  sock_.send_line(req.dump());
  const std::string line = read_reply(sock_);
  const json rep = parse_reply(line);
  if (!rep.contains("id") || !rep["id"].is_number_unsigned() || rep["id"].get<std::uint64_t>() != id) {
    throw ProtocolError("reply id does not match request id " + std::to_string(id), line);
  }
  if (rep.contains("error")) throw ProtocolError("server reported an error", line);
  if (!rep.contains("flagged") || !rep["flagged"].is_boolean()) {
    throw ProtocolError("reply lacks a boolean 'flagged' field", line);
  }
  return rep["flagged"].get<bool>() ? Verdict::Flagged : Verdict::Safe;
}

RemoteConnection connect_remote(const Endpoint& endpoint) {
  LineSocket sock(tcp_connect(endpoint));
  sock.send_line(json{{"hello", kProtocolVersion}}.dump());
  const std::string line = read_reply(sock);
  const json rep = parse_reply(line);
  if (!rep.contains("protocol_version") || !rep["protocol_version"].is_number_integer()) {
    throw ProtocolError("handshake lacks protocol_version", line);
  }
  if (rep["protocol_version"].get<int>() != kProtocolVersion) {
    throw ProtocolError("protocol version mismatch (client speaks " +
                            std::to_string(kProtocolVersion) + ")",
                        line);
  }
  if (!rep.contains("dim") || !rep["dim"].is_number_unsigned() || rep["dim"].get<std::size_t>() == 0) {
    throw ProtocolError("handshake lacks a positive 'dim'", line);
  }
  OracleDescriptor desc;
  desc.dimension = rep["dim"].get<std::size_t>();
  desc.protocol_version = kProtocolVersion;
  if (rep.contains("grid") && !rep["grid"].is_null()) {
    if (!rep["grid"].is_number()) throw ProtocolError("handshake 'grid' is not a number", line);
    try {
      (void)grid_levels(rep["grid"].get<double>());
    } catch (const ParameterError&) {
      throw ProtocolError("handshake 'grid' does not divide 1", line);
    }
    desc.quantization_grid = rep["grid"].get<double>();
  }
  auto oracle = std::make_unique<RemoteOracle>(std::move(sock), desc);
  return {std::move(oracle), desc};
}

OracleServer::OracleServer(DecisionOracle& oracle, std::uint16_t port, const std::string& host)
    : oracle_(oracle), desc_(oracle.descriptor()) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ConnectionError("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw ParameterError("server host must be an IPv4 address, got '" + host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 8) != 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw ConnectionError("cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

OracleServer::~OracleServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void OracleServer::start() {
  running_ = true;
  thread_ = std::thread([this] { serve_forever(); });
}

void OracleServer::stop() {
  running_ = false;
  if (thread_.joinable()) thread_.join();
}

void OracleServer::serve_forever() {
  running_ = true;
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    if (::poll(&pfd, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    serve_connection(fd);
  }
}

void OracleServer::serve_connection(int fd) {
  LineSocket sock(fd);
  std::unordered_set<std::uint64_t> seen;
  try {
    std::string line;
    while (running_) {
      pollfd pfd{fd, POLLIN, 0};
      if (::poll(&pfd, 1, 100) <= 0) continue;
      if (!sock.read_line(line)) return;
      std::string reply = handle_line(line);
      // Reject reused ids on this connection.
      try {
        const json req = json::parse(line);
        if (req.is_object() && req.contains("id") && req["id"].is_number_unsigned()) {
          const auto id = req["id"].get<std::uint64_t>();
          if (!seen.insert(id).second) {
            reply = json{{"id", id}, {"error", "duplicate id"}}.dump();
          }
        }
      } catch (const json::exception&) {
      }
      sock.send_line(reply);
    }
  } catch (const ConnectionError&) {
    // client went away
  }
}

std::string OracleServer::handle_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception&) {
    return json{{"id", nullptr}, {"error", "malformed JSON"}}.dump();
  }
  if (!req.is_object()) return json{{"id", nullptr}, {"error", "request is not an object"}}.dump();
  if (req.contains("hello")) {
    json rep = {{"dim", desc_.dimension}, {"protocol_version", kProtocolVersion}};
    rep["grid"] = desc_.quantization_grid ? json(*desc_.quantization_grid) : json(nullptr);
    return rep.dump();
  }
  const json id = req.contains("id") ? req["id"] : json(nullptr);
  if (!id.is_number_unsigned()) return json{{"id", id}, {"error", "missing or invalid id"}}.dump();
  if (!req.contains("x") || !req["x"].is_array()) {
    return json{{"id", id}, {"error", "missing x"}}.dump();
  }
  std::vector<double> x;
  try {
    x = req["x"].get<std::vector<double>>();
  } catch (const json::exception&) {
    return json{{"id", id}, {"error", "x must be an array of numbers"}}.dump();
  }
  if (x.size() != desc_.dimension) return json{{"id", id}, {"error", "dimension mismatch"}}.dump();
  if (desc_.quantization_grid && !on_grid(x, *desc_.quantization_grid)) {
    return json{{"id", id}, {"error", "off-grid input"}}.dump();
  }
  try {
    const Verdict v = oracle_.decide(x);
    return json{{"id", id}, {"flagged", v == Verdict::Flagged}}.dump();
  } catch (const std::exception& e) {
    return json{{"id", id}, {"error", std::string("model error: ") + e.what()}}.dump();
  }
}

}  // namespace stealth
