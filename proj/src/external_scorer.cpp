#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <json.hpp>

#include "macrodt/error.hpp"
#include "macrodt/scorers.hpp"

namespace macrodt {

using json = nlohmann::json;

ExternalScorer::ExternalScorer(const std::string& command) : command_(command) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
    fail(ErrorKind::config, "external scorer: socketpair failed: " + std::string(std::strerror(errno)));

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    fail(ErrorKind::config, "external scorer: fork failed: " + std::string(std::strerror(errno)));
  }
  if (pid == 0) {
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  socket_ = fds[0];
  pid_ = pid;

  json reply;
  try {
    reply = json::parse(exchange(R"({"op":"capabilities"})"));
  } catch (const Error& e) {
    fail(ErrorKind::config, "external scorer '" + command_ + "' failed to start: " + e.what());
  } catch (const json::exception& e) {
    fail(ErrorKind::config, "external scorer '" + command_ + "': bad capabilities reply: " + e.what());
  }
  if (!reply.is_object() || !reply.contains("capabilities") || !reply["capabilities"].is_array())
    fail(ErrorKind::config, "external scorer '" + command_ + "': capabilities reply lacks a list");
  for (const auto& c : reply["capabilities"]) {
    if (!c.is_string()) continue;
    const auto name = c.get<std::string>();
    if (name == "segmentation") caps_.add(Capability::segmentation);
    if (name == "coherence") caps_.add(Capability::coherence);
    if (name == "pointer") caps_.add(Capability::pointer);
  }
}

ExternalScorer::~ExternalScorer() {
  if (socket_ >= 0) {
    ::shutdown(socket_, SHUT_WR);
    ::close(socket_);
  }
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

void ExternalScorer::protocol_error(const std::string& what) const {
  fail(ErrorKind::scorer, describe() + ": " + what);
}

std::string ExternalScorer::exchange(const std::string& request) {
  std::string out = request + "\n";
  size_t sent = 0;
  while (sent < out.size()) {
    const auto n = ::send(socket_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      protocol_error("write failed: " + std::string(std::strerror(errno)));
    }
    sent += static_cast<size_t>(n);
  }
  ++requests_;

  size_t newline;
  while ((newline = buffer_.find('\n')) == std::string::npos) {
    char chunk[4096];
    const auto n = ::recv(socket_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      protocol_error("read failed: " + std::string(std::strerror(errno)));
    }
    if (n == 0) protocol_error("process closed its output before replying");
    buffer_.append(chunk, static_cast<size_t>(n));
  }
  std::string line = buffer_.substr(0, newline);
  buffer_.erase(0, newline + 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (trace_) trace_(request, line);
  return line;
}

namespace {

json parse_reply(const std::string& line, const std::string& who) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorKind::scorer, who + ": malformed reply: " + e.what());
  }
  if (!reply.is_object()) fail(ErrorKind::scorer, who + ": reply is not an object");
  if (reply.contains("error"))
    fail(ErrorKind::scorer, who + ": " + reply["error"].dump());
  return reply;
}

json span_json(UnitSpan s) { return json::array({s.first, s.last}); }

std::map<int32_t, double> read_distribution(const json& reply, const char* key, const std::string& who) {
  auto it = reply.find(key);
  if (it == reply.end() || !it->is_object()) fail(ErrorKind::scorer, who + ": reply lacks object '" + key + "'");
  std::map<int32_t, double> out;
  for (const auto& [k, v] : it->items()) {
    int32_t b = 0;
    try {
      size_t used = 0;
      b = std::stoi(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::exception&) {
      fail(ErrorKind::scorer, who + ": non-integer boundary key '" + k + "'");
    }
    if (!v.is_number()) fail(ErrorKind::scorer, who + ": non-numeric score for boundary " + k);
    out[b] = v.get<double>();
  }
  return out;
}

}  // namespace

std::vector<double> ExternalScorer::do_seg_prob(const Document& doc) {
  json req = {{"op", "seg"}, {"doc_id", doc.id}, {"units", json::array()}};
  for (const auto& u : doc.units) req["units"].push_back(u.text);
  const auto reply = parse_reply(exchange(req.dump()), describe());
  auto it = reply.find("seg_prob");
  if (it == reply.end() || !it->is_array()) protocol_error("seg reply lacks 'seg_prob' array");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) protocol_error("seg reply holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

double ExternalScorer::do_coherence(const Document& doc, std::optional<UnitSpan> second, UnitSpan top,
                                    UnitSpan front) {
  json req = {{"op", "coherence"},
              {"doc_id", doc.id},
              {"stack_second", second ? span_json(*second) : json(nullptr)},
              {"stack_top", span_json(top)},
              {"queue_front", span_json(front)}};
  const auto reply = parse_reply(exchange(req.dump()), describe());
  auto it = reply.find("coherence");
  if (it == reply.end() || !it->is_number()) protocol_error("coherence reply lacks a number");
  return it->get<double>();
}

ActionDistribution ExternalScorer::do_pointer(const Document& doc, const DecoderState& state) {
  json req = {{"op", "pointer"},
              {"doc_id", doc.id},
              {"merged", state.merged},
              {"split", state.split_committed},
              {"unassigned", state.unassigned}};
  const auto reply = parse_reply(exchange(req.dump()), describe());
  ActionDistribution d;
  d.combine = read_distribution(reply, "combine", describe());
  d.split = read_distribution(reply, "split", describe());
  auto same_domain = [&](const std::map<int32_t, double>& m) {
    if (m.size() != state.unassigned.size()) return false;
    for (auto b : state.unassigned)
      if (!m.contains(b)) return false;
    return true;
  };
  if (!same_domain(d.combine) || !same_domain(d.split))
    protocol_error("pointer reply domain differs from the unassigned boundaries");
  return d;
}

}  // namespace macrodt
