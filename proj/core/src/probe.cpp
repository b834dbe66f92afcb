#include "m2m/probe.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <ctime>
#include <sstream>

namespace m2m {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'M', '2', 'M', 'P'};

void put_u64(std::uint8_t* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<std::uint8_t>(v & 0xFFU);
    v >>= 8;
  }
}

std::uint64_t get_u64(const std::uint8_t* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

// Signed halving, rounding to nearest with ties away from zero.
Nanos half_rounded(Nanos twice) {
  return twice >= 0 ? (twice + 1) / 2 : -((-twice + 1) / 2);
}

}  // namespace

ProbeBytes encode_probe(const ProbePacket& packet) {
  ProbeBytes out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = kProbeVersion;
  out[5] = static_cast<std::uint8_t>(packet.kind);
  out[6] = static_cast<std::uint8_t>(packet.seq >> 8);
  out[7] = static_cast<std::uint8_t>(packet.seq & 0xFFU);
  put_u64(out.data() + 8, static_cast<std::uint64_t>(packet.t1));
  put_u64(out.data() + 16, static_cast<std::uint64_t>(packet.t2));
  put_u64(out.data() + 24, static_cast<std::uint64_t>(packet.t3));
  return out;
}

std::optional<ProbePacket> decode_probe(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kProbePacketSize) return std::nullopt;
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) return std::nullopt;
  if (bytes[4] != kProbeVersion || bytes[5] > 1) return std::nullopt;
  for (std::size_t i = 32; i < kProbePacketSize; ++i) {
    if (bytes[i] != 0) return std::nullopt;
  }
  ProbePacket p;
  p.kind = static_cast<ProbeKind>(bytes[5]);
  p.seq = static_cast<std::uint16_t>((bytes[6] << 8) | bytes[7]);
  p.t1 = static_cast<Nanos>(get_u64(bytes.data() + 8));
  p.t2 = static_cast<Nanos>(get_u64(bytes.data() + 16));
  p.t3 = static_cast<Nanos>(get_u64(bytes.data() + 24));
  return p;
}

ProbeEstimate probe_offset(Nanos t1, Nanos t2, Nanos t3, Nanos t4) {
  if (t4 < t1 || t3 < t2) throw Error(ErrorCode::NegativeRtt, "timestamps out of order");
  ProbeEstimate e;
  e.rtt_ns = (t4 - t1) - (t3 - t2);
  if (e.rtt_ns < 0) throw Error(ErrorCode::NegativeRtt, "negative round-trip time");
  e.offset_ns = half_rounded((t2 - t1) + (t3 - t4));
  return e;
}

bool ProbeAggregator::add(std::uint16_t seq, Nanos t1, Nanos t2, Nanos t3, Nanos t4) {
  ProbeExchange ex{seq, t1, t2, t3, t4, std::nullopt};
  try {
    ex.estimate = probe_offset(t1, t2, t3, t4);
  } catch (const Error&) {
    // kept for reporting, excluded from aggregates
  }
  const bool ok = ex.estimate.has_value();
  std::lock_guard lock(mu_);
  exchanges_.push_back(ex);
  return ok;
}

std::vector<ProbeExchange> ProbeAggregator::snapshot() const {
  std::lock_guard lock(mu_);
  return exchanges_;
}

ProbeSummary ProbeAggregator::summary() const {
  const auto all = snapshot();
  ProbeSummary s;
  std::vector<Nanos> offsets;
  std::vector<Nanos> rtts;
  for (const auto& ex : all) {
    if (!ex.estimate) {
      ++s.rejected;
      continue;
    }
    ++s.completed;
    offsets.push_back(ex.estimate->offset_ns);
    rtts.push_back(ex.estimate->rtt_ns);
    if (!s.min_rtt || ex.estimate->rtt_ns < s.min_rtt->rtt_ns) s.min_rtt = ex.estimate;
  }
  if (!offsets.empty()) {
    s.offset_stats = summarize(offsets);
    s.rtt_stats = summarize(rtts);
  }
  return s;
}

std::string write_probe_csv(std::span<const ProbeExchange> exchanges) {
  std::ostringstream out;
  out << "seq,t1_ns,t2_ns,t3_ns,t4_ns,offset_ns,rtt_ns,status\n";
  for (const auto& ex : exchanges) {
    out << ex.seq << ',' << ex.t1 << ',' << ex.t2 << ',' << ex.t3 << ',' << ex.t4 << ',';
    if (ex.estimate) out << ex.estimate->offset_ns << ',' << ex.estimate->rtt_ns << ",ok\n";
    else out << ",,negative_rtt\n";
  }
  return out.str();
}

Nanos realtime_now_ns() {
  timespec ts{};
  clock_gettime(CLOCK_REALTIME, &ts);
  return static_cast<Nanos>(ts.tv_sec) * kNanosPerSecond + ts.tv_nsec;
}

std::optional<ProbeBytes> answer_probe(std::span<const std::uint8_t> request, Nanos t2, const ClockFn& clock) {
  auto req = decode_probe(request);
  if (!req || req->kind != ProbeKind::Request) return std::nullopt;
  ProbePacket resp = *req;
  resp.kind = ProbeKind::Response;
  resp.t2 = t2;
  resp.t3 = clock();
  return encode_probe(resp);
}

LoopbackProbeHarness::LoopbackProbeHarness(Nanos remote_offset_ns, Nanos outbound_delay_ns, Nanos return_delay_ns,
                                           Nanos remote_processing_ns)
    : remote_offset_ns_(remote_offset_ns),
      outbound_delay_ns_(outbound_delay_ns),
      return_delay_ns_(return_delay_ns),
      remote_processing_ns_(remote_processing_ns) {}

ProbeExchange LoopbackProbeHarness::exchange(std::uint16_t seq, Nanos t1, ProbeAggregator& sink) const {
  const auto request = encode_probe({ProbeKind::Request, seq, t1, 0, 0});
  const Nanos arrive_local = t1 + outbound_delay_ns_;
  const Nanos depart_local = arrive_local + remote_processing_ns_;
  const auto response = answer_probe(request, arrive_local + remote_offset_ns_,
                                     [&] { return depart_local + remote_offset_ns_; });
  const auto decoded = decode_probe(*response);
  const Nanos t4 = depart_local + return_delay_ns_;
  sink.add(decoded->seq, decoded->t1, decoded->t2, decoded->t3, t4);
  return sink.snapshot().back();
}

Endpoint Endpoint::parse(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorCode::ConfigInvalid, "expected host:port, got '" + text + "'");
  }
  Endpoint ep;
  ep.host = text.substr(0, colon);
  try {
    const auto port = std::stoul(text.substr(colon + 1));
    if (port > 65535) throw std::out_of_range("port");
    ep.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "bad port in '" + text + "'");
  }
  return ep;
}

namespace {

sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  const int rc = getaddrinfo(ep.host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) throw Error(ErrorCode::Io, "cannot resolve '" + ep.host + "'");
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof(addr));
  freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

class Socket {
 public:
  Socket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
  }
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

bool wait_readable(int fd, std::chrono::milliseconds timeout) {
  pollfd pfd{fd, POLLIN, 0};
  return ::poll(&pfd, 1, static_cast<int>(timeout.count())) > 0 && (pfd.revents & POLLIN);
}

}  // namespace

UdpProbeResponder::UdpProbeResponder(const Endpoint& listen, ClockFn clock) : clock_(std::move(clock)) {
  Socket sock;
  const auto addr = resolve(listen);
  if (::bind(sock.get(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    throw Error(ErrorCode::Io, std::string("bind: ") + std::strerror(errno));
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(sock.get(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  fd_ = sock.release();
  worker_ = std::thread([this] { loop(); });
}

UdpProbeResponder::~UdpProbeResponder() {
  stop();
  if (fd_ >= 0) ::close(fd_);
}

void UdpProbeResponder::stop() {
  running_ = false;
  if (worker_.joinable()) worker_.join();
}

void UdpProbeResponder::loop() {
  std::array<std::uint8_t, 512> buf{};
  while (running_) {
    if (!wait_readable(fd_, std::chrono::milliseconds(50))) continue;
    sockaddr_in from{};
    socklen_t from_len = sizeof(from);
    const auto n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &from_len);
    const Nanos t2 = clock_();
    if (n <= 0) continue;
    auto response = answer_probe(std::span(buf.data(), static_cast<std::size_t>(n)), t2, clock_);
    if (!response) continue;
    ++answered_;
    ::sendto(fd_, response->data(), response->size(), 0, reinterpret_cast<const sockaddr*>(&from), from_len);
  }
}

std::size_t run_probe_client(const Endpoint& peer, const ProbeClientOptions& options, ProbeAggregator& sink,
                             const ClockFn& clock) {
  Socket sock;
  const auto addr = resolve(peer);
  std::size_t timeouts = 0;
  std::array<std::uint8_t, 512> buf{};
  for (std::size_t i = 0; i < options.count; ++i) {
    if (i > 0) std::this_thread::sleep_for(options.interval);
    const auto seq = static_cast<std::uint16_t>(i & 0xFFFFU);
    const Nanos t1 = clock();
    const auto request = encode_probe({ProbeKind::Request, seq, t1, 0, 0});
    if (::sendto(sock.get(), request.data(), request.size(), 0, reinterpret_cast<const sockaddr*>(&addr),
                 sizeof(addr)) < 0) {
      throw Error(ErrorCode::Io, std::string("sendto: ") + std::strerror(errno));
    }
    bool answered = false;
    const auto deadline = std::chrono::steady_clock::now() + options.timeout;
    while (!answered) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0 || !wait_readable(sock.get(), left)) break;
      const auto n = ::recv(sock.get(), buf.data(), buf.size(), 0);
      const Nanos t4 = clock();
      if (n <= 0) continue;
      auto resp = decode_probe(std::span(buf.data(), static_cast<std::size_t>(n)));
      // Late answers to earlier requests are dropped.
      if (!resp || resp->kind != ProbeKind::Response || resp->seq != seq || resp->t1 != t1) continue;
      sink.add(seq, resp->t1, resp->t2, resp->t3, t4);
      answered = true;
    }
    if (!answered) ++timeouts;
  }
  return timeouts;
}

}  // namespace m2m
