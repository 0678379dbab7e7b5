#include "mqtt.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <openssl/ssl.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

namespace rnode::v2x::mqtt {

std::vector<std::uint8_t> encode_remaining_length(std::uint32_t len) {
  std::vector<std::uint8_t> out;
  do {
    std::uint8_t byte = len % 128;
    len /= 128;
    if (len > 0) byte |= 0x80;
    out.push_back(byte);
  } while (len > 0);
  return out;
}

namespace {

void append_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x >> 8));
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
}

void append_string(std::vector<std::uint8_t>& v, const std::string& s) {
  append_u16(v, static_cast<std::uint16_t>(s.size()));
  v.insert(v.end(), s.begin(), s.end());
}

std::vector<std::uint8_t> with_header(std::uint8_t type_flags,
                                      const std::vector<std::uint8_t>& body) {
  std::vector<std::uint8_t> out{type_flags};
  auto rl = encode_remaining_length(static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), rl.begin(), rl.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace

std::vector<std::uint8_t> make_connect_packet(const std::string& client_id,
                                              std::uint16_t keepalive_s) {
  std::vector<std::uint8_t> body;
  append_string(body, "MQTT");
  body.push_back(0x04);  // protocol level 3.1.1
  body.push_back(0x02);  // clean session
  append_u16(body, keepalive_s);
  append_string(body, client_id);
  return with_header(0x10, body);
}

std::vector<std::uint8_t> make_publish_packet(const std::string& topic,
                                              const std::string& payload) {
  std::vector<std::uint8_t> body;
  append_string(body, topic);  // QoS 0: no packet identifier
  body.insert(body.end(), payload.begin(), payload.end());
  return with_header(0x30, body);
}

std::vector<std::uint8_t> make_disconnect_packet() { return {0xe0, 0x00}; }

bool is_connack_ok(const std::vector<std::uint8_t>& buf) {
  return buf.size() >= 4 && buf[0] == 0x20 && buf[1] == 0x02 && buf[3] == 0x00;
}

MqttTransport::~MqttTransport() { close(); }

void MqttTransport::close() {
  if (ssl_) {
    SSL_shutdown(static_cast<SSL*>(ssl_));
    SSL_free(static_cast<SSL*>(ssl_));
    ssl_ = nullptr;
  }
  if (ssl_ctx_) {
    SSL_CTX_free(static_cast<SSL_CTX*>(ssl_ctx_));
    ssl_ctx_ = nullptr;
  }
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

bool MqttTransport::ensure_connected() {
  if (fd_ >= 0) return true;

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(cfg_.host.c_str(), std::to_string(cfg_.port).c_str(), &hints, &res) != 0)
    return false;
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    timeval tv{cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000};
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) return false;
  fd_ = fd;

  if (cfg_.use_tls) {
    SSL_CTX* ctx = SSL_CTX_new(TLS_client_method());
    if (!ctx) {
      close();
      return false;
    }
    SSL_CTX_set_min_proto_version(ctx, TLS1_2_VERSION);
    if (!cfg_.ca_file.empty())
      SSL_CTX_load_verify_locations(ctx, cfg_.ca_file.c_str(), nullptr);
    if (!cfg_.cert_file.empty() && !cfg_.key_file.empty()) {
      SSL_CTX_use_certificate_file(ctx, cfg_.cert_file.c_str(), SSL_FILETYPE_PEM);
      SSL_CTX_use_PrivateKey_file(ctx, cfg_.key_file.c_str(), SSL_FILETYPE_PEM);
    }
    SSL* ssl = SSL_new(ctx);
    SSL_set_fd(ssl, fd_);
    if (SSL_connect(ssl) != 1) {
      SSL_free(ssl);
      SSL_CTX_free(ctx);
      close();
      return false;
    }
    ssl_ctx_ = ctx;
    ssl_ = ssl;
  }

  auto send_all = [&](const std::vector<std::uint8_t>& buf) {
    if (ssl_) return SSL_write(static_cast<SSL*>(ssl_), buf.data(),
                               static_cast<int>(buf.size())) == static_cast<int>(buf.size());
    return ::send(fd_, buf.data(), buf.size(), 0) == static_cast<ssize_t>(buf.size());
  };
  if (!send_all(make_connect_packet(cfg_.client_id))) {
    close();
    return false;
  }
  std::vector<std::uint8_t> ack(4);
  ssize_t n = ssl_ ? SSL_read(static_cast<SSL*>(ssl_), ack.data(), 4)
                   : ::recv(fd_, ack.data(), 4, 0);
  if (n < 4 || !is_connack_ok(ack)) {
    close();
    return false;
  }
  return true;
}

Receipt MqttTransport::deliver(const std::string& topic, const std::string& payload,
                               std::int64_t t_publish, std::int64_t /*event_id*/) {
  Receipt r;
  r.t_publish = t_publish;
  for (int attempt = 1; attempt <= 3; ++attempt) {
    r.attempts = attempt;
    if (!ensure_connected()) continue;
    auto pkt = make_publish_packet(topic, payload);
    bool ok = ssl_ ? SSL_write(static_cast<SSL*>(ssl_), pkt.data(),
                               static_cast<int>(pkt.size())) == static_cast<int>(pkt.size())
                   : ::send(fd_, pkt.data(), pkt.size(), 0) ==
                         static_cast<ssize_t>(pkt.size());
    if (!ok) {
      close();
      continue;
    }
    auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
    r.t_broker = now;
    r.t_endpoint = now;
    r.delivered = true;
    return r;
  }
  r.delivered = false;
  return r;
}

}  // namespace rnode::v2x::mqtt
