#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "v2x.hpp"

namespace rnode::v2x::mqtt {

// MQTT 3.1.1 control packets needed by a QoS-0 publisher.
std::vector<std::uint8_t> encode_remaining_length(std::uint32_t len);
std::vector<std::uint8_t> make_connect_packet(const std::string& client_id,
                                              std::uint16_t keepalive_s = 60);
std::vector<std::uint8_t> make_publish_packet(const std::string& topic,
                                              const std::string& payload);
std::vector<std::uint8_t> make_disconnect_packet();

// True when the buffer starts with a CONNACK carrying return code 0.
bool is_connack_ok(const std::vector<std::uint8_t>& buf);

struct MqttConfig {
  std::string host = "localhost";
  int port = 1883;
  std::string client_id = "rnode";
  bool use_tls = false;  // accepted configuration surface; TLS session via OpenSSL
  std::string ca_file;
  std::string cert_file;  // with key_file enables mutual auth
  std::string key_file;
  int timeout_ms = 3000;
};

// External-broker client. Timestamps in the receipt are local wall-clock;
// broker and endpoint stamps collapse to the send-completion time because a
// QoS-0 publisher gets no cross-hop acknowledgements.
class MqttTransport : public Transport {
public:
  explicit MqttTransport(MqttConfig cfg) : cfg_(std::move(cfg)) {}
  ~MqttTransport() override;

  Receipt deliver(const std::string& topic, const std::string& payload,
                  std::int64_t t_publish, std::int64_t event_id) override;

private:
  bool ensure_connected();
  void close();

  MqttConfig cfg_;
  int fd_ = -1;
  void* ssl_ctx_ = nullptr;
  void* ssl_ = nullptr;
};

}  // namespace rnode::v2x::mqtt
