#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "vsss/env.hpp"

namespace vsss {

// Wire error codes carried by error responses and ProtocolError.
namespace proto_code {
inline constexpr const char* kEpisodeDone = "EPISODE_DONE";
inline constexpr const char* kBadConfig = "BAD_CONFIG";
inline constexpr const char* kBadAction = "BAD_ACTION";
inline constexpr const char* kSeqMismatch = "SEQ_MISMATCH";
inline constexpr const char* kNoEpisode = "NO_EPISODE";
inline constexpr const char* kMalformed = "MALFORMED";
inline constexpr const char* kTruncated = "TRUNCATED_FRAME";
inline constexpr const char* kOversized = "OVERSIZED_FRAME";
inline constexpr const char* kInternal = "INTERNAL";
}  // namespace proto_code

inline constexpr std::size_t kMaxPayloadBytes = 1 << 20;  // 1 MiB
inline constexpr int kProtocolVersion = 1;

enum class MessageKind { kHello, kReset, kStep, kState, kError, kBye };

std::string_view to_string(MessageKind k);
MessageKind message_kind_from_string(std::string_view s);  // throws ProtocolError

// Envelope of every request/response. Requests carry a strictly increasing
// sequence number which the matching response echoes. The payload is UTF-8
// JSON with sorted keys; doubles travel as shortest round-trip decimals, so
// numeric state survives the wire bit-exactly.
struct ProtocolMessage {
  MessageKind kind = MessageKind::kHello;
  std::uint64_t seq = 0;
  std::string session;
  nlohmann::json body = nlohmann::json::object();

  bool operator==(const ProtocolMessage&) const = default;
};

// 4-byte little-endian payload length prefix, then the JSON payload.
std::vector<std::uint8_t> encode_frame(const ProtocolMessage& msg);
// Requires exactly one whole frame; throws ProtocolError with a decode code
// (TRUNCATED_FRAME / OVERSIZED_FRAME / MALFORMED) otherwise.
ProtocolMessage decode_frame(std::span<const std::uint8_t> bytes);

// Payload-only helpers used by the transport layers.
std::string encode_payload(const ProtocolMessage& msg);
ProtocolMessage decode_payload(std::string_view payload);

// JSON converters shared by client and server.
nlohmann::json action_to_json(const Action& action);
Action action_from_json(const nlohmann::json& j);  // throws ProtocolError(BAD_ACTION)
nlohmann::json reward_to_json(const RewardBreakdown& r);
RewardBreakdown reward_from_json(const nlohmann::json& j);
nlohmann::json step_result_to_json(const StepResult& r);
StepResult step_result_from_json(const nlohmann::json& j);

ProtocolMessage make_error_response(std::uint64_t seq, const std::string& session,
                                    const std::string& code, const std::string& message);

}  // namespace vsss
