#include "vsss/protocol.hpp"

#include <cmath>

#include "vsss/error.hpp"

namespace vsss {

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::kHello: return "hello";
    case MessageKind::kReset: return "reset";
    case MessageKind::kStep: return "step";
    case MessageKind::kState: return "state";
    case MessageKind::kError: return "error";
    case MessageKind::kBye: return "bye";
  }
  return "unknown";
}

MessageKind message_kind_from_string(std::string_view s) {
  if (s == "hello") return MessageKind::kHello;
  if (s == "reset") return MessageKind::kReset;
  if (s == "step") return MessageKind::kStep;
  if (s == "state") return MessageKind::kState;
  if (s == "error") return MessageKind::kError;
  if (s == "bye") return MessageKind::kBye;
  throw ProtocolError(proto_code::kMalformed, "unknown message kind '" + std::string(s) + "'");
}

std::string encode_payload(const ProtocolMessage& msg) {
  const nlohmann::json j{
      {"body", msg.body},
      {"kind", std::string(to_string(msg.kind))},
      {"seq", msg.seq},
      {"session", msg.session},
  };
  return j.dump();
}

ProtocolMessage decode_payload(std::string_view payload) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(proto_code::kMalformed, std::string("payload is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError(proto_code::kMalformed, "payload must be an object");
  ProtocolMessage msg;
  try {
    msg.kind = message_kind_from_string(j.at("kind").get<std::string>());
    msg.seq = j.at("seq").get<std::uint64_t>();
    msg.session = j.at("session").get<std::string>();
    msg.body = j.at("body");
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(proto_code::kMalformed, std::string("bad envelope: ") + e.what());
  }
  if (!msg.body.is_object()) {
    throw ProtocolError(proto_code::kMalformed, "body must be an object");
  }
  return msg;
}

std::vector<std::uint8_t> encode_frame(const ProtocolMessage& msg) {
  const std::string payload = encode_payload(msg);
  if (payload.size() > kMaxPayloadBytes) {
    throw ProtocolError(proto_code::kOversized,
                        "payload of " + std::to_string(payload.size()) + " bytes exceeds cap");
  }
  std::vector<std::uint8_t> out;
  out.reserve(4 + payload.size());
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ProtocolMessage decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw ProtocolError(proto_code::kTruncated, "frame shorter than its length prefix");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  if (len > kMaxPayloadBytes) {
    throw ProtocolError(proto_code::kOversized,
                        "frame announces " + std::to_string(len) + " bytes");
  }
  if (bytes.size() < 4 + static_cast<std::size_t>(len)) {
    throw ProtocolError(proto_code::kTruncated, "frame payload truncated");
  }
  if (bytes.size() > 4 + static_cast<std::size_t>(len)) {
    throw ProtocolError(proto_code::kMalformed, "trailing bytes after frame");
  }
  return decode_payload(
      std::string_view(reinterpret_cast<const char*>(bytes.data() + 4), len));
}

nlohmann::json action_to_json(const Action& action) {
  if (const auto* c = std::get_if<ActionContinuous>(&action)) {
    return {{"mode", "continuous"}, {"v", c->v}, {"omega", c->omega}};
  }
  const auto& d = std::get<ActionDiscrete>(action);
  return {{"mode", "discrete"}, {"index", d.index}};
}

Action action_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError(proto_code::kBadAction, "action must be an object");
  const std::string mode = j.value("mode", "");
  if (mode == "continuous") {
    if (!j.contains("v") || !j.contains("omega") || !j["v"].is_number() ||
        !j["omega"].is_number()) {
      throw ProtocolError(proto_code::kBadAction, "continuous action needs numeric v and omega");
    }
    const double v = j["v"].get<double>();
    const double omega = j["omega"].get<double>();
    if (!std::isfinite(v) || !std::isfinite(omega)) {
      throw ProtocolError(proto_code::kBadAction, "action components must be finite");
    }
    return ActionContinuous{v, omega};
  }
  if (mode == "discrete") {
    if (!j.contains("index") || !j["index"].is_number_integer()) {
      throw ProtocolError(proto_code::kBadAction, "discrete action needs an integer index");
    }
    return ActionDiscrete{j["index"].get<int>()};
  }
  throw ProtocolError(proto_code::kBadAction, "action mode must be continuous|discrete");
}

nlohmann::json reward_to_json(const RewardBreakdown& r) {
  return {{"goal", r.goal},
          {"ball_potential", r.ball_potential},
          {"robot_ball_potential", r.robot_ball_potential},
          {"energy_penalty", r.energy_penalty},
          {"total", r.total}};
}

RewardBreakdown reward_from_json(const nlohmann::json& j) {
  RewardBreakdown r;
  try {
    r.goal = j.at("goal").get<double>();
    r.ball_potential = j.at("ball_potential").get<double>();
    r.robot_ball_potential = j.at("robot_ball_potential").get<double>();
    r.energy_penalty = j.at("energy_penalty").get<double>();
    r.total = j.at("total").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(proto_code::kMalformed, std::string("bad reward payload: ") + e.what());
  }
  return r;
}

nlohmann::json step_result_to_json(const StepResult& r) {
  nlohmann::json info = nlohmann::json::object();
  for (const auto& [k, v] : r.info) info[k] = v;
  return {{"observation", r.observation.features},
          {"reward", reward_to_json(r.reward)},
          {"done", r.done},
          {"done_reason", r.done_reason
                              ? nlohmann::json(std::string(to_string(*r.done_reason)))
                              : nlohmann::json(nullptr)},
          {"info", info}};
}

StepResult step_result_from_json(const nlohmann::json& j) {
  StepResult r;
  try {
    r.observation.features = j.at("observation").get<std::vector<double>>();
    r.reward = reward_from_json(j.at("reward"));
    r.done = j.at("done").get<bool>();
    if (!j.at("done_reason").is_null()) {
      const auto reason = done_reason_from_string(j.at("done_reason").get<std::string>());
      if (!reason) throw ProtocolError(proto_code::kMalformed, "unknown done_reason");
      r.done_reason = reason;
    }
    for (const auto& [k, v] : j.at("info").items()) r.info[k] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(proto_code::kMalformed, std::string("bad state payload: ") + e.what());
  }
  return r;
}

ProtocolMessage make_error_response(std::uint64_t seq, const std::string& session,
                                    const std::string& code, const std::string& message) {
  ProtocolMessage msg;
  msg.kind = MessageKind::kError;
  msg.seq = seq;
  msg.session = session;
  msg.body = {{"code", code}, {"message", message}};
  return msg;
}

}  // namespace vsss
