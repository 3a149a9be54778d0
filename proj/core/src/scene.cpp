#include "holo/scene.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "holo/digest.hpp"
#include "holo/error.hpp"

namespace holo::scene {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kSimplexTolerance = 1e-6;

// std::map keeps keys sorted, so dump() is already canonical.
nlohmann::json weights_json(const Weights& w) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : w) j[k] = v;
  return j;
}

std::string content_canonical(const std::string& asset_id, const Weights& w) {
  nlohmann::json j;
  j["asset_id"] = asset_id;
  j["channels"] = weights_json(w);
  return j.dump();
}

}  // namespace

std::string_view to_string(EmotionClass c) noexcept {
  switch (c) {
    case EmotionClass::Angry: return "angry";
    case EmotionClass::Disgust: return "disgust";
    case EmotionClass::Fear: return "fear";
    case EmotionClass::Happy: return "happy";
    case EmotionClass::Sad: return "sad";
    case EmotionClass::Surprise: return "surprise";
    case EmotionClass::Neutral: return "neutral";
  }
  return "unknown";
}

std::string_view to_string(ResponseKind k) noexcept {
  switch (k) {
    case ResponseKind::Neutral: return "Neutral";
    case ResponseKind::Smile: return "Smile";
    case ResponseKind::SpeakReply: return "SpeakReply";
    case ResponseKind::Gaze: return "Gaze";
  }
  return "unknown";
}

EmotionDistribution::EmotionDistribution(
    const std::array<double, kEmotionCount>& probs)
    : probs_(probs) {
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error("scene.invalid_distribution",
                  "emotion probability outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw Error("scene.invalid_distribution",
                "emotion probabilities sum to " + std::to_string(sum));
  }
}

EmotionDistribution EmotionDistribution::one_hot(EmotionClass c) {
  std::array<double, kEmotionCount> p{};
  p[static_cast<std::size_t>(c)] = 1.0;
  return EmotionDistribution(p);
}

EmotionDistribution EmotionDistribution::uniform() {
  std::array<double, kEmotionCount> p{};
  p.fill(1.0 / static_cast<double>(kEmotionCount));
  return EmotionDistribution(p);
}

void UserStateVector::validate() const {
  const double qn = std::sqrt(orientation.w * orientation.w +
                              orientation.x * orientation.x +
                              orientation.y * orientation.y +
                              orientation.z * orientation.z);
  if (std::abs(qn - 1.0) > kUnitTolerance) {
    throw Error("scene.invalid_state", "orientation is not a unit quaternion");
  }
  const double gn =
      std::sqrt(gaze[0] * gaze[0] + gaze[1] * gaze[1] + gaze[2] * gaze[2]);
  if (std::abs(gn - 1.0) > kUnitTolerance) {
    throw Error("scene.invalid_state", "gaze is not a unit vector");
  }
  if (timestamp_ms < 0) {
    throw Error("scene.invalid_state", "negative timestamp");
  }
}

bool SceneLayer::empty() const noexcept {
  return std::all_of(blend_weights.begin(), blend_weights.end(),
                     [](const auto& kv) { return kv.second == 0.0; });
}

BaseScene::BaseScene(std::string asset_id,
                     const std::vector<std::string>& channels)
    : asset_id_(std::move(asset_id)) {
  for (const auto& c : channels) defaults_.emplace(c, 0.0);
  hash_ = sha256_hex(canonical());
}

BaseScene BaseScene::portrait(std::string asset_id) {
  return BaseScene(std::move(asset_id),
                   {std::string(kSmileChannel), std::string(kMouthOpenChannel),
                    std::string(kGazeFollowChannel)});
}

std::string BaseScene::canonical() const {
  return content_canonical(asset_id_, defaults_);
}

std::string ComposedView::content_digest() const {
  return sha256_hex(content_canonical(asset_id, effective_weights));
}

std::string ComposedView::serialize() const {
  nlohmann::json j;
  j["asset_id"] = asset_id;
  j["base_hash"] = base_hash;
  j["effective_weights"] = weights_json(effective_weights);
  j["user_id"] = user_id;
  return j.dump();
}

EmotionClass classify_emotion(const EmotionDistribution& dist) {
  const auto& p = dist.probs();
  // max_element returns the first maximum, which is the tie-break we want.
  const auto it = std::max_element(p.begin(), p.end());
  return static_cast<EmotionClass>(std::distance(p.begin(), it));
}

ResponseCommand map_response(EmotionClass emotion, bool has_audio,
                             double confidence, UserId user_id,
                             std::int64_t timestamp_ms) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw Error("scene.invalid_confidence", "confidence outside [0,1]");
  }
  ResponseCommand cmd{user_id, ResponseKind::Neutral, 0.0, timestamp_ms};
  if (has_audio) {
    cmd.kind = ResponseKind::SpeakReply;
    cmd.intensity = confidence;
  } else if (emotion == EmotionClass::Happy) {
    cmd.kind = ResponseKind::Smile;
    cmd.intensity = confidence;
  } else if (emotion == EmotionClass::Neutral) {
    cmd.kind = ResponseKind::Neutral;
  } else {
    cmd.kind = ResponseKind::Gaze;
    cmd.intensity = confidence;
  }
  return cmd;
}

ResponseCommand respond(const UserStateVector& state) {
  state.validate();
  const EmotionClass c = classify_emotion(state.emotion);
  return map_response(c, state.audio.has_value(), state.emotion[c],
                      state.user_id, state.timestamp_ms);
}

SceneLayer apply_command(const ResponseCommand& cmd) {
  if (!(cmd.intensity >= 0.0 && cmd.intensity <= 1.0)) {
    throw Error("scene.invalid_command", "intensity outside [0,1]");
  }
  SceneLayer layer{cmd.user_id, {}};
  switch (cmd.kind) {
    case ResponseKind::Smile:
      layer.blend_weights.emplace(kSmileChannel, cmd.intensity);
      break;
    case ResponseKind::SpeakReply:
      layer.blend_weights.emplace(kMouthOpenChannel, cmd.intensity);
      break;
    case ResponseKind::Gaze:
      layer.blend_weights.emplace(kGazeFollowChannel, cmd.intensity);
      break;
    case ResponseKind::Neutral:
      break;
  }
  return layer;
}

ComposedView compose_view(const BaseScene& base,
                          const std::optional<SceneLayer>& layer,
                          UserId viewer) {
  ComposedView view{viewer, base.asset_id(), base.channel_defaults(),
                    base.content_hash()};
  if (!layer) return view;
  if (layer->user_id != viewer) {
    throw Error("scene.isolation",
                "layer owned by user " + std::to_string(layer->user_id) +
                    " cannot be composed for user " + std::to_string(viewer));
  }
  for (const auto& [channel, weight] : layer->blend_weights) {
    auto it = view.effective_weights.find(channel);
    if (it == view.effective_weights.end()) {
      throw Error("scene.unknown_channel", "base has no channel " + channel);
    }
    if (!(weight >= 0.0 && weight <= 1.0)) {
      throw Error("scene.invalid_layer", "weight outside [0,1] for " + channel);
    }
    it->second = weight;
  }
  return view;
}

std::vector<ResponseCommand> resolve_latest(
    const std::vector<ResponseCommand>& commands) {
  std::map<UserId, ResponseCommand> latest;
  for (const auto& c : commands) {
    auto [it, inserted] = latest.try_emplace(c.user_id, c);
    if (!inserted && c.timestamp_ms >= it->second.timestamp_ms) it->second = c;
  }
  std::vector<ResponseCommand> out;
  out.reserve(latest.size());
  for (auto& [id, c] : latest) out.push_back(c);
  return out;
}

}  // namespace holo::scene
