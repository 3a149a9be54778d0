#pragma once

// User state, emotion-to-response mapping and base-plus-layer scene
// composition. Everything here is an immutable value; all functions are pure.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holo::scene {

using UserId = std::uint32_t;
using Vec3 = std::array<double, 3>;

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline constexpr std::size_t kEmotionCount = 7;

/// Fixed class order: angry, disgust, fear, happy, sad, surprise, neutral.
enum class EmotionClass : std::uint8_t {
  Angry = 0,
  Disgust,
  Fear,
  Happy,
  Sad,
  Surprise,
  Neutral,
};

std::string_view to_string(EmotionClass c) noexcept;

/// Probability vector over the seven classes. The constructor enforces the
/// simplex invariant (entries in [0,1], sum within 1e-6 of one).
class EmotionDistribution {
 public:
  explicit EmotionDistribution(const std::array<double, kEmotionCount>& probs);

  static EmotionDistribution one_hot(EmotionClass c);
  static EmotionDistribution uniform();

  const std::array<double, kEmotionCount>& probs() const noexcept {
    return probs_;
  }
  double operator[](EmotionClass c) const noexcept {
    return probs_[static_cast<std::size_t>(c)];
  }

 private:
  std::array<double, kEmotionCount> probs_;
};

struct AudioClip {
  std::uint32_t sample_rate_hz = 16000;
  std::vector<std::int16_t> samples;
};

/// Per-user perceptual state: position, orientation, gaze, emotion, optional
/// audio and a timestamp in ms since scenario start.
struct UserStateVector {
  UserId user_id = 0;
  Vec3 position{};
  Quaternion orientation{};
  Vec3 gaze{0.0, 0.0, 1.0};
  EmotionDistribution emotion = EmotionDistribution::uniform();
  std::optional<AudioClip> audio;
  std::int64_t timestamp_ms = 0;

  /// Throws holo::Error("scene.invalid_state") when orientation or gaze are
  /// not unit length within 1e-6 or the timestamp is negative.
  void validate() const;
};

enum class ResponseKind : std::uint8_t { Neutral = 0, Smile = 1, SpeakReply = 2, Gaze = 3 };

std::string_view to_string(ResponseKind k) noexcept;

struct ResponseCommand {
  UserId user_id = 0;
  ResponseKind kind = ResponseKind::Neutral;
  double intensity = 0.0;
  std::int64_t timestamp_ms = 0;

  bool operator==(const ResponseCommand&) const = default;
};

/// Named blend-shape channels used by the portrait.
inline constexpr std::string_view kSmileChannel = "smile";
inline constexpr std::string_view kMouthOpenChannel = "mouth_open";
inline constexpr std::string_view kGazeFollowChannel = "gaze_follow";

using Weights = std::map<std::string, double, std::less<>>;

struct SceneLayer {
  UserId user_id = 0;
  Weights blend_weights;

  /// True when every weight is exactly zero (or there are none).
  bool empty() const noexcept;
};

/// The shared object every user sees. Channel defaults are all zero and the
/// content hash is fixed at construction.
class BaseScene {
 public:
  BaseScene(std::string asset_id, const std::vector<std::string>& channels);

  /// Portrait base with the smile / mouth_open / gaze_follow channels.
  static BaseScene portrait(std::string asset_id = "mona_lisa");

  const std::string& asset_id() const noexcept { return asset_id_; }
  const Weights& channel_defaults() const noexcept { return defaults_; }
  const std::string& content_hash() const noexcept { return hash_; }

  /// Canonical key-sorted JSON text that the hash is computed over.
  std::string canonical() const;

 private:
  std::string asset_id_;
  Weights defaults_;
  std::string hash_;
};

struct ComposedView {
  UserId user_id = 0;
  std::string asset_id;
  Weights effective_weights;
  std::string base_hash;

  /// Digest of the visible content (asset and weights) in the same canonical
  /// form as BaseScene, so an unpersonalized view hashes to the base hash.
  std::string content_digest() const;

  /// Full canonical serialization including the viewer and base hash.
  std::string serialize() const;
};

/// Argmax with ties broken toward the lowest class index.
EmotionClass classify_emotion(const EmotionDistribution& dist);

/// Total mapping from (class, audio present, confidence) to a command.
/// Audio presence wins over every class; happy smiles; neutral stays neutral;
/// the rest turn into a gaze response. Throws on confidence outside [0,1].
ResponseCommand map_response(EmotionClass emotion, bool has_audio,
                             double confidence, UserId user_id = 0,
                             std::int64_t timestamp_ms = 0);

/// Convenience: classify the state's emotion and map it, using the winning
/// probability as confidence.
ResponseCommand respond(const UserStateVector& state);

SceneLayer apply_command(const ResponseCommand& cmd);

/// Overlays `layer` on the base defaults for `viewer`. Throws
/// holo::Error("scene.isolation") when the layer belongs to someone else and
/// "scene.unknown_channel" when it names a channel the base lacks.
ComposedView compose_view(const BaseScene& base,
                          const std::optional<SceneLayer>& layer,
                          UserId viewer);

/// Latest timestamp wins per user; on equal timestamps the later entry wins.
/// Result is ordered by user id.
std::vector<ResponseCommand> resolve_latest(
    const std::vector<ResponseCommand>& commands);

}  // namespace holo::scene
