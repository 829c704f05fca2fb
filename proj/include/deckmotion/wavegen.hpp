#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace deckmotion {

enum class Channel { heave = 0, pitch = 1, roll = 2 };

inline constexpr std::array<Channel, 3> kChannels = {Channel::heave, Channel::pitch, Channel::roll};

const char* channel_name(Channel c);

/// A (heave, pitch, roll) triple. Heave is in length units, pitch and roll
/// in inclination units.
using Motion = std::array<double, 3>;

struct SineComponent {
  double amplitude = 0.0;
  double omega = 0.0;  ///< angular frequency, rad/s
  double phase = 0.0;  ///< rad

  bool operator==(const SineComponent&) const = default;
};

class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-channel sine superposition. Channel value at t is
/// sum_k amplitude_k * sin(omega_k * t + phase_k).
struct WaveModel {
  std::string label;
  std::array<std::vector<SineComponent>, 3> channels;

  std::vector<SineComponent>& operator[](Channel c) { return channels[static_cast<int>(c)]; }
  const std::vector<SineComponent>& operator[](Channel c) const {
    return channels[static_cast<int>(c)];
  }

  /// Throws InvalidModel when a channel is empty or a component has a
  /// non-positive amplitude or frequency.
  void validate() const;

  /// Sum of the channel's component amplitudes; bounds |channel(t)|.
  double amplitude_sum(Channel c) const;

  bool operator==(const WaveModel&) const = default;
};

struct Range {
  double low = 0.0;
  double high = 0.0;

  bool contains_open(double x) const { return low < x && x < high; }
  bool operator==(const Range&) const = default;
};

struct ChannelSpec {
  Range amplitude_sum;  ///< bounds on the sum of component amplitudes
  Range period;         ///< seconds
  bool operator==(const ChannelSpec&) const = default;
};

/// Sea-state envelope driving the randomized generator.
struct SeaStateSpec {
  std::array<ChannelSpec, 3> channels;
  int components_per_channel = 4;

  const ChannelSpec& operator[](Channel c) const { return channels[static_cast<int>(c)]; }
  ChannelSpec& operator[](Channel c) { return channels[static_cast<int>(c)]; }

  void validate() const;
  bool operator==(const SeaStateSpec&) const = default;
};

/// Knox-class training model (phases 0).
WaveModel knox_training_model();

/// The representative sea-state-5 validation model (phases 0).
WaveModel sea_state5_reference_model();

/// Sea-state-5 envelope: amplitude-sum and period ranges per channel.
SeaStateSpec sea_state5_spec();

Motion evaluate_model(const WaveModel& model, double t);

/// Draws a model inside `spec`. Periods are uniform in the period range with
/// omega = 2*pi/T; amplitudes split a uniformly drawn total by weights drawn
/// from (0.5, 1.5). Phases are 0 unless `random_phases` is set.
WaveModel random_sea_state_model(const SeaStateSpec& spec, std::uint64_t seed,
                                 bool random_phases = false);

/// Empty list when `model` satisfies every range in `spec`, otherwise one
/// message per violated constraint.
std::vector<std::string> check_against_spec(const WaveModel& model, const SeaStateSpec& spec);

// JSON: {"label", "channels": {"heave"|"pitch"|"roll": [{"amplitude","omega","phase"}]}}
nlohmann::json to_json(const WaveModel& model);
WaveModel wave_model_from_json(const nlohmann::json& doc);

// JSON: {"components_per_channel", "heave"|"pitch"|"roll":
//        {"amplitude_sum_range": [lo, hi], "period_range": [lo, hi]}}
nlohmann::json to_json(const SeaStateSpec& spec);
SeaStateSpec sea_state_spec_from_json(const nlohmann::json& doc);

}  // namespace deckmotion
