#include "deckmotion/wavegen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "deckmotion/rng.hpp"

namespace deckmotion {

namespace {

std::vector<SineComponent> zero_phase(std::initializer_list<std::pair<double, double>> terms) {
  std::vector<SineComponent> out;
  for (const auto& [amplitude, omega] : terms) out.push_back({amplitude, omega, 0.0});
  return out;
}

Range range_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InvalidModel(std::string(what) + " must be a [low, high] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::heave: return "heave";
    case Channel::pitch: return "pitch";
    case Channel::roll: return "roll";
  }
  return "?";
}

void WaveModel::validate() const {
  for (Channel c : kChannels) {
    const auto& comps = (*this)[c];
    if (comps.empty())
      throw InvalidModel(std::string("channel ") + channel_name(c) + " has no components");
    for (const auto& s : comps) {
      if (!(s.amplitude > 0.0) || !std::isfinite(s.amplitude))
        throw InvalidModel(std::string("non-positive amplitude in ") + channel_name(c));
      if (!(s.omega > 0.0) || !std::isfinite(s.omega))
        throw InvalidModel(std::string("non-positive frequency in ") + channel_name(c));
      if (!std::isfinite(s.phase))
        throw InvalidModel(std::string("non-finite phase in ") + channel_name(c));
    }
  }
}

double WaveModel::amplitude_sum(Channel c) const {
  double sum = 0.0;
  for (const auto& s : (*this)[c]) sum += s.amplitude;
  return sum;
}

void SeaStateSpec::validate() const {
  if (components_per_channel < 1) throw InvalidModel("components_per_channel must be >= 1");
  for (Channel c : kChannels) {
    const auto& cs = (*this)[c];
    for (const Range& r : {cs.amplitude_sum, cs.period}) {
      if (!(r.low > 0.0 && r.low < r.high) || !std::isfinite(r.high))
        throw InvalidModel(std::string("inverted or non-positive range for ") + channel_name(c));
    }
  }
}

WaveModel knox_training_model() {
  WaveModel m;
  m.label = "knox";
  m[Channel::heave] = zero_phase({{0.2172, 0.4}, {0.4714, 0.5}, {0.3592, 0.6}, {0.2227, 0.7}});
  m[Channel::pitch] =
      zero_phase({{0.005, 0.46}, {0.00946, 0.58}, {0.00725, 0.7}, {0.00845, 0.82}});
  m[Channel::roll] = zero_phase({{0.021, 0.46}, {0.0431, 0.54}, {0.029, 0.62}, {0.022, 0.67}});
  return m;
}

WaveModel sea_state5_reference_model() {
  WaveModel m;
  m.label = "seastate5";
  m[Channel::heave] = zero_phase({{0.25, 0.785}, {0.35, 0.9}, {0.45, 1.1}, {0.5, 1.256}});
  m[Channel::pitch] = zero_phase({{0.35, 0.8}, {0.45, 0.85}, {0.55, 0.95}, {0.625, 1.156}});
  m[Channel::roll] = zero_phase({{2.6, 0.483}, {1.8, 0.5}, {2.5, 0.6}, {3.0, 0.785}});
  return m;
}

SeaStateSpec sea_state5_spec() {
  SeaStateSpec spec;
  spec[Channel::heave] = {{1.0, 1.9}, {5.0, 8.0}};
  spec[Channel::pitch] = {{1.3, 2.5}, {5.0, 8.0}};
  spec[Channel::roll] = {{6.3, 12.0}, {8.0, 13.0}};
  spec.components_per_channel = 4;
  return spec;
}

Motion evaluate_model(const WaveModel& model, double t) {
  Motion out{};
  for (Channel c : kChannels) {
    double sum = 0.0;
    for (const auto& s : model[c]) sum += s.amplitude * std::sin(s.omega * t + s.phase);
    out[static_cast<int>(c)] = sum;
  }
  return out;
}

WaveModel random_sea_state_model(const SeaStateSpec& spec, std::uint64_t seed,
                                 bool random_phases) {
  spec.validate();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Rng rng(seed);
  WaveModel model;
  model.label = "random-seed-" + std::to_string(seed);
  const auto n = static_cast<std::size_t>(spec.components_per_channel);

  for (Channel c : kChannels) {
    const ChannelSpec& cs = spec[c];
    std::vector<SineComponent> comps(n);

    for (auto& comp : comps) {
      // 2*pi/(2*pi/T) can round back onto a boundary for T within an ulp of it.
      do {
        comp.omega = two_pi / rng.uniform(cs.period.low, cs.period.high);
      } while (!cs.period.contains_open(two_pi / comp.omega));
    }

    std::vector<double> weights(n);
    for (;;) {
      double weight_sum = 0.0;
      for (auto& w : weights) {
        w = rng.uniform(0.5, 1.5);
        weight_sum += w;
      }
      const double total = rng.uniform(cs.amplitude_sum.low, cs.amplitude_sum.high);
      double realized = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        comps[k].amplitude = weights[k] * total / weight_sum;
        realized += comps[k].amplitude;
      }
      if (cs.amplitude_sum.contains_open(realized)) break;
    }

    if (random_phases)
      for (auto& comp : comps) comp.phase = two_pi * rng.unit();

    model[c] = std::move(comps);
  }
  return model;
}

std::vector<std::string> check_against_spec(const WaveModel& model, const SeaStateSpec& spec) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::string> violations;
  for (Channel c : kChannels) {
    const auto& comps = model[c];
    const ChannelSpec& cs = spec[c];
    if (comps.size() != static_cast<std::size_t>(spec.components_per_channel)) {
      violations.push_back(std::string(channel_name(c)) + ": component count " +
                           std::to_string(comps.size()));
    }
    const double sum = model.amplitude_sum(c);
    if (!cs.amplitude_sum.contains_open(sum)) {
      std::ostringstream os;
      os << channel_name(c) << ": amplitude sum " << sum << " outside (" << cs.amplitude_sum.low
         << ", " << cs.amplitude_sum.high << ")";
      violations.push_back(os.str());
    }
    for (std::size_t k = 0; k < comps.size(); ++k) {
      const double period = two_pi / comps[k].omega;
      if (!cs.period.contains_open(period)) {
        std::ostringstream os;
        os << channel_name(c) << "[" << k << "]: period " << period << " outside ("
           << cs.period.low << ", " << cs.period.high << ")";
        violations.push_back(os.str());
      }
    }
  }
  return violations;
}

nlohmann::json to_json(const WaveModel& model) {
  nlohmann::json channels = nlohmann::json::object();
  for (Channel c : kChannels) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : model[c])
      list.push_back({{"amplitude", s.amplitude}, {"omega", s.omega}, {"phase", s.phase}});
    channels[channel_name(c)] = std::move(list);
  }
  return {{"label", model.label}, {"channels", std::move(channels)}};
}

WaveModel wave_model_from_json(const nlohmann::json& doc) {
  WaveModel model;
  try {
    model.label = doc.value("label", std::string{});
    const auto& channels = doc.at("channels");
    for (Channel c : kChannels) {
      for (const auto& item : channels.at(channel_name(c))) {
        model[c].push_back({item.at("amplitude").get<double>(), item.at("omega").get<double>(),
                            item.value("phase", 0.0)});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel(std::string("malformed wave model: ") + e.what());
  }
  model.validate();
  return model;
}

nlohmann::json to_json(const SeaStateSpec& spec) {
  nlohmann::json doc = {{"components_per_channel", spec.components_per_channel}};
  for (Channel c : kChannels) {
    const auto& cs = spec[c];
    doc[channel_name(c)] = {
        {"amplitude_sum_range", {cs.amplitude_sum.low, cs.amplitude_sum.high}},
        {"period_range", {cs.period.low, cs.period.high}}};
  }
  return doc;
}

SeaStateSpec sea_state_spec_from_json(const nlohmann::json& doc) {
  SeaStateSpec spec;
  try {
    spec.components_per_channel = doc.value("components_per_channel", 4);
    for (Channel c : kChannels) {
      const auto& ch = doc.at(channel_name(c));
      spec[c].amplitude_sum = range_from_json(ch.at("amplitude_sum_range"), "amplitude_sum_range");
      spec[c].period = range_from_json(ch.at("period_range"), "period_range");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel(std::string("malformed sea-state spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace deckmotion
