#include "symchaos/symbolic.hpp"

#include <algorithm>
#include <sstream>

namespace symchaos {

const char* to_string(PartitionVariant variant) {
  switch (variant) {
    case PartitionVariant::LorenzFlipFlop: return "lorenz_flipflop";
    case PartitionVariant::RosslerZThreshold: return "rossler_threshold";
    case PartitionVariant::RosslerMinMax: return "rossler_minmax";
  }
  return "?";
}

double resolve_threshold(const PartitionSpec& spec, const RosslerParams<double>& params) {
  if (spec.threshold_mode == ThresholdMode::Fixed) return spec.z_threshold;
  if (params.a == 0.0) throw DomainError("relative threshold undefined for a = 0");
  return 0.1 * (params.c - params.a * params.b) / params.a;
}

Channel partition_channel(const PartitionSpec& spec) {
  return spec.variant == PartitionVariant::LorenzFlipFlop ? Channel::X : Channel::Z;
}

SymbolEncoder::SymbolEncoder(const PartitionSpec& spec, const RosslerParams<double>& rossler)
    : variant_(spec.variant) {
  if (variant_ != PartitionVariant::LorenzFlipFlop) threshold_ = resolve_threshold(spec, rossler);
}

std::optional<std::uint8_t> SymbolEncoder::operator()(const CriticalEvent& e) const {
  switch (variant_) {
    case PartitionVariant::LorenzFlipFlop:
      // One symbol per revolution: outer turning points only.
      if (e.kind == ExtremumKind::Max && e.value > 0) return 1;
      if (e.kind == ExtremumKind::Min && e.value < 0) return 0;
      return std::nullopt;
    case PartitionVariant::RosslerZThreshold:
      if (e.kind == ExtremumKind::Min) return std::nullopt;
      if (e.value > threshold_) return 1;
      if (e.value < threshold_) return 0;
      return std::nullopt;
    case PartitionVariant::RosslerMinMax:
      if (e.kind == ExtremumKind::Min) return 0;
      if (e.value > threshold_) return 1;
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

SymbolSequence encode_with(std::span<const CriticalEvent> events, const SymbolEncoder& encoder,
                           std::string meta, bool count_all_dropped) {
  SymbolSequence seq;
  seq.source_meta = std::move(meta);
  seq.bits.reserve(events.size());
  for (const auto& e : events) {
    if (auto bit = encoder(e)) {
      seq.bits.push_back(*bit);
    } else if (count_all_dropped || e.value == encoder.threshold()) {
      ++seq.dropped_boundary;
    }
  }
  return seq;
}

}  // namespace

SymbolSequence encode_lorenz(std::span<const CriticalEvent> events, const PartitionSpec& spec) {
  if (spec.variant != PartitionVariant::LorenzFlipFlop)
    throw ConfigError("encode_lorenz requires the lorenz_flipflop partition");
  return encode_with(events, SymbolEncoder(spec), "partition=lorenz_flipflop", false);
}

SymbolSequence encode_rossler_threshold(std::span<const CriticalEvent> events, const PartitionSpec& spec,
                                        const RosslerParams<double>& params) {
  if (spec.variant == PartitionVariant::LorenzFlipFlop)
    throw ConfigError("encode_rossler_threshold requires a rossler partition");
  SymbolEncoder encoder(spec, params);
  std::ostringstream meta;
  meta.precision(17);
  meta << "partition=" << to_string(spec.variant) << ";z_th=" << encoder.threshold();
  return encode_with(events, encoder, meta.str(), false);
}

Eigen::Index smoothing_radius(const SmoothingConfig& cfg) {
  return std::max<Eigen::Index>(1, Eigen::Index(cfg.passes) * (cfg.window / 2));
}

std::vector<CriticalEvent> detect_events(const Eigen::Ref<const Eigen::VectorXd>& signal, double t0, double dt,
                                         Channel channel, const SymbolPipeline& pipeline) {
  if (pipeline.detection == EventDetection::DerivativeZero) return derivative_zero_events(signal, t0, dt, channel);
  const Eigen::VectorXd smoothed = smooth(signal, pipeline.smoothing);
  auto maxima = find_peaks(smoothed, pipeline.peaks, ExtremumKind::Max, t0, dt, channel);
  auto minima = find_peaks(smoothed, pipeline.peaks, ExtremumKind::Min, t0, dt, channel);
  if (pipeline.raw_values) {
    const Eigen::Index radius = smoothing_radius(pipeline.smoothing);
    maxima = snap_to_raw(signal, maxima, radius, t0, dt);
    minima = snap_to_raw(signal, minima, radius, t0, dt);
  }
  std::vector<CriticalEvent> events;
  events.reserve(maxima.size() + minima.size());
  events.insert(events.end(), maxima.begin(), maxima.end());
  events.insert(events.end(), minima.begin(), minima.end());
  std::stable_sort(events.begin(), events.end(),
                   [](const CriticalEvent& a, const CriticalEvent& b) { return a.index < b.index; });
  return events;
}

SymbolSequence encode_events(std::span<const CriticalEvent> events, const PartitionSpec& spec,
                             const RosslerParams<double>& params) {
  if (spec.variant == PartitionVariant::LorenzFlipFlop) return encode_lorenz(events, spec);
  return encode_rossler_threshold(events, spec, params);
}

SymbolSequence extract_symbols(const Trajectory<double>& traj, const SymbolPipeline& pipeline) {
  const Channel channel = partition_channel(pipeline.partition);
  if (traj.size() < 3) throw DomainError("extract_symbols: trajectory shorter than 3 samples");
  const auto events = detect_events(traj.samples.col(int(channel)), traj.t0, traj.dt, channel, pipeline);
  return encode_events(events, pipeline.partition, traj.model.rossler);
}

std::string to_string(std::span<const std::uint8_t> bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

std::vector<std::uint8_t> parse_bits(std::string_view text) {
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') {
      throw DomainError("malformed sequence character at byte offset " + std::to_string(i));
    }
    bits.push_back(c == '1');
  }
  return bits;
}

}  // namespace symchaos
