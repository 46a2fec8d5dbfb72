#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hhfreak {

enum class SensorKind { temperature, frequency };

std::string_view to_string(SensorKind kind);
SensorKind parse_sensor_kind(std::string_view text); // throws ParseError

struct Sample {
  double t = 0.0; // seconds from trace start
  double value = 0.0;

  bool operator==(const Sample&) const = default;
};

// One channel of a recorded log. Channels are opaque identifiers
// (tz0...tz20, cpu1...cpu4, gpu, ...); no sensor mapping is attempted.
struct SensorTrace {
  std::string channel;
  SensorKind kind = SensorKind::temperature;
  std::vector<Sample> samples; // t strictly increasing

  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }

  // Throws std::invalid_argument on broken invariants: empty trace,
  // non-increasing time, temperature outside (-40, 150), negative
  // frequency.
  void validate() const;
};

struct RejectedRow {
  int line = 0; // 1-based line number in the source CSV
  std::string reason;
};

struct TraceParseResult {
  std::vector<SensorTrace> traces; // sorted by channel name
  std::vector<RejectedRow> rejected;
};

// CSV with header `t,channel,kind,value`. Rows may arrive in any
// order; samples are grouped by channel and time-sorted. Malformed
// rows (bad field count, unparsable numbers, unknown kind, value out
// of range) are skipped and reported with their line numbers. A
// missing header, duplicate timestamps within a channel, or one
// channel claiming two kinds throw ParseError.
TraceParseResult parse_trace(std::istream& source);
TraceParseResult parse_trace_file(const std::string& path);

struct StabilizationResult {
  double t_stable = 0.0;
  double mean_value = 0.0;
};

// Earliest sample time t with t + w inside the trace such that every
// sample in [t, t+w] lies within +-eps of the window mean. Requires a
// temperature trace and w > 0.
std::optional<StabilizationResult> stabilization_window(const SensorTrace& trace,
                                                        double eps = 0.5,
                                                        double w = 300.0);

struct StepEvent {
  std::string channel;
  double t = 0.0;
  double delta = 0.0; // signed value change

  bool operator==(const StepEvent&) const = default;
};

// Windowed-mean step detector: at each sample time t with both windows
// inside the trace, delta = mean over (t, t+w] minus mean over
// [t-w, t). |delta| >= min_delta raises a detection; detections within
// w of each other merge into one event at the earliest time carrying
// the cluster's largest-magnitude delta.
std::vector<StepEvent> detect_steps(const SensorTrace& trace, double min_delta,
                                    double w = 30.0);

// Conventional thresholds: 50 MHz for frequency, 0.5 degC for
// temperature.
double default_min_delta(SensorKind kind);

struct EventPair {
  StepEvent temp;
  StepEvent freq;
};

struct CorrelationResult {
  std::vector<EventPair> pairs;
  std::vector<StepEvent> unpaired_temp;
  std::vector<StepEvent> unpaired_freq;
};

// Greedy nearest-in-time pairing: repeatedly joins the closest
// remaining (temperature, frequency) pair no further than tol seconds
// apart. Ties prefer earlier events.
CorrelationResult correlate(std::vector<StepEvent> temp_events,
                            std::vector<StepEvent> freq_events, double tol);

struct AnalyzeParams {
  double stabilization_eps = 0.5;
  double stabilization_w = 300.0;
  double step_w = 30.0;
  double temp_min_delta = 0.5;
  double freq_min_delta = 50.0;
  double correlate_tol = 60.0;

  void validate() const;
};

struct AnalysisEvent {
  std::string event_type; // "stabilization" | "step"
  std::string channel;
  double t = 0.0;
  double delta = 0.0; // step height, or the stable mean for stabilization
};

struct TelemetryAnalysis {
  std::vector<AnalysisEvent> events; // deterministic order (see analyze)
  std::vector<StepEvent> temp_events;
  std::vector<StepEvent> freq_events;
  CorrelationResult correlation;
};

// Whole-log analysis: stabilization per temperature channel, step
// detection per channel, then temperature<->frequency correlation.
// Events are ordered by (channel, type, time).
TelemetryAnalysis analyze(const std::vector<SensorTrace>& traces,
                          const AnalyzeParams& params = {});

// Machine output: header `event_type,channel,t,delta`, one row per
// event. Returns bytes written.
std::size_t emit_events_csv(const std::vector<AnalysisEvent>& events,
                            std::ostream& sink);

// Human-readable companion to the CSV.
std::string analysis_summary(const TelemetryAnalysis& analysis);

} // namespace hhfreak
