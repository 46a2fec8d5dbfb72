#include "hhfreak/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hhfreak/errors.hpp"
#include "numfmt.hpp"

namespace hhfreak {

std::string_view to_string(SensorKind kind) {
  return kind == SensorKind::temperature ? "temperature" : "frequency";
}

SensorKind parse_sensor_kind(std::string_view text) {
  if (text == "temperature") return SensorKind::temperature;
  if (text == "frequency") return SensorKind::frequency;
  throw ParseError("unknown sensor kind '" + std::string(text) + "'");
}

void SensorTrace::validate() const {
  if (channel.empty())
    throw std::invalid_argument("trace: empty channel name");
  if (samples.empty())
    throw std::invalid_argument("trace " + channel + ": no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (i > 0 && !(s.t > samples[i - 1].t))
      throw std::invalid_argument("trace " + channel + ": time not strictly increasing");
    if (kind == SensorKind::temperature) {
      if (!(s.value > -40.0 && s.value < 150.0))
        throw std::invalid_argument("trace " + channel + ": temperature out of range");
    } else if (!(s.value >= 0.0)) {
      throw std::invalid_argument("trace " + channel + ": negative frequency");
    }
  }
}

namespace {

bool value_in_range(SensorKind kind, double v) {
  return kind == SensorKind::temperature ? (v > -40.0 && v < 150.0) : v >= 0.0;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  // from_chars rejects leading '+'; the traces in the wild use it.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

} // namespace

TraceParseResult parse_trace(std::istream& source) {
  std::string line;
  if (!std::getline(source, line))
    throw ParseError("trace CSV: empty input, expected header t,channel,kind,value");
  if (trim(line) != "t,channel,kind,value")
    throw ParseError("trace CSV: missing header t,channel,kind,value");

  struct Builder {
    SensorKind kind;
    int kind_line = 0;
    std::vector<Sample> samples;
  };
  std::map<std::string, Builder> builders;
  TraceParseResult result;

  int lineno = 1;
  while (std::getline(source, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty()) continue;
    auto fields = split_csv(sv);
    if (fields.size() != 4) {
      result.rejected.push_back({lineno, "expected 4 fields, got " +
                                             std::to_string(fields.size())});
      continue;
    }
    auto t = parse_number(trim(fields[0]));
    if (!t) {
      result.rejected.push_back({lineno, "bad time '" + std::string(trim(fields[0])) + "'"});
      continue;
    }
    std::string channel(trim(fields[1]));
    if (channel.empty()) {
      result.rejected.push_back({lineno, "empty channel"});
      continue;
    }
    SensorKind kind;
    try {
      kind = parse_sensor_kind(trim(fields[2]));
    } catch (const ParseError&) {
      result.rejected.push_back({lineno, "unknown kind '" + std::string(trim(fields[2])) + "'"});
      continue;
    }
    auto value = parse_number(trim(fields[3]));
    if (!value) {
      result.rejected.push_back({lineno, "bad value '" + std::string(trim(fields[3])) + "'"});
      continue;
    }
    if (!value_in_range(kind, *value)) {
      result.rejected.push_back({lineno, "value out of range for " +
                                             std::string(to_string(kind))});
      continue;
    }

    auto [it, inserted] = builders.try_emplace(channel);
    if (inserted) {
      it->second.kind = kind;
      it->second.kind_line = lineno;
    } else if (it->second.kind != kind) {
      throw ParseError("trace CSV line " + std::to_string(lineno) + ": channel '" +
                       channel + "' changes kind (first declared on line " +
                       std::to_string(it->second.kind_line) + ")");
    }
    it->second.samples.push_back({*t, *value});
  }

  for (auto& [channel, b] : builders) {
    std::stable_sort(b.samples.begin(), b.samples.end(),
                     [](const Sample& a, const Sample& c) { return a.t < c.t; });
    for (std::size_t i = 1; i < b.samples.size(); ++i) {
      if (b.samples[i].t == b.samples[i - 1].t)
        throw ParseError("trace CSV: channel '" + channel +
                         "' has duplicate timestamp t=" +
                         detail::format_double(b.samples[i].t));
    }
    SensorTrace trace;
    trace.channel = channel;
    trace.kind = b.kind;
    trace.samples = std::move(b.samples);
    trace.validate();
    result.traces.push_back(std::move(trace));
  }
  return result;
}

TraceParseResult parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path);
  return parse_trace(in);
}

std::optional<StabilizationResult> stabilization_window(const SensorTrace& trace,
                                                        double eps, double w) {
  if (trace.kind != SensorKind::temperature)
    throw std::invalid_argument("stabilization_window: temperature trace required");
  if (!(w > 0.0))
    throw std::invalid_argument("stabilization_window: w must be positive");
  if (!(eps >= 0.0))
    throw std::invalid_argument("stabilization_window: eps must be non-negative");
  trace.validate();

  const auto& s = trace.samples;
  std::size_t hi = 0; // one past the last sample inside [t, t+w]
  for (std::size_t lo = 0; lo < s.size(); ++lo) {
    const double t0 = s[lo].t;
    if (t0 + w > trace.t_end()) break; // window must fit inside the trace
    if (hi < lo + 1) hi = lo + 1;
    while (hi < s.size() && s[hi].t <= t0 + w) ++hi;

    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += s[i].value;
    const double mean = sum / static_cast<double>(hi - lo);
    bool ok = true;
    for (std::size_t i = lo; i < hi; ++i) {
      if (std::abs(s[i].value - mean) > eps) {
        ok = false;
        break;
      }
    }
    if (ok) return StabilizationResult{t0, mean};
  }
  return std::nullopt;
}

double default_min_delta(SensorKind kind) {
  return kind == SensorKind::frequency ? 50.0 : 0.5;
}

std::vector<StepEvent> detect_steps(const SensorTrace& trace, double min_delta,
                                    double w) {
  if (!(w > 0.0))
    throw std::invalid_argument("detect_steps: w must be positive");
  if (!(min_delta > 0.0))
    throw std::invalid_argument("detect_steps: min_delta must be positive");
  trace.validate();

  const auto& s = trace.samples;
  struct Raw {
    double t;
    double delta;
  };
  std::vector<Raw> raw;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s[i].t;
    if (t - w < trace.t_begin() || t + w > trace.t_end()) continue;

    double before_sum = 0.0, after_sum = 0.0;
    int before_n = 0, after_n = 0;
    for (std::size_t j = i; j-- > 0;) {
      if (s[j].t < t - w) break;
      before_sum += s[j].value;
      ++before_n;
    }
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[j].t > t + w) break;
      after_sum += s[j].value;
      ++after_n;
    }
    if (before_n == 0 || after_n == 0) continue;
    const double delta = after_sum / after_n - before_sum / before_n;
    if (std::abs(delta) >= min_delta) raw.push_back({t, delta});
  }

  // Merge chains of detections closer than w: one physical step trips
  // the detector at several consecutive sample times.
  std::vector<StepEvent> events;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t j = i;
    double extreme = raw[i].delta;
    while (j + 1 < raw.size() && raw[j + 1].t - raw[j].t <= w) {
      ++j;
      if (std::abs(raw[j].delta) > std::abs(extreme)) extreme = raw[j].delta;
    }
    events.push_back({trace.channel, raw[i].t, extreme});
    i = j + 1;
  }
  return events;
}

CorrelationResult correlate(std::vector<StepEvent> temp_events,
                            std::vector<StepEvent> freq_events, double tol) {
  if (!(tol > 0.0))
    throw std::invalid_argument("correlate: tol must be positive");

  auto by_time = [](const StepEvent& a, const StepEvent& b) {
    return a.t != b.t ? a.t < b.t : a.channel < b.channel;
  };
  std::sort(temp_events.begin(), temp_events.end(), by_time);
  std::sort(freq_events.begin(), freq_events.end(), by_time);

  std::vector<bool> t_used(temp_events.size(), false);
  std::vector<bool> f_used(freq_events.size(), false);

  CorrelationResult result;
  while (true) {
    double best_gap = tol;
    std::size_t best_t = temp_events.size(), best_f = freq_events.size();
    for (std::size_t ti = 0; ti < temp_events.size(); ++ti) {
      if (t_used[ti]) continue;
      for (std::size_t fi = 0; fi < freq_events.size(); ++fi) {
        if (f_used[fi]) continue;
        const double gap = std::abs(temp_events[ti].t - freq_events[fi].t);
        if (gap < best_gap ||
            (gap == best_gap && best_t == temp_events.size())) {
          best_gap = gap;
          best_t = ti;
          best_f = fi;
        }
      }
    }
    if (best_t == temp_events.size()) break;
    t_used[best_t] = true;
    f_used[best_f] = true;
    result.pairs.push_back({temp_events[best_t], freq_events[best_f]});
  }

  for (std::size_t ti = 0; ti < temp_events.size(); ++ti)
    if (!t_used[ti]) result.unpaired_temp.push_back(temp_events[ti]);
  for (std::size_t fi = 0; fi < freq_events.size(); ++fi)
    if (!f_used[fi]) result.unpaired_freq.push_back(freq_events[fi]);
  std::sort(result.pairs.begin(), result.pairs.end(),
            [&](const EventPair& a, const EventPair& b) {
              return by_time(a.temp, b.temp);
            });
  return result;
}

void AnalyzeParams::validate() const {
  if (!(stabilization_eps >= 0.0) || !(stabilization_w > 0.0) || !(step_w > 0.0) ||
      !(temp_min_delta > 0.0) || !(freq_min_delta > 0.0) || !(correlate_tol > 0.0))
    throw std::invalid_argument("telemetry: non-positive analysis parameter");
}

TelemetryAnalysis analyze(const std::vector<SensorTrace>& traces,
                          const AnalyzeParams& params) {
  params.validate();

  TelemetryAnalysis out;
  for (const SensorTrace& trace : traces) {
    if (trace.kind == SensorKind::temperature) {
      if (auto stable = stabilization_window(trace, params.stabilization_eps,
                                             params.stabilization_w)) {
        out.events.push_back(
            {"stabilization", trace.channel, stable->t_stable, stable->mean_value});
      }
      auto steps = detect_steps(trace, params.temp_min_delta, params.step_w);
      for (const StepEvent& ev : steps) {
        out.events.push_back({"step", ev.channel, ev.t, ev.delta});
        out.temp_events.push_back(ev);
      }
    } else {
      auto steps = detect_steps(trace, params.freq_min_delta, params.step_w);
      for (const StepEvent& ev : steps) {
        out.events.push_back({"step", ev.channel, ev.t, ev.delta});
        out.freq_events.push_back(ev);
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(),
            [](const AnalysisEvent& a, const AnalysisEvent& b) {
              if (a.channel != b.channel) return a.channel < b.channel;
              if (a.event_type != b.event_type) return a.event_type < b.event_type;
              return a.t < b.t;
            });
  out.correlation =
      correlate(out.temp_events, out.freq_events, params.correlate_tol);
  return out;
}

std::size_t emit_events_csv(const std::vector<AnalysisEvent>& events,
                            std::ostream& sink) {
  std::string out = "event_type,channel,t,delta\n";
  for (const AnalysisEvent& ev : events) {
    out += ev.event_type;
    out += ',';
    out += ev.channel;
    out += ',';
    detail::append_double(out, ev.t);
    out += ',';
    detail::append_double(out, ev.delta);
    out += '\n';
  }
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw IoError("emit_events_csv: write failed");
  return out.size();
}

std::string analysis_summary(const TelemetryAnalysis& analysis) {
  std::ostringstream out;
  for (const AnalysisEvent& ev : analysis.events) {
    if (ev.event_type == "stabilization") {
      out << ev.channel << ": stable from t=" << detail::format_double(ev.t)
          << " s around " << detail::format_double(ev.delta) << "\n";
    } else {
      out << ev.channel << ": step at t=" << detail::format_double(ev.t)
          << " s, delta " << detail::format_double(ev.delta) << "\n";
    }
  }
  out << analysis.correlation.pairs.size() << " correlated pair(s)\n";
  for (const EventPair& pair : analysis.correlation.pairs) {
    out << "  " << pair.temp.channel << " @ " << detail::format_double(pair.temp.t)
        << " s (" << detail::format_double(pair.temp.delta) << ") <-> "
        << pair.freq.channel << " @ " << detail::format_double(pair.freq.t)
        << " s (" << detail::format_double(pair.freq.delta) << ")\n";
  }
  for (const StepEvent& ev : analysis.correlation.unpaired_temp)
    out << "  unpaired temperature step: " << ev.channel << " @ "
        << detail::format_double(ev.t) << " s\n";
  for (const StepEvent& ev : analysis.correlation.unpaired_freq)
    out << "  unpaired frequency step: " << ev.channel << " @ "
        << detail::format_double(ev.t) << " s\n";
  return out.str();
}

} // namespace hhfreak
