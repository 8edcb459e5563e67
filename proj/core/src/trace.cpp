#include "streamforge/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "streamforge/error.hpp"

namespace streamforge {

namespace {

[[noreturn]] void trace_fail(int line_no, std::size_t offset, const std::string& what) {
  raise(ErrorKind::kTrace, "line " + std::to_string(line_no) + " (byte offset " +
                               std::to_string(offset) + "): " + what);
}

double parse_double(const std::string& token, int line_no, std::size_t offset,
                    const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(token, &pos);
    if (pos != token.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    trace_fail(line_no, offset, std::string("bad ") + what + " '" + token + "'");
  }
}

std::vector<float> synth_sine(double freq_hz, double duration_s, double amplitude,
                              int audio_hz) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * audio_hz));
  std::vector<float> samples(n);
  const double step = 2.0 * std::numbers::pi * freq_hz / audio_hz;
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = static_cast<float>(amplitude * std::sin(step * static_cast<double>(i)));
  }
  return samples;
}

}  // namespace

std::vector<TraceEvent> parse_trace(std::string_view text) {
  std::vector<TraceEvent> events;
  int line_no = 0;
  std::size_t pos = 0;
  bool saw_end = false;
  double last_pts = -std::numeric_limits<double>::infinity();

  while (pos <= text.size()) {
    const std::size_t line_start = pos;
    const std::size_t eol = text.find('\n', pos);
    std::string line(text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream iss(line);
    std::string pts_token, kind;
    if (!(iss >> pts_token)) continue;  // blank line
    if (!(iss >> kind)) trace_fail(line_no, line_start, "missing event kind");
    const double pts = parse_double(pts_token, line_no, line_start, "pts");

    if (saw_end) trace_fail(line_no, line_start, "event after end");
    if (pts < last_pts) {
      trace_fail(line_no, line_start, "events not sorted by pts");
    }
    last_pts = pts;

    TraceEvent event;
    event.pts = pts;
    if (kind == "audio") {
      std::string form;
      if (!(iss >> form)) trace_fail(line_no, line_start, "missing audio payload form");
      AudioEvent audio;
      if (form == "raw") {
        std::string token;
        while (iss >> token) {
          audio.samples.push_back(
              static_cast<float>(parse_double(token, line_no, line_start, "sample")));
        }
        if (audio.samples.empty()) {
          trace_fail(line_no, line_start, "raw audio payload has no samples");
        }
      } else if (form == "sine") {
        std::string f, d, a;
        if (!(iss >> f >> d >> a)) {
          trace_fail(line_no, line_start, "sine payload needs <freq_hz> <duration_s> <amplitude>");
        }
        audio.samples = synth_sine(parse_double(f, line_no, line_start, "frequency"),
                                   parse_double(d, line_no, line_start, "duration"),
                                   parse_double(a, line_no, line_start, "amplitude"),
                                   16000);
      } else if (form == "silence") {
        std::string d;
        if (!(iss >> d)) trace_fail(line_no, line_start, "silence payload needs <duration_s>");
        const double duration = parse_double(d, line_no, line_start, "duration");
        audio.samples.assign(
            static_cast<std::size_t>(std::llround(duration * 16000)), 0.0f);
      } else {
        trace_fail(line_no, line_start, "unknown audio payload form '" + form + "'");
      }
      event.kind = std::move(audio);
    } else if (kind == "prompt") {
      std::string rest;
      std::getline(iss, rest);
      const auto first = rest.find_first_not_of(" \t");
      if (first == std::string::npos) {
        trace_fail(line_no, line_start, "prompt payload is empty");
      }
      const auto last = rest.find_last_not_of(" \t\r");
      event.kind = PromptEvent{rest.substr(first, last - first + 1)};
    } else if (kind == "end") {
      event.kind = EndEvent{};
      saw_end = true;
    } else {
      trace_fail(line_no, line_start, "unknown event kind '" + kind + "'");
    }
    events.push_back(std::move(event));
  }

  if (!saw_end) {
    raise(ErrorKind::kTrace, "trace has no end event");
  }
  return events;
}

std::vector<TraceEvent> load_trace_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    raise(ErrorKind::kTrace, "cannot open trace file: " + path);
  }
  std::ostringstream oss;
  oss << file.rdbuf();
  return parse_trace(oss.str());
}

double trace_duration(const std::vector<TraceEvent>& events, int audio_hz) {
  double duration = 0.0;
  for (const auto& event : events) {
    if (event.is_audio()) {
      const auto& audio = std::get<AudioEvent>(event.kind);
      duration = std::max(duration, event.pts + static_cast<double>(audio.samples.size()) /
                                                    static_cast<double>(audio_hz));
    } else if (event.is_end()) {
      duration = std::max(duration, event.pts);
    }
  }
  return duration;
}

std::vector<float> flatten_audio(const std::vector<TraceEvent>& events, int audio_hz) {
  const double duration = trace_duration(events, audio_hz);
  std::vector<float> timeline(
      static_cast<std::size_t>(std::llround(duration * audio_hz)), 0.0f);
  for (const auto& event : events) {
    if (!event.is_audio()) continue;
    const auto& audio = std::get<AudioEvent>(event.kind);
    const auto start = static_cast<std::size_t>(std::llround(event.pts * audio_hz));
    for (std::size_t i = 0; i < audio.samples.size(); ++i) {
      const std::size_t at = start + i;
      if (at < timeline.size()) timeline[at] = audio.samples[i];
    }
  }
  return timeline;
}

}  // namespace streamforge
