#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace streamforge {

struct AudioEvent {
  std::vector<float> samples;
};

struct PromptEvent {
  std::string text;
};

struct EndEvent {};

/// One line of an interaction trace: `pts kind payload`. Events must be
/// sorted by pts and the trace carries exactly one end event (last).
struct TraceEvent {
  double pts = 0.0;
  std::variant<AudioEvent, PromptEvent, EndEvent> kind;

  bool is_audio() const { return std::holds_alternative<AudioEvent>(kind); }
  bool is_prompt() const { return std::holds_alternative<PromptEvent>(kind); }
  bool is_end() const { return std::holds_alternative<EndEvent>(kind); }
};

/// Parses the line-delimited trace format. Audio payloads:
///   <pts> audio raw <s0> <s1> ...
///   <pts> audio sine <freq_hz> <duration_s> <amplitude>
///   <pts> audio silence <duration_s>
///   <pts> prompt <text>
///   <pts> end
/// Errors (unsorted pts, missing/duplicate end, malformed payloads) carry the
/// line number and byte offset.
std::vector<TraceEvent> parse_trace(std::string_view text);

std::vector<TraceEvent> load_trace_file(const std::string& path);

/// Total conditioning duration: the max of the end-event pts and the end of
/// the last audio payload.
double trace_duration(const std::vector<TraceEvent>& events, int audio_hz);

/// Flattens the audio events into one contiguous 16 kHz sample timeline
/// starting at pts 0; gaps are silence.
std::vector<float> flatten_audio(const std::vector<TraceEvent>& events, int audio_hz);

}  // namespace streamforge
