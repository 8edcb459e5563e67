#include "streamforge/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "streamforge/error.hpp"

namespace streamforge {

std::vector<double> build_noise_ladder(int stream_chunks, int micro_steps) {
  if (stream_chunks < 1 || micro_steps < 1) {
    raise(ErrorKind::kConfig,
          "noise ladder requires stream_chunks >= 1 and micro_steps >= 1");
  }
  const int depth = stream_chunks * micro_steps;
  std::vector<double> ladder(static_cast<std::size_t>(depth));
  for (int k = depth; k >= 1; --k) {
    ladder[static_cast<std::size_t>(depth - k)] =
        static_cast<double>(k) / static_cast<double>(depth);
  }
  return ladder;
}

double chunk_duration(const SessionConfig& config) {
  return static_cast<double>(config.latents_per_chunk) *
         static_cast<double>(config.frames_per_latent) / config.fps;
}

SessionConfig resolve_defaults(SessionConfig config) {
  if (config.refine_noise_t == 0.0 && config.stream_chunks >= 1 &&
      config.micro_steps >= 1) {
    const auto ladder = build_noise_ladder(config.stream_chunks, config.micro_steps);
    // Second ladder level when it exists; a depth-1 ladder has only t = 1,
    // which is outside the allowed (0, 1) range, so use the midpoint.
    config.refine_noise_t = ladder.size() >= 2 ? ladder[1] : 0.5;
  }
  return config;
}

std::vector<ConfigViolation> config_violations(const SessionConfig& config) {
  std::vector<ConfigViolation> violations;
  auto require_count = [&](const char* field, int value) {
    if (value < 1) violations.push_back({field, "counts >= 1"});
  };
  require_count("audio_hz", config.audio_hz);
  require_count("latents_per_chunk", config.latents_per_chunk);
  require_count("stream_chunks", config.stream_chunks);
  require_count("micro_steps", config.micro_steps);
  require_count("frames_per_latent", config.frames_per_latent);
  require_count("long_term_capacity", config.long_term_capacity);
  require_count("latent_dim", config.latent_dim);
  require_count("refine_interval_chunks", config.refine_interval_chunks);
  require_count("audio_feature_dim", config.audio_feature_dim);
  if (config.audio_overlap_features < 0) {
    violations.push_back({"audio_overlap_features", "overlap >= 0"});
  }
  if (!(config.fps > 0.0)) {
    violations.push_back({"fps", "fps > 0"});
  }
  if (!(config.refine_noise_t > 0.0 && config.refine_noise_t < 1.0)) {
    violations.push_back({"refine_noise_t", "refine_noise_t in (0,1)"});
  }
  if (config.stream_chunks * config.micro_steps == 0) {
    violations.push_back({"stream_chunks", "stream_chunks * micro_steps != 0"});
  }
  return violations;
}

SessionConfig validate_config(SessionConfig config) {
  config = resolve_defaults(config);
  const auto violations = config_violations(config);
  if (!violations.empty()) {
    std::ostringstream oss;
    oss << "invalid session config:";
    for (const auto& v : violations) {
      oss << " [" << v.field << ": " << v.constraint << "]";
    }
    raise(ErrorKind::kConfig, oss.str());
  }
  return config;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view value, const std::string& key, int line_no) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  std::from_chars_result result{};
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is unreliable on older libstdc++; go through stod.
    try {
      std::size_t pos = 0;
      out = static_cast<T>(std::stod(std::string(value), &pos));
      if (pos != value.size()) throw std::invalid_argument("trailing");
      return out;
    } catch (const std::exception&) {
      raise(ErrorKind::kConfig, "line " + std::to_string(line_no) +
                                    ": bad numeric value for '" + key + "'");
    }
  } else {
    result = std::from_chars(begin, end, out);
    if (result.ec != std::errc() || result.ptr != end) {
      raise(ErrorKind::kConfig, "line " + std::to_string(line_no) +
                                    ": bad numeric value for '" + key + "'");
    }
  }
  return out;
}

}  // namespace

SessionConfig parse_config(std::string_view text, SessionConfig base) {
  SessionConfig config = std::move(base);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      raise(ErrorKind::kConfig,
            "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      raise(ErrorKind::kConfig,
            "line " + std::to_string(line_no) + ": empty key or value");
    }

    if (key == "fps") {
      config.fps = parse_number<double>(value, key, line_no);
    } else if (key == "audio_hz") {
      config.audio_hz = parse_number<int>(value, key, line_no);
    } else if (key == "latents_per_chunk") {
      config.latents_per_chunk = parse_number<int>(value, key, line_no);
    } else if (key == "stream_chunks") {
      config.stream_chunks = parse_number<int>(value, key, line_no);
    } else if (key == "micro_steps") {
      config.micro_steps = parse_number<int>(value, key, line_no);
    } else if (key == "frames_per_latent") {
      config.frames_per_latent = parse_number<int>(value, key, line_no);
    } else if (key == "long_term_capacity") {
      config.long_term_capacity = parse_number<int>(value, key, line_no);
    } else if (key == "latent_dim") {
      config.latent_dim = parse_number<int>(value, key, line_no);
    } else if (key == "refine_interval_chunks") {
      config.refine_interval_chunks = parse_number<int>(value, key, line_no);
    } else if (key == "refine_noise_t") {
      config.refine_noise_t = parse_number<double>(value, key, line_no);
    } else if (key == "audio_overlap_features") {
      config.audio_overlap_features = parse_number<int>(value, key, line_no);
    } else if (key == "audio_feature_dim") {
      config.audio_feature_dim = parse_number<int>(value, key, line_no);
    } else if (key == "rng_seed") {
      config.rng_seed = parse_number<std::uint64_t>(value, key, line_no);
    } else {
      raise(ErrorKind::kConfig,
            "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return config;
}

SessionConfig load_config_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    raise(ErrorKind::kConfig, "cannot open config file: " + path);
  }
  std::ostringstream oss;
  oss << file.rdbuf();
  return parse_config(oss.str());
}

std::string render_config(const SessionConfig& config) {
  std::ostringstream oss;
  oss.precision(17);
  oss << "fps = " << config.fps << '\n'
      << "audio_hz = " << config.audio_hz << '\n'
      << "latents_per_chunk = " << config.latents_per_chunk << '\n'
      << "stream_chunks = " << config.stream_chunks << '\n'
      << "micro_steps = " << config.micro_steps << '\n'
      << "frames_per_latent = " << config.frames_per_latent << '\n'
      << "long_term_capacity = " << config.long_term_capacity << '\n'
      << "latent_dim = " << config.latent_dim << '\n'
      << "refine_interval_chunks = " << config.refine_interval_chunks << '\n'
      << "refine_noise_t = " << config.refine_noise_t << '\n'
      << "audio_overlap_features = " << config.audio_overlap_features << '\n'
      << "audio_feature_dim = " << config.audio_feature_dim << '\n'
      << "rng_seed = " << config.rng_seed << '\n';
  return oss.str();
}

}  // namespace streamforge
