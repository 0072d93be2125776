#include "bloomemb/config.hpp"

#include <charconv>
#include <sstream>

#include "bloomemb/error.hpp"
#include "bloomemb/io.hpp"
#include "bloomemb/rng.hpp"

namespace bloomemb {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config: '" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: '" + std::string(key) + "' expects true/false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view value, Parse parse) {
  std::vector<T> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(parse(trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_real(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

template <typename T, typename Format>
std::string join(const std::vector<T>& values, Format format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format(values[i]);
  }
  return out;
}

std::string_view format_name(ProfileFormat format) {
  switch (format) {
    case ProfileFormat::kAuto: return "auto";
    case ProfileFormat::kTriples: return "triples";
    case ProfileFormat::kProfilePerLine: return "profiles";
  }
  return "auto";
}

}  // namespace

std::string_view to_string(DecodeMode mode) noexcept {
  return mode == DecodeMode::kNll ? "nll" : "likelihood";
}

DecodeMode parse_decode_mode(std::string_view text) {
  if (text == "likelihood") return DecodeMode::kLikelihood;
  if (text == "nll") return DecodeMode::kNll;
  throw ConfigError("unknown decode mode '" + std::string(text) + "' (expected likelihood or nll)");
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const auto value = trim(raw);
  auto as_size = [&] { return parse_integer<std::size_t>(key, value); };
  auto as_u64 = [&] { return parse_integer<std::uint64_t>(key, value); };
  auto as_real = [&] { return parse_real(key, value); };

  if (key == "data") data = std::string(value);
  else if (key == "synthetic.d") synthetic.d = as_size();
  else if (key == "synthetic.n") synthetic.n = as_size();
  else if (key == "synthetic.clusters") synthetic.clusters = as_size();
  else if (key == "synthetic.min_items") synthetic.min_items = as_size();
  else if (key == "synthetic.max_items") synthetic.max_items = as_size();
  else if (key == "synthetic.noise") synthetic.noise = as_real();
  else if (key == "synthetic.zipf") synthetic.zipf_exponent = as_real();
  else if (key == "synthetic.test_size") synthetic.test_size = as_size();
  else if (key == "synthetic.seed") synthetic.seed = as_u64();
  else if (key == "load.format") {
    if (value == "auto") load.format = ProfileFormat::kAuto;
    else if (value == "triples") load.format = ProfileFormat::kTriples;
    else if (value == "profiles") load.format = ProfileFormat::kProfilePerLine;
    else throw ConfigError("config: load.format must be auto, triples or profiles");
  }
  else if (key == "load.min_item_count") load.min_item_count = as_size();
  else if (key == "load.min_profile_size") load.min_profile_size = as_size();
  else if (key == "load.min_rating") load.min_rating = as_real();
  else if (key == "load.test_size") load.test_size = as_size();
  else if (key == "load.seed") load.seed = as_u64();
  else if (key == "m") m_in = m_out = as_size();
  else if (key == "m_in") m_in = as_size();
  else if (key == "m_out") m_out = as_size();
  else if (key == "k") k = as_size();
  else if (key == "seed") seed = as_u64();
  else if (key == "hidden") {
    hidden = value.empty() ? std::vector<std::size_t>{}
                           : parse_list<std::size_t>(value, [&](std::string_view v) {
                               return parse_integer<std::size_t>(key, v);
                             });
  }
  else if (key == "optimizer") optimizer.kind = parse_optimizer(value);
  else if (key == "lr") optimizer.learning_rate = as_real();
  else if (key == "momentum") optimizer.momentum = as_real();
  else if (key == "beta1") optimizer.beta1 = as_real();
  else if (key == "beta2") optimizer.beta2 = as_real();
  else if (key == "adam_epsilon") optimizer.epsilon = as_real();
  else if (key == "clip_norm") optimizer.clip_norm = as_real();
  else if (key == "epochs") train.epochs = as_size();
  else if (key == "batch_size") train.batch_size = as_size();
  else if (key == "cbe") use_cbe = parse_bool(key, value);
  else if (key == "decode") decode = parse_decode_mode(value);
  else if (key == "top_n") top_n = as_size();
  else if (key == "cutoff") cutoff = as_size();
  else if (key == "measure") measure = parse_measure(value);
  else if (key == "sweep.m_ratios") {
    sweep_m_ratios = parse_list<double>(value, [&](std::string_view v) { return parse_real(key, v); });
  }
  else if (key == "sweep.k") {
    sweep_k = parse_list<std::size_t>(value, [&](std::string_view v) { return parse_integer<std::size_t>(key, v); });
  }
  else if (key == "repeats") repeats = as_size();
  else if (key == "parallel") parallel = as_size();
  else throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

void ExperimentConfig::validate() const {
  if (uses_synthetic()) synthetic.validate();
  if (k < 1) throw ConfigError("config: k must be >= 1");
  if ((m_in != 0 && m_in < k) || (m_out != 0 && m_out < k)) throw ConfigError("config: m must be >= k");
  optimizer.validate();
  if (train.batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (top_n < 1) throw ConfigError("config: top_n must be >= 1");
  if (repeats < 1) throw ConfigError("config: repeats must be >= 1");
  if (parallel < 1) throw ConfigError("config: parallel must be >= 1");
  for (const auto h : hidden) {
    if (h < 1) throw ConfigError("config: hidden sizes must be >= 1");
  }
  for (const double r : sweep_m_ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("config: sweep m/d ratios must lie in (0, 1]");
  }
  for (const auto kk : sweep_k) {
    if (kk < 1) throw ConfigError("config: sweep k values must be >= 1");
  }
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream out;
  auto size_list = [](const std::vector<std::size_t>& v) {
    return join(v, [](std::size_t x) { return std::to_string(x); });
  };
  out << "data=" << data << '\n'
      << "synthetic.d=" << synthetic.d << '\n'
      << "synthetic.n=" << synthetic.n << '\n'
      << "synthetic.clusters=" << synthetic.clusters << '\n'
      << "synthetic.min_items=" << synthetic.min_items << '\n'
      << "synthetic.max_items=" << synthetic.max_items << '\n'
      << "synthetic.noise=" << format_real(synthetic.noise) << '\n'
      << "synthetic.zipf=" << format_real(synthetic.zipf_exponent) << '\n'
      << "synthetic.test_size=" << synthetic.test_size << '\n'
      << "synthetic.seed=" << synthetic.seed << '\n'
      << "load.format=" << format_name(load.format) << '\n'
      << "load.min_item_count=" << load.min_item_count << '\n'
      << "load.min_profile_size=" << load.min_profile_size << '\n'
      << "load.min_rating=" << format_real(load.min_rating) << '\n'
      << "load.test_size=" << load.test_size << '\n'
      << "load.seed=" << load.seed << '\n'
      << "m_in=" << m_in << '\n'
      << "m_out=" << m_out << '\n'
      << "k=" << k << '\n'
      << "seed=" << seed << '\n'
      << "hidden=" << size_list(hidden) << '\n'
      << "optimizer=" << to_string(optimizer.kind) << '\n'
      << "lr=" << format_real(optimizer.learning_rate) << '\n'
      << "momentum=" << format_real(optimizer.momentum) << '\n'
      << "beta1=" << format_real(optimizer.beta1) << '\n'
      << "beta2=" << format_real(optimizer.beta2) << '\n'
      << "adam_epsilon=" << format_real(optimizer.epsilon) << '\n'
      << "clip_norm=" << format_real(optimizer.clip_norm) << '\n'
      << "epochs=" << train.epochs << '\n'
      << "batch_size=" << train.batch_size << '\n'
      << "cbe=" << (use_cbe ? "true" : "false") << '\n'
      << "decode=" << to_string(decode) << '\n'
      << "top_n=" << top_n << '\n'
      << "cutoff=" << cutoff << '\n'
      << "measure=" << to_string(measure) << '\n'
      << "sweep.m_ratios=" << join(sweep_m_ratios, format_real) << '\n'
      << "sweep.k=" << size_list(sweep_k) << '\n'
      << "repeats=" << repeats << '\n'
      << "parallel=" << parallel << '\n';
  return out.str();
}

ExperimentConfig ExperimentConfig::from_text(std::string_view text) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    auto line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{} : text.substr(newline + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& source) {
  std::ifstream in(source);
  if (!in) throw ConfigError("cannot open config file " + source.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

void ExperimentConfig::save(const std::filesystem::path& destination) const {
  write_atomically(destination, [&](std::ostream& out) { out << to_text(); });
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return a.to_text() == b.to_text(); }

SeedSet derive_seeds(std::uint64_t seed, std::size_t repeat) noexcept {
  const std::uint64_t base = splitmix64(seed ^ splitmix64(repeat));
  return {splitmix64(base ^ 1), splitmix64(base ^ 2), splitmix64(base ^ 3), splitmix64(base ^ 4),
          splitmix64(base ^ 5)};
}

}  // namespace bloomemb
