#include "softpool/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "softpool/errors.hpp"

namespace softpool {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::vector<std::size_t> parse_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t end = value.find(',', pos);
    if (end == std::string_view::npos) end = value.size();
    out.push_back(parse_number<std::size_t>(key, trim(value.substr(pos, end - pos))));
    pos = end + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field count_field(T RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = parse_number<T>(k, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(double RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = parse_number<double>(k, v); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

Field weight_field(double LossWeights::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            c.weights.*member = parse_number<double>(k, v);
          },
          [member](const RunConfig& c) { return format_double(c.weights.*member); }};
}

Field flag_field(bool RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) { c.*member = parse_bool(k, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field text_field(std::string RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) { c.*member = std::string(v); },
          [member](const RunConfig& c) { return c.*member; }};
}

// Serialisation order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"n_in", count_field(&RunConfig::n_in)},
      {"hidden",
       {[](RunConfig& c, std::string_view k, std::string_view v) { c.hidden = parse_list(k, v); },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.hidden.size(); ++i) s += (i ? "," : "") + std::to_string(c.hidden[i]);
          return s;
        }}},
      {"n_f", count_field(&RunConfig::n_f)},
      {"n_r", count_field(&RunConfig::n_r)},
      {"n_p", count_field(&RunConfig::n_p)},
      {"coarse_count", count_field(&RunConfig::coarse_count)},
      {"fine_count", count_field(&RunConfig::fine_count)},
      {"upsample", count_field(&RunConfig::upsample)},
      {"slope", real_field(&RunConfig::slope)},
      {"final_linear", flag_field(&RunConfig::final_linear)},
      {"tau", real_field(&RunConfig::tau)},
      {"w_complete", weight_field(&LossWeights::complete)},
      {"w_inter", weight_field(&LossWeights::inter)},
      {"w_intra", weight_field(&LossWeights::intra)},
      {"w_boundary", weight_field(&LossWeights::boundary)},
      {"w_preserve", weight_field(&LossWeights::preserve)},
      {"paper_loss", flag_field(&RunConfig::paper_loss)},
      {"preserve_samples", count_field(&RunConfig::preserve_samples)},
      {"lr", real_field(&RunConfig::lr)},
      {"beta1", real_field(&RunConfig::beta1)},
      {"beta2", real_field(&RunConfig::beta2)},
      {"eps", real_field(&RunConfig::eps)},
      {"batch_size", count_field(&RunConfig::batch_size)},
      {"epochs", count_field(&RunConfig::epochs)},
      {"seed", count_field(&RunConfig::seed)},
      {"threads", count_field(&RunConfig::threads)},
      {"dataset", text_field(&RunConfig::dataset)},
      {"holdout", count_field(&RunConfig::holdout)},
      {"checkpoint", text_field(&RunConfig::checkpoint)},
      {"emd_points", count_field(&RunConfig::emd_points)},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (n_f * n_r != coarse_count) {
    throw ConfigError("n_f * n_r must equal coarse_count (" + std::to_string(n_f) + " * " + std::to_string(n_r) +
                      " != " + std::to_string(coarse_count) + ")");
  }
  if (coarse_count * upsample != fine_count) {
    throw ConfigError("fine_count must equal coarse_count * upsample");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
    throw ConfigError("invalid Adam hyper-parameters");
  }
  if (preserve_samples == 0 || emd_points == 0) throw ConfigError("sample counts must be positive");
  try {
    weights.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  architecture().validate();
}

Architecture RunConfig::architecture() const {
  Architecture a;
  a.n_in = n_in;
  a.hidden = hidden;
  a.n_f = n_f;
  a.n_r = n_r;
  a.n_p = n_p;
  a.upsample = upsample;
  a.slope = slope;
  a.final_linear = final_linear;
  return a;
}

LossConfig RunConfig::loss_config() const {
  LossConfig lc;
  lc.weights = weights;
  lc.tau = tau;
  lc.coarse_supervision = !paper_loss;
  lc.preserve_samples = preserve_samples;
  return lc;
}

RunConfig profile_config(std::string_view name) {
  RunConfig c;
  if (name == "paper") return c;
  if (name == "desk") {
    c.profile = "desk";
    c.upsample = 8;
    c.fine_count = 2048;
    c.hidden = {128, 128};
    return c;
  }
  throw ConfigError("unknown profile '" + std::string(name) + "' (expected paper or desk)");
}

void sync_counts(RunConfig& config) {
  config.coarse_count = config.n_f * config.n_r;
  config.fine_count = config.coarse_count * config.upsample;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  if (key == "profile") {
    config = profile_config(value);
    return;
  }
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, const RunConfig& base) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("missing key", line_no);
    entries.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }

  RunConfig config = base;
  for (const auto& [k, v] : entries) {
    if (k == "profile") config = profile_config(v);
  }
  for (const auto& [k, v] : entries) {
    if (k != "profile") apply_setting(config, k, v);
  }
  return config;
}

std::string serialize_config(const RunConfig& config) {
  std::ostringstream out;
  out << "profile = " << config.profile << '\n';
  for (const auto& [name, field] : fields()) out << name << " = " << field.get(config) << '\n';
  return out.str();
}

}  // namespace softpool
