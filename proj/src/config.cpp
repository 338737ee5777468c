#include "kaidoa/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace kaidoa {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::esprit:
      return "esprit";
    case EstimatorKind::iesprit:
      return "iesprit";
    case EstimatorKind::two_step_kai:
      return "two_step_kai";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "esprit") {
    return EstimatorKind::esprit;
  }
  if (name == "iesprit") {
    return EstimatorKind::iesprit;
  }
  if (name == "two_step_kai") {
    return EstimatorKind::two_step_kai;
  }
  throw ConfigError("unknown estimator: " + name);
}

namespace {

struct ConfigValue {
  enum class Kind { number, string, array_number, array_string };
  Kind kind = Kind::number;
  double number = 0.0;
  std::string raw;  // original token, for exact integer parses
  std::string text;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

ConfigValue parse_scalar(const std::string& token, const std::string& origin, int line_no) {
  ConfigValue value;
  value.raw = token;
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    value.kind = ConfigValue::Kind::string;
    value.text = token.substr(1, token.size() - 2);
    return value;
  }
  try {
    std::size_t used = 0;
    value.number = std::stod(token, &used);
    if (used != token.size()) {
      throw std::invalid_argument(token);
    }
  } catch (const std::exception&) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad value '" + token + "'");
  }
  value.kind = ConfigValue::Kind::number;
  return value;
}

ConfigValue parse_value(const std::string& token, const std::string& origin, int line_no) {
  if (!token.empty() && token.front() == '[') {
    if (token.back() != ']') {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated array");
    }
    ConfigValue value;
    value.kind = ConfigValue::Kind::array_number;
    const std::string inner = token.substr(1, token.size() - 2);
    std::stringstream stream(inner);
    std::string item;
    while (std::getline(stream, item, ',')) {
      item = trim(item);
      if (item.empty()) {
        continue;
      }
      ConfigValue scalar = parse_scalar(item, origin, line_no);
      if (scalar.kind == ConfigValue::Kind::string) {
        value.kind = ConfigValue::Kind::array_string;
        value.strings.push_back(scalar.text);
      } else {
        value.numbers.push_back(scalar.number);
      }
    }
    return value;
  }
  return parse_scalar(token, origin, line_no);
}

ConfigTable parse_table(const std::string& text, const std::string& origin) {
  ConfigTable table;
  std::string section;
  std::stringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string token = trim(line.substr(eq + 1));
    if (key.empty() || token.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any [section]");
    }
    table[section][key] = parse_value(token, origin, line_no);
  }
  return table;
}

const ConfigValue* find(const ConfigTable& table, const std::string& section,
                        const std::string& key) {
  const auto sec = table.find(section);
  if (sec == table.end()) {
    return nullptr;
  }
  const auto val = sec->second.find(key);
  if (val == sec->second.end()) {
    return nullptr;
  }
  return &val->second;
}

void read_number(const ConfigTable& table, const std::string& section, const std::string& key,
                 double& out) {
  if (const ConfigValue* value = find(table, section, key)) {
    if (value->kind != ConfigValue::Kind::number) {
      throw ConfigError(section + "." + key + ": number expected");
    }
    out = value->number;
  }
}

void read_int(const ConfigTable& table, const std::string& section, const std::string& key,
              int& out) {
  double number = out;
  read_number(table, section, key, number);
  if (number != std::floor(number)) {
    throw ConfigError(section + "." + key + ": integer expected");
  }
  out = static_cast<int>(number);
}

void read_seed(const ConfigTable& table, const std::string& section, const std::string& key,
               std::uint64_t& out) {
  if (const ConfigValue* value = find(table, section, key)) {
    try {
      out = std::stoull(value->raw);
    } catch (const std::exception&) {
      throw ConfigError(section + "." + key + ": unsigned integer expected");
    }
  }
}

void read_string(const ConfigTable& table, const std::string& section, const std::string& key,
                 std::string& out) {
  if (const ConfigValue* value = find(table, section, key)) {
    if (value->kind != ConfigValue::Kind::string) {
      throw ConfigError(section + "." + key + ": quoted string expected");
    }
    out = value->text;
  }
}

void read_numbers(const ConfigTable& table, const std::string& section, const std::string& key,
                  std::vector<double>& out) {
  if (const ConfigValue* value = find(table, section, key)) {
    if (value->kind != ConfigValue::Kind::array_number) {
      throw ConfigError(section + "." + key + ": numeric array expected");
    }
    out = value->numbers;
  }
}

}  // namespace

ArrayGeometry ExperimentConfig::geometry() const {
  return ArrayGeometry(num_sensors, spacing_wavelengths, 1.0);
}

SourceScenario ExperimentConfig::scenario(double noise_variance) const {
  std::vector<double> doas_rad;
  doas_rad.reserve(doas_deg.size());
  for (double deg : doas_deg) {
    doas_rad.push_back(deg2rad(deg));
  }
  std::vector<double> powers(doas_deg.size(), 1.0);
  return SourceScenario(std::move(doas_rad), std::move(powers), noise_variance, num_snapshots,
                        known_indices());
}

std::vector<int> ExperimentConfig::known_indices() const {
  std::vector<int> indices;
  for (double known : known_doas_deg) {
    const auto it = std::find_if(doas_deg.begin(), doas_deg.end(), [known](double doa) {
      return std::abs(doa - known) < 1e-9;
    });
    if (it == doas_deg.end()) {
      throw ConfigError("known DOA " + std::to_string(known) + " is not a scenario DOA");
    }
    indices.push_back(static_cast<int>(it - doas_deg.begin()));
  }
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::vector<double> ExperimentConfig::snr_grid() const {
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((snr_stop_db - snr_start_db) / snr_step_db + 1e-9)) + 1;
  grid.reserve(count);
  for (int i = 0; i < count; ++i) {
    grid.push_back(snr_start_db + i * snr_step_db);
  }
  return grid;
}

void ExperimentConfig::validate() const {
  try {
    geometry();
    scenario(1.0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto indices = known_indices();
  if (indices.size() != known_doas_deg.size() ||
      std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw ConfigError("known DOAs must be distinct scenario DOAs");
  }
  if (trials < 1) {
    throw ConfigError("trials must be at least 1");
  }
  if (!(snr_step_db > 0.0) || snr_stop_db < snr_start_db) {
    throw ConfigError("SNR grid must be non-empty with positive step");
  }
  if (!(increment > 0.0 && increment <= 1.0)) {
    throw ConfigError("increment must lie in (0, 1]");
  }
  if (estimators.empty()) {
    throw ConfigError("at least one estimator required");
  }
  if (threads < 0) {
    throw ConfigError("threads must be non-negative");
  }
  if (output_prefix.empty()) {
    throw ConfigError("output prefix must be non-empty");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  const ConfigTable table = parse_table(text, origin);
  ExperimentConfig config;

  read_int(table, "array", "sensors", config.num_sensors);
  read_number(table, "array", "spacing_wavelengths", config.spacing_wavelengths);

  read_numbers(table, "scenario", "doas_deg", config.doas_deg);
  if (find(table, "scenario", "known_doas_deg") != nullptr) {
    config.known_doas_deg.clear();
    read_numbers(table, "scenario", "known_doas_deg", config.known_doas_deg);
  }
  read_int(table, "scenario", "snapshots", config.num_snapshots);
  read_number(table, "scenario", "snr_db", config.snr_db);

  read_number(table, "sweep", "snr_start_db", config.snr_start_db);
  read_number(table, "sweep", "snr_stop_db", config.snr_stop_db);
  read_number(table, "sweep", "snr_step_db", config.snr_step_db);
  read_int(table, "sweep", "trials", config.trials);
  read_seed(table, "sweep", "base_seed", config.base_seed);
  read_number(table, "sweep", "increment", config.increment);
  read_int(table, "sweep", "threads", config.threads);
  if (const ConfigValue* value = find(table, "sweep", "estimators")) {
    if (value->kind != ConfigValue::Kind::array_string) {
      throw ConfigError("sweep.estimators: string array expected");
    }
    config.estimators.clear();
    for (const std::string& name : value->strings) {
      config.estimators.push_back(estimator_from_string(name));
    }
  }
  std::string scope;
  read_string(table, "sweep", "rmse_scope", scope);
  if (!scope.empty()) {
    if (scope == "unknown") {
      config.rmse_scope = RmseScope::unknown_only;
    } else if (scope == "all") {
      config.rmse_scope = RmseScope::all_sources;
    } else {
      throw ConfigError("sweep.rmse_scope: 'unknown' or 'all' expected");
    }
  }

  read_string(table, "output", "directory", config.output_directory);
  read_string(table, "output", "prefix", config.output_prefix);

  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream stream(path);
  if (!stream) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << stream.rdbuf();
  return parse_config(buffer.str(), path.string());
}

}  // namespace kaidoa
