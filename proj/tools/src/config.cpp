#include "dqa/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <variant>

#include "dqa/format.hpp"

namespace dqa::cli {
namespace {

using simkit::ConfigError;
using diffusion::VarianceMode;

using Slot = std::variant<int*, std::uint64_t*, double*, bool*, std::string*, std::vector<int>*, VarianceMode*>;

struct Field {
  const char* key;
  std::function<Slot(CliConfig&)> bind;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      {"name", [](CliConfig& c) -> Slot { return &c.scenario.name; }},
      {"n_nodes", [](CliConfig& c) -> Slot { return &c.scenario.n_nodes; }},
      {"filter_len", [](CliConfig& c) -> Slot { return &c.scenario.filter_len; }},
      {"mu", [](CliConfig& c) -> Slot { return &c.scenario.mu; }},
      {"trials", [](CliConfig& c) -> Slot { return &c.scenario.trials; }},
      {"iterations", [](CliConfig& c) -> Slot { return &c.scenario.iterations; }},
      {"bit_depths", [](CliConfig& c) -> Slot { return &c.scenario.bit_depths; }},
      {"full_resolution", [](CliConfig& c) -> Slot { return &c.scenario.full_resolution; }},
      {"theory", [](CliConfig& c) -> Slot { return &c.scenario.theory; }},
      {"seed", [](CliConfig& c) -> Slot { return &c.scenario.seed; }},
      {"topology_radius", [](CliConfig& c) -> Slot { return &c.scenario.topology_radius; }},
      {"sigma_x_sq_min", [](CliConfig& c) -> Slot { return &c.scenario.ranges.sigma_x_sq_min; }},
      {"sigma_x_sq_max", [](CliConfig& c) -> Slot { return &c.scenario.ranges.sigma_x_sq_max; }},
      {"sigma_v_sq_min", [](CliConfig& c) -> Slot { return &c.scenario.ranges.sigma_v_sq_min; }},
      {"sigma_v_sq_max", [](CliConfig& c) -> Slot { return &c.scenario.ranges.sigma_v_sq_max; }},
      {"ar_min", [](CliConfig& c) -> Slot { return &c.scenario.ranges.ar_min; }},
      {"ar_max", [](CliConfig& c) -> Slot { return &c.scenario.ranges.ar_max; }},
      {"variance_mode", [](CliConfig& c) -> Slot { return &c.scenario.variance_mode; }},
      {"steady_state_fraction", [](CliConfig& c) -> Slot { return &c.scenario.steady_state_fraction; }},
      {"bandwidth_hz", [](CliConfig& c) -> Slot { return &c.scenario.bandwidth_hz; }},
      {"conversion_energy_j", [](CliConfig& c) -> Slot { return &c.scenario.conversion_energy_j; }},
      {"covariance_samples", [](CliConfig& c) -> Slot { return &c.covariance_samples; }},
      {"complexity_n_k", [](CliConfig& c) -> Slot { return &c.complexity_n_k; }},
  };
  return f;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end || text.empty()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + text + "'");
}

VarianceMode parse_mode(const std::string& key, const std::string& text) {
  if (text == "online") return VarianceMode::kOnline;
  if (text == "offline") return VarianceMode::kOffline;
  throw ConfigError(key, "expected online or offline, got '" + text + "'");
}

std::string mode_name(VarianceMode m) { return m == VarianceMode::kOnline ? "online" : "offline"; }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void assign_text(CliConfig& c, const Field& f, const std::string& text) {
  const std::string key = f.key;
  std::visit(overloaded{
                 [&](int* p) { *p = parse_integer<int>(key, text); },
                 [&](std::uint64_t* p) { *p = parse_integer<std::uint64_t>(key, text); },
                 [&](double* p) {
                   try {
                     *p = parse_double(text);
                   } catch (const std::invalid_argument&) {
                     throw ConfigError(key, "expected a number, got '" + text + "'");
                   }
                 },
                 [&](bool* p) { *p = parse_bool(key, text); },
                 [&](std::string* p) { *p = text; },
                 [&](std::vector<int>* p) {
                   p->clear();
                   if (text.empty() || text == "none") return;
                   for (const auto& item : split_csv_line(text)) p->push_back(parse_integer<int>(key, item));
                 },
                 [&](VarianceMode* p) { *p = parse_mode(key, text); },
             },
             f.bind(c));
}

std::string field_text(const CliConfig& config, const Field& f) {
  CliConfig copy = config;
  return std::visit(overloaded{
                        [](int* p) { return std::to_string(*p); },
                        [](std::uint64_t* p) { return std::to_string(*p); },
                        [](double* p) { return format_double(*p); },
                        [](bool* p) { return std::string(*p ? "true" : "false"); },
                        [](std::string* p) { return *p; },
                        [](std::vector<int>* p) {
                          if (p->empty()) return std::string("none");
                          std::string s;
                          for (std::size_t i = 0; i < p->size(); ++i) {
                            if (i) s += ", ";
                            s += std::to_string((*p)[i]);
                          }
                          return s;
                        },
                        [](VarianceMode* p) { return mode_name(*p); },
                    },
                    f.bind(copy));
}

void validate(const CliConfig& c) {
  c.scenario.validate();
  if (c.covariance_samples < 1) throw ConfigError("covariance_samples", "must be >= 1");
  if (c.complexity_n_k < 0) throw ConfigError("complexity_n_k", "must be >= 0");
}

}  // namespace

CliConfig parse_config(std::istream& is) {
  CliConfig c;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) throw ConfigError(key.empty() ? "line " + std::to_string(line_no) : key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "given more than once");
    assign_text(c, *f, value);
  }
  validate(c);
  return c;
}

CliConfig parse_config_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  return parse_config(is);
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config", path.string() + ": " + e.what());
    }
    return config_from_json(j.contains("config") ? j.at("config") : j);
  }
  return parse_config(in);
}

std::vector<std::string> preset_names() { return {"paper_fig4", "smoke"}; }

CliConfig preset(std::string_view name) {
  CliConfig c;
  if (name == "paper_fig4") {
    c.scenario.name = "paper_fig4";
    return c;
  }
  if (name == "smoke") {
    c.scenario.name = "smoke";
    c.scenario.trials = 1;
    c.scenario.iterations = 10;
    c.covariance_samples = 10'000;
    return c;
  }
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

std::string to_config_text(const CliConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += field_text(config, f);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json to_json(const CliConfig& config) {
  CliConfig copy = config;
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& f : fields()) {
    std::visit(overloaded{
                   [&](VarianceMode* p) { j[f.key] = mode_name(*p); },
                   [&](auto* p) { j[f.key] = *p; },
               },
               f.bind(copy));
  }
  return j;
}

CliConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  CliConfig c;
  for (const auto& [key, value] : j.items()) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError(key, "unknown key");
    try {
      std::visit(overloaded{
                     [&](int* p) {
                       if (!value.is_number_integer()) throw ConfigError(key, "expected an integer");
                       *p = value.get<int>();
                     },
                     [&](std::uint64_t* p) {
                       if (!value.is_number_unsigned() && !value.is_number_integer()) {
                         throw ConfigError(key, "expected an unsigned integer");
                       }
                       *p = value.get<std::uint64_t>();
                     },
                     [&](double* p) {
                       if (!value.is_number()) throw ConfigError(key, "expected a number");
                       *p = value.get<double>();
                     },
                     [&](bool* p) {
                       if (!value.is_boolean()) throw ConfigError(key, "expected true/false");
                       *p = value.get<bool>();
                     },
                     [&](std::string* p) {
                       if (!value.is_string()) throw ConfigError(key, "expected a string");
                       *p = value.get<std::string>();
                     },
                     [&](std::vector<int>* p) {
                       if (!value.is_array()) throw ConfigError(key, "expected an array of integers");
                       *p = value.get<std::vector<int>>();
                     },
                     [&](VarianceMode* p) {
                       if (!value.is_string()) throw ConfigError(key, "expected online or offline");
                       *p = parse_mode(key, value.get<std::string>());
                     },
                 },
                 f->bind(c));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key, e.what());
    }
  }
  validate(c);
  return c;
}

}  // namespace dqa::cli
