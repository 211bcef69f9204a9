#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "binary.hpp"
#include "latticekin/error.hpp"
#include "latticekin/scenarios.hpp"

namespace latticekin {

void RunConfig::validate() const {
  model.validate();
  scenario.validate();
  integrator.validate();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::validation_error, what); };
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end must be finite and >= 0");
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    if (!(snapshots[i] >= 0.0 && snapshots[i] <= t_end))
      fail(fmt::format("snapshot time {} outside [0, t_end = {}]", snapshots[i], t_end));
    if (i > 0 && !(snapshots[i] > snapshots[i - 1]))
      fail("snapshot times must be strictly increasing");
  }
  if (out_dir.empty()) fail("out_dir must not be empty");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const ModelParams &x = a.model, &y = b.model;
  return a.j_over_v == b.j_over_v && x.hopping == y.hopping && x.interaction == y.interaction &&
         x.filling_a == y.filling_a && x.filling_b == y.filling_b &&
         x.grid_size == y.grid_size && x.broadening == y.broadening &&
         x.channels == y.channels && a.scenario.kind == b.scenario.kind &&
         a.scenario.delta_f == b.scenario.delta_f && a.scenario.w1 == b.scenario.w1 &&
         a.scenario.w2 == b.scenario.w2 && a.scenario.custom_path == b.scenario.custom_path &&
         a.integrator.rel_tol == b.integrator.rel_tol &&
         a.integrator.abs_tol == b.integrator.abs_tol && a.t_end == b.t_end &&
         a.snapshots == b.snapshots && a.out_dir == b.out_dir && a.table_cache == b.table_cache;
}

namespace {

struct Value {
  std::string text;
  int line;
  int column;
};

[[noreturn]] void parse_fail(int line, int column, const std::string& what) {
  throw Error(ErrorCode::parse_error, fmt::format("line {}, column {}: {}", line, column, what));
}

std::string_view trim(std::string_view s, int* lead = nullptr) {
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  std::size_t e = s.size();
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  if (lead) *lead = static_cast<int>(b);
  return s.substr(b, e - b);
}

double parse_number(std::string_view s, int line, int column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    parse_fail(line, column, fmt::format("'{}' is not a number", s));
  return v;
}

int parse_int(std::string_view s, int line, int column) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    parse_fail(line, column, fmt::format("'{}' is not an integer", s));
  return v;
}

const std::vector<std::string_view> kKeys = {
    "J_over_V", "V",      "N",       "eta",   "channel_set", "scenario", "delta_f",    "w1",
    "w2",       "rel_tol", "abs_tol", "t_end", "snapshots",   "out_dir",  "table_cache"};

}  // namespace

RunConfig load_config(std::string_view text) {
  std::map<std::string, Value, std::less<>> values;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    int lead = 0;
    if (trim(line, &lead).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) parse_fail(line_no, lead + 1, "expected 'key = value'");
    int key_lead = 0, value_lead = 0;
    const std::string_view key = trim(line.substr(0, eq), &key_lead);
    std::string_view value = trim(line.substr(eq + 1), &value_lead);
    const int value_column = static_cast<int>(eq) + 2 + value_lead;
    if (key.empty()) parse_fail(line_no, static_cast<int>(eq) + 1, "missing key before '='");
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
      parse_fail(line_no, key_lead + 1, fmt::format("unknown key '{}'", key));
    if (values.count(key)) parse_fail(line_no, key_lead + 1, fmt::format("duplicate key '{}'", key));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    else if (!value.empty() && (value.front() == '"' || value.back() == '"'))
      parse_fail(line_no, value_column, "unterminated quoted value");
    values.emplace(std::string(key), Value{std::string(value), line_no, value_column});
    if (end == text.size()) break;
  }

  auto number = [&](std::string_view key) -> std::optional<double> {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return parse_number(it->second.text, it->second.line, it->second.column);
  };

  RunConfig c;
  const double v = number("V").value_or(1.0);
  const double ratio = number("J_over_V").value_or(1e-3);
  c.model.interaction = v;
  c.j_over_v = ratio;
  c.model.hopping = ratio * v;
  if (const auto it = values.find("N"); it != values.end())
    c.model.grid_size = parse_int(it->second.text, it->second.line, it->second.column);
  c.model.broadening = number("eta").value_or(2.0);
  if (const auto it = values.find("channel_set"); it != values.end()) {
    const std::string& s = it->second.text;
    if (s == "ph_only")
      c.model.channels = ChannelSet::ph_only;
    else if (s == "full")
      c.model.channels = ChannelSet::full;
    else if (s == "weak_coupling")
      c.model.channels = ChannelSet::weak_coupling;
    else
      parse_fail(it->second.line, it->second.column,
                 fmt::format("channel_set must be ph_only, full or weak_coupling (got '{}')", s));
  }
  if (const auto it = values.find("scenario"); it != values.end()) {
    const std::string& s = it->second.text;
    if (s == "ground")
      c.scenario.kind = ScenarioKind::ground;
    else if (s == "symmetric" || s == "symmetric_low_energy")
      c.scenario.kind = ScenarioKind::symmetric;
    else if (s == "asymmetric" || s == "asymmetric_center_diamond")
      c.scenario.kind = ScenarioKind::asymmetric;
    else if (s.rfind("custom:", 0) == 0) {
      c.scenario.kind = ScenarioKind::custom;
      c.scenario.custom_path = std::string(trim(std::string_view(s).substr(7)));
    } else
      parse_fail(it->second.line, it->second.column,
                 fmt::format("unknown scenario '{}' (ground, symmetric, asymmetric, "
                             "custom:<snapshot>)",
                             s));
  }
  c.scenario.delta_f = number("delta_f").value_or(c.scenario.delta_f);
  c.scenario.w1 = number("w1").value_or(c.scenario.w1);
  c.scenario.w2 = number("w2").value_or(c.scenario.w2);
  c.integrator.rel_tol = number("rel_tol").value_or(c.integrator.rel_tol);
  c.integrator.abs_tol = number("abs_tol").value_or(c.integrator.abs_tol);
  c.t_end = number("t_end").value_or(100.0);
  if (const auto it = values.find("snapshots"); it != values.end()) {
    c.snapshots.clear();
    const std::string& s = it->second.text;
    std::size_t start = 0;
    while (start <= s.size()) {
      const std::size_t comma = std::min(s.find(',', start), s.size());
      int lead = 0;
      const std::string_view item = trim(std::string_view(s).substr(start, comma - start), &lead);
      const int column = it->second.column + static_cast<int>(start) + lead;
      if (item == "t_end")
        c.snapshots.push_back(c.t_end);
      else
        c.snapshots.push_back(parse_number(item, it->second.line, column));
      start = comma + 1;
      if (comma == s.size()) break;
    }
  } else {
    c.snapshots = c.t_end > 0.0 ? std::vector<double>{0.0, c.t_end} : std::vector<double>{0.0};
  }
  if (const auto it = values.find("out_dir"); it != values.end()) c.out_dir = it->second.text;
  if (const auto it = values.find("table_cache"); it != values.end())
    c.table_cache = it->second.text;

  c.validate();
  return c;
}

RunConfig load_config_file(const std::string& path) {
  return load_config(detail::read_file(path));
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  put("V", fmt::format("{}", c.model.interaction));
  put("J_over_V", fmt::format("{}", c.j_over_v));
  put("N", fmt::format("{}", c.model.grid_size));
  put("eta", fmt::format("{}", c.model.broadening));
  put("channel_set", std::string(to_string(c.model.channels)));
  put("scenario", c.scenario.kind == ScenarioKind::custom
                      ? fmt::format("\"custom:{}\"", c.scenario.custom_path)
                      : std::string(to_string(c.scenario.kind)));
  put("delta_f", fmt::format("{}", c.scenario.delta_f));
  put("w1", fmt::format("{}", c.scenario.w1));
  put("w2", fmt::format("{}", c.scenario.w2));
  put("rel_tol", fmt::format("{}", c.integrator.rel_tol));
  put("abs_tol", fmt::format("{}", c.integrator.abs_tol));
  put("t_end", fmt::format("{}", c.t_end));
  std::string snaps;
  for (std::size_t i = 0; i < c.snapshots.size(); ++i)
    snaps += fmt::format("{}{}", i ? "," : "", c.snapshots[i]);
  put("snapshots", snaps);
  put("out_dir", fmt::format("\"{}\"", c.out_dir));
  if (!c.table_cache.empty()) put("table_cache", fmt::format("\"{}\"", c.table_cache));
  return out;
}

}  // namespace latticekin
