// Copyright 2026 The ensctl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ensctl_cli/formats.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace ensctl::cli {

using nlohmann::json;

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : InvalidInput(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidInput("cannot write " + path);
    f << content;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw InvalidInput("cannot write " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InvalidInput("cannot write " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

bool is_scalar_array(const json& j) {
  return std::all_of(j.begin(), j.end(), [](const json& e) { return !e.is_structured(); });
}

void dump_into(const json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(k).dump() + ": ";
        dump_into(v, indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (is_scalar_array(j)) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_into(j[i], indent + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad_in;
        dump_into(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

int line_at(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Line of the first occurrence of "key", or 1 when absent.
int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

// Line of element k of the array value of "key".
int line_of_element(const std::string& text, const std::string& key, std::size_t k) {
  auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 1;
  pos = text.find('[', pos);
  if (pos == std::string::npos) return line_of_key(text, key);
  int depth = 0;
  std::size_t index = 0;
  bool in_string = false;
  bool at_element = true;
  for (std::size_t i = pos; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '[' || c == '{') {
      ++depth;
      if (depth == 1) continue;
    } else if (c == ']' || c == '}') {
      if (--depth == 0) break;
    } else if (c == ',' && depth == 1) {
      ++index;
      at_element = true;
      continue;
    }
    if (c == '"') in_string = true;
    if (depth >= 1 && at_element && !std::isspace(static_cast<unsigned char>(c))) {
      if (index == k) return line_at(text, i);
      at_element = false;
    }
  }
  return line_of_key(text, key);
}

double require_number(const json& obj, const std::string& key, const std::string& text, const std::string& source) {
  if (!obj.contains(key)) throw ParseError(source, 1, "missing \"" + key + "\"");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(source, line_of_key(text, key), "\"" + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(source, line_of_key(text, key), "\"" + key + "\" must be finite");
  return x;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct CsvLine {
  int line;
  std::vector<std::string> cells;
};

// Non-blank lines of a CSV text, split into trimmed cells.
std::vector<CsvLine> csv_lines(const std::string& text) {
  std::vector<CsvLine> out;
  std::istringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    out.push_back({line, split(trim(raw), ',')});
  }
  return out;
}

std::vector<std::string> grid_columns(const sim::DispersionGrid& grid) {
  std::vector<std::string> cols{"omega", "epsilon"};
  if (grid.has_axis("theta")) cols.push_back("theta");
  if (grid.has_axis("J")) cols.push_back("J");
  return cols;
}

double coordinate(const sim::GridPoint& p, const std::string& name) {
  if (name == "omega") return p.omega;
  if (name == "epsilon") return p.epsilon;
  if (name == "theta") return p.theta;
  return p.J;
}

std::string csv_row(const std::vector<double>& values) {
  std::string row;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) row += ',';
    row += format_double(values[i]);
  }
  return row + "\n";
}

}  // namespace

std::string dump_json(const json& j) {
  std::string out;
  dump_into(j, 0, out);
  return out + "\n";
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(source, line_at(text, byte), "malformed JSON");
  }
}

std::string pulse_to_json(const sim::ControlSequence& pulse) {
  json j;
  j["schema_version"] = 1;
  j["dt"] = pulse.dt;
  j["amplitude_unit"] = "rad_per_s";
  json samples = json::array();
  for (const auto& s : pulse.samples) samples.push_back(json::array({s.u, s.v}));
  j["samples"] = samples;
  if (pulse.a_max) j["a_max"] = *pulse.a_max;
  return dump_json(j);
}

sim::ControlSequence pulse_from_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) throw ParseError(source, 1, "pulse file must be a JSON object");
  if (!j.contains("schema_version")) throw ParseError(source, 1, "missing \"schema_version\"");
  const auto& version = j.at("schema_version");
  if (!version.is_number_integer() || version.get<long long>() != 1)
    throw ParseError(source, line_of_key(text, "schema_version"), "unsupported schema_version");
  if (!j.contains("amplitude_unit")) throw ParseError(source, 1, "missing \"amplitude_unit\"");
  const auto& unit = j.at("amplitude_unit");
  if (!unit.is_string() || unit.get<std::string>() != "rad_per_s")
    throw ParseError(source, line_of_key(text, "amplitude_unit"), "amplitude_unit must be \"rad_per_s\"");
  sim::ControlSequence pulse;
  pulse.dt = require_number(j, "dt", text, source);
  if (!(pulse.dt > 0.0)) throw ParseError(source, line_of_key(text, "dt"), "dt must be positive");
  if (!j.contains("samples")) throw ParseError(source, 1, "missing \"samples\"");
  const auto& samples = j.at("samples");
  if (!samples.is_array() || samples.empty())
    throw ParseError(source, line_of_key(text, "samples"), "samples must be a nonempty array");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
      throw ParseError(source, line_of_element(text, "samples", k), "sample " + std::to_string(k) + " must be [u, v]");
    pulse.samples.push_back({s[0].get<double>(), s[1].get<double>()});
  }
  if (j.contains("a_max") && !j.at("a_max").is_null()) pulse.a_max = require_number(j, "a_max", text, source);
  try {
    pulse.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(source, line_of_key(text, "samples"), e.what());
  }
  return pulse;
}

sim::ControlSequence read_pulse(const std::string& path) { return pulse_from_json(read_file(path), path); }

std::string grid_to_json(const sim::DispersionGrid& grid) {
  json axes = json::object();
  for (const auto& a : grid.axes()) axes[a.name] = {{"values", a.values}};
  return dump_json({{"axes", axes}});
}

sim::DispersionGrid grid_from_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object() || !j.contains("axes") || !j.at("axes").is_object())
    throw ParseError(source, 1, "grid file must contain an \"axes\" object");
  std::vector<sim::Axis> axes;
  for (const auto& [name, spec] : j.at("axes").items()) {
    const int line = line_of_key(text, name);
    if (name != "omega" && name != "epsilon" && name != "theta" && name != "J")
      throw ParseError(source, line, "unknown axis \"" + name + "\"");
    if (!spec.is_object()) throw ParseError(source, line, "axis \"" + name + "\" must be an object");
    sim::Axis axis{name, {}};
    if (spec.contains("values")) {
      const auto& v = spec.at("values");
      if (!v.is_array() || v.empty()) throw ParseError(source, line, "axis \"" + name + "\" values must be nonempty");
      for (const auto& x : v) {
        if (!x.is_number()) throw ParseError(source, line, "axis \"" + name + "\" values must be numbers");
        axis.values.push_back(x.get<double>());
      }
    } else {
      for (const char* key : {"min", "max", "n"})
        if (!spec.contains(key)) throw ParseError(source, line, "axis \"" + name + "\" missing \"" + key + "\"");
      const auto& n = spec.at("n");
      if (!n.is_number_integer() || n.get<long long>() < 1)
        throw ParseError(source, line, "axis \"" + name + "\" needs integer n >= 1");
      if (!spec.at("min").is_number() || !spec.at("max").is_number())
        throw ParseError(source, line, "axis \"" + name + "\" min and max must be numbers");
      const double lo = spec.at("min").get<double>();
      const double hi = spec.at("max").get<double>();
      if (!(lo <= hi)) throw ParseError(source, line, "axis \"" + name + "\" needs min <= max");
      axis.values = sim::linspace(lo, hi, static_cast<int>(n.get<long long>()));
    }
    axes.push_back(std::move(axis));
  }
  try {
    return sim::DispersionGrid(std::move(axes));
  } catch (const InvalidInput& e) {
    throw ParseError(source, line_of_key(text, "axes"), e.what());
  }
}

sim::DispersionGrid read_grid(const std::string& path) { return grid_from_json(read_file(path), path); }

std::string segments_to_json(const std::vector<composite::TwoQubitSegment>& segments, double J0) {
  using Kind = composite::TwoQubitSegment::Kind;
  json list = json::array();
  for (const auto& s : segments) {
    json e;
    switch (s.kind) {
      case Kind::coupling:
        e = {{"kind", "coupling"}, {"duration", s.duration}};
        break;
      case Kind::local:
        e = {{"kind", "local"}, {"qubit", s.qubit}, {"axis", std::string(1, s.axis)}, {"angle", s.angle}};
        break;
      case Kind::tensor:
        e = {{"kind", "tensor"}, {"duration", s.duration}, {"alpha", s.alpha}, {"beta", s.beta}, {"gamma", s.gamma}};
        break;
    }
    list.push_back(e);
  }
  return dump_json({{"schema_version", 1}, {"J0", J0}, {"segments", list}});
}

std::vector<composite::TwoQubitSegment> segments_from_json(const std::string& text, const std::string& source) {
  using Kind = composite::TwoQubitSegment::Kind;
  const json j = parse_json(text, source);
  if (!j.is_object() || !j.contains("schema_version") || j.at("schema_version") != 1)
    throw ParseError(source, line_of_key(text, "schema_version"), "unsupported or missing schema_version");
  if (!j.contains("segments") || !j.at("segments").is_array())
    throw ParseError(source, 1, "missing \"segments\" array");
  std::vector<composite::TwoQubitSegment> out;
  const auto& list = j.at("segments");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const auto& e = list[k];
    const int line = line_of_element(text, "segments", k);
    const std::string ks = e.is_object() && e.contains("kind") && e.at("kind").is_string() ? e.at("kind").get<std::string>() : "";
    composite::TwoQubitSegment s;
    try {
      if (ks == "coupling") {
        s.kind = Kind::coupling;
        s.duration = e.at("duration").get<double>();
      } else if (ks == "local") {
        s.kind = Kind::local;
        s.qubit = e.at("qubit").get<int>();
        const auto axis = e.at("axis").get<std::string>();
        if (axis.size() != 1 || std::string("xyz").find(axis[0]) == std::string::npos) throw InvalidInput("bad axis");
        s.axis = axis[0];
        s.angle = e.at("angle").get<double>();
      } else if (ks == "tensor") {
        s.kind = Kind::tensor;
        s.duration = e.at("duration").get<double>();
        s.alpha = e.at("alpha").get<double>();
        s.beta = e.at("beta").get<double>();
        s.gamma = e.at("gamma").get<double>();
      } else {
        throw InvalidInput("bad kind");
      }
    } catch (const std::exception&) {
      throw ParseError(source, line, "malformed segment " + std::to_string(k));
    }
    out.push_back(s);
  }
  return out;
}

std::string fidelity_csv(const sim::FidelityMap& map) {
  if (map.values.size() != map.grid.size()) throw InvalidInput("fidelity map size does not match its grid");
  const auto cols = grid_columns(map.grid);
  std::string out;
  for (const auto& c : cols) out += c + ",";
  out += "fidelity\n";
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const auto p = map.grid.point(i);
    std::vector<double> row;
    for (const auto& c : cols) row.push_back(coordinate(p, c));
    row.push_back(map.values[i]);
    out += csv_row(row);
  }
  return out;
}

void emit_fidelity_csv(const sim::FidelityMap& map, const std::string& path) { write_atomic(path, fidelity_csv(map)); }

sim::FidelityMap parse_fidelity_csv(const std::string& text, const std::string& source) {
  const auto lines = csv_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "empty fidelity map");
  const auto& header = lines[0].cells;
  if (header.size() < 3 || header[0] != "omega" || header[1] != "epsilon" || header.back() != "fidelity")
    throw ParseError(source, lines[0].line, "header must read omega,epsilon[,theta][,J],fidelity");
  const std::vector<std::string> cols(header.begin(), header.end() - 1);
  for (std::size_t c = 2; c < cols.size(); ++c)
    if ((cols[c] != "theta" && cols[c] != "J") || std::count(cols.begin(), cols.end(), cols[c]) != 1)
      throw ParseError(source, lines[0].line, "unexpected column \"" + cols[c] + "\"");
  std::vector<std::vector<double>> coords;
  std::vector<int> line_numbers;
  std::vector<double> values;
  std::vector<sim::Axis> axes;
  for (const auto& c : cols) axes.push_back({c, {}});
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.cells.size() != header.size())
      throw ParseError(source, l.line, "expected " + std::to_string(header.size()) + " columns");
    std::vector<double> row(l.cells.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      if (!parse_number(l.cells[c], row[c])) throw ParseError(source, l.line, "not a number: \"" + l.cells[c] + "\"");
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto& v = axes[c].values;
      if (std::find(v.begin(), v.end(), row[c]) == v.end()) v.push_back(row[c]);
    }
    values.push_back(row.back());
    row.pop_back();
    coords.push_back(std::move(row));
    line_numbers.push_back(l.line);
  }
  if (values.empty()) throw ParseError(source, lines[0].line, "no data rows");
  sim::FidelityMap map;
  try {
    map.grid = sim::DispersionGrid(axes);
  } catch (const InvalidInput& e) {
    throw ParseError(source, lines[0].line, e.what());
  }
  if (map.grid.size() != values.size())
    throw ParseError(source, line_numbers.back(), "rows do not form a full grid");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto p = map.grid.point(i);
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (coordinate(p, cols[c]) != coords[i][c]) throw ParseError(source, line_numbers[i], "row out of grid order");
  }
  map.values = std::move(values);
  return map;
}

std::string state_csv(const sim::BlochEnsemble& state) {
  const auto cols = grid_columns(state.grid);
  std::string out;
  for (const auto& c : cols) out += c + ",";
  out += "x,y,z\n";
  for (std::size_t i = 0; i < state.states.size(); ++i) {
    const auto p = state.grid.point(i);
    std::vector<double> row;
    for (const auto& c : cols) row.push_back(coordinate(p, c));
    for (int k = 0; k < 3; ++k) row.push_back(state.states[i](k));
    out += csv_row(row);
  }
  return out;
}

ProfileRows parse_profile_csv(const std::string& text, const std::string& source) {
  const auto lines = csv_lines(text);
  if (lines.empty()) throw ParseError(source, 1, "empty profile");
  const auto& header = lines[0].cells;
  const bool weighted = header.size() == 3 && header[2] == "weight";
  if (header.size() < 2 || header[0] != "omega" || header[1] != "flip" || (header.size() == 3 && !weighted) ||
      header.size() > 3)
    throw ParseError(source, lines[0].line, "header must read omega,flip[,weight]");
  ProfileRows rows;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto& l = lines[r];
    if (l.cells.size() != header.size())
      throw ParseError(source, l.line, "expected " + std::to_string(header.size()) + " columns");
    std::vector<double> v(l.cells.size());
    for (std::size_t c = 0; c < v.size(); ++c)
      if (!parse_number(l.cells[c], v[c])) throw ParseError(source, l.line, "not a number: \"" + l.cells[c] + "\"");
    rows.omega.push_back(v[0]);
    rows.flip.push_back(v[1]);
    if (weighted) {
      if (v[2] < 0.0) throw ParseError(source, l.line, "weight must be nonnegative");
      rows.weight.push_back(v[2]);
    }
  }
  if (rows.omega.empty()) throw ParseError(source, lines[0].line, "no data rows");
  return rows;
}

std::map<std::string, ConfigEntry> parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, ConfigEntry> out;
  std::istringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, line, "expected key=value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
        }))
      throw ParseError(source, line, "invalid key \"" + key + "\"");
    if (out.count(key)) throw ParseError(source, line, "duplicate key \"" + key + "\"");
    out[key] = {value, line};
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& cell : split(text, ',')) {
    double x;
    if (!parse_number(cell, x)) throw InvalidInput(what + ": not a number: \"" + cell + "\"");
    out.push_back(x);
  }
  if (out.empty()) throw InvalidInput(what + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& cell : split(text, ',')) {
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(cell.c_str(), &end, 10);
    if (cell.empty() || errno != 0 || end != cell.c_str() + cell.size() || v < -1000000 || v > 1000000)
      throw InvalidInput(what + ": not an integer: \"" + cell + "\"");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw InvalidInput(what + ": empty list");
  return out;
}

}  // namespace ensctl::cli
