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

#pragma once

// File formats of the command-line tool: pulse, grid and segment JSON, CSV
// maps and key=value run configs. Every number is written with 17
// significant digits and every file is written atomically.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ensctl/composite.hpp"
#include "ensctl/ensemble_sim.hpp"
#include "ensctl/errors.hpp"

namespace ensctl::cli {

// Malformed file content. what() reads "<source>:<line>: <message>".
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

std::string format_double(double x);

// Writes to a sibling temporary, then renames over path.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// JSON text with two-space indentation and 17-digit numbers. Non-finite
// numbers become null.
std::string dump_json(const nlohmann::json& j);

// Parses JSON text, mapping syntax errors to a line-referenced ParseError.
nlohmann::json parse_json(const std::string& text, const std::string& source);

std::string pulse_to_json(const sim::ControlSequence& pulse);
sim::ControlSequence pulse_from_json(const std::string& text, const std::string& source);
sim::ControlSequence read_pulse(const std::string& path);

// {"axes": {"omega": {"min", "max", "n"} | {"values": [...]}, ...}}
std::string grid_to_json(const sim::DispersionGrid& grid);
sim::DispersionGrid grid_from_json(const std::string& text, const std::string& source);
sim::DispersionGrid read_grid(const std::string& path);

std::string segments_to_json(const std::vector<composite::TwoQubitSegment>& segments, double J0);
std::vector<composite::TwoQubitSegment> segments_from_json(const std::string& text, const std::string& source);

// Header omega,epsilon[,theta][,J],fidelity; rows in grid order.
std::string fidelity_csv(const sim::FidelityMap& map);
void emit_fidelity_csv(const sim::FidelityMap& map, const std::string& path);
// Axis values are taken in order of first appearance.
sim::FidelityMap parse_fidelity_csv(const std::string& text, const std::string& source);

// Header omega,epsilon[,theta][,J],x,y,z.
std::string state_csv(const sim::BlochEnsemble& state);

// Pattern profile: header omega,flip[,weight]; omega in rad/s, flip in rad.
struct ProfileRows {
  std::vector<double> omega, flip, weight;
};
ProfileRows parse_profile_csv(const std::string& text, const std::string& source);

// key=value lines; '#' starts a comment, blank lines are skipped. Duplicate
// keys are rejected. Keys are returned with their line numbers.
struct ConfigEntry {
  std::string value;
  int line = 0;
};
std::map<std::string, ConfigEntry> parse_config(const std::string& text, const std::string& source);

std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

}  // namespace ensctl::cli
