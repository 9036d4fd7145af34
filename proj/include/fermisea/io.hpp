#pragma once
// Artifact plumbing: a stable-key-order JSON emitter with fixed float
// formatting, strict config parsing on top of nlohmann::json, RFC-4180 CSV,
// artifact directories, and binary field dumps with JSON sidecars.
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fermisea/grid.hpp"
#include "fermisea/potential.hpp"
#include "fermisea/reference_state.hpp"

namespace fermisea {

// every floating-point value in artifacts goes through this (17 significant digits)
std::string fmt_double(double v);

// Order-preserving JSON tree for reports. Keys serialize in insertion order,
// doubles via fmt_double, so identical inputs give byte-identical files.
class JsonNode {
 public:
  static JsonNode object();
  static JsonNode array();
  static JsonNode str(std::string s);
  static JsonNode num(double v);
  static JsonNode integer(std::int64_t v);
  static JsonNode boolean(bool b);

  JsonNode& set(const std::string& key, JsonNode v);  // object only, appends
  JsonNode& push(JsonNode v);                         // array only
  std::string dump(int indent = 2) const;

 private:
  enum class Kind { Object, Array, Str, Num, Int, Bool };
  Kind kind_ = Kind::Object;
  std::string s_;
  double d_ = 0.0;
  std::int64_t i_ = 0;
  bool b_ = false;
  std::vector<std::pair<std::string, JsonNode>> members_;
  std::vector<JsonNode> items_;
  void write(std::string& out, int indent, int depth) const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// strict parsing: every object level must list its allowed keys
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where);

ReferenceState parse_state(const nlohmann::json& j, const std::string& where);
RadialSymbol parse_symbol(const nlohmann::json& j, const std::string& where);
Potential parse_potential(const nlohmann::json& j, const std::string& where);
SobolevWeights parse_weights(const nlohmann::json& j, const std::string& where);
SpatialGrid parse_space_grid(const nlohmann::json& j, const std::string& where);
SpaceTimeGrid parse_st_grid(const nlohmann::json& j, const std::string& where);

JsonNode state_echo(const ReferenceState& st);
JsonNode symbol_echo(const RadialSymbol& w);
JsonNode potential_echo(const Potential& p);
JsonNode weights_echo(const SobolevWeights& w);
JsonNode space_grid_echo(const SpatialGrid& g);
JsonNode st_grid_echo(const SpaceTimeGrid& g);

// RFC 4180: CRLF rows, header mandatory, quoting only when needed
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void field(const std::string& s);
  void field(double v);
  void field(std::int64_t v);
  void end_row();

 private:
  std::ofstream out_;
  bool row_open_ = false;
  void raw(const std::string& s);
};

// creates <root>/<command>-<timestamp>[-k]/ (and its fields/ subdir)
std::string make_artifact_dir(const std::string& root, const std::string& command);

// raw interleaved little-endian doubles, time-node major, plus a sidecar
// describing the layout and grid
void write_field_binary(const std::string& dir, const std::string& name, const SpaceTimeField& f);

}  // namespace fermisea
