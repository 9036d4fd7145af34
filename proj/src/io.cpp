#include "fermisea/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace fermisea {

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\"");
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

JsonNode JsonNode::object() { return JsonNode(); }
JsonNode JsonNode::array() {
  JsonNode n;
  n.kind_ = Kind::Array;
  return n;
}
JsonNode JsonNode::str(std::string s) {
  JsonNode n;
  n.kind_ = Kind::Str;
  n.s_ = std::move(s);
  return n;
}
JsonNode JsonNode::num(double v) {
  JsonNode n;
  n.kind_ = Kind::Num;
  n.d_ = v;
  return n;
}
JsonNode JsonNode::integer(std::int64_t v) {
  JsonNode n;
  n.kind_ = Kind::Int;
  n.i_ = v;
  return n;
}
JsonNode JsonNode::boolean(bool b) {
  JsonNode n;
  n.kind_ = Kind::Bool;
  n.b_ = b;
  return n;
}

JsonNode& JsonNode::set(const std::string& key, JsonNode v) {
  if (kind_ != Kind::Object) throw ParameterError("JsonNode::set on a non-object");
  members_.emplace_back(key, std::move(v));
  return *this;
}

JsonNode& JsonNode::push(JsonNode v) {
  if (kind_ != Kind::Array) throw ParameterError("JsonNode::push on a non-array");
  items_.push_back(std::move(v));
  return *this;
}

namespace {
void escape_into(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;  // UTF-8 passes through
        }
    }
  }
  out += '"';
}
}  // namespace

void JsonNode::write(std::string& out, int indent, int depth) const {
  std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
  switch (kind_) {
    case Kind::Str: escape_into(out, s_); break;
    case Kind::Num: out += fmt_double(d_); break;
    case Kind::Int: out += std::to_string(i_); break;
    case Kind::Bool: out += b_ ? "true" : "false"; break;
    case Kind::Object: {
      if (members_.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      for (std::size_t i = 0; i < members_.size(); ++i) {
        out += pad;
        escape_into(out, members_[i].first);
        out += ": ";
        members_[i].second.write(out, indent, depth + 1);
        if (i + 1 < members_.size()) out += ',';
        out += '\n';
      }
      out += close_pad + "}";
      break;
    }
    case Kind::Array: {
      if (items_.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        out += pad;
        items_[i].write(out, indent, depth + 1);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      out += close_pad + "]";
      break;
    }
  }
}

std::string JsonNode::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  out += '\n';
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw ParameterError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ParameterError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ParameterError(where + ": unknown key \"" + it.key() + "\"");
  }
}

namespace {
double get_num(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParameterError(where + ": missing \"" + key + "\"");
  if (!j[key].is_number()) throw ParameterError(where + ": \"" + key + "\" must be a number");
  return j[key].get<double>();
}
double get_num_or(const nlohmann::json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ParameterError(where + ": \"" + key + "\" must be a number");
  return j[key].get<double>();
}
int get_int(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParameterError(where + ": missing \"" + key + "\"");
  if (!j[key].is_number_integer()) throw ParameterError(where + ": \"" + key + "\" must be an integer");
  return j[key].get<int>();
}
std::string get_str(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParameterError(where + ": missing \"" + key + "\"");
  if (!j[key].is_string()) throw ParameterError(where + ": \"" + key + "\" must be a string");
  return j[key].get<std::string>();
}
}  // namespace

ReferenceState parse_state(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"kind", "beta", "mu"}, where);
  std::string kind = get_str(j, "kind", where);
  if (kind == "fermi_dirac") return ReferenceState::fermi_dirac(get_num(j, "beta", where), get_num(j, "mu", where));
  if (kind == "zero_temperature") {
    if (j.contains("beta")) throw ParameterError(where + ": \"beta\" not accepted at zero temperature");
    return ReferenceState::zero_temperature(get_num(j, "mu", where));
  }
  throw ParameterError(where + ": unknown state kind \"" + kind + "\"");
}

RadialSymbol parse_symbol(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"shape", "amplitude", "sigma"}, where);
  std::string shape = get_str(j, "shape", where);
  double a = get_num(j, "amplitude", where);
  double s = get_num(j, "sigma", where);
  if (shape == "gaussian") return RadialSymbol::gaussian(a, s);
  if (shape == "vanishing_origin") return RadialSymbol::vanishing_origin(a, s);
  throw ParameterError(where + ": unknown symbol shape \"" + shape + "\"");
}

Potential parse_potential(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"w1", "w2"}, where);
  if (!j.contains("w1") || !j.contains("w2")) throw ParameterError(where + ": need \"w1\" and \"w2\"");
  return Potential{parse_symbol(j["w1"], where + ".w1"), parse_symbol(j["w2"], where + ".w2")};
}

SobolevWeights parse_weights(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"alpha", "beta_decay", "beta0"}, where);
  SobolevWeights w;
  w.alpha = get_num_or(j, "alpha", w.alpha, where);
  w.beta_decay = get_num_or(j, "beta_decay", w.beta_decay, where);
  w.beta0 = get_num_or(j, "beta0", w.beta0, where);
  return w;
}

SpatialGrid parse_space_grid(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"d", "n", "box"}, where);
  double box = get_num_or(j, "box", 16.0 * kPi, where);
  return SpatialGrid(get_int(j, "d", where), get_int(j, "n", where), box);
}

SpaceTimeGrid parse_st_grid(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"space", "horizon", "nt"}, where);
  if (!j.contains("space")) throw ParameterError(where + ": missing \"space\"");
  return SpaceTimeGrid(parse_space_grid(j["space"], where + ".space"), get_num(j, "horizon", where),
                       get_int(j, "nt", where));
}

JsonNode state_echo(const ReferenceState& st) {
  JsonNode n = JsonNode::object();
  switch (st.kind()) {
    case StateKind::FermiDirac:
      n.set("kind", JsonNode::str("fermi_dirac"));
      n.set("beta", JsonNode::num(st.beta()));
      n.set("mu", JsonNode::num(st.mu()));
      break;
    case StateKind::ZeroTemperature:
      n.set("kind", JsonNode::str("zero_temperature"));
      n.set("mu", JsonNode::num(st.mu()));
      break;
    case StateKind::Tabulated:
      n.set("kind", JsonNode::str("tabulated"));
      n.set("label", JsonNode::str(st.label()));
      break;
  }
  return n;
}

JsonNode symbol_echo(const RadialSymbol& w) {
  JsonNode n = JsonNode::object();
  n.set("label", JsonNode::str(w.label()));
  n.set("amplitude", JsonNode::num(w.amplitude()));
  return n;
}

JsonNode potential_echo(const Potential& p) {
  JsonNode n = JsonNode::object();
  n.set("w1", symbol_echo(p.w1));
  n.set("w2", symbol_echo(p.w2));
  return n;
}

JsonNode weights_echo(const SobolevWeights& w) {
  JsonNode n = JsonNode::object();
  n.set("alpha", JsonNode::num(w.alpha));
  n.set("beta_decay", JsonNode::num(w.beta_decay));
  n.set("beta0", JsonNode::num(w.beta0));
  return n;
}

JsonNode space_grid_echo(const SpatialGrid& g) {
  JsonNode n = JsonNode::object();
  n.set("d", JsonNode::integer(g.d()));
  n.set("n", JsonNode::integer(g.n()));
  n.set("box", JsonNode::num(g.box()));
  return n;
}

JsonNode st_grid_echo(const SpaceTimeGrid& g) {
  JsonNode n = JsonNode::object();
  n.set("space", space_grid_echo(g.space));
  n.set("horizon", JsonNode::num(g.horizon));
  n.set("nt", JsonNode::integer(g.nt));
  return n;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw ParameterError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    raw(header[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::raw(const std::string& s) {
  bool quote = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!quote) {
    out_ << s;
    return;
  }
  out_ << '"';
  for (char c : s) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
}

void CsvWriter::field(const std::string& s) {
  if (row_open_) out_ << ',';
  row_open_ = true;
  raw(s);
}

void CsvWriter::field(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  field(std::string(buf));
}

void CsvWriter::field(std::int64_t v) { field(std::to_string(v)); }

void CsvWriter::end_row() {
  out_ << "\r\n";
  row_open_ = false;
}

std::string make_artifact_dir(const std::string& root, const std::string& command) {
  namespace fs = std::filesystem;
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", &tm_utc);
  fs::path base = fs::path(root) / (command + "-" + stamp);
  fs::path dir = base;
  for (int k = 1; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
  fs::create_directories(dir / "fields");
  return dir.string();
}

void write_field_binary(const std::string& dir, const std::string& name, const SpaceTimeField& f) {
  namespace fs = std::filesystem;
  fs::path bin = fs::path(dir) / "fields" / (name + ".bin");
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw ParameterError("cannot open for writing: " + bin.string());
  // row-major over (time node, space point), each entry re then im
  for (int j = 0; j < f.grid.nodes(); ++j)
    for (int i = 0; i < f.grid.space.size(); ++i) {
      double re = f.v(j, i).real(), im = f.v(j, i).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof(double));
      out.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
  out.close();

  JsonNode side = JsonNode::object();
  side.set("file", JsonNode::str(name + ".bin"));
  side.set("dtype", JsonNode::str("float64"));
  side.set("complex_interleaved", JsonNode::boolean(true));
  side.set("order", JsonNode::str("time_node_major"));
  side.set("time_nodes", JsonNode::integer(f.grid.nodes()));
  side.set("space_points", JsonNode::integer(f.grid.space.size()));
  side.set("grid", st_grid_echo(f.grid));
  write_text_file((fs::path(dir) / "fields" / (name + ".json")).string(), side.dump());
}

}  // namespace fermisea
