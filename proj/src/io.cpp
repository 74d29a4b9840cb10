#include "homodyne/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "homodyne/errors.hpp"

namespace homodyne {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

namespace {

double parse_double(std::string_view text, std::string_view context) {
  std::string_view t = text;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw Error(ErrorCode::parse_error, std::string(context) + ": '" + std::string(text) + "' is not a number");
  return v;
}

// Field table shared by the YAML and JSON codecs.
struct Field {
  const char* key;
  std::function<double&(DetectorModel&)> ref;
};

struct Section {
  const char* name;
  std::vector<Field> fields;
};

const std::vector<Section>& model_sections() {
  static const std::vector<Section> sections = {
      {"constants", {{"temperature_k", [](DetectorModel& m) -> double& { return m.constants.temperature; }}}},
      {"hbt",
       {{"f_t_hz", [](DetectorModel& m) -> double& { return m.hbt.f_T; }},
        {"beta", [](DetectorModel& m) -> double& { return m.hbt.beta; }},
        {"i_c_opt_a", [](DetectorModel& m) -> double& { return m.hbt.I_C_opt; }},
        {"v_be_v", [](DetectorModel& m) -> double& { return m.hbt.V_BE; }},
        {"r_b_ohm", [](DetectorModel& m) -> double& { return m.hbt.R_b; }},
        {"v_breakdown_v", [](DetectorModel& m) -> double& { return m.hbt.V_breakdown; }},
        {"c_ratio", [](DetectorModel& m) -> double& { return m.hbt.C_ratio; }},
        {"c_mu_fraction", [](DetectorModel& m) -> double& { return m.hbt.C_mu_fraction; }}}},
      {"tia",
       {{"r_f_ohm", [](DetectorModel& m) -> double& { return m.tia.R_F; }},
        {"r_c_ohm", [](DetectorModel& m) -> double& { return m.tia.R_C; }},
        {"r_e_ohm", [](DetectorModel& m) -> double& { return m.tia.R_E; }},
        {"v_cc1_v", [](DetectorModel& m) -> double& { return m.tia.V_cc1; }},
        {"v_cc2_v", [](DetectorModel& m) -> double& { return m.tia.V_cc2; }}}},
      {"input",
       {{"c_pd_each_f", [](DetectorModel& m) -> double& { return m.input.C_pd_each; }},
        {"c_interconnect_f", [](DetectorModel& m) -> double& { return m.input.C_interconnect; }},
        {"c_amp_in_f", [](DetectorModel& m) -> double& { return m.input.C_amp_in; }}}},
      {"frontend",
       {{"coupler_loss_db", [](DetectorModel& m) -> double& { return m.frontend.coupler_loss_db; }},
        {"split_t", [](DetectorModel& m) -> double& { return m.frontend.split_T; }},
        {"split_r", [](DetectorModel& m) -> double& { return m.frontend.split_R; }},
        {"responsivity_top_a_w", [](DetectorModel& m) -> double& { return m.frontend.responsivity_top; }},
        {"responsivity_bottom_a_w", [](DetectorModel& m) -> double& { return m.frontend.responsivity_bottom; }},
        {"qe_scale_bottom", [](DetectorModel& m) -> double& { return m.frontend.qe_scale_bottom; }}}},
      {"esa", {{"danl_dbm_hz", [](DetectorModel& m) -> double& { return m.esa_danl_dbm_hz; }}}},
  };
  return sections;
}

std::string_view top_arm_name(TopArm a) { return a == TopArm::transmission ? "transmission" : "reflection"; }

TopArm parse_top_arm(const std::string& s) {
  if (s == "transmission") return TopArm::transmission;
  if (s == "reflection") return TopArm::reflection;
  throw Error(ErrorCode::parse_error, "frontend.top_arm must be transmission or reflection, got '" + s + "'");
}

std::string_view mode_name(TraceMode m) { return m == TraceMode::analytic ? "analytic" : "monte_carlo"; }

TraceMode parse_mode(const std::string& s) {
  if (s == "analytic") return TraceMode::analytic;
  if (s == "monte_carlo") return TraceMode::monte_carlo;
  throw Error(ErrorCode::parse_error, "sweep.mode must be analytic or monte_carlo, got '" + s + "'");
}

double yaml_double(const YAML::Node& n, const std::string& where) {
  if (!n.IsScalar()) throw Error(ErrorCode::parse_error, where + " must be a number");
  return parse_double(n.Scalar(), where);
}

int yaml_int(const YAML::Node& n, const std::string& where) {
  const double v = yaml_double(n, where);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw Error(ErrorCode::parse_error, where + " must be an integer");
  return static_cast<int>(v);
}

bool yaml_bool(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw Error(ErrorCode::parse_error, where + " must be true or false");
  }
}

std::string yaml_string(const YAML::Node& n, const std::string& where) {
  if (!n.IsScalar()) throw Error(ErrorCode::parse_error, where + " must be a string");
  return n.Scalar();
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& known, const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw Error(ErrorCode::parse_error, "unknown key '" + where + key + "'");
  }
}

struct SweepField {
  const char* key;
  enum Kind { real, integer, boolean, mode } kind;
};

const std::vector<SweepField>& sweep_fields() {
  static const std::vector<SweepField> f = {
      {"power_start_dbm", SweepField::real}, {"power_stop_dbm", SweepField::real},
      {"n_steps", SweepField::integer},      {"rbw_hz", SweepField::real},
      {"f_lo_hz", SweepField::real},         {"f_hi_hz", SweepField::real},
      {"n_points", SweepField::integer},     {"balance", SweepField::boolean},
      {"mode", SweepField::mode},            {"mc_averages", SweepField::integer},
      {"cable_loss_db_per_ghz", SweepField::real},
  };
  return f;
}

double* sweep_real(LOSweep& s, std::string_view key) {
  if (key == "power_start_dbm") return &s.power_start_dbm;
  if (key == "power_stop_dbm") return &s.power_stop_dbm;
  if (key == "rbw_hz") return &s.rbw;
  if (key == "f_lo_hz") return &s.f_lo;
  if (key == "f_hi_hz") return &s.f_hi;
  if (key == "cable_loss_db_per_ghz") return &s.cable_loss_db_per_ghz;
  return nullptr;
}

int* sweep_int(LOSweep& s, std::string_view key) {
  if (key == "n_steps") return &s.n_steps;
  if (key == "n_points") return &s.n_points;
  if (key == "mc_averages") return &s.mc_averages;
  return nullptr;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

RunConfig parse_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::parse_error, std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig cfg;
  cfg.model = paper_device();
  cfg.model.name = "custom";
  cfg.model.notes.clear();
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw Error(ErrorCode::parse_error, "config root must be a mapping");

  std::set<std::string> top = {"name", "notes", "sweep"};
  for (const auto& s : model_sections()) top.insert(s.name);
  reject_unknown(root, top, "");

  if (root["name"]) cfg.model.name = yaml_string(root["name"], "name");
  if (root["notes"]) cfg.model.notes = yaml_string(root["notes"], "notes");
  for (const auto& section : model_sections()) {
    const auto node = root[section.name];
    if (!node) continue;
    if (!node.IsMap()) throw Error(ErrorCode::parse_error, std::string(section.name) + " must be a mapping");
    std::set<std::string> known;
    for (const auto& f : section.fields) known.insert(f.key);
    if (std::string_view(section.name) == "frontend") known.insert({"top_arm", "rin_dbc_hz"});
    reject_unknown(node, known, std::string(section.name) + ".");
    for (const auto& f : section.fields)
      if (node[f.key]) f.ref(cfg.model) = yaml_double(node[f.key], std::string(section.name) + "." + f.key);
    if (std::string_view(section.name) == "frontend") {
      if (node["top_arm"]) cfg.model.frontend.top_arm = parse_top_arm(yaml_string(node["top_arm"], "frontend.top_arm"));
      if (node["rin_dbc_hz"] && !node["rin_dbc_hz"].IsNull())
        cfg.model.frontend.rin_dbc_hz = yaml_double(node["rin_dbc_hz"], "frontend.rin_dbc_hz");
    }
  }

  if (const auto s = root["sweep"]) {
    if (!s.IsMap()) throw Error(ErrorCode::parse_error, "sweep must be a mapping");
    std::set<std::string> known;
    for (const auto& f : sweep_fields()) known.insert(f.key);
    reject_unknown(s, known, "sweep.");
    for (const auto& f : sweep_fields()) {
      if (!s[f.key]) continue;
      const std::string where = std::string("sweep.") + f.key;
      switch (f.kind) {
        case SweepField::real: *sweep_real(cfg.sweep, f.key) = yaml_double(s[f.key], where); break;
        case SweepField::integer: *sweep_int(cfg.sweep, f.key) = yaml_int(s[f.key], where); break;
        case SweepField::boolean: cfg.sweep.balance = yaml_bool(s[f.key], where); break;
        case SweepField::mode: cfg.sweep.mode = parse_mode(yaml_string(s[f.key], where)); break;
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::invalid_argument, "config file not found: " + path.string());
  return parse_config(read_file(path));
}

namespace {

void emit_model(YAML::Emitter& e, const DetectorModel& model) {
  DetectorModel m = model;
  e << YAML::Key << "name" << YAML::Value << m.name;
  if (!m.notes.empty()) e << YAML::Key << "notes" << YAML::Value << m.notes;
  for (const auto& section : model_sections()) {
    e << YAML::Key << section.name << YAML::Value << YAML::BeginMap;
    for (const auto& f : section.fields) e << YAML::Key << f.key << YAML::Value << format_double(f.ref(m));
    if (std::string_view(section.name) == "frontend") {
      e << YAML::Key << "top_arm" << YAML::Value << std::string(top_arm_name(m.frontend.top_arm));
      if (m.frontend.rin_dbc_hz)
        e << YAML::Key << "rin_dbc_hz" << YAML::Value << format_double(*m.frontend.rin_dbc_hz);
    }
    e << YAML::EndMap;
  }
}

}  // namespace

std::string model_to_yaml(const DetectorModel& model) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_model(e, model);
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_to_yaml(const RunConfig& config) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  emit_model(e, config.model);
  LOSweep s = config.sweep;
  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  for (const auto& f : sweep_fields()) {
    e << YAML::Key << f.key << YAML::Value;
    switch (f.kind) {
      case SweepField::real: e << format_double(*sweep_real(s, f.key)); break;
      case SweepField::integer: e << *sweep_int(s, f.key); break;
      case SweepField::boolean: e << s.balance; break;
      case SweepField::mode: e << std::string(mode_name(s.mode)); break;
    }
  }
  e << YAML::EndMap << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

json model_to_json(const DetectorModel& model) {
  DetectorModel m = model;
  json j;
  j["name"] = m.name;
  j["notes"] = m.notes;
  for (const auto& section : model_sections()) {
    json s = json::object();
    for (const auto& f : section.fields) s[f.key] = f.ref(m);
    if (std::string_view(section.name) == "frontend") {
      s["top_arm"] = std::string(top_arm_name(m.frontend.top_arm));
      s["rin_dbc_hz"] = m.frontend.rin_dbc_hz ? json(*m.frontend.rin_dbc_hz) : json(nullptr);
    }
    j[section.name] = std::move(s);
  }
  return j;
}

DetectorModel model_from_json(const json& j) {
  try {
    DetectorModel m;
    m.name = j.at("name").get<std::string>();
    m.notes = j.at("notes").get<std::string>();
    for (const auto& section : model_sections()) {
      const auto& s = j.at(section.name);
      for (const auto& f : section.fields) f.ref(m) = s.at(f.key).get<double>();
      if (std::string_view(section.name) == "frontend") {
        m.frontend.top_arm = parse_top_arm(s.at("top_arm").get<std::string>());
        if (!s.at("rin_dbc_hz").is_null()) m.frontend.rin_dbc_hz = s.at("rin_dbc_hz").get<double>();
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("model snapshot: ") + e.what());
  }
}

json sweep_to_json(const LOSweep& sweep) {
  LOSweep s = sweep;
  json j = json::object();
  for (const auto& f : sweep_fields()) {
    switch (f.kind) {
      case SweepField::real: j[f.key] = *sweep_real(s, f.key); break;
      case SweepField::integer: j[f.key] = *sweep_int(s, f.key); break;
      case SweepField::boolean: j[f.key] = s.balance; break;
      case SweepField::mode: j[f.key] = std::string(mode_name(s.mode)); break;
    }
  }
  return j;
}

LOSweep sweep_from_json(const json& j) {
  try {
    LOSweep s;
    for (const auto& f : sweep_fields()) {
      const auto& v = j.at(f.key);
      switch (f.kind) {
        case SweepField::real: *sweep_real(s, f.key) = v.get<double>(); break;
        case SweepField::integer: *sweep_int(s, f.key) = v.get<int>(); break;
        case SweepField::boolean: s.balance = v.get<bool>(); break;
        case SweepField::mode: s.mode = parse_mode(v.get<std::string>()); break;
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("sweep snapshot: ") + e.what());
  }
}

std::string model_hash(const DetectorModel& model) { return sha256_hex(model_to_json(model).dump()); }

void write_trace_csv(std::ostream& out, const SpectrumTrace& trace) {
  out << "# rbw_hz=" << format_double(trace.rbw) << "\n";
  out << "# stage=" << to_string(trace.stage) << "\n";
  out << "freq_hz,value,unit\n";
  const auto unit = to_string(trace.unit);
  for (std::size_t i = 0; i < trace.size(); ++i)
    out << format_double(trace.freqs[i]) << ',' << format_double(trace.values[i]) << ',' << unit << '\n';
}

SpectrumTrace read_trace_csv(std::istream& in) {
  SpectrumTrace t;
  std::string line;
  bool header = false, have_unit = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (!header && line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      const std::string value = line.substr(eq + 1);
      if (key == "rbw_hz") t.rbw = parse_double(value, "trace rbw_hz");
      else if (key == "stage") t.stage = parse_trace_stage(value);
      continue;
    }
    if (!header) {
      if (line != "freq_hz,value,unit")
        throw Error(ErrorCode::parse_error, "trace CSV header must be 'freq_hz,value,unit', got '" + line + "'");
      header = true;
      continue;
    }
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3)
      throw Error(ErrorCode::parse_error, "trace CSV row " + std::to_string(row) + " needs 3 columns");
    const auto unit = parse_trace_unit(cells[2]);
    if (have_unit && unit != t.unit)
      throw Error(ErrorCode::parse_error, "trace CSV mixes units at row " + std::to_string(row));
    t.unit = unit;
    have_unit = true;
    t.freqs.push_back(parse_double(cells[0], "trace freq_hz"));
    t.values.push_back(parse_double(cells[1], "trace value"));
  }
  if (!header) throw Error(ErrorCode::parse_error, "trace CSV has no header");
  try {
    check_trace(t);
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, std::string("trace CSV: ") + e.what());
  }
  return t;
}

SpectrumTrace read_trace_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_trace_csv(in);
}

void write_s21_csv(std::ostream& out, const S21Trace& s21) {
  out << "freq_hz,s21_db\n";
  for (std::size_t i = 0; i < s21.freqs.size(); ++i)
    out << format_double(s21.freqs[i]) << ',' << format_double(s21.s21_db[i]) << '\n';
}

S21Trace read_s21_csv(std::istream& in) {
  S21Trace s;
  std::string line;
  bool header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "freq_hz,s21_db")
        throw Error(ErrorCode::parse_error, "S21 CSV header must be 'freq_hz,s21_db', got '" + line + "'");
      header = true;
      continue;
    }
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw Error(ErrorCode::parse_error, "S21 CSV row " + std::to_string(row) + " needs 2 columns");
    const double f = parse_double(cells[0], "S21 freq_hz");
    if (!s.freqs.empty() && !(f > s.freqs.back()))
      throw Error(ErrorCode::parse_error, "S21 CSV freqs must be strictly increasing");
    s.freqs.push_back(f);
    s.s21_db.push_back(parse_double(cells[1], "S21 s21_db"));
  }
  if (!header || s.freqs.empty()) throw Error(ErrorCode::parse_error, "S21 CSV is empty");
  return s;
}

S21Trace read_s21_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_s21_csv(in);
}

void write_complex_csv(std::ostream& out, const ComplexSpectrum& spectrum) {
  out << "freq_hz,re_ohm,im_ohm\n";
  for (std::size_t i = 0; i < spectrum.freqs.size(); ++i)
    out << format_double(spectrum.freqs[i]) << ',' << format_double(spectrum.values[i].real()) << ','
        << format_double(spectrum.values[i].imag()) << '\n';
}

void write_noise_budget_csv(std::ostream& out, std::span<const NoiseTermRow> rows) {
  out << "freq_hz,term,value_a2_per_hz\n";
  for (const auto& r : rows) out << format_double(r.freq_hz) << ',' << r.term << ',' << format_double(r.value) << '\n';
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::io_error, "SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io_error, "cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace homodyne
