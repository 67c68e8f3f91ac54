#include "dnp/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dnp::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError("config: " + field + ": " + message);
}

double require_number(const json& obj, const std::string& field) {
  if (!obj.contains(field) || !obj[field].is_number()) fail(field, "expected a number");
  return obj[field].get<double>();
}

double number_or(const json& obj, const std::string& field, double fallback) {
  if (!obj.contains(field)) return fallback;
  if (!obj[field].is_number()) fail(field, "expected a number");
  return obj[field].get<double>();
}

int int_or(const json& obj, const std::string& field, int fallback) {
  if (!obj.contains(field)) return fallback;
  if (!obj[field].is_number_integer()) fail(field, "expected an integer");
  return obj[field].get<int>();
}

std::string string_or(const json& obj, const std::string& field, const std::string& fallback) {
  if (!obj.contains(field)) return fallback;
  if (!obj[field].is_string()) fail(field, "expected a string");
  return obj[field].get<std::string>();
}

engine::RunMode parse_mode(const std::string& s) {
  if (s == "coherent") return engine::RunMode::Coherent;
  if (s == "incoherent") return engine::RunMode::Incoherent;
  if (s == "coherent_disentangle") return engine::RunMode::CoherentWithDisentangle;
  fail("run.modes", "unknown mode '" + s + "'");
}

void parse_system(const json& sys, ExperimentConfig& out) {
  const std::string electron = string_or(sys, "electron", "spin_half");
  if (electron == "spin_half")
    out.base_system.electron = model::ElectronModel::spin_half();
  else if (electron == "nv_effective")
    out.base_system.electron = model::ElectronModel::nv_effective();
  else
    fail("system.electron", "expected 'spin_half' or 'nv_effective'");

  const bool has_larmor = sys.contains("larmor_MHz");
  const bool has_field = sys.contains("field_mT");
  if (has_larmor == has_field)
    fail("system", "exactly one of larmor_MHz or field_mT is required");
  if (has_larmor) {
    out.base_system.f_n_MHz = require_number(sys, "larmor_MHz");
  } else {
    const double b0 = require_number(sys, "field_mT");
    const std::string species = string_or(sys, "species", "c13");
    if (species == "c13")
      out.base_system.f_n_MHz = model::larmor_from_field(b0, model::Species::C13);
    else if (species == "h1")
      out.base_system.f_n_MHz = model::larmor_from_field(b0, model::Species::H1);
    else
      fail("system.species", "expected 'c13' or 'h1'");
    if (out.cluster) out.cluster->params.b0_mT = b0;
  }

  const bool has_nuclei = sys.contains("nuclei");
  const bool has_cluster = sys.contains("cluster");
  if (has_nuclei == has_cluster)
    fail("system", "exactly one of nuclei or cluster is required");

  if (has_nuclei) {
    if (!sys["nuclei"].is_array() || sys["nuclei"].empty())
      fail("system.nuclei", "expected a non-empty array");
    int index = 1;
    for (const auto& item : sys["nuclei"]) {
      model::NuclearSpinParams nuc;
      nuc.a_par_MHz = number_or(item, "a_par_MHz", 0.0);
      nuc.a_perp_MHz = require_number(item, "a_perp_MHz");
      nuc.label = string_or(item, "label", std::to_string(index));
      if (nuc.a_perp_MHz < 0.0) fail("system.nuclei.a_perp_MHz", "must be non-negative");
      out.base_system.nuclei.push_back(nuc);
      ++index;
    }
  } else {
    const json& cl = sys["cluster"];
    ClusterGenConfig gen;
    gen.params.n_nuc = int_or(cl, "n_nuc", 6);
    gen.params.radius_nm = number_or(cl, "radius_nm", 2.0);
    gen.params.abundance = number_or(cl, "abundance", 0.011);
    gen.params.cap_MHz = number_or(cl, "a_perp_cap_MHz", 0.1);
    const std::string rule = string_or(cl, "cap_rule", "reject_configuration");
    if (rule == "reject_configuration")
      gen.params.rule = clusters::CapRule::RejectConfiguration;
    else if (rule == "filter_per_nucleus")
      gen.params.rule = clusters::CapRule::FilterPerNucleus;
    else
      fail("system.cluster.cap_rule", "unknown rule '" + rule + "'");
    gen.count = int_or(cl, "count", 1);
    if (gen.count < 0) fail("system.cluster.count", "must be >= 0");
    if (!has_field) fail("system", "cluster generation requires field_mT");
    gen.params.b0_mT = require_number(sys, "field_mT");
    out.cluster = gen;
    out.system_from_cluster = true;
  }
}

void parse_sequence(const json& seq, ExperimentConfig& out) {
  const std::string protocol = string_or(seq, "protocol", "pulsepol");
  if (protocol == "pulsepol")
    out.sequence.protocol = sequences::Protocol::PulsePol;
  else if (protocol == "novel")
    out.sequence.protocol = sequences::Protocol::Novel;
  else
    fail("sequence.protocol", "expected 'pulsepol' or 'novel'");

  const bool has_tau = seq.contains("tau_pol_us");
  const bool has_resonant = seq.contains("resonant");
  if (has_tau == has_resonant)
    fail("sequence", "exactly one of tau_pol_us or resonant is required");
  if (has_tau) {
    out.sequence.tau_pol_us = require_number(seq, "tau_pol_us");
    if (!(out.sequence.tau_pol_us > 0.0)) fail("sequence.tau_pol_us", "must be positive");
  } else {
    const std::string target = seq["resonant"].is_string() ? seq["resonant"].get<std::string>()
                                                           : std::string();
    if (target == "larmor")
      out.resonant = ResonantTarget::Larmor;
    else if (target == "precession")
      out.resonant = ResonantTarget::Precession;
    else
      fail("sequence.resonant", "expected 'larmor' or 'precession'");
    out.sequence.tau_pol_us = 1.0;   // resolved once the system is known
  }

  out.sequence.n_pol = int_or(seq, "n_pol", 1);
  if (out.sequence.n_pol < 1) fail("sequence.n_pol", "must be >= 1");
  if (seq.contains("f_t_MHz")) out.sequence.f_t_MHz = require_number(seq, "f_t_MHz");

  if (seq.contains("disentangle")) {
    const json& dis = seq["disentangle"];
    sequences::DisentangleSpec spec;
    spec.theta_e_rad = require_number(dis, "theta_e_rad");
    if (dis.contains("wait_us")) spec.wait_us = require_number(dis, "wait_us");
    out.sequence.disentangle = spec;
  }
}

void parse_run(const json& run, ExperimentConfig& out) {
  out.modes.clear();
  if (run.contains("modes")) {
    if (!run["modes"].is_array()) fail("run.modes", "expected an array");
    for (const auto& m : run["modes"]) out.modes.push_back(parse_mode(m.get<std::string>()));
  } else {
    out.modes.push_back(parse_mode(string_or(run, "mode", "coherent")));
  }
  if (run.contains("disentangle_theta_e_list_rad")) {
    for (const auto& v : run["disentangle_theta_e_list_rad"])
      out.disentangle_theta_e_list.push_back(v.get<double>());
  }
  out.n_rep = int_or(run, "n_rep", 1000);
  if (out.n_rep < 1) fail("run.n_rep", "must be >= 1");
  if (run.contains("seed")) out.master_seed = run["seed"].get<std::uint64_t>();
  out.jobs = int_or(run, "jobs", 0);
}

json to_canonical(const ExperimentConfig& c);

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  ExperimentConfig out;
  out.name = string_or(doc, "name", "experiment");

  if (!doc.contains("system")) fail("system", "missing block");
  parse_system(doc["system"], out);
  if (doc.contains("sequence")) parse_sequence(doc["sequence"], out);
  else fail("sequence", "missing block");
  if (doc.contains("run")) parse_run(doc["run"], out);

  if (doc.contains("grid")) {
    GridSpec g;
    if (doc["grid"].contains("a_perp_MHz"))
      for (const auto& v : doc["grid"]["a_perp_MHz"]) g.a_perp_MHz.push_back(v.get<double>());
    if (doc["grid"].contains("n_nuc"))
      for (const auto& v : doc["grid"]["n_nuc"]) g.n_nuc.push_back(v.get<int>());
    out.grid = g;
  }

  if (doc.contains("amplitudes")) {
    const json& a = doc["amplitudes"];
    AmplitudeScanConfig scan;
    const std::string kind = string_or(a, "scan", "tau_pol");
    if (kind == "tau_pol")
      scan.kind = amplitudes::ScanKind::TauPol;
    else if (kind == "a_perp")
      scan.kind = amplitudes::ScanKind::APerp;
    else if (kind == "target_frequency")
      scan.kind = amplitudes::ScanKind::TargetFrequency;
    else
      fail("amplitudes.scan", "unknown scan kind '" + kind + "'");
    scan.start = require_number(a, "start");
    scan.stop = require_number(a, "stop");
    scan.points = int_or(a, "points", 0);
    if (scan.points < 1) fail("amplitudes.points", "must be >= 1");
    out.scan = scan;
  }

  if (doc.contains("sweep")) {
    const json& s = doc["sweep"];
    SweepConfig sw;
    if (s.contains("b0_list_mT"))
      for (const auto& v : s["b0_list_mT"]) sw.b0_list_mT.push_back(v.get<double>());
    if (s.contains("n_rep_per_b0")) {
      for (const auto& [key, value] : s["n_rep_per_b0"].items())
        sw.n_rep_per_b0.emplace_back(std::stod(key), value.get<int>());
    }
    if (s.contains("modes"))
      for (const auto& m : s["modes"]) sw.modes.push_back(parse_mode(m.get<std::string>()));
    sw.disentangle_theta_e_rad = number_or(s, "disentangle_theta_e_rad", sw.disentangle_theta_e_rad);
    out.sweep = sw;
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    out.out_dir = string_or(o, "dir", out.out_dir);
    if (o.contains("formats")) {
      out.write_csv = false;
      out.write_json = false;
      for (const auto& f : o["formats"]) {
        const std::string fmt = f.get<std::string>();
        if (fmt == "csv") out.write_csv = true;
        else if (fmt == "json") out.write_json = true;
        else fail("output.formats", "unknown format '" + fmt + "'");
      }
    }
  }

  if (!out.system_from_cluster) {
    out.base_system.validate();
    out.sequence.validate();
  }
  for (auto mode : out.modes)
    if (mode == engine::RunMode::CoherentWithDisentangle && !out.sequence.disentangle)
      fail("run.modes", "coherent_disentangle requires a sequence.disentangle block");
  return out;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

json to_canonical(const ExperimentConfig& c) {
  json doc;
  doc["name"] = c.name;
  json sys;
  sys["electron"] =
      c.base_system.electron.kind == model::ElectronKind::SpinHalf ? "spin_half" : "nv_effective";
  if (c.system_from_cluster) {
    const auto& gen = *c.cluster;
    sys["cluster"] = {{"n_nuc", gen.params.n_nuc},
                      {"radius_nm", gen.params.radius_nm},
                      {"abundance", gen.params.abundance},
                      {"a_perp_cap_MHz", gen.params.cap_MHz},
                      {"cap_rule", gen.params.rule == clusters::CapRule::RejectConfiguration
                                       ? "reject_configuration"
                                       : "filter_per_nucleus"},
                      {"count", gen.count},
                      {"b0_mT", gen.params.b0_mT}};
  } else {
    sys["larmor_MHz"] = c.base_system.f_n_MHz;
    json nuclei = json::array();
    for (const auto& nuc : c.base_system.nuclei)
      nuclei.push_back(
          {{"a_par_MHz", nuc.a_par_MHz}, {"a_perp_MHz", nuc.a_perp_MHz}, {"label", nuc.label}});
    sys["nuclei"] = nuclei;
  }
  doc["system"] = sys;

  json seq;
  seq["protocol"] = c.sequence.protocol == sequences::Protocol::PulsePol ? "pulsepol" : "novel";
  seq["tau_pol_us"] = c.sequence.tau_pol_us;
  seq["resonant"] = c.resonant == ResonantTarget::None        ? "none"
                    : c.resonant == ResonantTarget::Larmor    ? "larmor"
                                                               : "precession";
  seq["n_pol"] = c.sequence.n_pol;
  if (c.sequence.f_t_MHz) seq["f_t_MHz"] = *c.sequence.f_t_MHz;
  if (c.sequence.disentangle) {
    json dis;
    dis["theta_e_rad"] = c.sequence.disentangle->theta_e_rad;
    if (c.sequence.disentangle->wait_us) dis["wait_us"] = *c.sequence.disentangle->wait_us;
    seq["disentangle"] = dis;
  }
  doc["sequence"] = seq;

  json run;
  json modes = json::array();
  for (auto m : c.modes)
    modes.push_back(m == engine::RunMode::Coherent         ? "coherent"
                    : m == engine::RunMode::Incoherent     ? "incoherent"
                                                            : "coherent_disentangle");
  run["modes"] = modes;
  if (!c.disentangle_theta_e_list.empty())
    run["disentangle_theta_e_list_rad"] = c.disentangle_theta_e_list;
  run["n_rep"] = c.n_rep;
  run["seed"] = c.master_seed;
  doc["run"] = run;

  if (c.grid) {
    doc["grid"] = {{"a_perp_MHz", c.grid->a_perp_MHz}, {"n_nuc", c.grid->n_nuc}};
  }
  if (c.scan) {
    const char* kind = c.scan->kind == amplitudes::ScanKind::TauPol ? "tau_pol"
                       : c.scan->kind == amplitudes::ScanKind::APerp ? "a_perp"
                                                                     : "target_frequency";
    doc["amplitudes"] = {
        {"scan", kind}, {"start", c.scan->start}, {"stop", c.scan->stop}, {"points", c.scan->points}};
  }
  if (c.sweep) {
    json sw;
    sw["b0_list_mT"] = c.sweep->b0_list_mT;
    json reps = json::object();
    for (const auto& [b0, n] : c.sweep->n_rep_per_b0) reps[std::to_string(b0)] = n;
    sw["n_rep_per_b0"] = reps;
    json modes2 = json::array();
    for (auto m : c.sweep->modes)
      modes2.push_back(m == engine::RunMode::Coherent         ? "coherent"
                       : m == engine::RunMode::Incoherent     ? "incoherent"
                                                               : "coherent_disentangle");
    sw["modes"] = modes2;
    sw["disentangle_theta_e_rad"] = c.sweep->disentangle_theta_e_rad;
    doc["sweep"] = sw;
  }
  return doc;
}

}  // namespace

std::string ExperimentConfig::canonical_json() const { return to_canonical(*this).dump(); }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical_json()); }

std::string preset_path(const std::string& name, const std::string& preset_dir) {
  for (char ch : name)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'))
      throw ConfigError("preset: invalid name '" + name + "'");
  return preset_dir + "/" + name + ".json";
}

}  // namespace dnp::config
