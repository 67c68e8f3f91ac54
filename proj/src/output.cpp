#include "dnp/output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dnp::output {

using nlohmann::json;

const char* kCodeVersion = "dnpsim 1.0.0";

std::string format_csv_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ensure_dir(const std::string& path) { std::filesystem::create_directories(path); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw std::invalid_argument("CsvWriter: row width mismatch");
  rows_.push_back(cells);
}

std::string CsvWriter::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << "\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void CsvWriter::write(const std::string& path) const { write_text_file(path, str()); }

const std::vector<std::string> kSpectrumColumns = {
    "scan_value",       "alpha_minus_abs", "alpha_plus_abs", "alpha_plus_z_abs",
    "alpha_minus_z_abs", "beta_pm_abs",     "beta_pp_abs",    "beta_e_abs",
    "beta_z_abs",        "beta_zz_abs",     "config_hash"};

CsvWriter spectrum_csv(const std::vector<amplitudes::SpectrumRow>& rows,
                       const std::string& config_hash) {
  CsvWriter csv(kSpectrumColumns);
  for (const auto& row : rows) {
    const auto& a = row.amps;
    csv.add_row({format_csv_value(row.scan_value), format_csv_value(std::abs(a.alpha_minus)),
                 format_csv_value(std::abs(a.alpha_plus)),
                 format_csv_value(std::abs(a.alpha_plus_z)),
                 format_csv_value(std::abs(a.alpha_minus_z)),
                 format_csv_value(std::abs(a.beta_pm)), format_csv_value(std::abs(a.beta_pp)),
                 format_csv_value(std::abs(a.beta_e)), format_csv_value(std::abs(a.beta_z)),
                 format_csv_value(std::abs(a.beta_zz)), config_hash});
  }
  return csv;
}

std::string cluster_config_json(const clusters::ClusterConfig& config,
                                const std::string& config_hash) {
  json doc;
  doc["seed"] = config.seed;
  doc["b0_mT"] = config.b0_mT;
  doc["b0_direction"] = config.b0_direction;
  doc["mean_a_perp_MHz"] = config.mean_a_perp();
  doc["config_hash"] = config_hash;
  json nuclei = json::array();
  for (const auto& nuc : config.selected) {
    nuclei.push_back({{"position_nm", nuc.site.position_nm},
                      {"a_par_MHz", nuc.a_par_MHz},
                      {"a_perp_MHz", nuc.a_perp_MHz}});
  }
  doc["nuclei"] = nuclei;
  return doc.dump(2) + "\n";
}

clusters::ClusterConfig cluster_config_from_json(const std::string& text) {
  const json doc = json::parse(text);
  clusters::ClusterConfig config;
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.b0_mT = doc.at("b0_mT").get<double>();
  config.b0_direction = doc.at("b0_direction").get<std::array<double, 3>>();
  for (const auto& item : doc.at("nuclei")) {
    clusters::SelectedNucleus nuc;
    nuc.site.position_nm = item.at("position_nm").get<std::array<double, 3>>();
    nuc.a_par_MHz = item.at("a_par_MHz").get<double>();
    nuc.a_perp_MHz = item.at("a_perp_MHz").get<double>();
    config.selected.push_back(nuc);
  }
  return config;
}

CsvWriter trajectory_csv(const engine::RunResult& result, const std::string& config_hash) {
  std::vector<std::string> columns = {"rep"};
  for (int l = 0; l < result.n_nuc(); ++l) columns.push_back("spin" + std::to_string(l + 1));
  columns.push_back("total_P");
  columns.push_back("config_hash");

  CsvWriter csv(columns);
  for (int rep = 0; rep <= result.n_rep; ++rep) {
    std::vector<std::string> row = {std::to_string(rep)};
    for (int l = 0; l < result.n_nuc(); ++l)
      row.push_back(format_csv_value(result.per_spin_polarization(rep, l)));
    row.push_back(format_csv_value(result.total_polarization(rep)));
    row.push_back(config_hash);
    csv.add_row(row);
  }
  return csv;
}

std::string run_result_json(const engine::RunResult& result, const std::string& config_hash,
                            const std::string& tag, bool include_final_state) {
  json doc;
  doc["tag"] = tag;
  doc["config_hash"] = config_hash;
  doc["code_version"] = kCodeVersion;
  doc["mode"] = result.mode == engine::RunMode::Coherent         ? "coherent"
                : result.mode == engine::RunMode::Incoherent     ? "incoherent"
                                                                  : "coherent_disentangle";
  doc["n_rep"] = result.n_rep;
  doc["wall_seconds"] = result.wall_seconds;
  doc["health"] = {{"max_trace_drift", result.health.max_trace_drift},
                   {"completeness_residual", result.health.completeness_residual},
                   {"min_final_eigenvalue", result.health.min_final_eigenvalue}};

  json per_spin = json::array();
  for (double v : result.final_per_spin_polarization()) per_spin.push_back(v);
  doc["final_per_spin_polarization"] = per_spin;
  doc["final_total_polarization"] = result.final_total_polarization();

  json signed_final = json::array();
  for (double v : result.two_iz.back()) signed_final.push_back(v);
  doc["final_two_iz_signed"] = signed_final;

  if (include_final_state) {
    if (result.diagonal_only) {
      doc["final_state"] = {{"kind", "diagonal"}, {"populations", result.final_populations}};
    } else {
      const auto& rho = result.final_state;
      json re = json::array(), im = json::array();
      for (int i = 0; i < rho.dim(); ++i) {
        json re_row = json::array(), im_row = json::array();
        for (int j = 0; j < rho.dim(); ++j) {
          re_row.push_back(rho(i, j).real());
          im_row.push_back(rho(i, j).imag());
        }
        re.push_back(re_row);
        im.push_back(im_row);
      }
      doc["final_state"] = {{"kind", "dense"}, {"re", re}, {"im", im}};
    }
  }
  return doc.dump(2) + "\n";
}

Provenance make_provenance(std::uint64_t config_hash, std::uint64_t master_seed) {
  Provenance p;
  p.config_hash = hash_hex(config_hash);
  p.code_version = kCodeVersion;
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  p.timestamp_utc = buf;
  p.master_seed = master_seed;
  return p;
}

}  // namespace dnp::output
