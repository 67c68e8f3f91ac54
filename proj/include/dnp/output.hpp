#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnp/amplitudes.hpp"
#include "dnp/clusters.hpp"
#include "dnp/engine.hpp"

namespace dnp::output {

/// Polarizations and amplitudes are printed with 6 significant digits in
/// CSV; JSON carries full precision.
std::string format_csv_value(double v);
std::string format_full(double v);
std::string hash_hex(std::uint64_t h);

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

struct CsvWriter {
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

/// Spectrum CSV with the declared column schema:
/// scan_value, |a-|, |a+|, |a+z|, |a-z|, |b+-|, |b++|, |be|, |bz|, |bzz|.
extern const std::vector<std::string> kSpectrumColumns;
CsvWriter spectrum_csv(const std::vector<amplitudes::SpectrumRow>& rows,
                       const std::string& config_hash);

std::string cluster_config_json(const clusters::ClusterConfig& config,
                                const std::string& config_hash);
clusters::ClusterConfig cluster_config_from_json(const std::string& text);

/// Trajectory CSV: rep, config_hash, per-spin |2<Iz>|, total P.
CsvWriter trajectory_csv(const engine::RunResult& result, const std::string& config_hash);

std::string run_result_json(const engine::RunResult& result, const std::string& config_hash,
                            const std::string& tag, bool include_final_state);

struct Provenance {
  std::string config_hash;
  std::string code_version;
  std::string timestamp_utc;
  std::uint64_t master_seed = 0;
};
Provenance make_provenance(std::uint64_t config_hash, std::uint64_t master_seed);

extern const char* kCodeVersion;

}  // namespace dnp::output
