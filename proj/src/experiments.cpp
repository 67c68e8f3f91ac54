#include "dnp/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dnp/output.hpp"

namespace dnp::experiments {

using config::ConfigError;
using config::ExperimentConfig;
using nlohmann::json;

namespace {

std::string mode_name(engine::RunMode mode) {
  switch (mode) {
    case engine::RunMode::Coherent: return "coherent";
    case engine::RunMode::Incoherent: return "incoherent";
    case engine::RunMode::CoherentWithDisentangle: return "coherent_disentangle";
  }
  return "?";
}

// Resolve tau_pol for a concrete system when the config asked for resonance.
sequences::SequenceSpec resolve_sequence(const ExperimentConfig& cfg,
                                         const model::SpinSystem& system) {
  sequences::SequenceSpec spec = cfg.sequence;
  if (cfg.resonant == config::ResonantTarget::Larmor) {
    spec.f_t_MHz = system.f_n_MHz;
    spec.tau_pol_us = sequences::SequenceSpec::resonant_tau(system.f_n_MHz);
  } else if (cfg.resonant == config::ResonantTarget::Precession) {
    const auto& nuc = system.nuclei.front();
    const double f_p = model::precession_frequency(system.f_n_MHz, nuc.a_par_MHz, nuc.a_perp_MHz,
                                                   system.electron.flip_sector);
    spec.f_t_MHz = f_p;
    spec.tau_pol_us = sequences::SequenceSpec::resonant_tau(f_p);
  }
  return spec;
}

struct RunRequest {
  model::SpinSystem system;
  sequences::SequenceSpec spec;
  engine::RunMode mode = engine::RunMode::Coherent;
  std::string tag;
};

std::vector<RunRequest> simulate_requests(const ExperimentConfig& cfg) {
  std::vector<model::SpinSystem> systems;
  std::vector<std::string> sys_tags;
  if (cfg.grid && (!cfg.grid->a_perp_MHz.empty() || !cfg.grid->n_nuc.empty())) {
    std::vector<int> n_list = cfg.grid->n_nuc;
    if (n_list.empty()) n_list.push_back(cfg.base_system.n_nuc());
    std::vector<double> a_list = cfg.grid->a_perp_MHz;
    const bool vary_a = !a_list.empty();
    if (!vary_a) a_list.push_back(0.0);
    for (int n : n_list)
      for (double a : a_list) {
        model::SpinSystem sys = cfg.base_system;
        const model::NuclearSpinParams proto =
            sys.nuclei.empty() ? model::NuclearSpinParams{} : sys.nuclei.front();
        sys.nuclei.assign(n, proto);
        for (int l = 0; l < n; ++l) {
          if (vary_a) sys.nuclei[l].a_perp_MHz = a;
          sys.nuclei[l].label = std::to_string(l + 1);
        }
        systems.push_back(sys);
        char tag[64];
        if (vary_a)
          std::snprintf(tag, sizeof(tag), "n%d_a%.6g", n, a);
        else
          std::snprintf(tag, sizeof(tag), "n%d", n);
        sys_tags.push_back(tag);
      }
  } else {
    systems.push_back(cfg.base_system);
    sys_tags.push_back("");
  }

  std::vector<RunRequest> requests;
  for (std::size_t s = 0; s < systems.size(); ++s) {
    const auto spec = resolve_sequence(cfg, systems[s]);
    auto push = [&](engine::RunMode mode, const sequences::SequenceSpec& sp,
                    const std::string& extra) {
      RunRequest req;
      req.system = systems[s];
      req.spec = sp;
      req.mode = mode;
      req.tag = sys_tags[s].empty() ? mode_name(mode) + extra
                                    : sys_tags[s] + "_" + mode_name(mode) + extra;
      requests.push_back(std::move(req));
    };
    for (auto mode : cfg.modes) push(mode, spec, "");
    for (double theta : cfg.disentangle_theta_e_list) {
      sequences::SequenceSpec sp = spec;
      sequences::DisentangleSpec dis =
          sp.disentangle ? *sp.disentangle : sequences::DisentangleSpec{};
      dis.theta_e_rad = theta;
      sp.disentangle = dis;
      char extra[32];
      std::snprintf(extra, sizeof(extra), "_th%.4g", theta);
      push(engine::RunMode::CoherentWithDisentangle, sp, extra);
    }
  }
  return requests;
}

}  // namespace

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
  if (cfg.system_from_cluster)
    throw ConfigError("simulate: cluster-generated systems run through the sweep command");

  const std::string hash = output::hash_hex(cfg.hash());
  const std::string dir = cfg.out_dir + "/" + cfg.name;
  output::ensure_dir(dir);

  CommandResult out;
  output::CsvWriter summary({"tag", "mode", "n_nuc", "tau_pol_us", "n_pol", "n_rep", "p_total",
                             "max_trace_drift", "completeness_residual", "min_final_eigenvalue",
                             "config_hash"});

  const auto requests = simulate_requests(cfg);
  if (requests.empty()) throw ConfigError("simulate: no runs configured");
  for (const auto& req : requests) {
    const engine::RunResult result = engine::run(req.system, req.spec, req.mode, cfg.n_rep);
    if (cfg.write_csv) {
      const std::string path = dir + "/trajectory_" + req.tag + ".csv";
      output::trajectory_csv(result, hash).write(path);
      out.written_paths.push_back(path);
    }
    if (cfg.write_json) {
      const std::string path = dir + "/result_" + req.tag + ".json";
      output::write_text_file(path,
                              output::run_result_json(result, hash, req.tag, /*state=*/false));
      out.written_paths.push_back(path);
    }
    summary.add_row({req.tag, mode_name(req.mode), std::to_string(req.system.n_nuc()),
                     output::format_csv_value(req.spec.tau_pol_us),
                     std::to_string(req.spec.n_pol), std::to_string(cfg.n_rep),
                     output::format_csv_value(result.final_total_polarization()),
                     output::format_csv_value(result.health.max_trace_drift),
                     output::format_csv_value(result.health.completeness_residual),
                     output::format_csv_value(result.health.min_final_eigenvalue), hash});
  }
  const std::string summary_path = dir + "/summary.csv";
  summary.write(summary_path);
  out.written_paths.push_back(summary_path);
  out.summary = "simulate: " + std::to_string(requests.size()) + " runs -> " + dir;
  return out;
}

CommandResult cmd_amplitudes(const ExperimentConfig& cfg) {
  if (!cfg.scan) throw ConfigError("amplitudes: missing amplitudes block");
  if (cfg.system_from_cluster)
    throw ConfigError("amplitudes: requires an inline two-nucleus system");

  const auto spec = resolve_sequence(cfg, cfg.base_system);
  amplitudes::ScanSpec scan;
  scan.kind = cfg.scan->kind;
  scan.start = cfg.scan->start;
  scan.stop = cfg.scan->stop;
  scan.points = cfg.scan->points;
  const auto rows = amplitudes::amplitude_spectrum(cfg.base_system, spec, scan);

  const std::string hash = output::hash_hex(cfg.hash());
  const std::string dir = cfg.out_dir + "/" + cfg.name;
  output::ensure_dir(dir);

  CommandResult out;
  if (cfg.write_csv) {
    const std::string path = dir + "/spectrum.csv";
    output::spectrum_csv(rows, hash).write(path);
    out.written_paths.push_back(path);
  }
  if (cfg.write_json) {
    json doc;
    doc["config_hash"] = hash;
    doc["code_version"] = output::kCodeVersion;
    json jrows = json::array();
    for (const auto& row : rows) {
      jrows.push_back({{"scan_value", row.scan_value},
                       {"alpha_minus", {row.amps.alpha_minus.real(), row.amps.alpha_minus.imag()}},
                       {"alpha_plus", {row.amps.alpha_plus.real(), row.amps.alpha_plus.imag()}},
                       {"alpha_plus_z",
                        {row.amps.alpha_plus_z.real(), row.amps.alpha_plus_z.imag()}},
                       {"alpha_minus_z",
                        {row.amps.alpha_minus_z.real(), row.amps.alpha_minus_z.imag()}},
                       {"beta_e", {row.amps.beta_e.real(), row.amps.beta_e.imag()}},
                       {"beta_z", {row.amps.beta_z.real(), row.amps.beta_z.imag()}},
                       {"beta_zz", {row.amps.beta_zz.real(), row.amps.beta_zz.imag()}},
                       {"beta_pm", {row.amps.beta_pm.real(), row.amps.beta_pm.imag()}},
                       {"beta_pp", {row.amps.beta_pp.real(), row.amps.beta_pp.imag()}}});
    }
    doc["rows"] = jrows;
    const std::string path = dir + "/spectrum.json";
    output::write_text_file(path, doc.dump(2) + "\n");
    out.written_paths.push_back(path);
  }
  out.summary = "amplitudes: " + std::to_string(rows.size()) + " grid points -> " + dir;
  return out;
}

CommandResult cmd_cluster_gen(const ExperimentConfig& cfg) {
  if (!cfg.cluster) throw ConfigError("cluster-gen: missing system.cluster block");
  const auto& gen = *cfg.cluster;

  const std::string hash = output::hash_hex(cfg.hash());
  const std::string dir = cfg.out_dir + "/" + cfg.name;
  output::ensure_dir(dir);

  const auto sites = clusters::build_lattice(gen.params.radius_nm);
  std::vector<clusters::ClusterConfig> configs(gen.count);
#pragma omp parallel for schedule(dynamic) if (gen.count > 1)
  for (int i = 0; i < gen.count; ++i)
    configs[i] = clusters::generate_cluster(sites, cfg.master_seed, i, gen.params);

  CommandResult out;
  output::CsvWriter summary(
      {"index", "seed", "n_nuc", "mean_a_perp_MHz", "config_hash"});
  for (int i = 0; i < gen.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "config_%04d.json", i);
    const std::string path = dir + "/" + name;
    output::write_text_file(path, output::cluster_config_json(configs[i], hash));
    out.written_paths.push_back(path);
    summary.add_row({std::to_string(i), std::to_string(configs[i].seed),
                     std::to_string(static_cast<int>(configs[i].selected.size())),
                     output::format_csv_value(configs[i].mean_a_perp()), hash});
  }
  const std::string summary_path = dir + "/summary.csv";
  summary.write(summary_path);
  out.written_paths.push_back(summary_path);
  out.summary = "cluster-gen: " + std::to_string(gen.count) + " configs -> " + dir;
  return out;
}

namespace {

struct SweepPoint {
  int cluster_index = 0;
  double b0_mT = 0.0;
  engine::RunMode mode = engine::RunMode::Coherent;
  double theta_e = 0.0;   // only for disentangle points
  int n_rep = 0;
  std::uint64_t point_hash = 0;
};

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double histogram_peak(const std::vector<double>& values, double bin_width) {
  if (values.empty()) return 0.0;
  std::map<int, int> bins;
  for (double v : values) bins[static_cast<int>(std::floor(v / bin_width))]++;
  int best_bin = bins.begin()->first, best_count = -1;
  for (const auto& [bin, count] : bins)
    if (count > best_count) {
      best_bin = bin;
      best_count = count;
    }
  return (best_bin + 0.5) * bin_width;
}

}  // namespace

CommandResult cmd_sweep(const ExperimentConfig& cfg) {
  if (!cfg.cluster) throw ConfigError("sweep: missing system.cluster block");
  if (!cfg.sweep) throw ConfigError("sweep: missing sweep block");
  const auto& gen = *cfg.cluster;
  const auto& sw = *cfg.sweep;

  std::vector<double> b0_list = sw.b0_list_mT;
  if (b0_list.empty()) b0_list.push_back(gen.params.b0_mT);
  std::vector<engine::RunMode> modes = sw.modes.empty() ? cfg.modes : sw.modes;
  if (modes.empty()) throw ConfigError("sweep: no modes configured");

  const std::uint64_t cfg_hash = cfg.hash();
  const std::string hash = output::hash_hex(cfg_hash);
  const std::string dir = cfg.out_dir + "/" + cfg.name;
  const std::string points_dir = dir + "/points";
  output::ensure_dir(points_dir);

  const auto sites = clusters::build_lattice(gen.params.radius_nm);
  std::vector<clusters::ClusterConfig> configs(gen.count);
#pragma omp parallel for schedule(dynamic) if (gen.count > 1)
  for (int i = 0; i < gen.count; ++i)
    configs[i] = clusters::generate_cluster(sites, cfg.master_seed, i, gen.params);

  auto n_rep_for = [&](double b0) {
    for (const auto& [field, reps] : sw.n_rep_per_b0)
      if (std::abs(field - b0) < 1e-9) return reps;
    return cfg.n_rep;
  };

  std::vector<SweepPoint> points;
  for (int c = 0; c < gen.count; ++c)
    for (double b0 : b0_list)
      for (auto mode : modes) {
        SweepPoint p;
        p.cluster_index = c;
        p.b0_mT = b0;
        p.mode = mode;
        p.theta_e = mode == engine::RunMode::CoherentWithDisentangle
                        ? sw.disentangle_theta_e_rad
                        : 0.0;
        p.n_rep = n_rep_for(b0);
        char desc[160];
        std::snprintf(desc, sizeof(desc), "%016llx|%d|%.9g|%s|%.9g|%d",
                      static_cast<unsigned long long>(cfg_hash), c, b0,
                      mode_name(mode).c_str(), p.theta_e, p.n_rep);
        p.point_hash = config::fnv1a64(desc);
        points.push_back(p);
      }
  if (points.empty()) throw ConfigError("sweep: empty grid");

  const int jobs = cfg.jobs > 0 ? cfg.jobs : omp_get_max_threads();
  int skipped = 0, failed = 0;
#pragma omp parallel for schedule(dynamic) num_threads(jobs) reduction(+ : skipped, failed)
  for (std::size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    const std::string path = points_dir + "/" + output::hash_hex(p.point_hash) + ".json";
    if (std::filesystem::exists(path)) {
      ++skipped;
      continue;
    }
    json doc;
    doc["cluster_index"] = p.cluster_index;
    doc["b0_mT"] = p.b0_mT;
    doc["mode"] = mode_name(p.mode);
    doc["theta_e_rad"] = p.theta_e;
    doc["n_rep"] = p.n_rep;
    doc["config_hash"] = hash;
    try {
      clusters::ClusterConfig cluster = configs[p.cluster_index];
      cluster.b0_mT = p.b0_mT;
      model::SpinSystem system = clusters::cluster_system(cluster);
      sequences::SequenceSpec spec = resolve_sequence(cfg, system);
      if (p.mode == engine::RunMode::CoherentWithDisentangle) {
        sequences::DisentangleSpec dis;
        dis.theta_e_rad = p.theta_e;
        spec.disentangle = dis;
      }
      const engine::RunResult result = engine::run(system, spec, p.mode, p.n_rep);
      doc["cluster_seed"] = cluster.seed;
      doc["mean_a_perp_MHz"] = cluster.mean_a_perp();
      doc["p_total"] = result.final_total_polarization();
      json per_spin = json::array();
      for (double v : result.final_per_spin_polarization()) per_spin.push_back(v);
      doc["final_per_spin_polarization"] = per_spin;
      doc["health"] = {{"max_trace_drift", result.health.max_trace_drift},
                       {"completeness_residual", result.health.completeness_residual},
                       {"min_final_eigenvalue", result.health.min_final_eigenvalue}};
    } catch (const std::exception& e) {
      doc["error"] = e.what();
      ++failed;
    }
    try {
      output::write_text_file(path, doc.dump(2) + "\n");
    } catch (const std::exception&) {
      ++failed;
    }
  }

  // aggregate in deterministic point order
  output::CsvWriter results({"cluster_index", "b0_mT", "mode", "theta_e_rad", "n_rep",
                             "mean_a_perp_MHz", "p_total", "config_hash"});
  std::map<std::pair<double, std::string>, std::vector<double>> groups;
  for (const auto& p : points) {
    const std::string path = points_dir + "/" + output::hash_hex(p.point_hash) + ".json";
    std::ifstream in(path);
    if (!in) continue;
    json doc;
    in >> doc;
    if (doc.contains("error")) continue;
    const double p_total = doc["p_total"].get<double>();
    results.add_row({std::to_string(p.cluster_index), output::format_csv_value(p.b0_mT),
                     mode_name(p.mode), output::format_csv_value(p.theta_e),
                     std::to_string(p.n_rep),
                     output::format_csv_value(doc["mean_a_perp_MHz"].get<double>()),
                     output::format_csv_value(p_total), hash});
    groups[{p.b0_mT, mode_name(p.mode)}].push_back(p_total);
  }

  output::CsvWriter stats({"b0_mT", "mode", "count", "min", "q1", "median", "q3", "max",
                           "hist_peak_0p02", "config_hash"});
  for (auto& [key, values] : groups) {
    std::sort(values.begin(), values.end());
    stats.add_row({output::format_csv_value(key.first), key.second,
                   std::to_string(values.size()), output::format_csv_value(values.front()),
                   output::format_csv_value(percentile(values, 0.25)),
                   output::format_csv_value(percentile(values, 0.5)),
                   output::format_csv_value(percentile(values, 0.75)),
                   output::format_csv_value(values.back()),
                   output::format_csv_value(histogram_peak(values, 0.02)), hash});
  }

  CommandResult out;
  const std::string results_path = dir + "/results.csv";
  const std::string stats_path = dir + "/stats.csv";
  results.write(results_path);
  stats.write(stats_path);
  out.written_paths.push_back(results_path);
  out.written_paths.push_back(stats_path);
  std::ostringstream msg;
  msg << "sweep: " << points.size() << " points (" << skipped << " resumed, " << failed
      << " failed) -> " << dir;
  out.summary = msg.str();
  return out;
}

}  // namespace dnp::experiments
