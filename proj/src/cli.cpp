#include "kaidoa/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>

#include "kaidoa/experiment.hpp"
#include "kaidoa/kai_refine.hpp"
#include "kaidoa/plot.hpp"
#include "kaidoa/version.hpp"

namespace kaidoa {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> increment;
  std::optional<int> trials;
  std::optional<double> snr_db;
  std::optional<int> threads;
  std::optional<std::string> rmse_scope;
  std::string out;
};

ExperimentConfig effective_config(const CommonOptions& options) {
  ExperimentConfig config = load_config(options.config_path);
  if (options.seed) {
    config.base_seed = *options.seed;
  }
  if (options.increment) {
    config.increment = *options.increment;
  }
  if (options.trials) {
    config.trials = *options.trials;
  }
  if (options.snr_db) {
    config.snr_db = *options.snr_db;
  }
  if (options.threads) {
    config.threads = *options.threads;
  }
  if (options.rmse_scope) {
    if (*options.rmse_scope == "unknown") {
      config.rmse_scope = RmseScope::unknown_only;
    } else if (*options.rmse_scope == "all") {
      config.rmse_scope = RmseScope::all_sources;
    } else {
      throw ConfigError("--rmse-scope: 'unknown' or 'all' expected");
    }
  }
  config.validate();
  return config;
}

json batch_to_json(const SnapshotBatch& batch) {
  json j;
  j["format"] = "kaidoa-batch-v1";
  j["sensors"] = batch.geometry.num_sensors;
  j["spacing"] = batch.geometry.spacing;
  j["wavelength"] = batch.geometry.wavelength;
  j["seed"] = batch.seed;
  j["snapshots"] = batch.scenario.num_snapshots;
  j["noise_variance"] = batch.scenario.noise_variance;
  json doas = json::array();
  for (double doa : batch.scenario.doas) {
    doas.push_back(rad2deg(doa));
  }
  j["doas_deg"] = doas;
  j["known_indices"] = batch.scenario.known_indices;
  j["source_powers"] = batch.scenario.source_powers;
  json re = json::array();
  json im = json::array();
  for (Eigen::Index row = 0; row < batch.data.rows(); ++row) {
    json re_row = json::array();
    json im_row = json::array();
    for (Eigen::Index col = 0; col < batch.data.cols(); ++col) {
      re_row.push_back(batch.data(row, col).real());
      im_row.push_back(batch.data(row, col).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  j["data_re"] = std::move(re);
  j["data_im"] = std::move(im);
  return j;
}

SnapshotBatch batch_from_json(const json& j) {
  if (j.value("format", "") != "kaidoa-batch-v1") {
    throw ConfigError("batch file: unknown format tag");
  }
  ArrayGeometry geom(j.at("sensors").get<int>(), j.at("spacing").get<double>(),
                     j.at("wavelength").get<double>());
  std::vector<double> doas_rad;
  for (double deg : j.at("doas_deg").get<std::vector<double>>()) {
    doas_rad.push_back(deg2rad(deg));
  }
  SourceScenario scenario(doas_rad, j.at("source_powers").get<std::vector<double>>(),
                          j.at("noise_variance").get<double>(), j.at("snapshots").get<int>(),
                          j.value("known_indices", std::vector<int>{}));
  const auto re = j.at("data_re").get<std::vector<std::vector<double>>>();
  const auto im = j.at("data_im").get<std::vector<std::vector<double>>>();
  CMatrix data(geom.num_sensors, scenario.num_snapshots);
  if (static_cast<int>(re.size()) != geom.num_sensors || re.size() != im.size()) {
    throw ConfigError("batch file: data shape mismatch");
  }
  for (int row = 0; row < geom.num_sensors; ++row) {
    if (static_cast<int>(re[row].size()) != scenario.num_snapshots ||
        re[row].size() != im[row].size()) {
      throw ConfigError("batch file: data shape mismatch");
    }
    for (int col = 0; col < scenario.num_snapshots; ++col) {
      data(row, col) = Complex(re[row][col], im[row][col]);
    }
  }
  return SnapshotBatch{std::move(data), j.value("seed", std::uint64_t{0}), geom, scenario};
}

SnapshotBatch make_batch(const ExperimentConfig& config) {
  const double noise_variance = std::pow(10.0, -config.snr_db / 10.0);
  return synthesize_snapshots(config.scenario(noise_variance), config.geometry(),
                              config.base_seed);
}

int run_synthesize(const CommonOptions& options, std::ostream& out) {
  ExperimentConfig config = effective_config(options);
  const SnapshotBatch batch = make_batch(config);
  const fs::path path = options.out.empty() ? fs::path("batch.json") : fs::path(options.out);
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  stream << batch_to_json(batch).dump(2) << '\n';
  if (!stream) {
    throw std::runtime_error("write failed: " + path.string());
  }
  out << "wrote " << path.string() << " (" << batch.geometry.num_sensors << " sensors x "
      << batch.scenario.num_snapshots << " snapshots, seed " << batch.seed << ")\n";
  return 0;
}

std::string format_angle(double rad) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%11.6f", rad2deg(rad));
  return buffer;
}

void print_estimate(std::ostream& out, const std::string& name, const DoaEstimate& estimate) {
  for (std::size_t i = 0; i < estimate.angles.size(); ++i) {
    out << name;
    for (std::size_t pad = name.size(); pad < 14; ++pad) {
      out << ' ';
    }
    out << format_angle(estimate.angles[i]) << "  "
        << (estimate.attribution[i] == Attribution::known ? "known    " : "estimated");
    if (estimate.mu_opt.has_value()) {
      char buffer[32];
      std::snprintf(buffer, sizeof(buffer), "  %.2f", *estimate.mu_opt);
      out << buffer;
    } else {
      out << "  -";
    }
    out << '\n';
  }
}

int run_estimate(const CommonOptions& options, const std::string& batch_path, std::ostream& out) {
  ExperimentConfig config = effective_config(options);
  SnapshotBatch batch = [&] {
    if (batch_path.empty()) {
      return make_batch(config);
    }
    std::ifstream stream{fs::path(batch_path)};
    if (!stream) {
      throw ConfigError("cannot open batch file: " + batch_path);
    }
    json j;
    try {
      stream >> j;
    } catch (const json::exception& e) {
      throw ConfigError("batch file parse error: " + std::string(e.what()));
    }
    return batch_from_json(j);
  }();

  const ArrayGeometry geom = batch.geometry;
  const int num_sources = batch.scenario.num_sources();
  out << "estimator     angle_deg    attribution  mu_opt\n";
  for (EstimatorKind kind : config.estimators) {
    switch (kind) {
      case EstimatorKind::esprit:
        print_estimate(out, "esprit", esprit(sample_covariance(batch), num_sources, geom));
        break;
      case EstimatorKind::iesprit:
        print_estimate(out, "iesprit", iesprit(batch, geom, num_sources, config.increment).final);
        break;
      case EstimatorKind::two_step_kai: {
        const std::vector<double> known = batch.scenario.known_doas();
        print_estimate(out, "two_step_kai",
                       two_step_kai(batch, geom, num_sources, known, config.increment).final);
        break;
      }
    }
  }
  return 0;
}

int run_sweep(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = effective_config(options);
  if (!options.out.empty()) {
    config.output_directory = options.out;
  }
  const fs::path directory(config.output_directory);
  std::error_code ec;
  fs::create_directories(directory, ec);

  const ResultTable table = run_experiment(config, &err);

  const fs::path csv_path = directory / (config.output_prefix + ".csv");
  emit_csv(table, csv_path);
  const fs::path resolution_path = directory / (config.output_prefix + "_resolution.svg");
  emit_plot(table, PlotKind::resolution, resolution_path);
  const fs::path rmse_path = directory / (config.output_prefix + "_rmse.svg");
  emit_plot(table, PlotKind::rmse, rmse_path);
  const fs::path rmse_db_path = directory / (config.output_prefix + "_rmse_crb.svg");
  emit_plot(table, PlotKind::rmse_db_with_crb, rmse_db_path);

  out << "wrote " << csv_path.string() << '\n'
      << "wrote " << resolution_path.string() << '\n'
      << "wrote " << rmse_path.string() << '\n'
      << "wrote " << rmse_db_path.string() << '\n';
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subspace DOA estimation simulator (ESPRIT, IESPRIT, Two-Step KAI-ESPRIT)",
               "kaidoa"};
  app.set_version_flag("--version", std::string("kaidoa ") + version);
  app.require_subcommand(1);

  CommonOptions options;
  std::string batch_path;

  const auto add_common = [&options](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "experiment config file")->required();
    sub->add_option("--seed", options.seed, "override base seed");
    sub->add_option("--increment", options.increment, "reliability-factor sweep increment");
    sub->add_option("--snr-db", options.snr_db, "single-point SNR in dB");
  };

  CLI::App* synthesize = app.add_subcommand("synthesize", "dump one snapshot batch to a file");
  add_common(synthesize);
  synthesize->add_option("--out", options.out, "output file (default batch.json)");

  CLI::App* estimate = app.add_subcommand("estimate", "print per-estimator DOA table for one batch");
  add_common(estimate);
  estimate->add_option("--batch", batch_path, "read batch from file instead of synthesizing");

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo SNR sweep: CSV and SVG figures");
  add_common(sweep);
  sweep->add_option("--out", options.out, "output directory");
  sweep->add_option("--trials", options.trials, "override trial count");
  sweep->add_option("--threads", options.threads, "worker threads (0 = hardware)");
  sweep->add_option("--rmse-scope", options.rmse_scope, "'unknown' or 'all' sources in RMSE");

  std::vector<const char*> argv;
  argv.push_back("kaidoa");
  for (const std::string& arg : args) {
    argv.push_back(arg.c_str());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (synthesize->parsed()) {
      return run_synthesize(options, out);
    }
    if (estimate->parsed()) {
      return run_estimate(options, batch_path, out);
    }
    if (sweep->parsed()) {
      return run_sweep(options, out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace kaidoa
