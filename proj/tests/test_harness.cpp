#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "kaidoa/cli.hpp"
#include "kaidoa/experiment.hpp"
#include "kaidoa/plot.hpp"

using namespace kaidoa;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "kaidoa_harness_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream stream(path, std::ios::binary);
  REQUIRE(stream.good());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

int count_occurrences(const std::string& haystack, const std::string& needle) {
  int count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

ExperimentConfig small_config() {
  ExperimentConfig config;
  config.num_sensors = 12;
  config.doas_deg = {0.0, 8.0};
  config.known_doas_deg = {8.0};
  config.num_snapshots = 10;
  config.snr_start_db = 5.0;
  config.snr_stop_db = 5.0;
  config.snr_step_db = 1.0;
  config.trials = 6;
  config.base_seed = 11;
  config.increment = 0.2;
  return config;
}

const char* kSampleConfig = R"cfg(
# sample experiment
[array]
sensors = 16
spacing_wavelengths = 0.5

[scenario]
doas_deg = [-4.0, 3.0, 11.0]
known_doas_deg = [11.0]
snapshots = 12
snr_db = 7.5

[sweep]
snr_start_db = 0.0
snr_stop_db = 10.0
snr_step_db = 5.0
trials = 4
base_seed = 77
increment = 0.25
threads = 2
estimators = ["esprit", "two_step_kai"]
rmse_scope = "all"

[output]
directory = "results"
prefix = "demo"
)cfg";

}  // namespace

TEST_CASE("config parser reads every section") {
  const ExperimentConfig config = parse_config(kSampleConfig);
  CHECK(config.num_sensors == 16);
  CHECK(config.spacing_wavelengths == 0.5);
  REQUIRE(config.doas_deg.size() == 3);
  CHECK(config.doas_deg[0] == -4.0);
  REQUIRE(config.known_doas_deg.size() == 1);
  CHECK(config.known_doas_deg[0] == 11.0);
  CHECK(config.num_snapshots == 12);
  CHECK(config.snr_db == 7.5);
  CHECK(config.snr_start_db == 0.0);
  CHECK(config.snr_stop_db == 10.0);
  CHECK(config.snr_step_db == 5.0);
  CHECK(config.trials == 4);
  CHECK(config.base_seed == 77);
  CHECK(config.increment == 0.25);
  CHECK(config.threads == 2);
  REQUIRE(config.estimators.size() == 2);
  CHECK(config.estimators[0] == EstimatorKind::esprit);
  CHECK(config.estimators[1] == EstimatorKind::two_step_kai);
  CHECK(config.rmse_scope == RmseScope::all_sources);
  CHECK(config.output_directory == "results");
  CHECK(config.output_prefix == "demo");
  CHECK_NOTHROW(config.validate());
  CHECK(config.known_indices() == std::vector<int>{2});
  CHECK(config.snr_grid() == std::vector<double>{0.0, 5.0, 10.0});
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS_AS(parse_config("[sweep]\ntrials = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[sweep]\nestimators = [\"magic\"]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("stray = 1\n"), ConfigError);
  // parse_config validates before returning
  CHECK_THROWS_AS(parse_config("[scenario]\nknown_doas_deg = [99.0]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[scenario]\ndoas_deg = [5.0, 1.0]\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/path/to.cfg"), ConfigError);
}

TEST_CASE("estimator names round-trip") {
  for (EstimatorKind kind :
       {EstimatorKind::esprit, EstimatorKind::iesprit, EstimatorKind::two_step_kai}) {
    CHECK(estimator_from_string(to_string(kind)) == kind);
  }
  CHECK_THROWS_AS(estimator_from_string("music"), ConfigError);
}

TEST_CASE("near-noiseless single-trial run is exact everywhere") {
  ExperimentConfig config;
  config.trials = 1;
  config.snr_start_db = 120.0;  // noise variance 1e-12
  config.snr_stop_db = 120.0;
  config.snr_step_db = 1.0;
  config.increment = 0.25;
  config.validate();
  const ResultTable table = run_experiment(config);
  REQUIRE(table.rows.size() == 3);
  for (const ResultRow& row : table.rows) {
    CHECK(row.rmse_deg < 1e-4);
    CHECK(row.prob_resolution == 1.0);
    CHECK(row.crb_sqrt_deg > 0.0);
  }
}

TEST_CASE("identical configs emit identical tables") {
  const ExperimentConfig config = small_config();
  const ResultTable first = run_experiment(config);
  const ResultTable second = run_experiment(config);
  CHECK(tables_equal(first, second));
  CHECK(csv_string(first) == csv_string(second));
}

TEST_CASE("serial and parallel execution emit identical bytes") {
  ExperimentConfig serial = small_config();
  serial.threads = 1;
  ExperimentConfig parallel = small_config();
  parallel.threads = 4;
  CHECK(csv_string(run_experiment(serial)) == csv_string(run_experiment(parallel)));
}

TEST_CASE("experiment rows follow grid-major, configured estimator order") {
  ExperimentConfig config = small_config();
  config.snr_stop_db = 6.0;  // two grid points
  config.estimators = {EstimatorKind::two_step_kai, EstimatorKind::esprit};
  const ResultTable table = run_experiment(config);
  REQUIRE(table.rows.size() == 4);
  CHECK(table.rows[0].snr_db == 5.0);
  CHECK(table.rows[0].estimator == EstimatorKind::two_step_kai);
  CHECK(table.rows[1].estimator == EstimatorKind::esprit);
  CHECK(table.rows[2].snr_db == 6.0);
  CHECK(std::isnan(table.rows[1].mean_mu_opt));
  CHECK(table.rows[0].mean_mu_opt >= 0.0);
}

TEST_CASE("csv emission matches the fixed format contract") {
  const fs::path dir = scratch_dir();
  SUBCASE("empty table is header-only") {
    const fs::path path = dir / "empty.csv";
    emit_csv(ResultTable{}, path);
    CHECK(slurp(path) ==
          "snr_db,estimator,rmse_deg,rmse_db,prob_resolution,mean_mu_opt,crb_sqrt_deg\n");
  }
  SUBCASE("single row renders fixed six decimals") {
    ResultTable table;
    ResultRow row;
    row.snr_db = -2.5;
    row.estimator = EstimatorKind::iesprit;
    row.rmse_deg = 1.25;
    row.rmse_db = 1.9382;
    row.prob_resolution = 0.75;
    row.mean_mu_opt = 0.5;
    row.crb_sqrt_deg = 0.111111115;
    table.rows.push_back(row);
    const fs::path path = dir / "one.csv";
    emit_csv(table, path);
    const std::string text = slurp(path);
    CHECK(text ==
          "snr_db,estimator,rmse_deg,rmse_db,prob_resolution,mean_mu_opt,crb_sqrt_deg\n"
          "-2.500000,iesprit,1.250000,1.938200,0.750000,0.500000,0.111111\n");
    CHECK(text.find('\r') == std::string::npos);
  }
  SUBCASE("emitted files parse back to the same table") {
    const ResultTable table = run_experiment(small_config());
    const fs::path path = dir / "round.csv";
    emit_csv(table, path);
    const ResultTable parsed = parse_csv(path);
    CHECK(tables_equal(table, parsed, 1e-6));
    CHECK(csv_string(parsed) == csv_string(table));
  }
}

TEST_CASE("plots carry one polyline per estimator") {
  ResultTable table;
  for (double snr : {0.0, 5.0, 10.0}) {
    ResultRow row;
    row.snr_db = snr;
    row.estimator = EstimatorKind::esprit;
    row.rmse_deg = 1.0 / (snr + 1.0);
    row.rmse_db = 20.0 * std::log10(row.rmse_deg);
    row.prob_resolution = snr / 10.0;
    row.mean_mu_opt = std::numeric_limits<double>::quiet_NaN();
    row.crb_sqrt_deg = 0.05;
    table.rows.push_back(row);
  }
  SUBCASE("rmse kind") {
    const std::string svg = plot_string(table, PlotKind::rmse);
    CHECK(count_occurrences(svg, "<polyline") == 1);
    const std::size_t points = svg.find("points=\"");
    REQUIRE(points != std::string::npos);
    const std::string coords =
        svg.substr(points + 8, svg.find('"', points + 8) - points - 8);
    CHECK(count_occurrences(coords, ",") == 3);  // three vertices
    CHECK(svg.find("RMSE (degrees)") != std::string::npos);
  }
  SUBCASE("resolution kind spans the unit interval") {
    const std::string svg = plot_string(table, PlotKind::resolution);
    CHECK(svg.find("0.00") != std::string::npos);
    CHECK(svg.find("1.00") != std::string::npos);
    CHECK(svg.find("Probability of resolution") != std::string::npos);
    CHECK(count_occurrences(svg, "class=\"crb\"") == 0);
  }
  SUBCASE("rmse_db kind carries the dashed reference curve once") {
    const std::string svg = plot_string(table, PlotKind::rmse_db_with_crb);
    CHECK(count_occurrences(svg, "class=\"crb\"") == 1);
    CHECK(count_occurrences(svg, "class=\"curve\"") == 1);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
  }
  SUBCASE("kind names parse") {
    CHECK(plot_kind_from_string("rmse") == PlotKind::rmse);
    CHECK(plot_kind_from_string("resolution") == PlotKind::resolution);
    CHECK(plot_kind_from_string("rmse_db_with_crb") == PlotKind::rmse_db_with_crb);
    CHECK_THROWS_AS(plot_kind_from_string("pie"), std::invalid_argument);
    CHECK_THROWS_AS(plot_string(ResultTable{}, PlotKind::rmse), std::invalid_argument);
  }
}

TEST_CASE("cli drives the full pipeline with spec exit codes") {
  const fs::path dir = scratch_dir() / "cli";
  fs::create_directories(dir);
  const fs::path config_path = dir / "small.cfg";
  {
    std::ofstream out(config_path);
    out << "[array]\nsensors = 12\n\n[scenario]\ndoas_deg = [0.0, 8.0]\n"
        << "known_doas_deg = [8.0]\nsnapshots = 10\nsnr_db = 15.0\n\n"
        << "[sweep]\nsnr_start_db = 5.0\nsnr_stop_db = 10.0\nsnr_step_db = 5.0\n"
        << "trials = 3\nbase_seed = 5\nincrement = 0.25\n\n"
        << "[output]\ndirectory = \"" << (dir / "out").string() << "\"\nprefix = \"tiny\"\n";
  }

  std::ostringstream out;
  std::ostringstream err;
  SUBCASE("version and help succeed") {
    CHECK(cli_main({"--version"}, out, err) == 0);
    CHECK(out.str().find("kaidoa") != std::string::npos);
    CHECK(cli_main({"--help"}, out, err) == 0);
  }
  SUBCASE("missing config file is a config error") {
    CHECK(cli_main({"estimate", "--config", (dir / "absent.cfg").string()}, out, err) == 1);
    CHECK(!err.str().empty());
  }
  SUBCASE("unknown flags are usage errors") {
    CHECK(cli_main({"sweep", "--config", config_path.string(), "--bogus"}, out, err) == 1);
  }
  SUBCASE("estimate prints attributed angles") {
    CHECK(cli_main({"estimate", "--config", config_path.string()}, out, err) == 0);
    CHECK(out.str().find("known") != std::string::npos);
    CHECK(out.str().find("two_step_kai") != std::string::npos);
  }
  SUBCASE("synthesize then estimate from the batch file") {
    const fs::path batch = dir / "batch.json";
    CHECK(cli_main({"synthesize", "--config", config_path.string(), "--out", batch.string()},
                   out, err) == 0);
    CHECK(fs::exists(batch));
    std::ostringstream out2;
    CHECK(cli_main({"estimate", "--config", config_path.string(), "--batch", batch.string()},
                   out2, err) == 0);
    CHECK(out2.str().find("esprit") != std::string::npos);
  }
  SUBCASE("sweep writes csv and figures") {
    CHECK(cli_main({"sweep", "--config", config_path.string()}, out, err) == 0);
    CHECK(fs::exists(dir / "out" / "tiny.csv"));
    CHECK(fs::exists(dir / "out" / "tiny_resolution.svg"));
    CHECK(fs::exists(dir / "out" / "tiny_rmse.svg"));
    CHECK(fs::exists(dir / "out" / "tiny_rmse_crb.svg"));
    const ResultTable parsed = parse_csv(dir / "out" / "tiny.csv");
    CHECK(parsed.rows.size() == 6);  // two grid points, three estimators
  }
}
