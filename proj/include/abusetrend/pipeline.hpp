#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "abusetrend/date.hpp"
#include "abusetrend/filter.hpp"
#include "abusetrend/sampler.hpp"
#include "abusetrend/simulate.hpp"
#include "abusetrend/smooth.hpp"
#include "abusetrend/tvbarc.hpp"

namespace abusetrend::pipeline {

enum class ExitCode : int { Success = 0, Failure = 1, Config = 2, Ingest = 3, Model = 4 };

inline constexpr const char* kOutputDirEnv = "ABUSETREND_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "abusetrend-out";

// Output directory used when neither a config file nor a flag names one.
std::filesystem::path default_output_dir();

struct PipelineConfig {
  std::filesystem::path tweets_path;
  std::filesystem::path counts_path;
  std::optional<DateRange> window;
  ThresholdFilter filter = ThresholdFilter::make(0.25, 0.0);
  EmptyDayPolicy empty_policy = EmptyDayPolicy::Zero;
  std::size_t histogram_bins = 20;
  tvbarc::ModelSpec model;
  tvbarc::McmcConfig mcmc;
  std::filesystem::path output_dir = default_output_dir();

  // Keys: tweets, counts, start, end, filter ("x/y"), empty_day_policy,
  // histogram_bins, model{lag_order, n_basis_trend, n_basis_lag, spline_degree,
  // stability_margin, lag_prior, shrinkage_shape, shrinkage_rate},
  // mcmc{n_iter, n_burn, thin, seed, step_trend, step_lag, target_accept,
  // adapt_batch, n_chains, prior_scale}, output_dir.
  // Relative paths resolve against base_dir. Unknown keys are rejected.
  // Throws ConfigError.
  void apply_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig from_file(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  // Throws ConfigError.
  void validate() const;
};

// Outcome of a command: exit code, the failing stage (empty on success) and
// a diagnostic line.
struct RunResult {
  ExitCode code = ExitCode::Success;
  std::string stage;
  std::string message;
  std::vector<std::filesystem::path> artifacts;

  int exit_status() const { return static_cast<int>(code); }
};

// Writes artifacts under `dir` as <name>.partial and renames them all on
// commit(). Files of an uncommitted run keep their .partial suffix.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path dir);

  // Returns the SHA-256 of the bytes written.
  std::string write(const std::string& name, const std::function<void(std::ostream&)>& body);
  std::vector<std::filesystem::path> commit();

  const std::vector<std::pair<std::string, std::string>>& hashes() const { return hashes_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  std::vector<std::pair<std::string, std::string>> hashes_;
};

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// validate -> filter -> adjust -> fit -> summarize -> export. Writes
// proportions.csv, adjusted.csv, score_histogram.csv, fit_summary.csv,
// fit_summary.json, draws.json and manifest.json.
RunResult run_pipeline(const PipelineConfig& config, std::ostream& log);

// Ingest only; prints a short report.
RunResult run_validate(const PipelineConfig& config, std::ostream& log);

// Ingest, filter and adjust; writes proportions.csv, adjusted.csv,
// score_histogram.csv and manifest.json.
RunResult run_filter(const PipelineConfig& config, std::ostream& log);

// Reads a date,count series (e.g. adjusted.csv or simulate output); contiguous
// days required. Throws IngestError subclasses.
AdjustedSeries read_count_series(const std::filesystem::path& path);

// Reads date plus one numeric column. Without `column`, the first of value,
// count, new_cases, proportion present is used.
smooth::DailySeries read_numeric_series(const std::filesystem::path& path,
                                        const std::optional<std::string>& column);

struct FitRequest {
  std::filesystem::path series_path;
  tvbarc::ModelSpec model;
  tvbarc::McmcConfig mcmc;
  std::filesystem::path output_dir = default_output_dir();
};

// Fits a count series file; writes fit_summary.csv/.json, draws.json, manifest.json.
RunResult run_fit(const FitRequest& request, std::ostream& log);

// Trend and lag curves for the simulator, in JSON:
//   {"trend": <curve>, "lags": {"1": <curve>, "7": <curve>}, "lag_order": 10}
// where <curve> is a number (constant), {"points": [[u, v], ...]}
// (piecewise-linear) or {"sine": {"mean": m, "amplitude": a, "periods": k}}.
// Missing lags up to lag_order are zero. Throws ConfigError.
sim::ParamCurves parse_curve_spec(const nlohmann::json& j);

struct SimulateRequest {
  nlohmann::json curves;  // curve spec as above
  std::size_t length = 0;
  std::uint64_t seed = 0;
  Date start_date = Date::from_ymd(2019, 1, 1);
  std::filesystem::path output_path;
};

// Writes a date,count CSV readable by run_fit.
RunResult run_simulate(const SimulateRequest& request, std::ostream& log);

struct SmoothRequest {
  std::filesystem::path input_path;
  std::optional<std::string> column;
  std::string method = "rolling";  // rolling | spline
  std::size_t window = 7;
  std::optional<double> penalty;  // spline only; GCV when absent
  std::filesystem::path output_path;
};

RunResult run_smooth(const SmoothRequest& request, std::ostream& log);

}  // namespace abusetrend::pipeline
