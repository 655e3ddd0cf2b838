// abusetrend: adjusted abusive-speech counts and time-varying Poisson
// autoregression from the command line.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "abusetrend/errors.hpp"
#include "abusetrend/pipeline.hpp"

namespace at = abusetrend;
namespace pl = abusetrend::pipeline;
namespace fs = std::filesystem;

namespace {

// Flag values kept apart from the config so that only flags actually given
// override the file.
struct PipelineFlags {
  std::string config;
  std::string tweets, counts, start, end, filter, empty_days, out;
  std::size_t bins = 0;
};

struct ModelFlags {
  std::size_t lag_order = 0, n_basis_trend = 0, n_basis_lag = 0, degree = 0;
  double margin = 0.0;
  std::string lag_prior;
  double shrinkage_shape = 0.0, shrinkage_rate = 0.0;
  std::size_t n_iter = 0, n_burn = 0, thin = 0, chains = 0;
  std::uint64_t seed = 0;
  double target = 0.0, prior_scale = 0.0;
};

struct Options {
  CLI::Option* tweets = nullptr;
  CLI::Option* counts = nullptr;
  CLI::Option* start = nullptr;
  CLI::Option* end = nullptr;
  CLI::Option* filter = nullptr;
  CLI::Option* empty_days = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* bins = nullptr;
};

struct ModelOptions {
  CLI::Option *lag_order = nullptr, *n_basis_trend = nullptr, *n_basis_lag = nullptr,
              *degree = nullptr, *margin = nullptr, *n_iter = nullptr, *n_burn = nullptr,
              *thin = nullptr, *chains = nullptr, *seed = nullptr, *target = nullptr,
              *prior_scale = nullptr, *lag_prior = nullptr, *shrinkage_shape = nullptr,
              *shrinkage_rate = nullptr;
};

Options add_pipeline_flags(CLI::App* cmd, PipelineFlags& f, bool with_filter) {
  Options o;
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  o.tweets = cmd->add_option("--tweets", f.tweets, "Scored tweets CSV (id,date,p_off,p_hate[,text])");
  o.counts = cmd->add_option("--counts", f.counts, "Daily counts CSV (date,count)");
  o.start = cmd->add_option("--start", f.start, "First day of the window (YYYY-MM-DD)");
  o.end = cmd->add_option("--end", f.end, "Last day of the window (YYYY-MM-DD)");
  if (with_filter) {
    o.filter = cmd->add_option("--filter", f.filter, "Threshold filter in x/y percent notation, e.g. 25/50");
    o.empty_days = cmd->add_option("--empty-days", f.empty_days, "Empty sample days: zero | neighbor-mean");
    o.bins = cmd->add_option("--bins", f.bins, "Score histogram bins");
    o.out = cmd->add_option("--out", f.out, "Output directory (default $" + std::string(pl::kOutputDirEnv) + " or " + pl::kDefaultOutputDir + ")");
  }
  return o;
}

ModelOptions add_model_flags(CLI::App* cmd, ModelFlags& m) {
  ModelOptions o;
  o.lag_order = cmd->add_option("--lags", m.lag_order, "Lag order p");
  o.n_basis_trend = cmd->add_option("--trend-basis", m.n_basis_trend, "B-spline functions for the trend");
  o.n_basis_lag = cmd->add_option("--lag-basis", m.n_basis_lag, "B-spline functions per lag coefficient");
  o.degree = cmd->add_option("--degree", m.degree, "Spline degree");
  o.margin = cmd->add_option("--stability-margin", m.margin, "Stability margin epsilon");
  o.lag_prior = cmd->add_option("--lag-prior", m.lag_prior, "Prior on lag coefficients: shrinkage | flat")
                    ->check(CLI::IsMember({"shrinkage", "flat"}));
  o.shrinkage_shape = cmd->add_option("--shrinkage-shape", m.shrinkage_shape, "Gamma shape of the lag shrinkage rate");
  o.shrinkage_rate = cmd->add_option("--shrinkage-rate", m.shrinkage_rate, "Gamma rate of the lag shrinkage rate");
  o.n_iter = cmd->add_option("--iter", m.n_iter, "MCMC iterations");
  o.n_burn = cmd->add_option("--burn", m.n_burn, "Burn-in iterations");
  o.thin = cmd->add_option("--thin", m.thin, "Thinning interval");
  o.chains = cmd->add_option("--chains", m.chains, "Independent chains (run in parallel)");
  o.seed = cmd->add_option("--seed", m.seed, "Random seed");
  o.target = cmd->add_option("--target-accept", m.target, "Target acceptance rate during burn-in");
  o.prior_scale = cmd->add_option("--prior-scale", m.prior_scale, "Half-normal scale of trend coefficients (default 2 x series mean)");
  return o;
}

void apply_model_flags(const ModelOptions& o, const ModelFlags& m, at::tvbarc::ModelSpec& spec,
                       at::tvbarc::McmcConfig& mcmc) {
  if (o.lag_order->count()) spec.lag_order = m.lag_order;
  if (o.n_basis_trend->count()) spec.n_basis_trend = m.n_basis_trend;
  if (o.n_basis_lag->count()) spec.n_basis_lag = m.n_basis_lag;
  if (o.degree->count()) spec.spline_degree = m.degree;
  if (o.margin->count()) spec.stability_margin = m.margin;
  if (o.lag_prior->count()) spec.lag_prior = at::tvbarc::parse_lag_prior(m.lag_prior);
  if (o.shrinkage_shape->count()) spec.shrinkage_shape = m.shrinkage_shape;
  if (o.shrinkage_rate->count()) spec.shrinkage_rate = m.shrinkage_rate;
  if (o.n_iter->count()) mcmc.n_iter = m.n_iter;
  if (o.n_burn->count()) mcmc.n_burn = m.n_burn;
  if (o.thin->count()) mcmc.thin = m.thin;
  if (o.chains->count()) mcmc.n_chains = m.chains;
  if (o.seed->count()) mcmc.seed = m.seed;
  if (o.target->count()) mcmc.target_accept = m.target;
  if (o.prior_scale->count()) mcmc.prior_scale = m.prior_scale;
}

pl::PipelineConfig build_config(const Options& o, const PipelineFlags& f) {
  pl::PipelineConfig cfg = f.config.empty() ? pl::PipelineConfig{} : pl::PipelineConfig::from_file(f.config);
  nlohmann::json overrides = nlohmann::json::object();
  if (o.tweets->count()) overrides["tweets"] = f.tweets;
  if (o.counts->count()) overrides["counts"] = f.counts;
  if (o.start->count()) overrides["start"] = f.start;
  if (o.end->count()) overrides["end"] = f.end;
  if (o.filter && o.filter->count()) overrides["filter"] = f.filter;
  if (o.empty_days && o.empty_days->count()) overrides["empty_day_policy"] = f.empty_days;
  if (o.bins && o.bins->count()) overrides["histogram_bins"] = f.bins;
  if (o.out && o.out->count()) overrides["output_dir"] = f.out;
  cfg.apply_json(overrides, {});
  return cfg;
}

int report(const pl::RunResult& r) {
  for (const auto& a : r.artifacts) std::cout << "wrote " << a.string() << '\n';
  return r.exit_status();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"abusetrend: adjusted abusive-speech counts and time-varying Poisson autoregression"};
  app.require_subcommand(1);

  PipelineFlags vf, ff, rf;
  auto* validate = app.add_subcommand("validate", "Parse and check the scored-tweet and count files");
  const Options vo = add_pipeline_flags(validate, vf, false);

  auto* filter = app.add_subcommand("filter", "Filter samples, compute daily proportions and adjusted counts");
  const Options fo = add_pipeline_flags(filter, ff, true);

  ModelFlags rm;
  auto* rep = app.add_subcommand("report", "Run the whole pipeline: validate, filter, adjust, fit, summarize, export");
  const Options ro = add_pipeline_flags(rep, rf, true);
  const ModelOptions rmo = add_model_flags(rep, rm);

  ModelFlags fm;
  std::string series_path, fit_out;
  auto* fit = app.add_subcommand("fit", "Fit the time-varying autoregressive Poisson model to a date,count series");
  fit->add_option("--series", series_path, "Series CSV with date,count columns")->required();
  auto* fit_out_opt = fit->add_option("--out", fit_out, "Output directory");
  const ModelOptions fmo = add_model_flags(fit, fm);

  std::string curves_file, sim_out, sim_start = "2019-01-01";
  std::optional<double> sim_mu;
  std::vector<std::string> sim_lags;
  std::size_t sim_length = 0, sim_order = 0;
  std::uint64_t sim_seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Simulate a count series from known trend and lag curves");
  simulate->add_option("--curves", curves_file, "Curve spec JSON file");
  simulate->add_option("--mu", sim_mu, "Constant trend (instead of --curves)");
  simulate->add_option("--lag", sim_lags, "Constant lag coefficient as i=value (repeatable)");
  simulate->add_option("--lag-order", sim_order, "Lag order (defaults to the highest lag given)");
  simulate->add_option("--length", sim_length, "Series length T")->required();
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--start", sim_start, "Date of the first value");
  simulate->add_option("--out", sim_out, "Output CSV path")->required();

  pl::SmoothRequest smooth_req;
  std::string smooth_in, smooth_outp, smooth_column;
  std::optional<double> smooth_penalty;
  auto* smooth = app.add_subcommand("smooth", "Rolling-mean or penalized-spline smoothing of a daily series");
  smooth->add_option("--input", smooth_in, "CSV with a date column and a value column (value, count, new_cases or proportion)")->required();
  auto* col_opt = smooth->add_option("--column", smooth_column, "Value column name");
  smooth->add_option("--method", smooth_req.method, "rolling | spline")->capture_default_str();
  smooth->add_option("--window", smooth_req.window, "Rolling window (odd)")->capture_default_str();
  smooth->add_option("--penalty", smooth_penalty, "Spline penalty (GCV when omitted)");
  smooth->add_option("--out", smooth_outp, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(pl::ExitCode::Config);
  }

  try {
    if (*validate) return report(pl::run_validate(build_config(vo, vf), std::cerr));
    if (*filter) return report(pl::run_filter(build_config(fo, ff), std::cerr));
    if (*rep) {
      auto cfg = build_config(ro, rf);
      apply_model_flags(rmo, rm, cfg.model, cfg.mcmc);
      return report(pl::run_pipeline(cfg, std::cerr));
    }
    if (*fit) {
      pl::FitRequest req;
      req.series_path = series_path;
      if (fit_out_opt->count()) req.output_dir = fit_out;
      apply_model_flags(fmo, fm, req.model, req.mcmc);
      return report(pl::run_fit(req, std::cerr));
    }
    if (*simulate) {
      pl::SimulateRequest req;
      if (!curves_file.empty()) {
        std::ifstream in(curves_file);
        if (!in) throw at::ConfigError("cannot open curve spec '" + curves_file + "'");
        try {
          req.curves = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw at::ConfigError("curve spec is not valid JSON: " + std::string(e.what()));
        }
      } else {
        req.curves = nlohmann::json::object();
        req.curves["trend"] = sim_mu.value_or(0.0);
        req.curves["lags"] = nlohmann::json::object();
        for (const auto& item : sim_lags) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) throw at::ConfigError("--lag expects i=value, got '" + item + "'");
          try {
            req.curves["lags"][item.substr(0, eq)] = std::stod(item.substr(eq + 1));
          } catch (const std::exception&) {
            throw at::ConfigError("--lag expects i=value, got '" + item + "'");
          }
        }
      }
      if (sim_order) req.curves["lag_order"] = sim_order;
      req.length = sim_length;
      req.seed = sim_seed;
      try {
        req.start_date = at::Date::parse(sim_start);
      } catch (const std::invalid_argument& e) {
        throw at::ConfigError(e.what());
      }
      req.output_path = sim_out;
      return report(pl::run_simulate(req, std::cerr));
    }
    if (*smooth) {
      smooth_req.input_path = smooth_in;
      if (col_opt->count()) smooth_req.column = smooth_column;
      smooth_req.penalty = smooth_penalty;
      smooth_req.output_path = smooth_outp;
      return report(pl::run_smooth(smooth_req, std::cerr));
    }
  } catch (const at::ConfigError& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return static_cast<int>(pl::ExitCode::Config);
  }
  return static_cast<int>(pl::ExitCode::Failure);
}
