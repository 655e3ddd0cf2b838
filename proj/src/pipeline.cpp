#include "abusetrend/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "abusetrend/checkpoint.hpp"
#include "abusetrend/csv.hpp"
#include "abusetrend/errors.hpp"
#include "abusetrend/ingest.hpp"
#include "abusetrend/summary.hpp"

namespace abusetrend::pipeline {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

ExitCode code_for_stage(const std::string& stage) {
  if (stage == "config") return ExitCode::Config;
  if (stage == "ingest" || stage == "filter" || stage == "adjust") return ExitCode::Ingest;
  if (stage == "fit" || stage == "summarize" || stage == "simulate" || stage == "smooth")
    return ExitCode::Model;
  return ExitCode::Failure;
}

// Runs `body`, which advances `stage` as it goes, and maps failures to exit codes.
template <typename Body>
RunResult guarded(std::ostream& log, Body&& body) {
  RunResult result;
  std::string stage = "config";
  try {
    body(stage, result);
    return result;
  } catch (const ConfigError& e) {
    result.code = ExitCode::Config;
    result.message = e.what();
  } catch (const IngestError& e) {
    result.code = ExitCode::Ingest;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.code = code_for_stage(stage);
    result.message = e.what();
  }
  result.stage = stage;
  log << "error [" << stage << "]: " << result.message << '\n';
  return result;
}

template <typename T>
void read_key(const json& obj, const char* key, T& dest) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(dest);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown config key '") + key + "' in " + where);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Date parse_config_date(const std::string& text, const char* key) {
  try {
    return Date::parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

json model_json(const tvbarc::ModelSpec& m) {
  return {{"lag_order", m.lag_order},
          {"n_basis_trend", m.n_basis_trend},
          {"n_basis_lag", m.n_basis_lag},
          {"spline_degree", m.spline_degree},
          {"stability_margin", m.stability_margin},
          {"lag_prior", std::string(tvbarc::lag_prior_name(m.lag_prior))},
          {"shrinkage_shape", m.shrinkage_shape},
          {"shrinkage_rate", m.shrinkage_rate}};
}

json mcmc_json(const tvbarc::McmcConfig& m) {
  return {{"n_iter", m.n_iter},         {"n_burn", m.n_burn},
          {"thin", m.thin},             {"seed", m.seed},
          {"step_trend", m.step_trend}, {"step_lag", m.step_lag},
          {"target_accept", m.target_accept}, {"adapt_batch", m.adapt_batch},
          {"n_chains", m.n_chains},     {"prior_scale", m.prior_scale}};
}

void validate_model(const tvbarc::ModelSpec& model, const tvbarc::McmcConfig& mcmc) {
  try {
    model.validate();
    mcmc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

struct Ingested {
  ScoredSamples samples;
  CountSeries counts;
};

Ingested ingest_inputs(const PipelineConfig& config) {
  // Both files are read before anything is written.
  Ingested in;
  in.counts = parse_counts(config.counts_path, *config.window);
  in.samples = parse_scored_tweets(config.tweets_path, *config.window);
  return in;
}

json inputs_json(const std::vector<std::pair<std::string, fs::path>>& inputs) {
  json arr = json::array();
  for (const auto& [role, path] : inputs)
    arr.push_back({{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
  return arr;
}

json outputs_json(const ArtifactWriter& writer) {
  json arr = json::array();
  for (const auto& [name, hash] : writer.hashes())
    arr.push_back({{"name", name}, {"sha256", hash}});
  return arr;
}

void write_manifest(ArtifactWriter& writer, const json& manifest) {
  writer.write("manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
}

json base_manifest(const std::string& command) {
  return {{"tool", "abusetrend"}, {"version", kVersion}, {"command", command}};
}

// Filter and adjust stages shared by `filter` and `report`.
struct Filtered {
  ProportionSeries proportions;
  AdjustedSeries adjusted;
  ScoreHistogram histogram;
};

Filtered filter_and_adjust(const PipelineConfig& config, const Ingested& in, std::string& stage) {
  stage = "filter";
  Filtered f;
  f.proportions = daily_proportions(in.samples.days, config.filter, config.empty_policy);
  std::vector<ScoredTweet> all;
  all.reserve(in.samples.accepted);
  for (const auto& day : in.samples.days) all.insert(all.end(), day.tweets.begin(), day.tweets.end());
  f.histogram = score_histogram(all, config.histogram_bins);
  stage = "adjust";
  f.adjusted = adjust(f.proportions, in.counts);
  return f;
}

json ingest_report(const Ingested& in) {
  std::size_t empty_days = 0;
  for (const auto& d : in.samples.days) empty_days += d.tweets.empty() ? 1 : 0;
  return {{"days", in.samples.days.size()},
          {"accepted_tweets", in.samples.accepted},
          {"rejected_outside_window", in.samples.rejected_outside_window},
          {"empty_sample_days", empty_days}};
}

}  // namespace

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

void PipelineConfig::apply_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"tweets", "counts", "start", "end", "filter", "empty_day_policy",
                  "histogram_bins", "model", "mcmc", "output_dir"},
                 "top level");
  std::string s;
  if (j.contains("tweets")) {
    read_key(j, "tweets", s);
    tweets_path = resolve(base_dir, s);
  }
  if (j.contains("counts")) {
    read_key(j, "counts", s);
    counts_path = resolve(base_dir, s);
  }
  if (j.contains("output_dir")) {
    read_key(j, "output_dir", s);
    output_dir = resolve(base_dir, s);
  }
  if (j.contains("start") || j.contains("end")) {
    DateRange w = window.value_or(DateRange{});
    if (j.contains("start")) {
      read_key(j, "start", s);
      w.first = parse_config_date(s, "start");
    }
    if (j.contains("end")) {
      read_key(j, "end", s);
      w.last = parse_config_date(s, "end");
    }
    window = w;
  }
  if (j.contains("filter")) {
    read_key(j, "filter", s);
    try {
      filter = ThresholdFilter::parse(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("empty_day_policy")) {
    read_key(j, "empty_day_policy", s);
    try {
      empty_policy = parse_empty_day_policy(s);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  read_key(j, "histogram_bins", histogram_bins);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (!m.is_object()) throw ConfigError("config key 'model' must be an object");
    reject_unknown(m, {"lag_order", "n_basis_trend", "n_basis_lag", "spline_degree",
                       "stability_margin", "lag_prior", "shrinkage_shape", "shrinkage_rate"},
                   "model");
    read_key(m, "lag_order", model.lag_order);
    read_key(m, "n_basis_trend", model.n_basis_trend);
    read_key(m, "n_basis_lag", model.n_basis_lag);
    read_key(m, "spline_degree", model.spline_degree);
    read_key(m, "stability_margin", model.stability_margin);
    if (m.contains("lag_prior")) {
      std::string name;
      read_key(m, "lag_prior", name);
      try {
        model.lag_prior = tvbarc::parse_lag_prior(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    read_key(m, "shrinkage_shape", model.shrinkage_shape);
    read_key(m, "shrinkage_rate", model.shrinkage_rate);
  }
  if (j.contains("mcmc")) {
    const auto& m = j.at("mcmc");
    if (!m.is_object()) throw ConfigError("config key 'mcmc' must be an object");
    reject_unknown(m, {"n_iter", "n_burn", "thin", "seed", "step_trend", "step_lag",
                       "target_accept", "adapt_batch", "n_chains", "prior_scale"},
                   "mcmc");
    read_key(m, "n_iter", mcmc.n_iter);
    read_key(m, "n_burn", mcmc.n_burn);
    read_key(m, "thin", mcmc.thin);
    read_key(m, "seed", mcmc.seed);
    read_key(m, "step_trend", mcmc.step_trend);
    read_key(m, "step_lag", mcmc.step_lag);
    read_key(m, "target_accept", mcmc.target_accept);
    read_key(m, "adapt_batch", mcmc.adapt_batch);
    read_key(m, "n_chains", mcmc.n_chains);
    read_key(m, "prior_scale", mcmc.prior_scale);
  }
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  PipelineConfig cfg;
  cfg.apply_json(j, path.parent_path());
  return cfg;
}

json PipelineConfig::to_json() const {
  json j;
  j["tweets"] = tweets_path.string();
  j["counts"] = counts_path.string();
  if (window) {
    j["start"] = window->first.iso();
    j["end"] = window->last.iso();
  }
  j["filter"] = filter.notation();
  j["empty_day_policy"] = std::string(to_string(empty_policy));
  j["histogram_bins"] = histogram_bins;
  j["model"] = model_json(model);
  j["mcmc"] = mcmc_json(mcmc);
  j["output_dir"] = output_dir.string();
  return j;
}

void PipelineConfig::validate() const {
  if (tweets_path.empty()) throw ConfigError("no scored-tweet file given");
  if (counts_path.empty()) throw ConfigError("no counts file given");
  if (!window) throw ConfigError("no date window given (start and end)");
  if (window->empty())
    throw ConfigError("date window is empty: end " + window->last.iso() + " precedes start " +
                      window->first.iso());
  if (histogram_bins == 0) throw ConfigError("histogram_bins must be positive");
  validate_model(model, mcmc);
}

ArtifactWriter::ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir_.string() + "'");
}

std::string ArtifactWriter::write(const std::string& name,
                                  const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf;
  body(buf);
  const std::string bytes = std::move(buf).str();
  const fs::path partial = dir_ / (name + ".partial");
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write '" + partial.string() + "'");
  }
  names_.push_back(name);
  hashes_.emplace_back(name, sha256_hex(bytes));
  return hashes_.back().second;
}

std::vector<fs::path> ArtifactWriter::commit() {
  std::vector<fs::path> done;
  for (const auto& name : names_) {
    const fs::path final_path = dir_ / name;
    fs::rename(dir_ / (name + ".partial"), final_path);
    done.push_back(final_path);
  }
  names_.clear();
  return done;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

RunResult run_validate(const PipelineConfig& config, std::ostream& log) {
  return guarded(log, [&](std::string& stage, RunResult&) {
    config.validate();
    stage = "ingest";
    const auto in = ingest_inputs(config);
    const auto report = ingest_report(in);
    std::int64_t total = 0;
    for (auto v : in.counts.values) total += v;
    log << "window " << config.window->first.iso() << " .. " << config.window->last.iso() << " ("
        << report["days"].get<std::size_t>() << " days)\n"
        << "scored tweets accepted: " << in.samples.accepted
        << ", outside window: " << in.samples.rejected_outside_window
        << ", empty sample days: " << report["empty_sample_days"].get<std::size_t>() << '\n'
        << "count total: " << total << '\n';
  });
}

RunResult run_filter(const PipelineConfig& config, std::ostream& log) {
  return guarded(log, [&](std::string& stage, RunResult& result) {
    config.validate();
    stage = "ingest";
    const auto in = ingest_inputs(config);
    const auto f = filter_and_adjust(config, in, stage);
    stage = "export";
    ArtifactWriter writer(config.output_dir);
    writer.write("proportions.csv", [&](std::ostream& o) { write_proportions(o, f.proportions); });
    writer.write("adjusted.csv", [&](std::ostream& o) { write_adjusted(o, f.adjusted, in.counts); });
    writer.write("score_histogram.csv", [&](std::ostream& o) { write_histogram(o, f.histogram); });
    json manifest = base_manifest("filter");
    manifest["config"] = config.to_json();
    manifest["seed"] = config.mcmc.seed;
    manifest["inputs"] = inputs_json({{"tweets", config.tweets_path}, {"counts", config.counts_path}});
    manifest["ingest"] = ingest_report(in);
    manifest["outputs"] = outputs_json(writer);
    write_manifest(writer, manifest);
    result.artifacts = writer.commit();
  });
}

RunResult run_pipeline(const PipelineConfig& config, std::ostream& log) {
  return guarded(log, [&](std::string& stage, RunResult& result) {
    config.validate();
    stage = "ingest";
    const auto in = ingest_inputs(config);
    const auto f = filter_and_adjust(config, in, stage);

    stage = "export";
    ArtifactWriter writer(config.output_dir);
    writer.write("proportions.csv", [&](std::ostream& o) { write_proportions(o, f.proportions); });
    writer.write("adjusted.csv", [&](std::ostream& o) { write_adjusted(o, f.adjusted, in.counts); });
    writer.write("score_histogram.csv", [&](std::ostream& o) { write_histogram(o, f.histogram); });

    stage = "fit";
    const auto draws = tvbarc::fit(f.adjusted, config.model, config.mcmc);
    for (const auto& w : draws.warnings) log << "warning [fit]: " << w << '\n';
    stage = "summarize";
    const auto summary = tvbarc::summarize(draws);

    stage = "export";
    writer.write("fit_summary.csv", [&](std::ostream& o) { tvbarc::write_summary_csv(o, summary); });
    writer.write("fit_summary.json",
                 [&](std::ostream& o) { tvbarc::write_summary_json(o, summary, &draws); });
    writer.write("draws.json", [&](std::ostream& o) { tvbarc::save_draws(o, draws); });
    json manifest = base_manifest("report");
    manifest["config"] = config.to_json();
    manifest["seed"] = config.mcmc.seed;
    manifest["inputs"] = inputs_json({{"tweets", config.tweets_path}, {"counts", config.counts_path}});
    manifest["ingest"] = ingest_report(in);
    manifest["warnings"] = draws.warnings;
    manifest["outputs"] = outputs_json(writer);
    write_manifest(writer, manifest);
    result.artifacts = writer.commit();
  });
}

AdjustedSeries read_count_series(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw SchemaError("'" + path.string() + "': no header row");
  const csv::Header header(*header_row);
  const auto c_date = header.find("date");
  const auto c_count = header.find("count");
  if (!c_date || !c_count)
    throw SchemaError("'" + path.string() + "': series needs 'date' and 'count' columns");
  AdjustedSeries series;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header.size())
      throw ParseError(path.string(), rec->line, "wrong number of fields");
    Date d;
    try {
      d = Date::parse(csv::trim(rec->fields[*c_date]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), rec->line, e.what());
    }
    const auto v = csv::parse_integer(rec->fields[*c_count]);
    if (!v) throw ParseError(path.string(), rec->line, "count is not an integer");
    if (*v < 0) throw ValidationError("'" + path.string() + "': negative count on " + d.iso());
    if (series.values.empty()) {
      series.start_date = d;
    } else if (d != series.date_at(series.size())) {
      std::vector<Date> missing;
      for (Date m = series.date_at(series.size()); m < d; ++m) missing.push_back(m);
      if (missing.empty())
        throw ValidationError("'" + path.string() + "' line " + std::to_string(rec->line) +
                              ": dates must be strictly increasing");
      throw GapError("'" + path.string() + "': series has a gap before " + d.iso(),
                     std::move(missing));
    }
    series.values.push_back(*v);
  }
  if (series.values.empty()) throw ValidationError("'" + path.string() + "': no data rows");
  return series;
}

smooth::DailySeries read_numeric_series(const fs::path& path,
                                        const std::optional<std::string>& column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw SchemaError("'" + path.string() + "': no header row");
  const csv::Header header(*header_row);
  const auto c_date = header.find("date");
  if (!c_date) throw SchemaError("'" + path.string() + "': missing 'date' column");
  std::optional<std::size_t> c_value;
  if (column) {
    c_value = header.find(*column);
    if (!c_value) throw SchemaError("'" + path.string() + "': missing column '" + *column + "'");
  } else {
    for (const char* name : {"value", "count", "new_cases", "proportion"})
      if (!c_value) c_value = header.find(name);
    if (!c_value)
      throw SchemaError("'" + path.string() +
                        "': no value column (value, count, new_cases or proportion)");
  }
  smooth::DailySeries series;
  while (auto rec = reader.next()) {
    if (rec->fields.size() != header.size())
      throw ParseError(path.string(), rec->line, "wrong number of fields");
    Date d;
    try {
      d = Date::parse(csv::trim(rec->fields[*c_date]));
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string(), rec->line, e.what());
    }
    const auto v = csv::parse_double(rec->fields[*c_value]);
    if (!v || !std::isfinite(*v))
      throw ParseError(path.string(), rec->line, "value is not a finite number");
    if (series.values.empty()) {
      series.start_date = d;
    } else if (d != series.date_at(series.size())) {
      throw GapError("'" + path.string() + "': dates not consecutive at " + d.iso(), {});
    }
    series.values.push_back(*v);
  }
  if (series.values.empty()) throw ValidationError("'" + path.string() + "': no data rows");
  return series;
}

RunResult run_fit(const FitRequest& request, std::ostream& log) {
  return guarded(log, [&](std::string& stage, RunResult& result) {
    validate_model(request.model, request.mcmc);
    stage = "ingest";
    const auto series = read_count_series(request.series_path);
    stage = "fit";
    const auto draws = tvbarc::fit(series, request.model, request.mcmc);
    for (const auto& w : draws.warnings) log << "warning [fit]: " << w << '\n';
    stage = "summarize";
    const auto summary = tvbarc::summarize(draws);
    stage = "export";
    ArtifactWriter writer(request.output_dir);
    writer.write("fit_summary.csv", [&](std::ostream& o) { tvbarc::write_summary_csv(o, summary); });
    writer.write("fit_summary.json",
                 [&](std::ostream& o) { tvbarc::write_summary_json(o, summary, &draws); });
    writer.write("draws.json", [&](std::ostream& o) { tvbarc::save_draws(o, draws); });
    json manifest = base_manifest("fit");
    manifest["config"] = {{"series", request.series_path.string()},
                          {"model", model_json(request.model)},
                          {"mcmc", mcmc_json(request.mcmc)},
                          {"output_dir", request.output_dir.string()}};
    manifest["seed"] = request.mcmc.seed;
    manifest["inputs"] = inputs_json({{"series", request.series_path}});
    manifest["warnings"] = draws.warnings;
    manifest["outputs"] = outputs_json(writer);
    write_manifest(writer, manifest);
    result.artifacts = writer.commit();
  });
}

sim::ParamCurves parse_curve_spec(const json& j) {
  if (!j.is_object()) throw ConfigError("curve spec must be a JSON object");
  reject_unknown(j, {"trend", "lags", "lag_order"}, "curve spec");
  const auto parse_curve = [](const json& c, const std::string& what) -> sim::Curve {
    try {
      if (c.is_number()) return sim::Curve::constant(c.get<double>());
      if (c.is_object() && c.contains("points")) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : c.at("points")) {
          if (!p.is_array() || p.size() != 2)
            throw ConfigError(what + ": points must be [u, value] pairs");
          pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        return sim::Curve::piecewise_linear(std::move(pts));
      }
      if (c.is_object() && c.contains("sine")) {
        const auto& s = c.at("sine");
        const double mean = s.at("mean").get<double>();
        const double amp = s.value("amplitude", 0.0);
        const double periods = s.value("periods", 1.0);
        return sim::Curve::closed_form(
            [=](double u) { return mean + amp * std::sin(2.0 * std::numbers::pi * periods * u); },
            "sine");
      }
    } catch (const json::exception& e) {
      throw ConfigError(what + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(what + ": " + e.what());
    }
    throw ConfigError(what + ": expected a number, {\"points\": ...} or {\"sine\": ...}");
  };

  sim::ParamCurves curves;
  curves.trend = j.contains("trend") ? parse_curve(j.at("trend"), "trend") : sim::Curve::constant(0.0);
  std::size_t order = 0;
  read_key(j, "lag_order", order);
  const bool fixed_order = j.contains("lag_order");
  std::vector<std::pair<std::size_t, sim::Curve>> given;
  if (j.contains("lags")) {
    if (!j.at("lags").is_object()) throw ConfigError("'lags' must map lag numbers to curves");
    for (const auto& [key, value] : j.at("lags").items()) {
      const auto parsed = csv::parse_integer(key);
      if (!parsed || key.find('.') != std::string::npos || *parsed < 1)
        throw ConfigError("lag key '" + key + "' is not a positive integer (lags are numbered from 1)");
      const auto lag = static_cast<std::size_t>(*parsed);
      if (fixed_order && lag > order)
        throw ConfigError("lag " + key + " exceeds lag_order " + std::to_string(order));
      given.emplace_back(lag, parse_curve(value, "lag " + key));
      order = std::max(order, lag);
    }
  }
  curves.lags.assign(order, sim::Curve::constant(0.0));
  for (auto& [lag, curve] : given) curves.lags[lag - 1] = std::move(curve);
  try {
    curves.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return curves;
}

RunResult run_simulate(const SimulateRequest& request, std::ostream& log) {
  return guarded(log, [&](std::string& stage, RunResult& result) {
    const auto curves = parse_curve_spec(request.curves);
    if (request.length <= curves.lags.size())
      throw ConfigError("length " + std::to_string(request.length) +
                        " must exceed the lag order " + std::to_string(curves.lags.size()));
    if (request.output_path.empty()) throw ConfigError("no output path given");
    stage = "simulate";
    const auto series = sim::simulate(curves, request.length, request.seed, request.start_date);
    stage = "export";
    fs::path dir = request.output_path.parent_path();
    ArtifactWriter writer(dir.empty() ? fs::path(".") : dir);
    const std::string name = request.output_path.filename().string();
    writer.write(name, [&](std::ostream& o) {
      o << "date,count\n";
      for (std::size_t t = 0; t < series.size(); ++t)
        o << series.date_at(t).iso() << ',' << series.values[t] << '\n';
    });
    result.artifacts = writer.commit();
  });
}

RunResult run_smooth(const SmoothRequest& request, std::ostream& log) {
  return guarded(log, [&](std::string& stage, RunResult& result) {
    if (request.method != "rolling" && request.method != "spline")
      throw ConfigError("unknown smoothing method '" + request.method + "' (rolling or spline)");
    if (request.output_path.empty()) throw ConfigError("no output path given");
    stage = "ingest";
    const auto series = read_numeric_series(request.input_path, request.column);
    stage = "smooth";
    smooth::SmoothedSeries smoothed;
    if (request.method == "rolling") {
      smoothed = smooth::rolling_mean(series, request.window);
    } else if (request.penalty) {
      smoothed = smooth::spline_smooth(series, *request.penalty);
    } else {
      smoothed = smooth::spline_smooth_gcv(series);
      log << "spline penalty chosen by GCV: " << csv::format_double(smoothed.penalty) << '\n';
    }
    stage = "export";
    fs::path dir = request.output_path.parent_path();
    ArtifactWriter writer(dir.empty() ? fs::path(".") : dir);
    writer.write(request.output_path.filename().string(),
                 [&](std::ostream& o) { smooth::write_smoothed(o, series, smoothed); });
    result.artifacts = writer.commit();
  });
}

}  // namespace abusetrend::pipeline
