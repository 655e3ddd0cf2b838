#include "abusetrend/checkpoint.hpp"

#include <stdexcept>

#include "json.hpp"

namespace abusetrend::tvbarc {
namespace {

constexpr const char* kFormat = "abusetrend-draws";
constexpr int kVersion = 1;

}  // namespace

void save_draws(std::ostream& out, const PosteriorDraws& draws) {
  using nlohmann::json;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  const auto& s = draws.spec;
  j["spec"] = {{"lag_order", s.lag_order},
               {"n_basis_trend", s.n_basis_trend},
               {"n_basis_lag", s.n_basis_lag},
               {"spline_degree", s.spline_degree},
               {"stability_margin", s.stability_margin},
               {"lag_prior", std::string(lag_prior_name(s.lag_prior))},
               {"shrinkage_shape", s.shrinkage_shape},
               {"shrinkage_rate", s.shrinkage_rate}};
  const auto& m = draws.config;
  j["mcmc"] = {{"n_iter", m.n_iter},
               {"n_burn", m.n_burn},
               {"thin", m.thin},
               {"seed", m.seed},
               {"step_trend", m.step_trend},
               {"step_lag", m.step_lag},
               {"target_accept", m.target_accept},
               {"adapt_batch", m.adapt_batch},
               {"n_chains", m.n_chains},
               {"prior_scale", m.prior_scale}};
  j["start_date"] = draws.start_date.iso();
  j["series_length"] = draws.series_length;
  j["prior_scale"] = draws.prior_scale;
  j["draws"] = json::array();
  for (std::size_t d = 0; d < draws.draws.size(); ++d) {
    json item{{"b", draws.draws[d].b}, {"c", draws.draws[d].c}};
    if (d < draws.log_posterior.size()) item["log_posterior"] = draws.log_posterior[d];
    j["draws"].push_back(std::move(item));
  }
  j["diagnostics"] = json::array();
  for (const auto& d : draws.diagnostics)
    j["diagnostics"].push_back({{"block", d.block},
                                {"chain", d.chain},
                                {"acceptance_rate", d.acceptance_rate},
                                {"step_size", d.step_size}});
  j["warnings"] = draws.warnings;
  out << j.dump() << '\n';
}

PosteriorDraws load_draws(std::istream& in) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("draws checkpoint is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion)
    throw std::runtime_error("not an abusetrend draws checkpoint (format/version mismatch)");
  try {
    PosteriorDraws out;
    const auto& s = j.at("spec");
    s.at("lag_order").get_to(out.spec.lag_order);
    s.at("n_basis_trend").get_to(out.spec.n_basis_trend);
    s.at("n_basis_lag").get_to(out.spec.n_basis_lag);
    s.at("spline_degree").get_to(out.spec.spline_degree);
    s.at("stability_margin").get_to(out.spec.stability_margin);
    out.spec.lag_prior = parse_lag_prior(s.at("lag_prior").get<std::string>());
    s.at("shrinkage_shape").get_to(out.spec.shrinkage_shape);
    s.at("shrinkage_rate").get_to(out.spec.shrinkage_rate);
    const auto& m = j.at("mcmc");
    m.at("n_iter").get_to(out.config.n_iter);
    m.at("n_burn").get_to(out.config.n_burn);
    m.at("thin").get_to(out.config.thin);
    m.at("seed").get_to(out.config.seed);
    m.at("step_trend").get_to(out.config.step_trend);
    m.at("step_lag").get_to(out.config.step_lag);
    m.at("target_accept").get_to(out.config.target_accept);
    m.at("adapt_batch").get_to(out.config.adapt_batch);
    m.at("n_chains").get_to(out.config.n_chains);
    m.at("prior_scale").get_to(out.config.prior_scale);
    out.start_date = Date::parse(j.at("start_date").get<std::string>());
    j.at("series_length").get_to(out.series_length);
    j.at("prior_scale").get_to(out.prior_scale);
    for (const auto& item : j.at("draws")) {
      TvbarcParams p;
      item.at("b").get_to(p.b);
      item.at("c").get_to(p.c);
      out.draws.push_back(std::move(p));
      if (item.contains("log_posterior"))
        out.log_posterior.push_back(item.at("log_posterior").get<double>());
    }
    for (const auto& d : j.at("diagnostics")) {
      BlockDiagnostics bd;
      d.at("block").get_to(bd.block);
      d.at("chain").get_to(bd.chain);
      d.at("acceptance_rate").get_to(bd.acceptance_rate);
      d.at("step_size").get_to(bd.step_size);
      out.diagnostics.push_back(std::move(bd));
    }
    j.at("warnings").get_to(out.warnings);
    out.spec.validate();
    for (const auto& p : out.draws)
      if (!satisfies_constraints(p, out.spec))
        throw std::runtime_error("checkpoint contains a draw violating the model constraints");
    return out;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed draws checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed draws checkpoint: ") + e.what());
  }
}

}  // namespace abusetrend::tvbarc
