#pragma once

#include <istream>
#include <ostream>

#include "abusetrend/sampler.hpp"

namespace abusetrend::tvbarc {

// JSON checkpoint of a fit:
//   {"format": "abusetrend-draws", "version": 1,
//    "spec": {...ModelSpec...}, "mcmc": {...McmcConfig incl. seed...},
//    "start_date": "YYYY-MM-DD", "series_length": T, "prior_scale": s,
//    "draws": [{"b": [K], "c": [[K_lag] x p], "log_posterior": v}, ...],
//    "diagnostics": [...], "warnings": [...]}
// Doubles are written in shortest round-trip form, so load(save(x)) == x.
void save_draws(std::ostream& out, const PosteriorDraws& draws);

// Throws std::runtime_error on a malformed or foreign file.
PosteriorDraws load_draws(std::istream& in);

}  // namespace abusetrend::tvbarc
