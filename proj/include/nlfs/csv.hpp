#pragma once

#include "nlfs/chain.hpp"
#include "nlfs/diagnostics.hpp"
#include "nlfs/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace nlfs {

/// Reads a two-column `x,y` file (header required). Throws parse_error with
/// the offending line number on malformed input.
Dataset read_xy_csv(const std::string& path);

/// Free-form metadata persisted in the draws file header (`# key=value`).
using Metadata = std::map<std::string, std::string>;

/// Writes the posterior draws with a metadata header, the column-name line,
/// and one row per kept draw. Values are printed with 17 significant digits
/// so that a reread reproduces the doubles exactly.
void write_draws_csv(const std::string& path, const FitResult& fit, const Metadata& extra);

/// Rereads a draws file; reconstructs the fit (family, basis, space) from the
/// metadata. Row/column counts are validated against the recorded ones.
FitResult read_draws_csv(const std::string& path, Metadata& meta_out);

/// summary_curve.csv: grid point (original x units), mean, lower, upper.
void write_summary_curve(const std::string& path, const PosteriorSummary& summary);

/// summary_params.csv: per-parameter posterior summaries plus the recorded
/// acceptance rates as trailing rows.
void write_summary_params(const std::string& path, const PosteriorSummary& summary,
                          const std::vector<std::pair<std::string, double>>& acceptance);

/// One trace file per monitored scalar: `iteration,value`.
void write_trace(const std::string& path, const std::string& name, const ChainDraws& draws);

std::string format_double(double v);  // %.17g, the persistence format

}  // namespace nlfs
