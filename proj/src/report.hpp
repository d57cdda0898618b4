#pragma once

#include <string>

#include "infer.hpp"

namespace mnr::report {

// Shortest round-trip decimal text for a double ("inf"/"-inf"/"nan" for
// non-finite values), used by every serializer so outputs are byte-stable.
std::string fmt_double(double v);

// CSV with header feature,beta_hat,se,ci_low,ci_high,p_value,p_holm,p_bh,
// z_score,df,subset_size; feature indices are 1-based on disk.
std::string report_to_csv(const infer::MnrReport &rep);

// Full report as JSON: records plus selection, blankets summary, errors,
// causal output and metadata.
std::string report_to_json(const infer::MnrReport &rep);

infer::MnrReport report_from_json(const std::string &text);

} // namespace mnr::report
