#pragma once

#include <string>

#include <json.hpp>

#include "dcsim/optics.hpp"
#include "dcsim/semantics.hpp"
#include "dcsim/statevec.hpp"
#include "dcsim/stats.hpp"

namespace dcsim {

/// ordered_json keeps insertion order, so identical data serializes to
/// byte-identical text.
using Json = nlohmann::ordered_json;

/// Debug dump schema: array of {"label": [strings], "re": x, "im": y}.
Json state_to_json(const StateVector& s);

Json table_to_json(const ProbabilityTable& table);
Json joint_to_json(const JointTable& table);
Json fringe_to_json(const FringeFit& fit);
Json histogram_to_json(const Histogram& hist, const Geometry& g);

/// Branch-trace dump: {"nodes": [{"id", "parent", "outcome_assignment", "weight"}]}.
Json branch_trace_to_json(const EngineState& engine);

/// CSV histogram: header `bin_index,sin_theta,count_or_prob`, one row per bin.
std::string histogram_csv(const Histogram& hist, const Geometry& g);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dcsim
