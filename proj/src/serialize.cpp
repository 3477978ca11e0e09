#include "dcsim/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace dcsim {

namespace {

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

Json axes_to_json(const std::vector<SubsystemSpec>& axes) {
  Json out = Json::array();
  for (const auto& axis : axes) {
    out.push_back(Json{{"name", axis.name}, {"alphabet", axis.alphabet}});
  }
  return out;
}

}  // namespace

Json state_to_json(const StateVector& s) {
  Json terms = Json::array();
  for (const auto& [key, amp] : s.terms()) {
    terms.push_back(Json{{"label", s.labels_of(key)}, {"re", amp.real()}, {"im", amp.imag()}});
  }
  return terms;
}

Json table_to_json(const ProbabilityTable& table) {
  Json entries = Json::array();
  for (const auto& [key, p] : table.entries) {
    entries.push_back(Json{{"labels", table.labels_of(key)}, {"p", p}});
  }
  return Json{{"selection", table.selection()}, {"entries", entries}};
}

Json joint_to_json(const JointTable& table) {
  Json entries = Json::array();
  for (const auto& [key, v] : table.entries) {
    std::vector<std::string> labels(key.size());
    for (std::size_t i = 0; i < key.size(); ++i)
      labels[i] = table.axes[i].alphabet[key[i]];
    entries.push_back(Json{{"labels", labels}, {"value", v}});
  }
  Json out{{"axes", axes_to_json(table.axes)},
           {"kind", table.kind == TableKind::kExact ? "exact" : "empirical"},
           {"entries", entries}};
  if (table.kind == TableKind::kEmpirical) out["shots"] = table.shots;
  return out;
}

Json fringe_to_json(const FringeFit& fit) {
  return Json{{"visibility", fit.visibility},
              {"phase", fit.phase},
              {"baseline", fit.baseline},
              {"residual", fit.residual}};
}

Json histogram_to_json(const Histogram& hist, const Geometry& g) {
  Json bins = Json::array();
  for (std::size_t b = 0; b < hist.values.size(); ++b) {
    bins.push_back(Json{{"bin_index", b},
                        {"sin_theta", std::sin(g.bin_angles[b])},
                        {"count_or_prob", hist.values[b]}});
  }
  return Json{{"axis", hist.axis.name}, {"bins", bins}};
}

Json branch_trace_to_json(const EngineState& engine) {
  Json nodes = Json::array();
  for (const auto& node : engine.tree()) {
    Json entry{{"id", node.id},
               {"parent", node.parent ? Json(*node.parent) : Json(nullptr)},
               {"outcome_assignment", Json(node.outcome_assignment)},
               {"weight", node.conditional_weight}};
    nodes.push_back(std::move(entry));
  }
  Json observers = Json::array();
  for (const auto& id : engine.observer_ids()) {
    Json log = Json::array();
    for (const auto& entry : engine.observer_record(id)) {
      Json item{{"subsystem", entry.subsystem}, {"outcome", entry.outcome}};
      if (entry.heard) item["heard_from"] = entry.heard_from;
      log.push_back(std::move(item));
    }
    observers.push_back(
        Json{{"id", id}, {"hangup", engine.observer(id).hangup}, {"log", log}});
  }
  return Json{{"nodes", nodes}, {"observers", observers}};
}

std::string histogram_csv(const Histogram& hist, const Geometry& g) {
  std::string out = "bin_index,sin_theta,count_or_prob\n";
  for (std::size_t b = 0; b < hist.values.size(); ++b) {
    out += std::to_string(b);
    out += ',';
    out += format_double(std::sin(g.bin_angles[b]));
    out += ',';
    out += format_double(hist.values[b]);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream stream(p, std::ios::binary);
  if (!stream) fail("bad-config", "cannot open '" + path + "' for writing");
  stream << content;
}

}  // namespace dcsim
