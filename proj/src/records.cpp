#include "elflab/records.hpp"

#include <istream>
#include <ostream>

namespace elflab {

std::string to_json_line(const RoundRecord& r) {
  nlohmann::ordered_json j;
  j["round"] = r.round;
  j["candidate"] = r.candidate == kNone ? 0 : r.candidate + 1;
  j["selected"] = r.selected + 1;
  j["exploration"] = r.exploration;
  auto observed = nlohmann::ordered_json::array();
  for (const auto& o : r.observed) observed.push_back(o ? nlohmann::ordered_json(*o) : nlohmann::ordered_json());
  j["observed"] = std::move(observed);
  j["woe"] = r.woe;
  return j.dump();
}

RoundRecord parse_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  RoundRecord r;
  r.round = j.at("round").get<int>();
  const int c = j.at("candidate").get<int>();
  r.candidate = c == 0 ? kNone : c - 1;
  r.selected = j.at("selected").get<int>() - 1;
  r.exploration = j.at("exploration").get<bool>();
  for (const auto& o : j.at("observed")) {
    if (o.is_null()) r.observed.emplace_back();
    else r.observed.emplace_back(o.get<double>());
  }
  r.woe = j.at("woe").get<std::vector<std::uint8_t>>();
  return r;
}

void write_records(std::ostream& out, const std::vector<RoundRecord>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<RoundRecord> read_records(std::istream& in) {
  std::vector<RoundRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_json_line(line));
  return out;
}

nlohmann::ordered_json to_json(const AuditReport& a) {
  nlohmann::ordered_json j;
  j["belief"] = a.belief_index;
  j["decision_round"] = a.decision_round;
  j["target_round"] = a.target_round;
  j["transcript"] = a.transcript_index;
  j["truthful"] = a.truthful;
  j["best_grid"] = a.best_grid;
  j["best_refined"] = a.best_refined;
  j["prob_truthful"] = a.prob_truthful;
  j["prob_best"] = a.prob_best;
  j["margin"] = a.margin;
  j["margin_nonadjacent"] = a.margin_nonadjacent;
  j["pass"] = a.pass;
  return j;
}

}  // namespace elflab
