#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "elflab/incentives.hpp"
#include "elflab/mechanisms.hpp"

namespace elflab {

// One JSON object per line, fields in a fixed order. Experts are written
// 1-based; candidate 0 means none.
std::string to_json_line(const RoundRecord& record);
RoundRecord parse_json_line(const std::string& line);

void write_records(std::ostream& out, const std::vector<RoundRecord>& records);
std::vector<RoundRecord> read_records(std::istream& in);

nlohmann::ordered_json to_json(const AuditReport& report);

}  // namespace elflab
