#pragma once

#include <string>

#include <json.hpp>

#include "irtcal/analysis.hpp"
#include "irtcal/ctt.hpp"
#include "irtcal/estimation.hpp"

namespace irtcal {

// Text output rounds standardized estimates to 2 decimals and r, z and the
// comparison statistics to 3; CSV and JSON carry full double precision.

std::string axis_name(Axis axis);

std::string format_table_text(const RankedTable& table);
std::string format_table_csv(const RankedTable& table, bool with_header = true);
nlohmann::json to_json(const RankedTable& table);

std::string format_comparison_text(const ComparisonReport& report, Axis axis);
std::string format_comparison_csv(const ComparisonReport& report, Axis axis);
nlohmann::json to_json(const ComparisonReport& report);

std::string format_ctt_text(const CttReport& report, const ResponseMatrix& matrix);
std::string format_ctt_csv(const CttReport& report, const ResponseMatrix& matrix);
nlohmann::json to_json(const CttReport& report, const ResponseMatrix& matrix);

nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const ParameterSet& params);

}  // namespace irtcal
