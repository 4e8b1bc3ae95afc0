#pragma once

#include <iosfwd>
#include <string>

#include "iontrap/pipeline.hpp"

namespace iontrap {

inline constexpr int report_schema_version = 1;

void write_report_text(std::ostream& os, const Report& report);

/// Machine-readable report; schema in docs/report_schema.md.
void write_report_json(std::ostream& os, const Report& report);
std::string report_json(const Report& report);

} // namespace iontrap
