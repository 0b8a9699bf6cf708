#pragma once

#include <string>

#include "autosd/trace_model.hpp"

namespace autosd {

enum class ReportFormat { Markdown, Html };

ReportFormat parse_report_format(std::string_view name);

/// One collapsible block per step, headers colored by verdict, patch and confidence in the footer.
std::string render_report(const RepairSession& session, ReportFormat format);

/// Verdict color names: green, red, yellow.
std::string_view verdict_color(Verdict v);

std::string html_escape(std::string_view text);

}  // namespace autosd
