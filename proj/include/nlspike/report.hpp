#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "nlspike/analysis.hpp"

namespace nlspike {

inline constexpr const char* kReportCsvHeader =
    "operator,kind,d,H,K,T,L,samples,seed,mean_abs,max_abs,mean_rel,max_rel,bound,slack,pass";
inline constexpr const char* kOpCountCsvHeader = "operator,d,T,macs,acs,shifts";

/// Shortest round-trip decimal for a double; "inf" / "nan" spelled out.
std::string format_number(double v);

std::string reports_to_csv(std::span<const ErrorReport> rows);
std::string reports_to_json(std::span<const ErrorReport> rows);
std::string opcounts_to_csv(std::span<const OpCountReport> rows);
std::string opcounts_to_json(std::span<const OpCountReport> rows);

/// Mean and max absolute error against x_key ("d" or "H"), one polyline
/// per kind, log-scaled y axis.
std::string reports_to_svg(std::span<const ErrorReport> rows, const std::string& x_key, const std::string& title);

/// Writes the whole string at once; throws std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nlspike
