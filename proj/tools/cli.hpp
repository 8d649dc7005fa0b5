#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

namespace homsense::cli {

inline constexpr const char* kVersion = "0.1.0";

// Rendered result of one resolved configuration.
struct Output {
  std::string main;
  std::optional<std::string> companion;  // fi-sweep reference QFI, cr-study summary
};

// Runs a fully resolved configuration (the object carried in the provenance
// header). Deterministic: equal configurations render equal bytes.
Output execute(const nlohmann::json& config);

// Entry point: parses arguments, executes, writes outputs atomically.
// Returns the process exit code (2 validation, 3 numerical).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// 17 significant digits; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double x);

// Reads the provenance configuration from an emitted CSV or JSON output.
nlohmann::json read_provenance(const std::string& text);

}  // namespace homsense::cli
