#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modelkit/config.hpp"

namespace modelkit {

enum class RecordStatus { Pass, Fail, Error };

struct CheckRecord {
  std::string check;
  std::string scenario;
  std::string bc;
  std::optional<cplx> z;
  double defect = 0.0;
  double tol = 0.0;
  RecordStatus status = RecordStatus::Pass;
  std::string message;
  std::string inputs_digest;
  double runtime_s = 0.0;  // reported in the metadata block only

  bool pass() const { return status == RecordStatus::Pass; }
};

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

struct Report {
  std::vector<CheckRecord> records;
  json extra;     // command-specific payload, e.g. scan candidates
  json metadata;  // runtimes, environment, config echo

  int failed() const;
  int errors() const;
};

// Canonical document: keys sorted, complex values as [re, im].
json report_to_json(const Report& r);
std::string report_json_text(const Report& r);
// Same document with the metadata block removed; this part is byte-stable.
std::string report_stable_text(const Report& r);

// check,scenario,bc,z,defect,tol,pass
std::string report_csv(const Report& r);

// Writes to path.tmp, then renames over path.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace modelkit
