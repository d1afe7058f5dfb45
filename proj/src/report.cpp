#include "modelkit/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace modelkit {

namespace {

const char* status_name(RecordStatus s) {
  switch (s) {
    case RecordStatus::Pass: return "pass";
    case RecordStatus::Fail: return "fail";
    case RecordStatus::Error: return "error";
  }
  return "error";
}

// Non-finite values have no JSON spelling; they are written as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest %g form that reads back to the same double.
std::string shortest(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return g17(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int Report::failed() const {
  int n = 0;
  for (const auto& r : records) n += r.status == RecordStatus::Fail;
  return n;
}

int Report::errors() const {
  int n = 0;
  for (const auto& r : records) n += r.status == RecordStatus::Error;
  return n;
}

json report_to_json(const Report& r) {
  json records = json::array();
  for (const auto& c : r.records) {
    json j;
    j["check"] = c.check;
    j["scenario"] = c.scenario;
    j["bc"] = c.bc;
    j["z"] = c.z ? complex_to_json(*c.z) : json(nullptr);
    j["defect"] = number_or_null(c.defect);
    j["tol"] = c.tol;
    j["pass"] = c.pass();
    j["status"] = status_name(c.status);
    j["message"] = c.message;
    j["inputs_digest"] = c.inputs_digest;
    records.push_back(j);
  }
  json doc;
  doc["records"] = records;
  doc["summary"] = {{"total", r.records.size()},
                    {"passed", static_cast<int>(r.records.size()) - r.failed() - r.errors()},
                    {"failed", r.failed()},
                    {"errors", r.errors()}};
  if (r.extra.is_object())
    for (auto it = r.extra.begin(); it != r.extra.end(); ++it) doc[it.key()] = it.value();
  if (!r.metadata.is_null()) doc["metadata"] = r.metadata;
  return doc;
}

std::string report_json_text(const Report& r) { return report_to_json(r).dump(2) + "\n"; }

std::string report_stable_text(const Report& r) {
  json doc = report_to_json(r);
  doc.erase("metadata");
  return doc.dump(2) + "\n";
}

std::string report_csv(const Report& r) {
  std::string out = "check,scenario,bc,z,defect,tol,pass\n";
  for (const auto& c : r.records) {
    std::string z;
    if (c.z) {
      z = shortest(c.z->real());
      const std::string im = shortest(c.z->imag());
      z += (im[0] == '-' ? "" : "+") + im + "i";
    }
    out += csv_field(c.check) + "," + csv_field(c.scenario) + "," + csv_field(c.bc) + "," + z + "," +
           shortest(c.defect) + "," + shortest(c.tol) + "," + (c.pass() ? "true" : "false") + "\n";
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp + ": " + ec.message());
  }
}

}  // namespace modelkit
