#pragma once

// File formats. All user-facing angles are degrees.
//
//   snapshots CSV    sensor,t,re,im      (0-based sensor and snapshot index)
//   covariance CSV   row,col,re,im       (full matrix, 0-based indices)
//   scenario JSON    {"W": 6, "betas_deg": [...], "delta": [...],
//                     "source_cov": {"re": [[...]], "im": [[...]]}}
//
// Doubles are written in shortest round-trip form.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "doa/stochastic_model.hpp"

namespace doa {

using json = nlohmann::json;

/// Invalid user input. `field` is a dotted path into the offending document
/// (or a CSV line reference).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : std::invalid_argument(field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

std::string format_double(double x);

void write_snapshots_csv(std::ostream& os, const SnapshotMatrix& s);
SnapshotMatrix read_snapshots_csv(std::istream& is);

void write_covariance_csv(std::ostream& os, const Mat& m);
Mat read_covariance_csv(std::istream& is);

json matrix_to_json(const Mat& m);
/// Reads {"re": [[...]], "im": [[...]]}; "im" may be omitted.
Mat matrix_from_json(const json& j, const std::string& field);

json scenario_to_json(const Scenario& s);
/// Parses and validates; violations become ConfigError.
Scenario scenario_from_json(const json& j, const std::string& field = "scenario");

json read_json_file(const std::string& path);

}  // namespace doa
