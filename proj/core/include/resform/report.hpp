#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace resform {

// Tabular experiment output. Cells are canonically formatted strings so that
// report equality, hashing and reruns are byte-stable.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Table&) const = default;
};

struct Report {
  std::string tag;                 // experiment tag
  std::string config_json;        // full configuration echo (canonical dump)
  std::vector<Table> tables;
  std::map<std::string, std::string> summary;

  bool operator==(const Report&) const = default;
};

// Canonical number formatting used in all report cells ("%.12g").
std::string format_number(double v);

std::string table_to_csv(const Table& t);
// Matrix as CSV with a header row naming vertex ids.
std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::string& id_prefix = "v");

std::string report_to_json(const Report& r);
Report report_from_json(const std::string& text);

// Git-style content hash of the canonical JSON serialization:
// sha1("blob <len>\0" + payload), hex.
std::string content_hash(const Report& r);
std::string sha1_hex(const std::string& payload);

// Line plot (statistic vs level) per table column, written as standalone SVG.
// series_x: column used for the x axis; remaining numeric columns become
// polylines.
std::string table_to_svg(const Table& t, const std::string& x_column);

// Writes <tag>_<table>.csv per table, <tag>_summary.json, and
// <tag>_<table>.svg when the table has a "level" or "time" column. Returns
// the list of files written.
std::vector<std::string> emit_report(const Report& r, const std::string& out_dir,
                                     bool csv = true, bool json = true, bool svg = true);

}  // namespace resform
