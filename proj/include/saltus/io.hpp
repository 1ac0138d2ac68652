#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "saltus/flight.hpp"

namespace saltus {

/// CSV writer with RFC-4180 quoting. Numbers are written with %.9g so that
/// identical runs serialize byte-identically.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);

  void write_row(const std::vector<std::string>& cells);
  void write_header(const std::vector<std::string>& names) { write_row(names); }
  bool good() const { return out_.good(); }
  void flush() { out_.flush(); }

  static std::string format(double v);
  static std::string quote(const std::string& s);

 private:
  std::ofstream out_;
};

/// Standard flight trace: time, quaternion, body rates, joint angles and an
/// optional reward column.
class FlightTraceWriter {
 public:
  explicit FlightTraceWriter(const std::string& path);
  void append(double time, const SimState& s, double reward = 0.0);
  void flush() { csv_.flush(); }

 private:
  CsvWriter csv_;
};

/// Create the directory (and parents) if missing; throws on failure.
void ensure_directory(const std::string& path);

/// Read a whole file into a string; throws std::runtime_error when missing.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace saltus
