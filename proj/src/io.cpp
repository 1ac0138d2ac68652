#include "saltus/io.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace saltus {

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
  if (!out_.good()) {
    throw std::runtime_error("CsvWriter: cannot open " + path);
  }
}

std::string CsvWriter::format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string CsvWriter::quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    return s;
  }
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote(cells[i]);
  }
  out_ << "\r\n";
}

FlightTraceWriter::FlightTraceWriter(const std::string& path) : csv_(path) {
  std::vector<std::string> header = {"time", "qw", "qx", "qy", "qz",
                                     "wx",   "wy", "wz"};
  for (int i = 0; i < kNumJoints; ++i) {
    header.push_back("joint" + std::to_string(i));
  }
  header.push_back("reward");
  csv_.write_header(header);
}

void FlightTraceWriter::append(double time, const SimState& s, double reward) {
  std::vector<std::string> row;
  row.reserve(8 + kNumJoints + 1);
  row.push_back(CsvWriter::format(time));
  row.push_back(CsvWriter::format(s.q_body.w));
  row.push_back(CsvWriter::format(s.q_body.x));
  row.push_back(CsvWriter::format(s.q_body.y));
  row.push_back(CsvWriter::format(s.q_body.z));
  for (int i = 0; i < 3; ++i) row.push_back(CsvWriter::format(s.omega_body[i]));
  for (int i = 0; i < kNumJoints; ++i) {
    row.push_back(CsvWriter::format(s.joints[i].theta));
  }
  row.push_back(CsvWriter::format(reward));
  csv_.write_row(row);
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw std::runtime_error("ensure_directory: " + path + ": " + ec.message());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) {
    throw std::runtime_error("read_file: cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out.good()) {
    throw std::runtime_error("write_file: cannot open " + path);
  }
  out << content;
}

}  // namespace saltus
