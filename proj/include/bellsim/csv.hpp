#pragma once

#include <string>
#include <vector>

namespace bellsim {

// Shortest round-trip decimal form of x ("nan"/"inf" spelled out).
std::string format_double(double x);

// Comma-separated table with '#'-prefixed metadata lines, then one header row.
class CsvTable {
 public:
  // Each column is "name [unit]"; the bare names form the header row.
  CsvTable(std::vector<std::string> names, std::vector<std::string> units);
  void comment(const std::string& line);
  void row(const std::vector<double>& values);
  std::string str() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::string> units_;
  std::vector<std::string> comments_;
  std::string body_;
};

}  // namespace bellsim
