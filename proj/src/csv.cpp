#include "bellsim/csv.hpp"

#include <charconv>
#include <cmath>

#include "bellsim/common.hpp"

namespace bellsim {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> names, std::vector<std::string> units)
    : names_(std::move(names)), units_(std::move(units)) {
  if (names_.size() != units_.size()) throw DomainError("CsvTable: names/units mismatch");
}

void CsvTable::comment(const std::string& line) { comments_.push_back(line); }

void CsvTable::row(const std::vector<double>& values) {
  if (values.size() != names_.size()) throw DomainError("CsvTable: row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_double(values[i]);
  }
  body_ += '\n';
}

std::string CsvTable::str() const {
  std::string out = "# bellsim " + std::string(kVersion) + " schema " +
                    std::to_string(kSchemaVersion) + "\n";
  for (const auto& c : comments_) out += "# " + c + "\n";
  out += "# units: natural units, hbar = c = 1\n# columns:";
  for (std::size_t i = 0; i < names_.size(); ++i) {
    out += (i ? ", " : " ") + names_[i] + " [" + units_[i] + "]";
  }
  out += "\n";
  for (std::size_t i = 0; i < names_.size(); ++i) out += (i ? "," : "") + names_[i];
  out += "\n";
  return out + body_;
}

}  // namespace bellsim
