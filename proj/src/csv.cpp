#include "ldp/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ldp/errors.hpp"

namespace ldp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_path_csv(const std::string& file, const Path& p) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot open for writing: " + file);
  out << "time,value\n";
  for (std::size_t i = 0; i < p.times().size(); ++i)
    out << format_double(p.times()[i]) << ',' << format_double(p.values()[i])
        << '\n';
  if (!out) throw ValidationError("write failed: " + file);
}

Path load_path_csv(const std::string& file, Interp interp) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open: " + file);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("empty path file: " + file);
  // Tolerate a UTF-8 BOM and whitespace around the header cells.
  if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0)
    line.erase(0, 3);
  std::string squashed;
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) squashed += c;
  if (squashed != "time,value")
    throw ValidationError("path file must start with 'time,value': " + file);

  std::vector<double> times, values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    std::istringstream row(line);
    std::string tcell, vcell;
    if (!std::getline(row, tcell, ',') || !std::getline(row, vcell))
      throw ValidationError(file + ": line " + std::to_string(lineno) +
                            " is not 'time,value'");
    try {
      std::size_t used = 0;
      double t = std::stod(tcell, &used);
      while (used < tcell.size() &&
             std::isspace(static_cast<unsigned char>(tcell[used])))
        ++used;
      if (used != tcell.size()) throw std::invalid_argument(tcell);
      double v = std::stod(vcell, &used);
      while (used < vcell.size() &&
             std::isspace(static_cast<unsigned char>(vcell[used])))
        ++used;
      if (used != vcell.size()) throw std::invalid_argument(vcell);
      times.push_back(t);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(file + ": line " + std::to_string(lineno) +
                            " has a non-numeric cell");
    }
    if (!std::isfinite(times.back()) || !std::isfinite(values.back()))
      throw ValidationError(file + ": line " + std::to_string(lineno) +
                            " has a non-finite cell");
  }
  if (times.empty()) throw ValidationError("no samples in " + file);
  return Path(std::move(times), std::move(values), interp);  // re-validates
}

void write_table_csv(const std::string& file,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot open for writing: " + file);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ValidationError("table row width mismatch in " + file);
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw ValidationError("write failed: " + file);
}

}  // namespace ldp
