#pragma once

#include <string>
#include <vector>

#include "ldp/path.hpp"

namespace ldp {

// Two-column `time,value` files with a header row.  Values are written with
// 17 significant digits so a round trip is exact for doubles.
void write_path_csv(const std::string& file, const Path& p);
Path load_path_csv(const std::string& file,
                   Interp interp = Interp::kLinear);

// Generic rectangular table, one header row then one row per record.
void write_table_csv(const std::string& file,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

std::string format_double(double v);  // shortest-exact %.17g rendering

}  // namespace ldp
