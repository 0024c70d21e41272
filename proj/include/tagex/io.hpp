#pragma once

#include <string>
#include <vector>

namespace tagex::io {

// full-precision, locale-independent double formatting (round-trip safe)
std::string fmt(double v);

std::string csv_row(const std::vector<std::string>& fields);

void write_file(const std::string& path, const std::string& content);

} // namespace tagex::io
