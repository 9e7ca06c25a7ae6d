#pragma once

#include <string>
#include <vector>

namespace cellembed {

// shortest round-trip decimal, locale independent
std::string fmt_double(double v);
// fixed 17 significant digits, locale independent
std::string fmt_double17(double v);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace cellembed
