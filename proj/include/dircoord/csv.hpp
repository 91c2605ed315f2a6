#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dircoord::csv {

// Shortest decimal text that parses back to the same double.
std::string format(double x);
// Strict full-field parse; returns false on any trailing garbage.
bool parse(std::string_view text, double& out);

// RFC-4180 field quoting.
std::string quote(std::string_view field);
std::string join(const std::vector<std::string>& fields);
std::vector<std::string> split(std::string_view line);

}  // namespace dircoord::csv
