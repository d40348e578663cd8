#pragma once

#include <string>

#include "microplan/grid_model.hpp"

namespace microplan {

// Case-file text format; schema documented in docs/case_format.md.
// serialize_case . load_case is the identity and byte-stable.

std::string serialize_case(const PlanningProblem& problem);

// base_dir resolves relative CSV profile references ("" = cwd).
PlanningProblem load_case(const std::string& text, const std::string& base_dir = "");

PlanningProblem load_case_file(const std::string& path);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace microplan
