#pragma once

#include <string>
#include <vector>

#include "rwpi/core.hpp"

namespace rwpi::cli {

/// Coefficients from a file of numbers separated by whitespace or commas,
/// or from the "beta" array of a JSON document written by `rwpi fit`.
Vector read_beta_file(const std::string& path);

/// Comma-separated numbers.
Vector parse_vector(const std::string& text, const std::string& flag);

/// One named column of a CSV file, or its only column when name is empty.
Vector read_column(const std::string& path, const std::string& name);

}  // namespace rwpi::cli
