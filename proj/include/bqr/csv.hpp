#pragma once

#include <string>
#include <vector>

#include "bqr/model.hpp"

namespace bqr {

// Shortest text form that parses back to exactly the same double.
std::string format_double(double value);

// Comma-separated UTF-8 with a header row and decimal-point numerals.
// The named response column becomes y; every other column becomes a design
// column in file order, with an all-ones intercept column prepended unless
// add_intercept is false. Non-numeric cells, a missing response column,
// an empty file and rank deficiency are all reported as errors with the
// offending location.
Dataset load_csv(const std::string& path, const std::string& response, bool add_intercept);

// One table writer used for every output; deterministic byte output.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace bqr
