#pragma once

#include "halfharmonic/grid.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hh {

struct CheckResult {
    std::string suite;
    std::string check;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// profiles, nonlocal, linops, diagnostics, gluing, seven24
const std::vector<std::string>& suite_names();

// Runs every suite, or only the one named by filter. Unknown names raise
// InvalidArgument.
std::vector<CheckResult> run_verify(const GridSpec& g, const std::string& filter = "");

// One JSON object per line.
void write_jsonl(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace hh
