#pragma once

#include <string>
#include <vector>

namespace skin {

struct CheckLine {
    std::string name;
    bool passed = false;
    double value = 0.0;     // measured error or quantity
    double tolerance = 0.0;
    std::string detail;
};

std::string format_check(const CheckLine& line);

// Oracle equivalence, third quantization, route equivalences, steady-state routes,
// localization extraction and integrator self-checks.
std::vector<CheckLine> run_verify_suite(unsigned seed = 20240611u);

bool all_passed(const std::vector<CheckLine>& lines);

} // namespace skin
