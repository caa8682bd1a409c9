#pragma once

#include <string>
#include <vector>

namespace perifem {

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Built-in invariant suite behind the `check` subcommand: stiffness
/// calibration against numerical quadrature, PE-count laws, symmetry and
/// rigid-body null space of K, and a brute-force assembly comparison.
std::vector<CheckOutcome> run_builtin_checks();

} // namespace perifem
