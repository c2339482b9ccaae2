#pragma once

#include <stdexcept>
#include <string>

#include "su11/shoot.hpp"

namespace su11::cli {

struct ParseError : std::runtime_error {
    int line = -1, column = -1;
    ParseError(const std::string& msg, int line_, int column_);
};

// drift: [x, y, z]
// control: [x, y, z]
// target: {exp_coeffs: [x, y, z], scale: s}  or  {matrix: [[[re, im], [re, im]], [[re, im], [re, im]]]}
// tolerances: {residual: 1e-6, group: 1e-10}          (optional)
// search: {starts, max_T, min_T, seed, costate_bound, free_time, fixed_T, step, scan_step, threads}  (optional)
struct ProblemFile {
    std::string name;
    AlgebraElement drift, control;
    GroupElement target;
    double group_tolerance = 1e-10;
    SearchConfig search;

    Problem problem() const { return {drift, control, target}; }
};

ProblemFile parse_problem(const std::string& text, const std::string& name = "<input>");
ProblemFile load_problem(const std::string& path);

}  // namespace su11::cli
