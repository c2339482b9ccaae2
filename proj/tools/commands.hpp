#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "problem.hpp"

namespace su11::cli {

enum ExitCode : int {
    kOk = 0,
    kNotControllable = 1,
    kParseError = 2,
    kFailure = 3,
    kNoCandidates = 4,
};

// Six significant digits; negative zero printed as 0.
std::string fmt(double v);

int cmd_check(const std::string& file, std::ostream& out, std::ostream& err);

struct SynthOptions {
    std::string file;
    Costate costate;
    std::optional<double> T;           // also sample u on [0, T]
    std::optional<std::string> dump_wp;  // CSV of wp over the law's fundamental parallelogram
};
int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err);

struct SolveOptions {
    std::string file;
    std::optional<double> max_T, tol;
    std::optional<int> starts;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> emit_traj;  // directory for candidate_<k>.csv
    std::optional<std::string> json;       // summary records
};
int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err);

struct PropagateOptions {
    std::string file;
    std::optional<Costate> costate;  // extremal law of this costate
    std::optional<double> constant;  // or a constant control
    double T = 1.0;
    double step = kDefaultStep;
    std::optional<std::string> csv;
};
int cmd_propagate(const PropagateOptions& o, std::ostream& out, std::ostream& err);

struct BaselineOptions {
    std::optional<std::string> file;  // defaults to A = Kz, B = -Kx + Ky, X_f = exp(-2Kx + 2Ky)
    double c = 2.0;
    int n1 = 1, n2 = 1;
    double step = kDefaultStep;
    std::optional<std::string> csv;
};
int cmd_baseline(const BaselineOptions& o, std::ostream& out, std::ostream& err);

// Full command line (CLI11).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace su11::cli
