#include "problem.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace su11::cli {

ParseError::ParseError(const std::string& msg, int line_, int column_)
    : std::runtime_error(msg), line(line_), column(column_) {}

namespace {

[[noreturn]] void fail(const std::string& name, const YAML::Node& node, const std::string& what) {
    auto m = node.Mark();
    int line = m.is_null() ? -1 : m.line + 1, col = m.is_null() ? -1 : m.column + 1;
    std::ostringstream os;
    os << name;
    if (line > 0) os << ':' << line << ':' << col;
    os << ": " << what;
    throw ParseError(os.str(), line, col);
}

double number(const std::string& name, const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) fail(name, n, "field '" + field + "' must be a number");
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        fail(name, n, "field '" + field + "' must be a number, got '" + n.Scalar() + "'");
    }
}

AlgebraElement triple(const std::string& name, const YAML::Node& parent, const std::string& field) {
    YAML::Node n = parent[field];
    if (!n) fail(name, parent, "missing field '" + field + "'");
    if (!n.IsSequence() || n.size() != 3) fail(name, n, "field '" + field + "' must be a triple [x, y, z]");
    return {number(name, n[0], field + "[0]"), number(name, n[1], field + "[1]"), number(name, n[2], field + "[2]")};
}

}  // namespace

ProblemFile parse_problem(const std::string& text, const std::string& name) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << name << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
        throw ParseError(os.str(), e.mark.line + 1, e.mark.column + 1);
    }
    if (!root.IsMap()) fail(name, root, "problem file must be a mapping");

    ProblemFile pf;
    pf.name = name;
    pf.drift = triple(name, root, "drift");
    pf.control = triple(name, root, "control");

    if (auto tol = root["tolerances"]) {
        if (!tol.IsMap()) fail(name, tol, "field 'tolerances' must be a mapping");
        if (tol["residual"]) pf.search.tolerance = number(name, tol["residual"], "tolerances.residual");
        if (tol["group"]) pf.group_tolerance = number(name, tol["group"], "tolerances.group");
    }

    YAML::Node tg = root["target"];
    if (!tg) fail(name, root, "missing field 'target'");
    if (!tg.IsMap()) fail(name, tg, "field 'target' must be a mapping");
    if (tg["exp_coeffs"]) {
        AlgebraElement e = triple(name, tg, "exp_coeffs");
        double s = tg["scale"] ? number(name, tg["scale"], "target.scale") : 1.0;
        pf.target = expm(s * e);
    } else if (tg["matrix"]) {
        YAML::Node m = tg["matrix"];
        if (!m.IsSequence() || m.size() != 2) fail(name, m, "field 'target.matrix' must be a 2x2 array of [re, im]");
        Mat2 x;
        for (int r = 0; r < 2; ++r) {
            if (!m[r].IsSequence() || m[r].size() != 2) fail(name, m[r], "field 'target.matrix' rows must have 2 entries");
            for (int c = 0; c < 2; ++c) {
                YAML::Node e = m[r][c];
                std::string f = "target.matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]";
                if (!e.IsSequence() || e.size() != 2) fail(name, e, "field '" + f + "' must be [re, im]");
                x(r, c) = cplx(number(name, e[0], f), number(name, e[1], f));
            }
        }
        try {
            pf.target = GroupElement(x, pf.group_tolerance);
        } catch (const InvariantError& err) {
            fail(name, m, std::string("field 'target.matrix' is not in SU(1,1): ") + err.what());
        }
    } else {
        fail(name, tg, "field 'target' needs 'exp_coeffs' or 'matrix'");
    }

    if (auto s = root["search"]) {
        if (!s.IsMap()) fail(name, s, "field 'search' must be a mapping");
        auto num = [&](const char* k, auto& dst) {
            if (s[k]) dst = static_cast<std::decay_t<decltype(dst)>>(number(name, s[k], std::string("search.") + k));
        };
        num("starts", pf.search.starts);
        num("max_T", pf.search.max_T);
        num("min_T", pf.search.min_T);
        num("seed", pf.search.seed);
        num("costate_bound", pf.search.costate_bound);
        num("fixed_T", pf.search.fixed_T);
        num("step", pf.search.step);
        num("scan_step", pf.search.scan_step);
        num("threads", pf.search.threads);
        num("seeds_per_start", pf.search.seeds_per_start);
        num("seed_distance", pf.search.seed_distance);
        if (s["free_time"]) {
            try {
                pf.search.free_time = s["free_time"].as<bool>();
            } catch (const YAML::Exception&) {
                fail(name, s["free_time"], "field 'search.free_time' must be true or false");
            }
        }
    }
    return pf;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file", -1, -1);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str(), path);
}

}  // namespace su11::cli
