#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "su11/controllability.hpp"

namespace su11::cli {

std::string fmt(double v) {
    if (v == 0.0) v = 0.0;
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

namespace {

std::string fmt3(const AlgebraElement& m) { return "[" + fmt(m.x) + ", " + fmt(m.y) + ", " + fmt(m.z) + "]"; }

template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParseError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

void write_check(const ControllabilityVerdict& v, std::ostream& out) {
    out << (v.controllable ? "controllable" : "not controllable") << "; α=" << fmt(v.alpha) << " β=" << fmt(v.beta)
        << " γ=" << fmt(v.gamma) << "; row: " << to_string(v.reason);
    if (v.witness_u) out << "; witness u=" << fmt(*v.witness_u);
    if (v.near_boundary) out << "; near a table boundary";
    out << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

}  // namespace

int cmd_check(const std::string& file, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto pf = load_problem(file);
        auto v = is_controllable(pf.drift, pf.control);
        write_check(v, out);
        return v.controllable ? kOk : kNotControllable;
    });
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto pf = load_problem(o.file);
        auto inv = scalar_invariants(pf.drift, pf.control);
        ExtremalState st = costate_init(o.costate, pf.drift, pf.control);
        auto k = constants_of_motion(st, inv.alpha, inv.beta, inv.gamma);
        auto law = synthesize(st, inv.alpha, inv.beta, inv.gamma);
        out << "state: uA=" << fmt(st.uA) << " uB=" << fmt(st.uB) << " uC=" << fmt(st.uC) << '\n';
        out << "constants: c1=" << fmt(k.c1) << " c2=" << fmt(k.c2) << '\n';
        out << "law: " << to_string(law.tag);
        if (is_weierstrass(law.tag))
            out << " g2=" << fmt(law.g2) << " g3=" << fmt(law.g3) << " a=" << fmt(law.a.real()) << (law.a.imag() < 0 ? "-" : "+")
                << fmt(std::abs(law.a.imag())) << "i";
        out << '\n';
        if (o.T) {
            auto poles = law.poles(0.0, *o.T);
            out << "poles in [0, " << fmt(*o.T) << "]:";
            for (double p : poles) out << ' ' << fmt(p);
            out << '\n';
            for (int i = 0; i <= 10; ++i) {
                double t = *o.T * i / 10.0;
                out << "u(" << fmt(t) << ") = ";
                try {
                    out << fmt(law.evaluate(t)) << '\n';
                } catch (const PoleError&) {
                    out << "pole\n";
                }
            }
        }
        out << law.summary().dump() << '\n';
        if (o.dump_wp) {
            if (!law.wp) throw std::runtime_error("--dump-wp: law '" + to_string(law.tag) + "' has no Weierstrass kernel");
            auto f = open_out(*o.dump_wp);
            dump_wp_csv(f, *law.wp, 40);
        }
        return kOk;
    });
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto pf = load_problem(o.file);
        SearchConfig cfg = pf.search;
        if (o.max_T) cfg.max_T = *o.max_T;
        if (o.tol) cfg.tolerance = *o.tol;
        if (o.starts) cfg.starts = *o.starts;
        if (o.seed) cfg.seed = *o.seed;
        auto v = is_controllable(pf.drift, pf.control);
        if (!v.controllable) {
            write_check(v, err);
            return static_cast<int>(kNotControllable);
        }
        auto rep = solve(pf.problem(), cfg);
        out << std::left << std::setw(4) << "#" << std::setw(12) << "T" << std::setw(12) << "J" << std::setw(12)
            << "residual" << std::setw(20) << "law" << std::setw(12) << "g2" << std::setw(12) << "g3" << "costate\n";
        nlohmann::json js = nlohmann::json::array();
        for (size_t i = 0; i < rep.candidates.size(); ++i) {
            const auto& c = rep.candidates[i];
            out << std::setw(4) << i + 1 << std::setw(12) << fmt(c.T) << std::setw(12) << fmt(c.J) << std::setw(12)
                << fmt(c.residual) << std::setw(20) << to_string(c.control.tag);
            if (is_weierstrass(c.control.tag))
                out << std::setw(12) << fmt(c.control.g2) << std::setw(12) << fmt(c.control.g3);
            else
                out << std::setw(12) << "-" << std::setw(12) << "-";
            if (c.abnormal)
                out << "u=" << fmt(c.control.offset);
            else
                out << fmt3(c.costate.S());
            out << '\n';
            js.push_back(c.summary());
            if (o.emit_traj) {
                std::filesystem::create_directories(*o.emit_traj);
                auto law = c.abnormal ? ControlLaw::constant(c.control.offset) : ControlLaw::from(c.control);
                auto tr = propagate(pf.drift, pf.control, law, c.T, cfg.step);
                distance_series(tr, pf.target);
                auto f = open_out((std::filesystem::path(*o.emit_traj) / ("candidate_" + std::to_string(i + 1) + ".csv")).string());
                write_csv(f, tr);
            }
        }
        if (rep.candidates.empty()) out << "no candidates found (starts=" << rep.starts << ")\n";
        if (o.json) {
            auto f = open_out(*o.json);
            f << js.dump(2) << '\n';
        }
        return static_cast<int>(rep.candidates.empty() ? kNoCandidates : kOk);
    });
}

int cmd_propagate(const PropagateOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        auto pf = load_problem(o.file);
        ControlLaw law;
        if (o.costate) {
            auto inv = scalar_invariants(pf.drift, pf.control);
            law = ControlLaw::from(synthesize(costate_init(*o.costate, pf.drift, pf.control), inv.alpha, inv.beta, inv.gamma));
        } else {
            law = ControlLaw::constant(o.constant.value_or(0.0));
        }
        auto tr = propagate(pf.drift, pf.control, law, o.T, o.step);
        auto d = distance_series(tr, pf.target);
        const Mat2& x = tr.terminal().matrix();
        out << "T=" << fmt(o.T) << " J=" << fmt(tr.cost()) << " distance=" << fmt(d.back())
            << " invariant_error=" << fmt(tr.terminal().invariant_error()) << '\n';
        out << "X(T) = [[" << fmt(x(0, 0).real()) << (x(0, 0).imag() < 0 ? "-" : "+") << fmt(std::abs(x(0, 0).imag()))
            << "i, " << fmt(x(0, 1).real()) << (x(0, 1).imag() < 0 ? "-" : "+") << fmt(std::abs(x(0, 1).imag())) << "i], ["
            << fmt(x(1, 0).real()) << (x(1, 0).imag() < 0 ? "-" : "+") << fmt(std::abs(x(1, 0).imag())) << "i, "
            << fmt(x(1, 1).real()) << (x(1, 1).imag() < 0 ? "-" : "+") << fmt(std::abs(x(1, 1).imag())) << "i]]\n";
        if (o.csv) {
            auto f = open_out(*o.csv);
            write_csv(f, tr);
        }
        return static_cast<int>(kOk);
    });
}

int cmd_baseline(const BaselineOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Problem pb{baseline_drift(), baseline_control(), baseline_target()};
        if (o.file) pb = load_problem(*o.file).problem();
        auto r = baseline(o.c, o.n1, o.n2);
        auto tr = propagate(pb.A, pb.B, r.law.law(), r.law.total_time(), o.step);
        auto d = distance_series(tr, pb.target);
        out << "c=" << fmt(o.c) << " n1=" << o.n1 << " n2=" << o.n2 << '\n';
        out << "t1=" << fmt(r.law.t1) << " t2=" << fmt(r.law.t2) << " T=" << fmt(r.law.total_time()) << '\n';
        out << "J_closed=" << fmt(r.J) << " J_numeric=" << fmt(tr.cost()) << " residual=" << fmt(d.back()) << '\n';
        if (o.csv) {
            auto f = open_out(*o.csv);
            write_csv(f, tr);
        }
        return static_cast<int>(kOk);
    });
}

namespace {

Costate parse_costate(const std::vector<double>& v) {
    if (v.size() != 3) throw CLI::ValidationError("--costate", "expects three numbers sx sy sz");
    return {v[0], v[1], v[2], 1.0};
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Energy-optimal control synthesis on SU(1,1)"};
    app.require_subcommand(1);

    std::string file;
    auto* check = app.add_subcommand("check", "controllability verdict for a problem file");
    check->add_option("file", file, "problem file")->required();

    SynthOptions so;
    std::vector<double> synth_s;
    double synth_T = 0.0;
    std::string dump;
    auto* synth = app.add_subcommand("synth", "closed-form extremal law for an explicit costate");
    synth->add_option("file", so.file, "problem file")->required();
    synth->add_option("--costate", synth_s, "sx sy sz")->required()->expected(3)->delimiter(',');
    auto* synth_T_opt = synth->add_option("--T", synth_T, "sample u and list poles on [0, T]");
    auto* dump_opt = synth->add_option("--dump-wp", dump, "write wp samples (z_re,z_im,wp_re,wp_im) to this CSV");

    SolveOptions vo;
    double max_T = 0, tol = 0;
    int starts = 0;
    std::uint64_t seed = 0;
    std::string emit, json;
    auto* solvec = app.add_subcommand("solve", "multistart shooting for the target");
    solvec->add_option("file", vo.file, "problem file")->required();
    auto* o_max = solvec->add_option("--max-T", max_T, "largest final time");
    auto* o_starts = solvec->add_option("--starts", starts, "multistart count")->check(CLI::NonNegativeNumber);
    auto* o_tol = solvec->add_option("--tol", tol, "accepted Frobenius residual");
    auto* o_seed = solvec->add_option("--seed", seed, "random seed");
    auto* o_emit = solvec->add_option("--emit-traj", emit, "directory for per-candidate trajectory CSVs");
    auto* o_json = solvec->add_option("--json", json, "write candidate summaries as JSON");

    PropagateOptions po;
    std::vector<double> prop_s;
    double prop_u = 0;
    std::string prop_csv;
    auto* prop = app.add_subcommand("propagate", "integrate the system under a law");
    prop->add_option("file", po.file, "problem file")->required();
    auto* p_s = prop->add_option("--costate", prop_s, "extremal law of costate sx sy sz")->expected(3)->delimiter(',');
    auto* p_u = prop->add_option("--u", prop_u, "constant control");
    p_s->excludes(p_u);
    prop->add_option("--T", po.T, "final time")->required();
    prop->add_option("--step", po.step, "integrator step");
    auto* p_csv = prop->add_option("--csv", prop_csv, "trajectory CSV");

    BaselineOptions bo;
    std::string base_file, base_csv;
    auto* base = app.add_subcommand("baseline", "piecewise-constant baseline law");
    auto* b_file = base->add_option("file", base_file, "problem file (defaults to the built-in example system)");
    base->add_option("--c", bo.c, "control level (> 1)")->required();
    base->add_option("--n1", bo.n1, "idle drift periods before the pulse");
    base->add_option("--n2", bo.n2, "idle drift periods after the pulse");
    base->add_option("--step", bo.step, "integrator step");
    auto* b_csv = base->add_option("--csv", base_csv, "trajectory CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kParseError;
    }

    if (*check) return cmd_check(file, out, err);
    if (*synth) {
        so.costate = parse_costate(synth_s);
        if (*synth_T_opt) so.T = synth_T;
        if (*dump_opt) so.dump_wp = dump;
        return cmd_synth(so, out, err);
    }
    if (*solvec) {
        if (*o_max) vo.max_T = max_T;
        if (*o_starts) vo.starts = starts;
        if (*o_tol) vo.tol = tol;
        if (*o_seed) vo.seed = seed;
        if (*o_emit) vo.emit_traj = emit;
        if (*o_json) vo.json = json;
        return cmd_solve(vo, out, err);
    }
    if (*prop) {
        if (*p_s) po.costate = parse_costate(prop_s);
        if (*p_u) po.constant = prop_u;
        if (*p_csv) po.csv = prop_csv;
        return cmd_propagate(po, out, err);
    }
    if (*base) {
        if (*b_file) bo.file = base_file;
        if (*b_csv) bo.csv = base_csv;
        return cmd_baseline(bo, out, err);
    }
    return kFailure;
}

}  // namespace su11::cli
