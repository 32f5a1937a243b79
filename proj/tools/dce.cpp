// Command-line front end: verify conserved vectors, classify equations
// against the catalog, apply point transformations, run the numerical lab,
// and inspect the catalog.
//
// Exit codes: 0 = verified / matched / within tolerance;
//             1 = refuted / no match / drift exceeded;
//             2 = usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <dce/catalog.hpp>
#include <dce/numlab.hpp>
#include <dce/parser.hpp>
#include <dce/transforms.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dce::Assumption parse_assume_flag(const std::string& s) {
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("--assume: " + msg);
    };
    return dce::detail::parse_assumption_line(s, fail);
}

void emit(bool json_mode, const json& j, const std::string& text) {
    if (json_mode)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text;
}

json vector_json(const dce::ConservedVector& cv, char space) {
    return json{{"F", dce::format_expr(cv.F, space)},
                {"G", dce::format_expr(cv.G, space)}};
}

int cmd_verify(const std::string& eq_path,
               const std::vector<std::string>& cv_paths,
               const std::vector<std::string>& assumes, int points,
               unsigned long seed, bool json_mode) {
    dce::DCEquation eq = dce::parse_equation(slurp(eq_path));
    for (const auto& a : assumes)
        eq.assumptions.push_back(parse_assume_flag(a));
    json out{{"schema", 1}, {"command", "verify"}, {"results", json::array()}};
    std::ostringstream text;
    bool all_ok = true;
    for (const auto& path : cv_paths) {
        dce::ConservedVector cv = dce::parse_conserved_vector(slurp(path));
        dce::VerificationReport rep = dce::verify(eq, cv);
        json r{{"input", path},
               {"verified", rep.verified},
               {"residual", dce::format_expr(rep.residual, eq.space)}};
        text << path << ": " << (rep.verified ? "verified" : "refuted");
        if (!rep.verified)
            text << "  (residual = "
                 << dce::format_expr(rep.residual, eq.space) << ")";
        if (points > 0) {
            double res = dce::random_point_residual(eq, cv, points, seed);
            r["max_point_residual"] = res;
            text << "  [max residual over " << points
                 << " random jet points: " << res << "]";
        }
        text << "\n";
        out["results"].push_back(r);
        all_ok = all_ok && rep.verified;
    }
    out["verified"] = all_ok;
    emit(json_mode, out, text.str());
    return all_ok ? 0 : 1;
}

int cmd_classify(const std::string& eq_path,
                 const std::vector<std::string>& assumes, bool json_mode) {
    dce::DCEquation eq = dce::parse_equation(slurp(eq_path));
    for (const auto& a : assumes)
        eq.assumptions.push_back(parse_assume_flag(a));
    std::vector<dce::Match> matches = dce::classify(eq);
    json out{{"schema", 1}, {"command", "classify"}, {"matches", json::array()}};
    std::ostringstream text;
    for (const auto& m : matches) {
        const dce::CatalogCase& c = dce::find_case(m.id);
        dce::Bindings b;
        for (const auto& [name, val] : m.params) b.atoms[dce::sym(name)] = val;
        json jm{{"case", m.id},
                {"description", c.description},
                {"parameters", json::object()},
                {"vectors", json::array()}};
        text << m.id << ": " << c.description << "\n";
        for (const auto& [name, val] : m.params) {
            jm["parameters"][name] = dce::format_expr(val, eq.space);
            text << "  " << name << " = " << dce::format_expr(val, eq.space)
                 << "\n";
        }
        for (const auto& cv : c.vectors) {
            dce::ConservedVector icv{
                dce::simplify(dce::substitute(cv.F, b)),
                dce::simplify(dce::substitute(cv.G, b))};
            jm["vectors"].push_back(vector_json(icv, c.eq.space));
            text << "  F = " << dce::format_expr(icv.F, c.eq.space)
                 << ",  G = " << dce::format_expr(icv.G, c.eq.space) << "\n";
        }
        out["matches"].push_back(jm);
    }
    if (matches.empty()) text << "no catalog match\n";
    emit(json_mode, out, text.str());
    return matches.empty() ? 1 : 0;
}

int cmd_transform(const std::string& eq_path, const std::string& tr_path,
                  const std::vector<std::string>& cv_paths,
                  const std::vector<std::string>& assumes, bool json_mode) {
    dce::DCEquation eq = dce::parse_equation(slurp(eq_path));
    for (const auto& a : assumes)
        eq.assumptions.push_back(parse_assume_flag(a));
    dce::PointTransformation tr = dce::parse_transformation(slurp(tr_path));
    dce::Expr rhs = dce::evolution_form(eq);
    dce::Expr new_rhs = dce::apply_point_to_evolution(tr, rhs);
    json out{{"schema", 1},
             {"command", "transform"},
             {"evolution", dce::format_expr(new_rhs, tr.space)},
             {"vectors", json::array()}};
    std::ostringstream text;
    text << "u_t = " << dce::format_expr(new_rhs, tr.space) << "\n";
    for (const auto& path : cv_paths) {
        dce::ConservedVector cv = dce::parse_conserved_vector(slurp(path));
        dce::ConservedVector pushed = dce::push_conserved_vector(tr, cv);
        out["vectors"].push_back(vector_json(pushed, tr.space));
        text << path << ":\n"
             << dce::format_conserved_vector(pushed, tr.space);
    }
    emit(json_mode, out, text.str());
    return 0;
}

int cmd_simulate(const std::string& eq_path, const std::string& cv_path,
                 const std::string& u0_path,
                 const std::vector<std::string>& assumes, dce::Grid grid,
                 dce::SolveConfig cfg, double tol, const std::string& csv_path,
                 bool json_mode) {
    dce::DCEquation eq = dce::parse_equation(slurp(eq_path));
    for (const auto& a : assumes)
        eq.assumptions.push_back(parse_assume_flag(a));
    dce::ConservedVector cv = dce::parse_conserved_vector(slurp(cv_path));
    dce::Expr u0e = dce::parse_expr(slurp(u0_path));
    dce::Expr xv = dce::var(eq.space);
    auto u0 = [&](double x) {
        dce::NumBindings b;
        b.atoms[xv] = x;
        return dce::eval_num(u0e, b);
    };
    dce::Trajectory traj = dce::solve(eq, {}, u0, grid, cfg);
    dce::DriftReport rep = dce::flux_corrected_drift(traj, cv.F, cv.G, eq.space);
    if (!csv_path.empty()) dce::write_csv(csv_path, traj, rep);
    json out{{"schema", 1},
             {"command", "simulate"},
             {"steps", traj.times.size()},
             {"t_end", traj.times.back()},
             {"drift", rep.drift},
             {"tolerance", tol},
             {"within_tolerance", rep.drift < tol}};
    std::ostringstream text;
    text << "drift = " << rep.drift << " (tolerance " << tol << "): "
         << (rep.drift < tol ? "within tolerance" : "exceeded") << "\n";
    emit(json_mode, out, text.str());
    return rep.drift < tol ? 0 : 1;
}

int cmd_catalog(const std::string& id, bool json_mode) {
    json out{{"schema", 1}, {"command", "catalog"}, {"cases", json::array()}};
    std::ostringstream text;
    auto show = [&](const dce::CatalogCase& c, bool full) {
        json jc{{"id", c.id},
                {"description", c.description},
                {"parameters", c.parameters}};
        text << c.id << ": " << c.description << "\n";
        if (full) {
            jc["equation"] = dce::format_equation(c.eq);
            jc["vectors"] = json::array();
            text << dce::format_equation(c.eq);
            for (const auto& cv : c.vectors) {
                jc["vectors"].push_back(vector_json(cv, c.eq.space));
                text << dce::format_conserved_vector(cv, c.eq.space);
            }
        }
        out["cases"].push_back(jc);
    };
    if (id.empty()) {
        for (const auto& c : dce::wide_catalog()) show(c, false);
        for (const auto& c : dce::small_catalog()) show(c, false);
    } else {
        show(dce::find_case(id), true);
    }
    emit(json_mode, out, text.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* budget = std::getenv("DCE_BUDGET")) {
        dce::Limits l;
        l.max_terms = std::strtoul(budget, nullptr, 10);
        if (l.max_terms == 0) {
            std::cerr << "DCE_BUDGET must be a positive integer\n";
            return 2;
        }
        dce::set_limits(l);
    }

    CLI::App app{"conservation laws of f(x) u_t = (g(x) A(u) u_x)_x "
                 "+ h(x) B(u) u_x"};
    app.require_subcommand(1);

    bool json_mode = false;
    std::vector<std::string> assumes;
    unsigned long seed = 0;

    std::string eq_path, tr_path, cv_path, u0_path, case_id, csv_path;
    std::vector<std::string> cv_paths;
    int points = 0;
    double tol = 1e-5;
    dce::Grid grid;
    grid.n = 256;
    dce::SolveConfig cfg;
    std::string boundary = "periodic";

    auto add_common = [&](CLI::App* sub) {
        sub->add_flag("--json", json_mode, "machine-readable report");
        sub->add_option("--assume", assumes,
                        "extra domain assumption, e.g. \"x > 1\"");
    };

    CLI::App* v = app.add_subcommand("verify",
                                     "check conserved vectors symbolically");
    v->add_option("--eq", eq_path, "equation file")->required();
    v->add_option("--cv", cv_paths, "conserved vector file(s)")->required();
    v->add_option("--points", points,
                  "also evaluate at this many random jet points");
    v->add_option("--seed", seed, "random seed for --points");
    add_common(v);

    CLI::App* c = app.add_subcommand("classify",
                                     "match an equation against the catalog");
    c->add_option("--eq", eq_path, "equation file")->required();
    add_common(c);

    CLI::App* t = app.add_subcommand("transform",
                                     "apply a point transformation");
    t->add_option("--eq", eq_path, "equation file")->required();
    t->add_option("--tr", tr_path, "transformation file")->required();
    t->add_option("--cv", cv_paths, "conserved vector file(s) to push forward");
    add_common(t);

    CLI::App* s = app.add_subcommand("simulate",
                                     "integrate and monitor a conserved "
                                     "functional");
    s->add_option("--eq", eq_path, "equation file (concrete coefficients)")
        ->required();
    s->add_option("--cv", cv_path, "conserved vector file")->required();
    s->add_option("--u0", u0_path, "initial profile file (expression in x)")
        ->required();
    s->add_option("--n", grid.n, "number of grid cells");
    s->add_option("--xlo", grid.x_lo, "left endpoint");
    s->add_option("--xhi", grid.x_hi, "right endpoint");
    s->add_option("--boundary", boundary, "periodic | dirichlet | noflux");
    s->add_option("--left", grid.left_value, "Dirichlet value at xlo");
    s->add_option("--right", grid.right_value, "Dirichlet value at xhi");
    s->add_option("--t-end", cfg.t_end, "final time");
    s->add_option("--safety", cfg.safety, "CFL safety factor");
    s->add_option("--stride", cfg.stride, "snapshot stride");
    s->add_option("--tol", tol, "drift tolerance");
    s->add_option("--csv", csv_path, "write t,Q,flux_correction,drift here");
    s->add_option("--seed", seed, "accepted for reproducible reports");
    add_common(s);

    CLI::App* k = app.add_subcommand("catalog", "inspect the case catalog");
    k->add_option("--id", case_id, "show one case in full");
    add_common(k);

    CLI11_PARSE(app, argc, argv);

    try {
        if (v->parsed())
            return cmd_verify(eq_path, cv_paths, assumes, points, seed,
                              json_mode);
        if (c->parsed()) return cmd_classify(eq_path, assumes, json_mode);
        if (t->parsed())
            return cmd_transform(eq_path, tr_path, cv_paths, assumes,
                                 json_mode);
        if (s->parsed()) {
            if (boundary == "periodic")
                grid.boundary = dce::Boundary::Periodic;
            else if (boundary == "dirichlet")
                grid.boundary = dce::Boundary::Dirichlet;
            else if (boundary == "noflux")
                grid.boundary = dce::Boundary::NoFlux;
            else
                throw std::runtime_error("unknown boundary kind: " + boundary);
            return cmd_simulate(eq_path, cv_path, u0_path, assumes, grid, cfg,
                                tol, csv_path, json_mode);
        }
        if (k->parsed()) return cmd_catalog(case_id, json_mode);
    } catch (const dce::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
