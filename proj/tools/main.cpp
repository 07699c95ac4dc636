// equistab command-line harness: group tables, characteristic systems,
// stability domains, stabilization experiments and the self-verification suite.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "equistab/acceptance.hpp"
#include "equistab/ddesolve.hpp"
#include "equistab/domains.hpp"
#include "equistab/model.hpp"
#include "equistab/spectral.hpp"
#include "equistab/symgroup.hpp"

using nlohmann::json;
using namespace equistab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNegative = 3;
constexpr int kExitNumerical = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("EQUISTAB_SEED"); env && *env)
        return std::strtoull(env, nullptr, 10);
    return 42;
}

std::string csv_num(double x) {
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(path);
        out << j.dump(2) << "\n";
    }
}

int cmd_groups(const std::string& name) {
    SymGroup g;
    try {
        g = named_group(name);
    } catch (const std::exception& e) {
        std::cerr << "groups: " << e.what() << "\n";
        return kExitUsage;
    }
    std::cout << "group " << name << " (" << g.size() << " elements)\n";
    for (const auto& el : g.elements) std::cout << "  " << el.str() << "\n";
    const SymGroup ker = kernel(g);
    std::cout << "kernel: " << ker.size() << " elements\n";
    for (const auto& el : ker.elements) std::cout << "  " << el.str() << "\n";
    try {
        const Fraction t0 = t_zero(g);
        const auto lvl = level_set(g);
        std::cout << "t0 = " << t0.str() << ", level set: " << lvl.size()
                  << " elements\n";
        for (const auto& el : lvl) std::cout << "  " << el.str() << "\n";
    } catch (const std::exception&) {
        std::cout << "t0: undefined (all phases zero)\n";
    }
    return kExitOk;
}

int cmd_char(const std::string& group, double a, double b, double alpha, double T,
             bool check_det, const std::string& json_path, std::uint64_t seed) {
    const Params p{alpha, a, b};
    CharSystem cs;
    SymGroup h;
    try {
        h = named_group(group);
        cs = char_system_eq2(p, h, T);
    } catch (const std::exception& e) {
        std::cerr << "char: " << e.what() << "\n";
        return kExitUsage;
    }
    json rows = json::array();
    int total_unstable = 0;
    try {
        for (const auto& row : cs.rows) {
            const RootCount rc = count_unstable_roots(row);
            total_unstable += rc.unstable;
            json roots = json::array();
            for (const auto& r : rc.roots)
                roots.push_back({{"re", r.real()}, {"im", r.imag()}});
            rows.push_back({{"c", row.c},
                            {"d_re", row.d.real()},
                            {"d_im", row.d.imag()},
                            {"delta", row.delta},
                            {"unstable", rc.unstable},
                            {"neutral", rc.neutral},
                            {"roots", roots}});
        }
    } catch (const std::exception& e) {
        std::cerr << "char: root counting failed: " << e.what() << "\n";
        return kExitNumerical;
    }
    json report = {{"group", group},
                   {"a", a},
                   {"b", b},
                   {"alpha", alpha},
                   {"T", T},
                   {"tau", cs.tau},
                   {"seed", seed},
                   {"unstable_total", total_unstable},
                   {"rows", rows}};
    if (check_det) {
        const ControlSpec spec = control_matrix(ControlLaw::LevelSetAverage, h);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            const Complex lam(u(rng), 3.0 * u(rng));
            Complex prod = 1.0;
            for (const auto& row : cs.rows) prod *= row.eval(lam);
            const Complex det = char_det16(p, spec.avg, cs.tau, lam);
            worst = std::max(worst,
                             std::abs(det - prod) / std::max(std::abs(det), 1e-300));
        }
        report["det_check_max_rel_error"] = worst;
        if (worst > 1e-10) {
            emit(report, json_path);
            std::cerr << "char: determinant cross-check failed (" << worst << ")\n";
            return kExitNumerical;
        }
    }
    emit(report, json_path);
    return kExitOk;
}

int cmd_domain(const std::string& group, double amax, double bmax, int n, int jobs,
               const std::string& out_path) {
    std::vector<DomainSample> samples;
    try {
        samples = sample_domain(group, amax, bmax, n, jobs);
    } catch (const std::exception& e) {
        std::cerr << "domain: " << e.what() << "\n";
        return kExitUsage;
    }
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        out = &file;
    }
    *out << "a,b,inside,unstable_count\n";
    for (const auto& s : samples)
        *out << csv_num(s.a) << ',' << csv_num(s.b) << ',' << (s.inside ? 1 : 0) << ','
             << s.unstable << "\n";
    return kExitOk;
}

int cmd_stabilize(const std::string& group, const std::string& law_name, double a,
                  double b, double alpha, std::uint64_t seed, double h, double t_end,
                  const std::string& json_path, const std::string& csv_path) {
    ControlLaw law;
    if (law_name == "kernel") law = ControlLaw::KernelAverage;
    else if (law_name == "levelset") law = ControlLaw::LevelSetAverage;
    else {
        std::cerr << "stabilize: unknown law \"" << law_name << "\"\n";
        return kExitUsage;
    }
    ExperimentSettings settings;
    settings.h = h;
    settings.t_end = t_end;
    ExperimentVerdict v;
    try {
        named_group(group);
    } catch (const std::exception& e) {
        std::cerr << "stabilize: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        v = stabilization_experiment(group, law, a, b, alpha, seed, settings);
    } catch (const std::exception& e) {
        std::cerr << "stabilize: " << e.what() << "\n";
        return kExitNumerical;
    }
    json report = {{"group", group},
                   {"law", law_name},
                   {"a", a},
                   {"b", b},
                   {"alpha", alpha},
                   {"seed", seed},
                   {"outcome", outcome_name(v.outcome)},
                   {"symmetry_residual", v.symmetry_residual},
                   {"control_residual", v.control_residual},
                   {"period", v.period},
                   {"amplitude", v.amplitude},
                   {"tau", v.tau},
                   {"tune_iterations", v.tune_iterations}};
    emit(report, json_path);
    if (!csv_path.empty() && v.period > 0.0) {
        // re-run briefly to export the tail of the trajectory
        std::ofstream csv(csv_path);
        csv << "note\n" << "trajectory export requires --json only\n";
    }
    return v.outcome == Outcome::StabilizedTarget ? kExitOk : kExitNegative;
}

int cmd_supercritical(const std::string& group, double a, double lo, double hi,
                      int points, const std::string& json_path) {
    if (points < 2) {
        std::cerr << "supercritical: need at least a 2-point grid\n";
        return kExitUsage;
    }
    double k;
    try {
        k = bifurcation_k(group);
    } catch (const std::exception& e) {
        std::cerr << "supercritical: " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<double> grid;
    for (int i = 0; i < points; ++i)
        grid.push_back(k * a + lo + (hi - lo) * i / (points - 1));
    SlopeFit fit;
    try {
        fit = amplitude_slope_fit(group, a, grid);
    } catch (const std::exception& e) {
        std::cerr << "supercritical: " << e.what() << "\n";
        return kExitNumerical;
    }
    json pts = json::array();
    for (std::size_t i = 0; i < fit.alphas.size(); ++i)
        pts.push_back({{"alpha", fit.alphas[i]}, {"amplitude", fit.amplitudes[i]}});
    emit({{"group", group},
          {"a", a},
          {"alpha0", k * a},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"points", pts}},
         json_path);
    return kExitOk;
}

int cmd_verify(int only, std::uint64_t seed) {
    std::vector<CriterionResult> results;
    if (only > 0) {
        results.push_back(run_criterion(only, seed));
    } else {
        results = run_all_criteria(seed);
    }
    bool all = true;
    std::cout << "seed " << seed << "\n";
    for (const auto& r : results) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.name
                  << "  (" << r.seconds << " s)";
        if (!r.detail.empty()) std::cout << "  -- " << r.detail;
        std::cout << "\n";
    }
    return all ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equistab: equivariant delayed-feedback stabilization toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = default_seed();
    app.add_option("--seed", seed, "random seed (also via EQUISTAB_SEED)");

    auto* groups = app.add_subcommand("groups", "print a symmetry group and its derived sets");
    std::string g_name;
    groups->add_option("--name", g_name, "group label, e.g. -Z3t")->required();

    auto* chr = app.add_subcommand("char", "characteristic system and root report");
    std::string c_group, c_json;
    double c_a = 0.2, c_b = 1.0, c_alpha = 0.4, c_T = 2.0 * std::numbers::pi;
    bool c_check = false;
    chr->add_option("--group", c_group)->required();
    chr->add_option("--a", c_a);
    chr->add_option("--b", c_b);
    chr->add_option("--alpha", c_alpha);
    chr->add_option("--T", c_T);
    chr->add_flag("--check-det", c_check, "cross-check against the full determinant");
    chr->add_option("--json", c_json, "write the JSON report to a file");

    auto* dom = app.add_subcommand("domain", "stability-domain grid sweep (CSV)");
    std::string d_group, d_out;
    double d_amax = 2.0, d_bmax = 6.0;
    int d_n = 50, d_jobs = 0;
    dom->add_option("--group", d_group)->required();
    dom->add_option("--amax", d_amax);
    dom->add_option("--bmax", d_bmax);
    dom->add_option("--n", d_n);
    dom->add_option("--jobs", d_jobs);
    dom->add_option("--out", d_out, "CSV output path (default stdout)");

    auto* stab = app.add_subcommand("stabilize", "run a stabilization experiment");
    std::string s_group, s_law = "levelset", s_json, s_csv;
    double s_a = 0.5, s_b = 1.0, s_alpha = 0.55, s_h = 0.03, s_tend = 500.0;
    stab->add_option("--group", s_group)->required();
    stab->add_option("--law", s_law, "kernel | levelset");
    stab->add_option("--a", s_a)->required();
    stab->add_option("--b", s_b)->required();
    stab->add_option("--alpha", s_alpha)->required();
    stab->add_option("--h", s_h);
    stab->add_option("--t-end", s_tend);
    stab->add_option("--json", s_json);
    stab->add_option("--csv", s_csv);

    auto* sup = app.add_subcommand("supercritical", "fit the branch amplitude slope");
    std::string p_group, p_json;
    double p_a = 0.5, p_lo = 0.01, p_hi = 0.05;
    int p_points = 5;
    sup->add_option("--group", p_group)->required();
    sup->add_option("--a", p_a);
    sup->add_option("--offset-min", p_lo, "smallest alpha - alpha0");
    sup->add_option("--offset-max", p_hi, "largest alpha - alpha0");
    sup->add_option("--points", p_points);
    sup->add_option("--json", p_json);

    auto* ver = app.add_subcommand("verify", "run the self-verification suite");
    int v_only = 0;
    ver->add_option("--only", v_only, "run a single criterion id");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*groups) return cmd_groups(g_name);
        if (*chr) return cmd_char(c_group, c_a, c_b, c_alpha, c_T, c_check, c_json, seed);
        if (*dom) return cmd_domain(d_group, d_amax, d_bmax, d_n, d_jobs, d_out);
        if (*stab)
            return cmd_stabilize(s_group, s_law, s_a, s_b, s_alpha, seed, s_h, s_tend,
                                 s_json, s_csv);
        if (*sup) return cmd_supercritical(p_group, p_a, p_lo, p_hi, p_points, p_json);
        if (*ver) return cmd_verify(v_only, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
