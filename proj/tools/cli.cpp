#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "mflab/bubbles.hpp"
#include "mflab/fitting.hpp"
#include "mflab/functional.hpp"
#include "mflab/mass_algebra.hpp"
#include "mflab/measures.hpp"
#include "mflab/radial_shooting.hpp"
#include "mflab/solver.hpp"

namespace mflab::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// key = value lines become --key value tokens placed ahead of the user's
// flags, so with take-last semantics the flags win.
std::vector<std::string> config_tokens(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    std::vector<std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (value == "true") {
            out.push_back("--" + key);
        } else if (value != "false") {
            out.push_back("--" + key);
            out.push_back(value);
        }
    }
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ValidationError("cannot parse number list '" + s + "'");
        }
    }
    if (out.empty()) throw ValidationError("empty number list");
    return out;
}

std::vector<IntensityAtom> parse_atoms(const std::string& s) {
    std::vector<IntensityAtom> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ValidationError("atoms take the form alpha:weight,...");
        const auto alpha = parse_list(item.substr(0, colon));
        const auto weight = parse_list(item.substr(colon + 1));
        out.push_back({alpha.at(0), weight.at(0)});
    }
    return out;
}

json mass_json(MassPair m) { return json::array({m.sigma1, m.sigma2}); }

json type_json(const BlowupType& t) {
    json j{{"kind", to_string(t.kind)}, {"sigma", mass_json(t.pair)}};
    if (t.kind == BlowupKind::MultiBubble) j["m"] = t.m;
    return j;
}

TorusField cosine_weight(TorusGrid grid, double amp, int axis) {
    if (!(std::abs(amp) < 1.0)) throw ValidationError("weight amplitude must lie in (-1, 1)");
    return TorusField::sample(grid, [=](TorusPoint p) { return 1.0 + amp * std::cos(2.0 * pi * (axis ? p.y : p.x)); });
}

// Few low Fourier modes with seeded amplitudes, sup norm scaled to `amp`.
TorusField random_field(TorusGrid grid, double amp, std::uint64_t seed) {
    TorusField u(grid);
    if (amp == 0.0) return u;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int kx = 0; kx <= 2; ++kx) {
        for (int ky = -2; ky <= 2; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            const double c = coef(rng);
            const double phase = 2.0 * pi * coef(rng);
            u += TorusField::sample(grid, [=](TorusPoint p) { return c * std::cos(2.0 * pi * (kx * p.x + ky * p.y) + phase); });
        }
    }
    u = u.mean_zero();
    return (amp / u.sup_norm()) * u;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << text;
}

// Snapshot of the effective options, one key = value per line, readable back
// through --config.
std::string options_snapshot(const CLI::App& sub) {
    std::ostringstream os;
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        std::string key = opt->get_lnames().front();
        if (key == "help" || key == "config") continue;
        std::replace(key.begin(), key.end(), '-', '_');
        if (opt->get_type_size() == 0) {
            os << key << " = " << (opt->count() ? "true" : "false") << '\n';
        } else if (!opt->results().empty()) {
            os << key << " = " << opt->results().back() << '\n';
        } else if (!opt->get_default_str().empty()) {
            os << key << " = " << opt->get_default_str() << '\n';
        }
    }
    return os.str();
}

struct Ctx {
    std::ostream& out;
    CLI::App* sub = nullptr;
    std::string output_dir;
    std::uint64_t seed = 0;

    // Called only after every input has been validated.
    fs::path open_run_dir() const {
        const fs::path dir = output_dir.empty() ? fs::path(".") : fs::path(output_dir);
        fs::create_directories(dir);
        write_text(dir / "run.cfg", options_snapshot(*sub));
        return dir;
    }
    void emit(const json& j) const { out << j.dump(2) << '\n'; }
};

// ---- masses

struct MassesOpts {
    double a = -1.0;
    std::string classify;
    int gamma_m = 0;
    std::string atoms;
    double tol = 1e-2;
};

int cmd_masses(const Ctx& ctx, const MassesOpts& o) {
    json j;
    if (o.a != -1.0) {
        const Intensity a(o.a);
        const auto [lo, hi] = admissible_eta_interval(a);
        j["a"] = a.value();
        j["rho2_threshold_over_pi"] = min_mass_rho2(a) / pi;
        j["eta_interval"] = json::array({lo, hi});
        if (o.gamma_m != 0) {
            if (o.gamma_m < 1) throw ValidationError("--gamma-m needs m >= 1");
            const GammaRoots g = solve_gamma_m(o.gamma_m, a);
            j["gamma_m"] = {{"m", o.gamma_m},
                            {"discriminant", discriminant_gamma_m(o.gamma_m, a)},
                            {"roots", g.roots},
                            {"double_root", g.double_root}};
        }
        if (!o.classify.empty()) {
            const auto v = parse_list(o.classify);
            if (v.size() != 2) throw ValidationError("--classify takes sigma1,sigma2");
            if (!(o.tol > 0.0)) throw ValidationError("--tol must be positive");
            const MassPair mp{v[0], v[1]};
            json c = type_json(classify_local_mass(mp, a, o.tol));
            c["input"] = mass_json(mp);
            c["pohozaev_residual"] = pohozaev_residual(mp, a);
            j["classification"] = c;
        }
    } else if (o.gamma_m != 0 || !o.classify.empty()) {
        throw ValidationError("--gamma-m and --classify need --a");
    }
    if (!o.atoms.empty()) {
        const AtomicIntensity p(parse_atoms(o.atoms));
        const double s = sharp_threshold(p);
        j["sharp_threshold"] = s;
        j["sharp_threshold_over_pi"] = s / pi;
    }
    if (j.empty()) throw ValidationError("masses needs --a or --atoms");
    ctx.emit(j);
    return 0;
}

// ---- shoot / sweep

struct ShootOpts {
    double rho1_over_pi = 1.0 / pi;
    double rho2_over_pi = 0.0;
    double a = 0.5;
    double c0 = 0.0;
    double v0 = 0.0;
    double r_max = 1e4;
    double rtol = 1e-10;
    double atol = 1e-12;
    double fit_lo = 1e3;
    std::string c0_list = "-1,0,1,2,3";
    std::string ratio_list = "0.5,1,2,4,8";
};

ShootParams shoot_params(const ShootOpts& o) {
    ShootParams p;
    p.rho1 = o.rho1_over_pi * pi;
    p.rho2 = o.rho2_over_pi * pi;
    p.a = o.a;
    p.c0 = o.c0;
    p.v0 = o.v0;
    p.r_max = o.r_max;
    p.rtol = o.rtol;
    p.atol = o.atol;
    return p;
}

std::pair<double, double> fit_window(const ShootOpts& o) {
    if (!(o.fit_lo > 1.0 && o.fit_lo < o.r_max)) throw ValidationError("--fit-lo must lie in (1, r_max)");
    return {o.fit_lo, o.r_max};
}

int cmd_shoot(const Ctx& ctx, const ShootOpts& o) {
    const ShootParams p = shoot_params(o);
    p.validate();
    const auto window = fit_window(o);
    const RadialProfile prof = shoot(p);
    json j{{"final_eta", prof.final_eta()},
           {"sigma1", prof.sigma1.back()},
           {"sigma2", prof.sigma2.back()},
           {"pohozaev_residual", verify_pohozaev(prof)},
           {"steps", prof.size()}};
    try {
        j["limit_mass"] = limit_mass(prof, window);
        j["status"] = "converged";
    } catch (const NonConvergedError& e) {
        j["limit_mass"] = e.estimate();
        j["status"] = "nonconverged";
    }
    const fs::path dir = ctx.open_run_dir();
    write_profile_csv(dir / "profile.csv", prof);
    ctx.emit(j);
    return 0;
}

int cmd_sweep(const Ctx& ctx, const ShootOpts& o) {
    ShootParams base = shoot_params(o);
    base.rho2 = base.rho1;
    base.validate();
    const auto window = fit_window(o);
    const auto c0s = parse_list(o.c0_list);
    const auto ratios = parse_list(o.ratio_list);
    for (double r : ratios) {
        if (!(r > 0.0)) throw ValidationError("sweep ratios must be positive");
    }
    const auto rows = sweep_eta(o.a, c0s, ratios, base, window);
    const auto [lo, hi] = admissible_eta_interval(Intensity(o.a));
    json counts = json::object();
    bool inside = true;
    double worst_poh = 0.0;
    for (const auto& r : rows) {
        const std::string s = to_string(r.status);
        counts[s] = counts.value(s, 0) + 1;
        if (r.status == SweepStatus::Converged) worst_poh = std::max(worst_poh, r.pohozaev_residual);
        if (r.status == SweepStatus::OutsideInterval) inside = false;
    }
    const fs::path dir = ctx.open_run_dir();
    write_sweep_csv(dir / "sweep.csv", rows);
    ctx.emit({{"a", o.a},
              {"eta_interval", json::array({lo, hi})},
              {"cells", rows.size()},
              {"status_counts", counts},
              {"all_converged_inside", inside},
              {"max_pohozaev_residual", worst_poh}});
    return 0;
}

// ---- bubble / mtcheck

struct LadderOpts {
    int k = 1;
    double rho1_over_pi = 0.0;
    double rho2_over_pi = 0.0;
    double a = 0.25;
    int n = 1024;
    double lambda_min = 10.0;
    double lambda_max = 200.0;
    int count = 8;
};

int cmd_bubble(const Ctx& ctx, const LadderOpts& o) {
    const Intensity a(o.a);
    const TorusGrid grid(o.n);
    if (o.k < 1 || o.k > 5) throw ValidationError("--k must lie in 1..5");
    const auto lambdas = geometric_ladder(o.lambda_min, o.lambda_max, o.count);
    if (o.lambda_max > o.n / 4.0) throw UnderresolvedError("--lambda-max exceeds n/4");
    const Barycenter sigma = equal_weight_barycenter(o.k);
    const RhoPair rho{o.rho1_over_pi * pi, o.rho2_over_pi * pi};

    const auto ladder = evaluate_ladder(sigma, lambdas, grid, rho, a);
    std::vector<double> xs, e, li, av, jt;
    for (const auto& p : ladder) {
        xs.push_back(std::log(p.lambda));
        e.push_back(p.energy);
        li.push_back(p.log_int);
        av.push_back(p.avg);
        jt.push_back(p.j_total);
    }
    const fs::path dir = ctx.open_run_dir();
    write_ladder_csv(dir / "ladder.csv", ladder);
    const double predicted = 16.0 * o.k * pi - 2.0 * rho.rho1 - rho.rho2 * std::max(0.0, 4.0 * a.value() - 2.0);
    ctx.emit({{"k", o.k},
              {"energy_slope", fit_log_slope(xs, e).slope},
              {"energy_slope_predicted", 16.0 * o.k * pi},
              {"log_int_slope", fit_log_slope(xs, li).slope},
              {"avg_slope", fit_log_slope(xs, av).slope},
              {"J_slope", fit_log_slope(xs, jt).slope},
              {"J_slope_predicted", predicted},
              {"J_slope_over_pi", fit_log_slope(xs, jt).slope / pi}});
    return 0;
}

int cmd_mtcheck(const Ctx& ctx, const LadderOpts& o) {
    const Intensity a(o.a);
    const TorusGrid grid(o.n);
    const auto lambdas = geometric_ladder(o.lambda_min, o.lambda_max, o.count);
    if (o.lambda_max > o.n / 4.0) throw UnderresolvedError("--lambda-max exceeds n/4");
    separated_atoms(o.k + 1, 0.3);
    const FamilySlope fam = improved_mt_family_test(o.k, o.rho1_over_pi * pi, a, o.rho2_over_pi * pi, lambdas, grid);
    const fs::path dir = ctx.open_run_dir();
    std::ofstream os(dir / "family.csv");
    if (!os) throw Error("cannot write family.csv");
    os << "lambda,J_total,dirichlet,rho1_term,rho2_term\n" << std::setprecision(17);
    for (const auto& s : fam.samples) {
        os << s.lambda << ',' << s.value.total << ',' << s.value.dirichlet << ',' << s.value.rho1_term << ','
           << s.value.rho2_term << '\n';
    }
    ctx.emit({{"k", o.k},
              {"slope", fam.slope},
              {"predicted", fam.predicted},
              {"slope_over_pi", fam.slope / pi},
              {"sign", fam.slope < 0.0 ? "negative" : "nonnegative"}});
    return 0;
}

// ---- solve / continue / diagnose

struct SolveOpts {
    int n = 128;
    double a = 0.25;
    double rho1_over_pi = 4.0;
    double rho2_over_pi = 2.0;
    double h1_amp = 0.5;
    double h2_amp = 0.0;
    double residual_tol = 1e-10;
    int max_iter = 50;
    double init_amp = 0.0;
    double ball_radius = 0.1;
    bool coercive_demo = false;
    std::string path = "2:1,12:1";
    double step_over_pi = 0.5;
    int max_backtracks = 6;
    bool allow_blowup = false;
    int synthetic = 0;
    std::string field;
    double class_tol = 0.1;
};

SolveConfig solve_config(const SolveOpts& o) {
    const TorusGrid grid(o.n);
    SolveConfig cfg{{o.rho1_over_pi * pi, o.rho2_over_pi * pi},
                    Intensity(o.a),
                    Weights(cosine_weight(grid, o.h1_amp, 0), cosine_weight(grid, o.h2_amp, 1)),
                    {},
                    {}};
    cfg.newton.residual_tol = o.residual_tol;
    cfg.newton.max_iter = o.max_iter;
    cfg.continuation.step = o.step_over_pi * pi;
    cfg.continuation.max_backtracks = o.max_backtracks;
    cfg.continuation.allow_blowup_study = o.allow_blowup;
    cfg.validate();
    return cfg;
}

json report_json(const BlowupReport& rep, const BlowupClassification& cls) {
    json peaks = json::array();
    for (std::size_t i = 0; i < rep.peak_set.size(); ++i) {
        peaks.push_back({{"x", rep.peak_set[i].x},
                         {"y", rep.peak_set[i].y},
                         {"sigma", mass_json({to_sigma_units(rep.local_masses[i].sigma1),
                                              to_sigma_units(rep.local_masses[i].sigma2)})},
                         {"sigma_extrapolated", mass_json({to_sigma_units(rep.richardson[i].sigma1),
                                                           to_sigma_units(rep.richardson[i].sigma2)})},
                         {"type", type_json(cls.types[i])}});
    }
    double s1 = rep.residual_masses.sigma1;
    double s2 = rep.residual_masses.sigma2;
    for (const auto& m : rep.local_masses) {
        s1 += m.sigma1;
        s2 += m.sigma2;
    }
    const double scale = rep.rho.rho1 + rep.rho.rho2;
    const double bookkeeping = scale > 0.0 ? std::hypot(s1 - rep.rho.rho1, s2 - rep.rho.rho2) / scale : 0.0;
    return {{"peaks", peaks},
            {"residual_sigma", mass_json({to_sigma_units(rep.residual_masses.sigma1),
                                          to_sigma_units(rep.residual_masses.sigma2)})},
            {"sup_norm", rep.sup_norm},
            {"selection_bound", rep.selection_bound},
            {"bookkeeping_error", bookkeeping},
            {"r1_check_applies", cls.r1_check_applies},
            {"r1_residual_sigma", cls.r1_residual_sigma}};
}

int cmd_solve(const Ctx& ctx, SolveOpts o) {
    if (o.coercive_demo) {
        o.n = 256;
        o.a = 0.25;
        o.rho1_over_pi = 4.0;
        o.rho2_over_pi = 2.0;
        o.h1_amp = 0.5;
        o.h2_amp = 0.0;
    }
    const SolveConfig cfg = solve_config(o);
    if (!(o.ball_radius > 2.0 / o.n && o.ball_radius < 0.25)) throw ValidationError("--ball-radius must lie in (2/n, 0.25)");
    const TorusField u0 = random_field(cfg.grid(), o.init_amp, ctx.seed);
    const double J0 = evaluate_J(u0, cfg.rho, cfg.a, cfg.h).total;

    int code = 0;
    json j;
    std::optional<SolutionRecord> rec;
    try {
        rec = newton_solve(cfg, u0);
    } catch (const SolveError& e) {
        rec = e.last();
        j["error"] = e.what();
        code = 3;
    }
    const BlowupReport rep = blowup_diagnostics(*rec, o.ball_radius);
    const BlowupClassification cls = classify_blowup(rep, cfg.a, o.class_tol);
    const fs::path dir = ctx.open_run_dir();
    persist_run(dir, cfg, *rec, rep);
    j["status"] = to_string(rec->status);
    j["iterations"] = rec->iterations;
    j["residual_norm"] = rec->residual_norm;
    j["J"] = rec->J_value.total;
    j["J_initial"] = J0;
    j["diagnostics"] = report_json(rep, cls);
    ctx.emit(j);
    return code;
}

std::vector<RhoPair> parse_path(const std::string& s) {
    std::vector<RhoPair> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ValidationError("--path takes rho1:rho2 pairs over pi");
        out.push_back({parse_list(item.substr(0, colon)).at(0) * pi, parse_list(item.substr(colon + 1)).at(0) * pi});
    }
    return out;
}

int cmd_continue(const Ctx& ctx, const SolveOpts& o) {
    SolveConfig cfg = solve_config(o);
    cfg.continuation.path = o.path.empty() ? std::vector<RhoPair>{} : parse_path(o.path);
    cfg.validate();

    std::vector<SolutionRecord> records;
    json events = json::array();
    int code = 0;
    std::optional<PathStuckError> stuck;
    try {
        records = continuation_run(cfg);
    } catch (const PathStuckError& e) {
        records = e.records();
        stuck = e;
        code = 3;
    }
    const double step = cfg.continuation.step;
    for (const auto& r : records) {
        const double q = r.rho.rho1 / (8.0 * pi);
        const double nearest = std::round(q);
        if (nearest >= 1.0 && std::abs(r.rho.rho1 - 8.0 * pi * nearest) <= step) {
            events.push_back({{"event", "near_quantized"},
                              {"rho1_over_pi", r.rho.rho1 / pi},
                              {"sup_norm", r.u.sup_norm()},
                              {"iterations", r.iterations}});
        }
    }
    if (stuck) {
        events.push_back({{"event", "path_stuck"},
                          {"rho1_over_pi", stuck->failed_at().rho1 / pi},
                          {"rho2_over_pi", stuck->failed_at().rho2 / pi},
                          {"sup_norm", stuck->last_sup_norm()},
                          {"message", stuck->what()}});
    }
    const fs::path dir = ctx.open_run_dir();
    write_config_snapshot(dir / "config.txt", cfg);
    write_records_csv(dir / "records.csv", records);
    std::ofstream ev(dir / "events.csv");
    ev << "event,rho1_over_pi,sup_norm\n" << std::setprecision(17);
    for (const auto& e : events) {
        ev << e["event"].get<std::string>() << ',' << e["rho1_over_pi"].get<double>() << ','
           << e["sup_norm"].get<double>() << '\n';
    }
    json j{{"records", records.size()}, {"path_stuck", stuck.has_value()}, {"events", events}};
    if (!records.empty()) {
        j["last_rho1_over_pi"] = records.back().rho.rho1 / pi;
        j["last_sup_norm"] = records.back().u.sup_norm();
    }
    ctx.emit(j);
    return code;
}

int cmd_diagnose(const Ctx& ctx, const SolveOpts& o) {
    if (o.synthetic == 0 && o.field.empty()) throw ValidationError("diagnose needs --field or --synthetic");
    if (o.synthetic != 0 && !o.field.empty()) throw ValidationError("--field and --synthetic are exclusive");
    TorusField u = o.field.empty() ? TorusField(TorusGrid(o.n)) : read_field_binary(o.field);
    SolveOpts so = o;
    so.n = u.n();
    const SolveConfig cfg = solve_config(so);
    if (!(o.ball_radius > 2.0 / so.n && o.ball_radius < 0.25)) throw ValidationError("--ball-radius must lie in (2/n, 0.25)");
    if (o.synthetic != 0) {
        if (o.synthetic < 1 || o.synthetic > 5) throw ValidationError("--synthetic must lie in 1..5");
        u = build_bubble({equal_weight_barycenter(o.synthetic), so.n / 4.0}, cfg.grid()).u;
    }
    const TorusField F = el_residual(u, cfg.rho, cfg.a, cfg.h);
    const SolutionRecord rec{u, F.sup_norm(), cfg.rho, 0, evaluate_J(u, cfg.rho, cfg.a, cfg.h),
                             SolveStatus::Converged, cfg.a, cfg.h};
    const BlowupReport rep = blowup_diagnostics(rec, o.ball_radius);
    const BlowupClassification cls = classify_blowup(rep, cfg.a, o.class_tol);
    const fs::path dir = ctx.open_run_dir();
    write_diagnostics_csv(dir / "diagnostics.csv", rep);
    json j = report_json(rep, cls);
    j["residual_norm"] = rec.residual_norm;
    ctx.emit(j);
    return 0;
}

void add_common(CLI::App* sub, Ctx& ctx) {
    sub->add_option("--output-dir", ctx.output_dir, "directory for CSV and binary artifacts");
    sub->add_option("--seed", ctx.seed, "seed for random initial fields");
    sub->add_option("--config", "flat key = value file; flags override it");
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"mflab: mean field equations with two exponential terms"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    Ctx ctx{out, nullptr, {}, 0};

    MassesOpts mo;
    auto* masses = app.add_subcommand("masses", "blow-up mass algebra queries");
    masses->add_option("--a", mo.a, "intensity in (0, 1)");
    masses->add_option("--classify", mo.classify, "sigma1,sigma2 in units of 2 pi");
    masses->add_option("--gamma-m", mo.gamma_m, "multi-bubble count m");
    masses->add_option("--atoms", mo.atoms, "alpha:weight,... intensity distribution");
    masses->add_option("--tol", mo.tol, "classification tolerance")->capture_default_str();

    ShootOpts so;
    auto add_shoot = [&](CLI::App* s) {
        s->add_option("--rho1-over-pi", so.rho1_over_pi)->capture_default_str();
        s->add_option("--a", so.a)->capture_default_str();
        s->add_option("--v0", so.v0)->capture_default_str();
        s->add_option("--r-max", so.r_max)->capture_default_str();
        s->add_option("--rtol", so.rtol)->capture_default_str();
        s->add_option("--atol", so.atol)->capture_default_str();
        s->add_option("--fit-lo", so.fit_lo, "lower end of the limit-mass fit window")->capture_default_str();
    };
    auto* shoot_cmd = app.add_subcommand("shoot", "integrate one radial profile");
    add_shoot(shoot_cmd);
    shoot_cmd->add_option("--rho2-over-pi", so.rho2_over_pi)->capture_default_str();
    shoot_cmd->add_option("--c0", so.c0)->capture_default_str();
    auto* sweep_cmd = app.add_subcommand("sweep", "limit masses over a (c0, rho2/rho1) grid");
    add_shoot(sweep_cmd);
    sweep_cmd->add_option("--c0-list", so.c0_list)->capture_default_str();
    sweep_cmd->add_option("--ratio-list", so.ratio_list)->capture_default_str();

    LadderOpts lo;
    auto add_ladder = [&](CLI::App* s) {
        s->add_option("--k", lo.k)->capture_default_str();
        s->add_option("--rho1-over-pi", lo.rho1_over_pi)->capture_default_str();
        s->add_option("--rho2-over-pi", lo.rho2_over_pi)->capture_default_str();
        s->add_option("--a", lo.a)->capture_default_str();
        s->add_option("--n", lo.n)->capture_default_str();
        s->add_option("--lambda-min", lo.lambda_min)->capture_default_str();
        s->add_option("--lambda-max", lo.lambda_max)->capture_default_str();
        s->add_option("--count", lo.count)->capture_default_str();
    };
    auto* bubble_cmd = app.add_subcommand("bubble", "bubble ladder asymptotics");
    add_ladder(bubble_cmd);
    auto* mt_cmd = app.add_subcommand("mtcheck", "J slope along (k+1)-bubble families");
    add_ladder(mt_cmd);

    SolveOpts vo;
    auto add_solve = [&](CLI::App* s) {
        s->add_option("--n", vo.n)->capture_default_str();
        s->add_option("--a", vo.a)->capture_default_str();
        s->add_option("--rho1-over-pi", vo.rho1_over_pi)->capture_default_str();
        s->add_option("--rho2-over-pi", vo.rho2_over_pi)->capture_default_str();
        s->add_option("--h1-amp", vo.h1_amp, "h1 = 1 + amp cos(2 pi x)")->capture_default_str();
        s->add_option("--h2-amp", vo.h2_amp, "h2 = 1 + amp cos(2 pi y)")->capture_default_str();
        s->add_option("--residual-tol", vo.residual_tol)->capture_default_str();
        s->add_option("--max-iter", vo.max_iter)->capture_default_str();
        s->add_option("--ball-radius", vo.ball_radius)->capture_default_str();
        s->add_option("--class-tol", vo.class_tol, "mass classification tolerance")->capture_default_str();
    };
    auto* solve_cmd = app.add_subcommand("solve", "Newton solve of the mean field equation");
    add_solve(solve_cmd);
    solve_cmd->add_option("--init-amp", vo.init_amp, "sup norm of the seeded initial field")->capture_default_str();
    solve_cmd->add_flag("--coercive-demo", vo.coercive_demo, "nonconstant-weight solve in the coercive region");
    auto* cont_cmd = app.add_subcommand("continue", "continuation along a rho path");
    add_solve(cont_cmd);
    cont_cmd->add_option("--path", vo.path, "rho1:rho2 waypoints over pi")->capture_default_str();
    cont_cmd->add_option("--step-over-pi", vo.step_over_pi)->capture_default_str();
    cont_cmd->add_option("--max-backtracks", vo.max_backtracks)->capture_default_str();
    cont_cmd->add_flag("--allow-blowup", vo.allow_blowup, "skip the waypoint region check");
    auto* diag_cmd = app.add_subcommand("diagnose", "blow-up diagnostics of a field");
    add_solve(diag_cmd);
    diag_cmd->add_option("--field", vo.field, "binary field written by solve");
    diag_cmd->add_option("--synthetic", vo.synthetic, "use a k-bubble field at lambda = n/4");

    for (CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; })) add_common(s, ctx);

    try {
        std::vector<std::string> args = args_in;
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] == "--config") {
                const auto extra = config_tokens(args[i + 1]);
                args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
                args.insert(args.begin() + 1, extra.begin(), extra.end());
                break;
            }
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    ctx.sub = app.get_subcommands().front();
    const std::string name = ctx.sub->get_name();
    try {
        if (name == "masses") return cmd_masses(ctx, mo);
        if (name == "shoot") return cmd_shoot(ctx, so);
        if (name == "sweep") return cmd_sweep(ctx, so);
        if (name == "bubble") return cmd_bubble(ctx, lo);
        if (name == "mtcheck") return cmd_mtcheck(ctx, lo);
        if (name == "solve") return cmd_solve(ctx, vo);
        if (name == "continue") return cmd_continue(ctx, vo);
        if (name == "diagnose") return cmd_diagnose(ctx, vo);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace mflab::cli
