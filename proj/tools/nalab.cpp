// nalab: command-line front end to the lab experiments.
//
//   nalab run --config configs/lyapunov_zero.json
//   nalab pullback --config c.json --offset 3 --out runs
//   nalab report runs
//
// Exit codes: 0 pass, 1 an assertion failed, 2 usage or data error.

#include "nalab/lab.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace nalab;

namespace {

struct Common {
    std::string config;
    std::optional<double> offset;
    std::optional<double> T;
    std::string out;
    bool plot = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--offset", c.offset, "base point offset s");
    cmd->add_option("--T", c.T, "time horizon");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_flag("--plot", c.plot, "also write SVG line plots");
}

ExperimentConfig load(const Common& c) {
    auto cfg = load_config(c.config);
    if (c.offset) cfg.experiment.offset = *c.offset;
    if (c.T) cfg.experiment.T = *c.T;
    if (!c.out.empty()) cfg.output.directory = c.out;
    if (c.plot) cfg.output.svg = true;
    validate(cfg);
    return cfg;
}

std::string out_dir(const ExperimentConfig& cfg, const std::string& cmd) {
    const fs::path d = fs::path(cfg.output.directory) / (cmd + "_" + hex64(config_hash(cfg)));
    fs::create_directories(d);
    return d.string();
}

std::string file(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int cmd_simulate(const Common& c, double amplitude) {
    const auto cfg = load(c);
    const auto spec = build_spec(cfg);
    const auto& e = cfg.experiment;
    std::vector<std::vector<double>> rows;
    Series s{"||u||", {}};
    const State z0 = amplitude * spec.basis->e0();
    (void)evolve_observed(spec, {e.offset}, z0, e.T, e.dt_sample, [&](double t, const State& u) {
        const double n = sup_norm(*spec.basis, u);
        rows.push_back({t, n, u.coeffs(0), std::abs(u.coeffs(1))});
        s.points.emplace_back(t, n);
    });
    const auto dir = out_dir(cfg, "simulate");
    write_csv(file(dir, "simulate.csv"), {"t", "sup_norm", "c0", "abs_c1"}, rows);
    if (cfg.output.svg) write_svg(file(dir, "simulate.svg"), "u(t, p, A e0)", "t", {s});
    std::printf("final ||u|| = %.10g  (%s)\n", rows.back()[1], dir.c_str());
    return 0;
}

int cmd_pullback(const Common& c) {
    const auto cfg = load(c);
    const auto spec = build_spec(cfg);
    const auto prm = resolved_pullback(cfg, spec);
    const auto pb = pullback_upper_boundary(spec, {cfg.experiment.offset}, prm);
    const auto dir = out_dir(cfg, "pullback");
    std::vector<std::vector<double>> checks;
    for (const auto& k : pb.record.checks) checks.push_back({double(k.n), k.residual, k.monotone_violation});
    write_csv(file(dir, "checks.csv"), {"n", "residual", "monotone_violation"}, checks);
    const Eigen::VectorXd grid = spec.basis->to_grid(pb.b);
    std::vector<std::vector<double>> profile;
    for (int j = 0; j < grid.size(); ++j) profile.push_back({spec.basis->grid()(j), grid(j)});
    write_csv(file(dir, "b.csv"), {"x", "b"}, profile);
    std::printf("||b(p)|| = %.10g  residual %.3g  depth %.0f  %s  monotone %s\n", sup_norm(*spec.basis, pb.b),
                pb.record.residual, pb.record.depth, pb.record.converged ? "converged" : "NOT converged",
                pb.record.monotone ? "yes" : "no");
    return pb.record.converged && pb.record.monotone ? 0 : 1;
}

void print_flag(const char* name, const Flag& f) {
    std::printf("  %-16s %-5s  statistic %.6g  threshold %.6g\n", name, f.value ? "true" : "false", f.statistic,
                f.threshold);
}

int cmd_classify(const Common& c) {
    const auto cfg = load(c);
    const auto spec = build_spec(cfg);
    const auto& e = cfg.experiment;
    const auto r = classify_point(spec, {e.offset}, e.window, e.thresholds);
    std::printf("offset %.10g  window [%g, %g]%s\n", e.offset, e.window.T_minus, e.window.T_plus,
                r.reliable ? "" : "  (unreliable cocycle estimate)");
    print_flag("f_candidate", r.f_candidate);
    print_flag("s_candidate", r.s_candidate);
    print_flag("a_plus", r.a_plus);
    print_flag("a_minus", r.a_minus);
    print_flag("oscillating", r.oscillating);
    print_flag("recurrent_plus", r.recurrent_plus);
    print_flag("recurrent_minus", r.recurrent_minus);
    print_flag("forward_growth", r.forward_growth);
    return 0;
}

int cmd_forwards(const Common& c) {
    const auto cfg = load(c);
    const auto spec = build_spec(cfg);
    const auto prm = resolved_pullback(cfg, spec);
    const auto& e = cfg.experiment;
    const auto dir = out_dir(cfg, "forwards");
    const auto bt = cached_boundary(cfg, spec, {e.offset}, 0.0, e.T, e.dt_sample, prm, e.anchor_every,
                                    (fs::path(cfg.output.directory) / "cache").string());
    std::vector<State> z;
    for (std::size_t k = 0; k < e.bounds.size(); ++k)
        for (auto& s : sample_initial_conditions(*spec.basis, e.bounds[k], e.sample_k, e.seed + k))
            z.push_back(std::move(s));
    const auto prof = forwards_distance_profile(spec, {e.offset}, z, bt, e.threads);
    std::vector<std::vector<double>> rows;
    Series s{"segment", {}}, o{"order interval", {}};
    for (const auto& d : prof) {
        rows.push_back({d.t, d.dist_segment, d.dist_interval, d.dist_zero});
        s.points.emplace_back(d.t, d.dist_segment);
        o.points.emplace_back(d.t, d.dist_interval);
    }
    write_csv(file(dir, "forwards.csv"), {"t", "dist_segment", "dist_interval", "max_norm"}, rows);
    if (cfg.output.svg) write_svg(file(dir, "forwards.svg"), "distance to the section model", "t", {s, o}, true);
    const double final_dist = prof.back().dist_segment;
    std::printf("final distance to segment model %.6g (%s)\n", final_dist, final_dist < 1e-2 ? "pass" : "FAIL");
    return final_dist < 1e-2 ? 0 : 1;
}

int cmd_liyorke(const Common& c) {
    const auto cfg = load(c);
    const auto spec = build_spec(cfg);
    const auto prm = resolved_pullback(cfg, spec);
    const auto& e = cfg.experiment;
    const auto pb = pullback_upper_boundary(spec, {e.offset}, prm);
    const auto ly = li_yorke_probe(spec, {e.offset}, e.lambda1, e.lambda2, pb.b, e.T, e.dt_sample);
    const auto dir = out_dir(cfg, "liyorke");
    std::vector<std::vector<double>> rows;
    Series s{"||u2 - u1||", {}};
    for (const auto& [t, d] : ly.trace) {
        rows.push_back({t, d});
        s.points.emplace_back(t, d);
    }
    write_csv(file(dir, "liyorke.csv"), {"t", "dist"}, rows);
    if (cfg.output.svg) write_svg(file(dir, "liyorke.svg"), "Li-Yorke pair distance", "t", {s}, true);
    const double band = std::abs(e.lambda2 - e.lambda1) * cfg.nonlinearity.r0;
    const bool ok = ly.liminf_est <= 1e-2 && ly.limsup_est >= 0.8 * band && ly.limsup_est <= band;
    std::printf("liminf_est %.6g  limsup_est %.6g  target [%.4g, %.4g]  %s\n", ly.liminf_est, ly.limsup_est,
                0.8 * band, band, ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
}

int cmd_sweep(const Common& c, const std::vector<double>& offsets) {
    auto cfg = load(c);
    if (!offsets.empty()) cfg.experiment.offsets = offsets;
    const auto res = sweep(cfg, cfg.experiment.offsets);
    for (double d : res.duplicates) std::fprintf(stderr, "warning: duplicate offset %.17g dropped\n", d);
    const auto dir = out_dir(cfg, "sweep");
    const auto spec = build_spec(cfg);
    write_sweep_csv(file(dir, "sweep.csv"), res, resolved_pullback(cfg, spec).tol);
    int failed = 0;
    for (const auto& row : res.rows) {
        if (!row.error.empty()) {
            ++failed;
            std::fprintf(stderr, "offset %.17g: %s\n", row.offset, row.error.c_str());
        }
    }
    std::printf("%zu row(s), %d failed  (%s)\n", res.rows.size(), failed, dir.c_str());
    return 0;
}

int cmd_run(const Common& c, bool no_cache) {
    const auto cfg = load(c);
    RunOptions opt;
    opt.use_cache = !no_cache;
    const auto rec = run_experiment(cfg, opt);
    for (const auto& a : rec.assertions)
        std::printf("%s  %s: %.6g %s %.6g%s%s\n", a.pass ? "pass" : "FAIL", a.name.c_str(), a.measured,
                    a.relation.c_str(), a.threshold, a.detail.empty() ? "" : "  ", a.detail.c_str());
    std::printf("%s -> %s\n", rec.experiment.c_str(), rec.directory.c_str());
    return rec.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical lab for non-autonomous dissipative reaction-diffusion"};
    app.require_subcommand(1);

    Common simulate_o, pullback_o, classify_o, forwards_o, liyorke_o, sweep_o, run_o;
    double amplitude = 1.0;
    std::vector<double> offsets;
    std::string report_dir = "runs";
    bool no_cache = false;

    auto* simulate = app.add_subcommand("simulate", "integrate from A e0 and write the sup-norm trace");
    add_common(simulate, simulate_o);
    simulate->add_option("--amplitude", amplitude, "initial amplitude A");
    auto* pullback = app.add_subcommand("pullback", "pullback upper boundary b(p)");
    add_common(pullback, pullback_o);
    auto* classify = app.add_subcommand("classify", "finite-window class flags of the base point");
    add_common(classify, classify_o);
    auto* forwards = app.add_subcommand("forwards", "forwards distance to the segment model");
    add_common(forwards, forwards_o);
    auto* liyorke = app.add_subcommand("liyorke", "Li-Yorke pair probe l1 b(p), l2 b(p)");
    add_common(liyorke, liyorke_o);
    auto* sweep_cmd = app.add_subcommand("sweep", "classify and pull back at many offsets");
    add_common(sweep_cmd, sweep_o);
    sweep_cmd->add_option("--offsets", offsets, "offsets (default: experiment.offsets)")->delimiter(',');
    auto* report_cmd = app.add_subcommand("report", "summarize the run records below a directory");
    report_cmd->add_option("dir", report_dir, "run directory");
    report_cmd->add_option("--out", report_dir, "run directory");
    std::string canon_path;
    auto* canon = app.add_subcommand("config", "print the canonical form of a config (defaults if none given)");
    canon->add_option("path", canon_path, "config file")->check(CLI::ExistingFile);
    auto* run = app.add_subcommand("run", "run the named experiment of the config");
    add_common(run, run_o);
    run->add_flag("--no-cache", no_cache, "recompute boundary trajectories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*simulate) return cmd_simulate(simulate_o, amplitude);
        if (*pullback) return cmd_pullback(pullback_o);
        if (*classify) return cmd_classify(classify_o);
        if (*forwards) return cmd_forwards(forwards_o);
        if (*liyorke) return cmd_liyorke(liyorke_o);
        if (*sweep_cmd) return cmd_sweep(sweep_o, offsets);
        if (*run) return cmd_run(run_o, no_cache);
        if (*canon) {
            const auto cfg = canon_path.empty() ? ExperimentConfig{} : load_config(canon_path);
            validate(cfg);
            std::cout << dump_config(cfg);
            return 0;
        }
        if (*report_cmd) {
            const auto r = report(report_dir);
            std::cout << r.text;
            return r.exit_code;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
