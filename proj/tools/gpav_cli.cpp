// gpav: run configs, convergence sweeps and scheme comparisons.
//
// Exit codes: 0 success, 1 runtime failure (gPAV divergence, I/O mid-run),
// 2 bad flags / config / missing file, 3 a baseline scheme diverged,
// 4 a completed run violated an invariant check.

#include "gpav/diagnostics.hpp"
#include "gpav/io.hpp"
#include "gpav/problems.hpp"
#include "gpav/schemes.hpp"
#include "gpav/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gpav;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;
constexpr int exit_baseline_diverged = 3;
constexpr int exit_invariant = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

SchemeKind scheme_or_throw(const std::string& name)
{
    const auto k = parse_scheme_kind(name);
    if (!k) {
        throw UsageError("unknown scheme '" + name + "' (expected 1a, 1b, 2a, 2b, semi, sav)");
    }
    return *k;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

void print_report(const InvariantReport& rep)
{
    for (const auto& c : rep.checks) {
        std::printf("  %-18s %s", c.name.c_str(), c.passed ? "ok" : "VIOLATED");
        if (c.first_violation) {
            std::printf(" (first at step %ld)", *c.first_violation);
        }
        std::printf("\n");
    }
}

// --- run -----------------------------------------------------------------------------------

int cmd_run(const std::string& config_path, const std::string& output_override)
{
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    if (!output_override.empty()) {
        cfg.output_dir = output_override;
    }
    ensure_dir(cfg.output_dir);

    RunOptions opts;
    opts.history_every = cfg.history_every;
    opts.snapshot_every = cfg.snapshot_every;
    opts.step.dealias = cfg.dealias;
    opts.history_csv = cfg.output_dir / "history.csv";
    if (cfg.snapshot_every > 0) {
        opts.snapshot_dir = cfg.output_dir;
    }
    std::printf("scheme %s, %s problem, %dx%d grid, dt %g, %ld steps\n", std::string(scheme_name(cfg.scheme)).c_str(),
                std::string(problem_name(cfg.problem.kind)).c_str(), cfg.problem.grid.nx, cfg.problem.grid.ny,
                cfg.problem.dt, cfg.problem.steps());
    const auto res = simulate(cfg.problem, cfg.scheme, opts);
    std::printf("history written to %s\n", opts.history_csv->string().c_str());

    if (res.diverged) {
        std::fprintf(stderr, "diverged at step %ld: %s\n", res.diverged->step, res.diverged->message.c_str());
        return is_gpav(cfg.scheme) ? exit_failure : exit_baseline_diverged;
    }
    const auto& last = res.history.back();
    std::printf("t %.6g  energy %.10g  mass %.17g\n", last.t, last.energy, last.mass);
    if (last.l2_err) {
        std::printf("linf error %.6e  l2 error %.6e\n", *last.linf_err, *last.l2_err);
    }
    InvariantOptions inv;
    inv.forced = cfg.problem.kind == ProblemKind::manufactured;
    if (inv.forced) {
        // The forcing integrates to zero, so mass is still conserved.
        std::printf("forced problem: R monotonicity not checked\n");
    }
    const auto rep = assert_invariants(res.history, cfg.scheme, inv);
    std::printf("invariants:\n");
    print_report(rep);
    return rep.passed() ? exit_ok : exit_invariant;
}

// --- convergence ---------------------------------------------------------------------------

struct CaseResult {
    double dt;
    ErrorNorms err;
};

CaseResult run_manufactured(SchemeKind scheme, double dt)
{
    const auto spec = manufactured_spec(dt);
    RunOptions opts;
    opts.history_every = spec.steps();
    const auto res = simulate(spec, scheme, opts);
    if (res.diverged) {
        throw Diverged(res.diverged->step, res.diverged->message);
    }
    return {dt, error_norms(res.final_state.phi_cur, exact_solution(res.final_state.t, spec.grid))};
}

int cmd_convergence(const std::string& scheme_text, const std::string& dts_text, const std::string& output, int jobs)
{
    const SchemeKind scheme = scheme_or_throw(scheme_text);
    if (!is_gpav(scheme)) {
        throw UsageError("convergence sweeps take a gPAV scheme (1a, 1b, 2a, 2b)");
    }
    std::vector<double> dts;
    for (const auto& item : split_list(dts_text)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !(v > 0.0) || !std::isfinite(v)) {
            throw UsageError("bad time step '" + item + "' in --dts");
        }
        const auto spec = manufactured_spec(v);
        if (std::abs(spec.steps() * v - (spec.tf - spec.t0)) > 1e-9) {
            throw UsageError("time step " + item + " does not divide the interval [0.1, 1.1]");
        }
        dts.push_back(v);
    }
    std::sort(dts.begin(), dts.end(), std::greater<>());
    dts.erase(std::unique(dts.begin(), dts.end()), dts.end());
    if (dts.size() < 3) {
        throw UsageError("--dts needs at least three distinct time steps");
    }

    // Independent cases; at most `jobs` in flight.
    std::vector<CaseResult> results;
    for (std::size_t start = 0; start < dts.size(); start += static_cast<std::size_t>(jobs)) {
        std::vector<std::future<CaseResult>> batch;
        for (std::size_t k = start; k < std::min(dts.size(), start + static_cast<std::size_t>(jobs)); ++k) {
            batch.push_back(std::async(std::launch::async, run_manufactured, scheme, dts[k]));
        }
        for (auto& f : batch) {
            results.push_back(f.get());
        }
    }

    ensure_dir(output);
    const fs::path csv = fs::path(output) / ("convergence_" + std::string(scheme_name(scheme)) + ".csv");
    std::ofstream out(csv, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + csv.string() + " for writing");
    }
    out << "dt,linf,l2\n";
    std::vector<double> linf, l2;
    for (const auto& r : results) {
        out << format_real(r.dt) << ',' << format_real(r.err.linf) << ',' << format_real(r.err.l2) << '\n';
        linf.push_back(r.err.linf);
        l2.push_back(r.err.l2);
        std::printf("dt %-10g linf %.6e  l2 %.6e\n", r.dt, r.err.linf, r.err.l2);
    }
    if (!out) {
        throw IoError("write to " + csv.string() + " failed");
    }
    std::printf("slope linf %.4f\n", fit_convergence_order(dts, linf));
    std::printf("slope l2   %.4f\n", fit_convergence_order(dts, l2));
    std::printf("written to %s\n", csv.string().c_str());
    return exit_ok;
}

// --- compare -------------------------------------------------------------------------------

int cmd_compare(const std::string& schemes_text, double dt, long steps, const std::string& problem,
                const std::string& output, long history_every)
{
    std::vector<SchemeKind> schemes;
    for (const auto& name : split_list(schemes_text)) {
        schemes.push_back(scheme_or_throw(name));
    }
    if (schemes.empty()) {
        throw UsageError("--schemes is empty");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw UsageError("--dt must be positive");
    }
    if (steps < 1 || history_every < 1) {
        throw UsageError("--steps and --history-every must be >= 1");
    }
    ProblemSpec spec;
    if (problem == "desk") {
        spec = desk_scale_drop_spec(dt);
    } else if (problem == "paper") {
        spec = paper_drop_spec(dt);
    } else {
        throw UsageError("--problem must be desk or paper");
    }
    spec.tf = spec.t0 + static_cast<double>(steps) * dt;
    ensure_dir(output);

    bool baseline_diverged = false, gpav_diverged = false;
    std::printf("%-5s %8s %14s %14s %12s  %s\n", "scheme", "steps", "E(0)", "E(end)", "max E/E(0)", "status");
    for (SchemeKind k : schemes) {
        RunOptions opts;
        opts.steps = steps;
        opts.history_every = history_every;
        const std::string name(scheme_name(k));
        opts.history_csv = fs::path(output) / ("history_" + name + ".csv");
        double e_max = 0.0;
        opts.on_step = [&](const SchemeState&, const StepReport& r) { e_max = std::max(e_max, r.energy); };
        const auto res = simulate(spec, k, opts);
        const double e0 = res.history.front().energy;
        e_max = std::max(e_max, e0);
        std::string status = "ok";
        long done = res.final_state.step;
        if (res.diverged) {
            status = "DIVERGED at step " + std::to_string(res.diverged->step);
            (is_gpav(k) ? gpav_diverged : baseline_diverged) = true;
        }
        std::printf("%-6s %8ld %14.6e %14.6e %12.4g  %s\n", name.c_str(), done, e0, res.history.back().energy,
                    e_max / e0, status.c_str());
    }
    if (gpav_diverged) {
        return exit_failure;
    }
    return baseline_diverged ? exit_baseline_diverged : exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cahn-Hilliard solver with gPAV energy-stable time stepping"};
    app.require_subcommand(1);

    std::string config, run_output;
    auto* run = app.add_subcommand("run", "integrate a JSON-configured problem");
    run->add_option("--config", config, "path to the JSON config")->required();
    run->add_option("--output", run_output, "override output.dir of the config");

    std::string conv_scheme, conv_dts, conv_output = ".";
    int jobs = 4;
    auto* conv = app.add_subcommand("convergence", "manufactured-solution dt sweep");
    conv->add_option("--scheme", conv_scheme, "1a, 1b, 2a or 2b")->required();
    conv->add_option("--dts", conv_dts, "comma-separated time steps, e.g. 0.1,0.05,0.025")->required();
    conv->add_option("--output", conv_output, "directory for convergence_<scheme>.csv");
    conv->add_option("--jobs", jobs, "cases run concurrently")->check(CLI::PositiveNumber);

    std::string cmp_schemes, cmp_problem = "desk", cmp_output = ".";
    double cmp_dt = 0.0;
    long cmp_steps = 0, cmp_every = 1;
    auto* cmp = app.add_subcommand("compare", "run several schemes on a drop benchmark");
    cmp->add_option("--schemes", cmp_schemes, "comma-separated schemes, e.g. 2a,semi,sav")->required();
    cmp->add_option("--dt", cmp_dt, "time step")->required();
    cmp->add_option("--steps", cmp_steps, "number of steps")->required();
    cmp->add_option("--problem", cmp_problem, "desk (128^2, 25 drops) or paper (512^2, 361 drops)");
    cmp->add_option("--output", cmp_output, "directory for history_<scheme>.csv");
    cmp->add_option("--history-every", cmp_every, "history cadence in steps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*run) {
            return cmd_run(config, run_output);
        }
        if (*conv) {
            return cmd_convergence(conv_scheme, conv_dts, conv_output, jobs);
        }
        return cmd_compare(cmp_schemes, cmp_dt, cmp_steps, cmp_problem, cmp_output, cmp_every);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_usage;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_usage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return exit_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_failure;
    }
}
