#pragma once

#include "gpav/diagnostics.hpp"
#include "gpav/io.hpp"
#include "gpav/problems.hpp"
#include "gpav/schemes.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gpav {

struct RunOptions {
    std::optional<long> steps;   ///< defaults to (tf - t0) / dt
    long history_every = 1;
    long snapshot_every = 0;     ///< 0 = never
    StepOptions step{};
    std::optional<std::filesystem::path> history_csv;  ///< streamed, one flush per row
    std::optional<std::filesystem::path> snapshot_dir; ///< snapshot_<step>.bin
    /// Called after every step with the new state and the step's report.
    std::function<void(const SchemeState&, const StepReport&)> on_step;
};

struct Divergence {
    long step = 0;
    std::string message;
};

struct SimulationResult {
    std::vector<HistoryRecord> history;
    SchemeState final_state;
    std::optional<Divergence> diverged;
};

/// Integrates a problem with one scheme. A Diverged step ends the run and is reported,
/// every row recorded before it stays in the history (and on disk).
inline SimulationResult simulate(const ProblemSpec& spec, SchemeKind scheme, const RunOptions& opts = {})
{
    spec.validate();
    if (opts.history_every < 1 || opts.snapshot_every < 0) {
        throw InvalidArgument("history_every must be >= 1 and snapshot_every >= 0");
    }
    const long steps = opts.steps.value_or(spec.steps());
    const SourceFn source = make_source(spec);

    std::optional<HistoryCsvWriter> csv;
    if (opts.history_csv) {
        csv.emplace(*opts.history_csv);
    }
    SimulationResult result;
    auto record = [&](const SchemeState& s) {
        std::optional<RealField> exact;
        if (spec.kind == ProblemKind::manufactured) {
            exact = exact_solution(s.t, spec.grid);
        }
        result.history.push_back(observe(s, scheme, spec.params, exact ? &*exact : nullptr));
        if (csv) {
            csv->write(result.history.back());
        }
    };
    auto snapshot = [&](const SchemeState& s) {
        if (opts.snapshot_dir && opts.snapshot_every > 0 && s.step % opts.snapshot_every == 0) {
            write_snapshot(s.phi_cur, s.t, *opts.snapshot_dir / ("snapshot_" + std::to_string(s.step) + ".bin"));
        }
    };

    SchemeState state = init_state(initial_field(spec), spec.params, spec.t0);
    record(state);
    snapshot(state);
    for (long n = 0; n < steps; ++n) {
        try {
            auto [next, report] = advance(scheme, state, spec.dt, spec.params, source, opts.step);
            state = std::move(next);
            if (opts.on_step) {
                opts.on_step(state, report);
            }
        } catch (const Diverged& e) {
            result.diverged = Divergence{e.step(), e.what()};
            break;
        }
        if (state.step % opts.history_every == 0 || n + 1 == steps) {
            record(state);
        }
        snapshot(state);
    }
    result.final_state = std::move(state);
    return result;
}

} // namespace gpav
