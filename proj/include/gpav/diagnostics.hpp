#pragma once

#include "gpav/errors.hpp"
#include "gpav/grid.hpp"
#include "gpav/model.hpp"
#include "gpav/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gpav {

struct HistoryRecord {
    long step = 0;
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    std::optional<double> r;
    std::optional<double> xi;
    std::optional<double> sav_r;
    double h2 = 0.0;
    double dissipation = 0.0;
    std::optional<double> linf_err;
    std::optional<double> l2_err;

    bool operator==(const HistoryRecord&) const = default;
};

struct ErrorNorms {
    double linf = 0.0;
    double l2 = 0.0;
};

inline ErrorNorms error_norms(const RealField& phi, const RealField& exact)
{
    phi.check_same_grid(exact);
    const RealField diff = phi - exact;
    return {diff.max_abs(), l2_norm(diff)};
}

/// R / sqrt(E); one when R tracks the energy exactly.
inline double xi_indicator(double r, double energy)
{
    if (!(energy > 0.0)) {
        throw InvalidState("xi indicator needs a positive energy");
    }
    return r / std::sqrt(energy);
}

/// Least-squares slope of log(error) against log(dt).
inline double fit_convergence_order(std::span<const double> dts, std::span<const double> errors)
{
    if (dts.size() != errors.size()) {
        throw InvalidArgument("dts and errors differ in length");
    }
    if (dts.size() < 3) {
        throw InsufficientData("convergence fit needs at least three (dt, error) pairs");
    }
    for (std::size_t k = 0; k < dts.size(); ++k) {
        if (!(dts[k] > 0.0) || !(errors[k] > 0.0)) {
            throw InsufficientData("convergence fit needs positive dt and error values");
        }
        if (k > 0 && !(dts[k] < dts[k - 1])) {
            throw InsufficientData("dt values must be strictly decreasing");
        }
    }
    const auto n = static_cast<double>(dts.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < dts.size(); ++k) {
        const double x = std::log(dts[k]);
        const double y = std::log(errors[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Measures a state. exact, when given, fills the error columns.
inline HistoryRecord observe(const SchemeState& s, SchemeKind kind, const PhysicalParams& p,
                             const RealField* exact = nullptr)
{
    HistoryRecord rec;
    rec.step = s.step;
    rec.t = s.t;
    rec.mass = integrate(s.phi_cur);
    const SpectralField phi_hat = transform_forward(s.phi_cur);
    rec.energy = energy_unchecked(s.phi_cur, phi_hat, p);
    rec.h2 = h2_norm(phi_hat);
    rec.dissipation = dissipation(s.mu_cur, p);
    if (is_gpav(kind)) {
        rec.r = s.r_cur;
        rec.xi = s.xi;
    }
    if (kind == SchemeKind::sav2) {
        rec.sav_r = s.sav_r_cur;
    }
    if (exact != nullptr) {
        const auto e = error_norms(s.phi_cur, *exact);
        rec.linf_err = e.linf;
        rec.l2_err = e.l2;
    }
    return rec;
}

struct InvariantCheck {
    std::string name;
    bool passed = true;
    std::optional<long> first_violation; ///< step of the first violating record
};

struct InvariantReport {
    std::vector<InvariantCheck> checks;

    [[nodiscard]] bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
    }
};

struct InvariantOptions {
    /// Relative mass drift allowed per 1000 steps; the scale is max(|mass_0|, 1).
    double mass_rel_tol = 1e-12;
    /// R^{n+1} <= R^n (1 + tol).
    double r_monotone_rel_tol = 1e-14;
    /// A forcing term breaks the R decay law, so monotonicity is not checked.
    bool forced = false;
};

inline InvariantReport assert_invariants(std::span<const HistoryRecord> history, SchemeKind kind,
                                         const InvariantOptions& opts = {})
{
    InvariantReport report;
    if (history.empty()) {
        throw InsufficientData("invariant check needs a non-empty history");
    }
    auto flag = [](InvariantCheck& c, long step) {
        if (c.passed) {
            c.passed = false;
            c.first_violation = step;
        }
    };

    InvariantCheck finite{"finite", true, {}};
    for (const auto& r : history) {
        const bool ok = std::isfinite(r.t) && std::isfinite(r.mass) && std::isfinite(r.energy) &&
                        std::isfinite(r.h2) && std::isfinite(r.dissipation) && (!r.r || std::isfinite(*r.r)) &&
                        (!r.xi || std::isfinite(*r.xi)) && (!r.sav_r || std::isfinite(*r.sav_r));
        if (!ok) {
            flag(finite, r.step);
        }
    }
    report.checks.push_back(finite);

    InvariantCheck mass{"mass_conservation", true, {}};
    const double mass0 = history.front().mass;
    const double scale = std::max(std::abs(mass0), 1.0);
    for (const auto& r : history) {
        const double steps = static_cast<double>(r.step - history.front().step);
        const double tol = opts.mass_rel_tol * std::max(1.0, steps / 1000.0) * scale;
        if (!(std::abs(r.mass - mass0) <= tol)) {
            flag(mass, r.step);
        }
    }
    report.checks.push_back(mass);

    if (is_gpav(kind)) {
        InvariantCheck r_pos{"r_positive", true, {}};
        InvariantCheck xi_pos{"xi_positive", true, {}};
        for (const auto& r : history) {
            if (!r.r || !(*r.r > 0.0)) {
                flag(r_pos, r.step);
            }
            if (!r.xi || !(*r.xi > 0.0)) {
                flag(xi_pos, r.step);
            }
        }
        report.checks.push_back(r_pos);
        report.checks.push_back(xi_pos);

        if (!opts.forced) {
            InvariantCheck r_mono{"r_non_increasing", true, {}};
            for (std::size_t k = 1; k < history.size(); ++k) {
                const auto& prev = history[k - 1].r;
                const auto& cur = history[k].r;
                if (prev && cur && !(*cur <= *prev * (1.0 + opts.r_monotone_rel_tol))) {
                    flag(r_mono, history[k].step);
                }
            }
            report.checks.push_back(r_mono);
        }
    }
    return report;
}

} // namespace gpav
