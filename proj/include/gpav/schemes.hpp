#pragma once

// Time steppers for the Cahn-Hilliard equation
//   phi_t = m0 lap(mu) + f,   mu = -beta lap(phi) + lambda phi + h(phi),
// reformulated with the positive auxiliary variable R ~ sqrt(E):
//   mu = -beta lap(phi) + lambda phi + xi^2 h(phi),   xi = R / sqrt(E),
//   dR/dt = -xi / (2 sqrt(E)) * (m0 int|grad mu|^2 - int mu f).
//
// Every stepper needs a single constant-coefficient spectral solve of the field
// equation per step (two for the SAV baseline). The gPAV update for R is explicit
// and stays positive:
//   R^{n+1} = xi sqrt(E_a),   xi = (R^n + dt W / (2 sqrt(E_b))) / (sqrt(E_a) + dt D / (2 sqrt(E_b))),
// where D is the dissipation and W = int mu f the source power (zero when unforced).
//
//   scheme  field solve           E_a            E_b                mu in D, W     order of work
//   1A      BDF1, xi^{n+1}        E[phi^n]       E[phi^n]           mu^n           xi, R, then fields
//   1B      BDF1, lagged xi^n     E[phi^{n+1}]   E[phi^{n+1}]       mu^{n+1}       fields, then xi, R
//   2A      BDF2, xi^{n+1}        E[phi_bar]     E[phi_tilde]       mu_tilde       xi, R, then fields
//   2B      BDF2, xi_hat^n        E[phi^{n+1}]   E[phi_tilde]       mu^{n+1/2}     fields, then xi, R
//
// phi_bar = 2 phi^n - phi^{n-1}, phi_tilde = (3 phi^n - phi^{n-1}) / 2, mu_tilde likewise,
// mu^{n+1/2} = (mu^{n+1} + mu^n) / 2, xi_hat^n = (2 R^n - R^{n-1}) / sqrt(E[phi_bar]).

#include "gpav/errors.hpp"
#include "gpav/grid.hpp"
#include "gpav/model.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace gpav {

enum class SchemeKind { gpav_1a, gpav_1b, gpav_2a, gpav_2b, semi_implicit2, sav2 };

inline constexpr SchemeKind all_schemes[] = {SchemeKind::gpav_1a,        SchemeKind::gpav_1b, SchemeKind::gpav_2a,
                                             SchemeKind::gpav_2b,        SchemeKind::semi_implicit2,
                                             SchemeKind::sav2};

inline constexpr SchemeKind gpav_schemes[] = {SchemeKind::gpav_1a, SchemeKind::gpav_1b, SchemeKind::gpav_2a,
                                              SchemeKind::gpav_2b};

constexpr std::string_view scheme_name(SchemeKind kind) noexcept
{
    switch (kind) {
    case SchemeKind::gpav_1a: return "1a";
    case SchemeKind::gpav_1b: return "1b";
    case SchemeKind::gpav_2a: return "2a";
    case SchemeKind::gpav_2b: return "2b";
    case SchemeKind::semi_implicit2: return "semi";
    case SchemeKind::sav2: return "sav";
    }
    return "?";
}

inline std::optional<SchemeKind> parse_scheme_kind(std::string_view name) noexcept
{
    for (SchemeKind k : all_schemes) {
        if (scheme_name(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

constexpr bool is_gpav(SchemeKind kind) noexcept
{
    return kind != SchemeKind::semi_implicit2 && kind != SchemeKind::sav2;
}

constexpr bool is_second_order(SchemeKind kind) noexcept
{
    return kind != SchemeKind::gpav_1a && kind != SchemeKind::gpav_1b;
}

/// Manufactured forcing f(x, t), evaluated on demand at the times a scheme needs.
using SourceFn = std::function<RealField(double t)>;

struct StepOptions {
    bool dealias = false;         ///< 2/3-rule truncation of the explicit nonlinear term
    bool bdf1_startup = true;     ///< first step of the BDF2 schemes uses a BDF1 solve
    double overflow_guard = 1e6;  ///< max |phi| before a step is declared Diverged
};

struct SchemeState {
    RealField phi_cur;
    RealField phi_prev;
    RealField mu_cur;
    RealField mu_prev;
    double r_cur = 0.0;
    double r_prev = 0.0;
    double xi = 1.0; ///< latest xi; Scheme 1B uses it lagged
    double sav_r_cur = 0.0;
    double sav_r_prev = 0.0;
    long step = 0;
    double t = 0.0;
};

struct StepReport {
    std::optional<double> xi;    ///< gPAV only
    std::optional<double> r_new; ///< gPAV only
    std::optional<double> sav_r; ///< SAV only
    double energy = 0.0;         ///< E[phi^{n+1}]
    double dissipation = 0.0;    ///< m0 int |grad mu^{n+1}|^2
    double dt = 0.0;
};

struct StepResult {
    SchemeState state;
    StepReport report;
};

struct LinearSolution {
    RealField phi;
    RealField mu;
};

namespace detail {

struct SpectralSolution {
    SpectralField phi_hat;
    SpectralField mu_hat;
};

// Per mode: phi = (g - dt m0 k^2 s) / (sigma + dt m0 k^2 (beta k^2 + lambda)),
//           mu  = (beta k^2 + lambda) phi + s.
inline SpectralSolution solve_spectral(double sigma, const SpectralField& g, const SpectralField& s, double dt,
                                       const PhysicalParams& p)
{
    SpectralSolution out{SpectralField(g.grid()), SpectralField(g.grid())};
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const double k2 = g.k_squared(r, c);
            const double lin = p.beta * k2 + p.lambda;
            const double dk = dt * p.m0 * k2;
            const auto phi = (g.at_storage(r, c) - dk * s.at_storage(r, c)) / (sigma + dk * lin);
            out.phi_hat.at_storage(r, c) = phi;
            out.mu_hat.at_storage(r, c) = lin * phi + s.at_storage(r, c);
        }
    }
    return out;
}

inline void require_positive_dt(double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidArgument("time step must be positive");
    }
}

inline void guard(const RealField& phi, const RealField& mu, long step, const StepOptions& opts)
{
    if (!phi.all_finite() || !mu.all_finite()) {
        throw Diverged(step, "non-finite values at step " + std::to_string(step));
    }
    if (phi.max_abs() > opts.overflow_guard) {
        throw Diverged(step, "max |phi| exceeded the overflow guard at step " + std::to_string(step));
    }
}

inline double energy_checked(const RealField& phi, const PhysicalParams& p)
{
    const double e = energy_unchecked(phi, p);
    if (!(e > 0.0)) {
        throw InvalidState("energy " + std::to_string(e) + " is not positive");
    }
    return e;
}

inline SpectralField explicit_source(const RealField& phi, double scale, const PhysicalParams& p,
                                     const StepOptions& opts)
{
    RealField s = potential_h(phi, p);
    s *= scale;
    SpectralField s_hat = transform_forward(s);
    if (opts.dealias) {
        dealias(s_hat);
    }
    return s_hat;
}

/// BDF coefficient and history term; f(t^{n+1}) enters the history term.
struct BdfHistory {
    double sigma;
    RealField g; ///< without the source
};

inline BdfHistory bdf_history(const SchemeState& s, bool second_order, const StepOptions& opts)
{
    if (!second_order || (opts.bdf1_startup && s.step == 0)) {
        return {1.0, s.phi_cur};
    }
    return {1.5, combine(2.0, s.phi_cur, -0.5, s.phi_prev)};
}

inline SchemeState advance_state(const SchemeState& s, RealField phi, RealField mu, double r_new, double xi,
                                 double dt)
{
    SchemeState n;
    n.phi_prev = s.phi_cur;
    n.mu_prev = s.mu_cur;
    n.phi_cur = std::move(phi);
    n.mu_cur = std::move(mu);
    n.r_prev = s.r_cur;
    n.r_cur = r_new;
    n.xi = xi;
    n.sav_r_cur = s.sav_r_cur;
    n.sav_r_prev = s.sav_r_prev;
    n.step = s.step + 1;
    n.t = s.t + dt;
    return n;
}

/// Solves the field equation, returns real-space fields and fills the report's energy terms.
inline LinearSolution finish_solve(double sigma, const RealField& g, const SpectralField& s_hat, double dt,
                                   const PhysicalParams& p, StepReport& report)
{
    auto sol = solve_spectral(sigma, transform_forward(g), s_hat, dt, p);
    LinearSolution out{transform_inverse(sol.phi_hat), transform_inverse(sol.mu_hat)};
    report.energy = energy_unchecked(out.phi, sol.phi_hat, p);
    report.dissipation = dissipation(sol.mu_hat, p);
    report.dt = dt;
    return out;
}

inline RealField with_source(RealField g, const SourceFn& source, double t, double dt)
{
    if (source) {
        RealField f = source(t);
        f *= dt;
        g += f;
    }
    return g;
}

inline double source_power(const RealField& mu, const SourceFn& source, double t)
{
    return source ? integrate(multiply(mu, source(t))) : 0.0;
}

} // namespace detail

/// Solves (sigma/dt) phi = m0 lap(-beta lap(phi) + lambda phi + s) + g/dt and returns (phi, mu).
/// sigma = 1 with g = phi^n is BDF1; sigma = 3/2 with g = 2 phi^n - phi^{n-1}/2 is BDF2.
inline LinearSolution solve_linear_step(double sigma, const RealField& g, const RealField& s, double dt,
                                        const PhysicalParams& p)
{
    detail::require_positive_dt(dt);
    g.check_same_grid(s);
    auto sol = detail::solve_spectral(sigma, transform_forward(g), transform_forward(s), dt, p);
    return {transform_inverse(sol.phi_hat), transform_inverse(sol.mu_hat)};
}

/// xi = (r_n + dt w / (2 sqrt(e_rate))) / (sqrt(e_value) + dt diss / (2 sqrt(e_rate))).
/// e_value is the energy paired with R^{n+1} = xi sqrt(e_value); e_rate scales the R equation.
inline double compute_xi(double r_n, double e_value, double e_rate, double diss, double dt,
                         double source_power = 0.0)
{
    if (!(e_value > 0.0) || !(e_rate > 0.0)) {
        throw InvalidState("xi update needs positive energies");
    }
    if (!(r_n > 0.0)) {
        throw InvalidState("auxiliary variable R must be positive");
    }
    const double root_rate = std::sqrt(e_rate);
    const double numerator = r_n + dt * source_power / (2.0 * root_rate);
    if (!(numerator > 0.0)) {
        throw InvalidState("source power drove the auxiliary variable non-positive");
    }
    return numerator / (std::sqrt(e_value) + dt * diss / (2.0 * root_rate));
}

inline double compute_xi_1a(double r_n, double e_n, double diss_n, double dt)
{
    return compute_xi(r_n, e_n, e_n, diss_n, dt);
}

/// mu^0 from the exact chemical potential, R^0 = sqrt(E[phi^0]), r1^0 = sqrt(int H + c0).
inline SchemeState init_state(const RealField& phi0, const PhysicalParams& p, double t0 = 0.0)
{
    p.validate();
    if (!phi0.all_finite()) {
        throw InvalidArgument("initial field has non-finite values");
    }
    SchemeState s;
    s.phi_cur = phi0;
    s.phi_prev = phi0;
    s.mu_cur = chemical_potential_exact(phi0, p);
    s.mu_prev = s.mu_cur;
    s.r_cur = std::sqrt(energy_total(phi0, p));
    s.r_prev = s.r_cur;
    s.xi = 1.0;
    const double e1 = potential_energy(phi0, p) + p.c0;
    if (!(e1 > 0.0)) {
        throw NonPositiveEnergy(e1);
    }
    s.sav_r_cur = std::sqrt(e1);
    s.sav_r_prev = s.sav_r_cur;
    s.t = t0;
    return s;
}

inline StepResult step_1a(const SchemeState& s, double dt, const PhysicalParams& p, const SourceFn& source = {},
                          const StepOptions& opts = {})
{
    detail::require_positive_dt(dt);
    const double t_new = s.t + dt;
    const double e_n = detail::energy_checked(s.phi_cur, p);
    const double xi = compute_xi(s.r_cur, e_n, e_n, dissipation(s.mu_cur, p), dt,
                                 detail::source_power(s.mu_cur, source, t_new));
    const double r_new = xi * std::sqrt(e_n);

    StepReport report;
    const auto s_hat = detail::explicit_source(s.phi_cur, xi * xi, p, opts);
    auto sol = detail::finish_solve(1.0, detail::with_source(s.phi_cur, source, t_new, dt), s_hat, dt, p, report);
    detail::guard(sol.phi, sol.mu, s.step + 1, opts);
    report.xi = xi;
    report.r_new = r_new;
    return {detail::advance_state(s, std::move(sol.phi), std::move(sol.mu), r_new, xi, dt), report};
}

inline StepResult step_1b(const SchemeState& s, double dt, const PhysicalParams& p, const SourceFn& source = {},
                          const StepOptions& opts = {})
{
    detail::require_positive_dt(dt);
    const double t_new = s.t + dt;
    StepReport report;
    const auto s_hat = detail::explicit_source(s.phi_cur, s.xi * s.xi, p, opts);
    auto sol = detail::finish_solve(1.0, detail::with_source(s.phi_cur, source, t_new, dt), s_hat, dt, p, report);
    detail::guard(sol.phi, sol.mu, s.step + 1, opts);

    if (!(report.energy > 0.0)) {
        throw InvalidState("energy of the new field is not positive");
    }
    const double xi = compute_xi(s.r_cur, report.energy, report.energy, report.dissipation, dt,
                                 detail::source_power(sol.mu, source, t_new));
    const double r_new = xi * std::sqrt(report.energy);
    report.xi = xi;
    report.r_new = r_new;
    return {detail::advance_state(s, std::move(sol.phi), std::move(sol.mu), r_new, xi, dt), report};
}

inline StepResult step_2a(const SchemeState& s, double dt, const PhysicalParams& p, const SourceFn& source = {},
                          const StepOptions& opts = {})
{
    detail::require_positive_dt(dt);
    const double t_new = s.t + dt;
    const RealField phi_bar = combine(2.0, s.phi_cur, -1.0, s.phi_prev);
    const RealField phi_tilde = combine(1.5, s.phi_cur, -0.5, s.phi_prev);
    const RealField mu_tilde = combine(1.5, s.mu_cur, -0.5, s.mu_prev);

    const double e_bar = detail::energy_checked(phi_bar, p);
    const double e_tilde = detail::energy_checked(phi_tilde, p);
    const double xi = compute_xi(s.r_cur, e_bar, e_tilde, dissipation(mu_tilde, p), dt,
                                 detail::source_power(mu_tilde, source, s.t + 0.5 * dt));
    const double r_new = xi * std::sqrt(e_bar);

    StepReport report;
    auto hist = detail::bdf_history(s, true, opts);
    const auto s_hat = detail::explicit_source(phi_bar, xi * xi, p, opts);
    auto sol = detail::finish_solve(hist.sigma, detail::with_source(std::move(hist.g), source, t_new, dt), s_hat,
                                    dt, p, report);
    detail::guard(sol.phi, sol.mu, s.step + 1, opts);
    report.xi = xi;
    report.r_new = r_new;
    return {detail::advance_state(s, std::move(sol.phi), std::move(sol.mu), r_new, xi, dt), report};
}

inline StepResult step_2b(const SchemeState& s, double dt, const PhysicalParams& p, const SourceFn& source = {},
                          const StepOptions& opts = {})
{
    detail::require_positive_dt(dt);
    const double t_new = s.t + dt;
    const RealField phi_bar = combine(2.0, s.phi_cur, -1.0, s.phi_prev);
    const RealField phi_tilde = combine(1.5, s.phi_cur, -0.5, s.phi_prev);
    const double xi_hat = (2.0 * s.r_cur - s.r_prev) / std::sqrt(detail::energy_checked(phi_bar, p));

    StepReport report;
    auto hist = detail::bdf_history(s, true, opts);
    const auto s_hat = detail::explicit_source(phi_bar, xi_hat * xi_hat, p, opts);
    auto sol = detail::finish_solve(hist.sigma, detail::with_source(std::move(hist.g), source, t_new, dt), s_hat,
                                    dt, p, report);
    detail::guard(sol.phi, sol.mu, s.step + 1, opts);

    if (!(report.energy > 0.0)) {
        throw InvalidState("energy of the new field is not positive");
    }
    const RealField mu_half = combine(0.5, sol.mu, 0.5, s.mu_cur);
    const double e_tilde = detail::energy_checked(phi_tilde, p);
    const double xi = compute_xi(s.r_cur, report.energy, e_tilde, dissipation(mu_half, p), dt,
                                 detail::source_power(mu_half, source, s.t + 0.5 * dt));
    const double r_new = xi * std::sqrt(report.energy);
    report.xi = xi;
    report.r_new = r_new;
    return {detail::advance_state(s, std::move(sol.phi), std::move(sol.mu), r_new, xi, dt), report};
}

/// BDF2 with the nonlinear term extrapolated explicitly, h(2 phi^n - phi^{n-1}). Not energy stable.
inline StepResult step_semi_implicit2(const SchemeState& s, double dt, const PhysicalParams& p,
                                      const SourceFn& source = {}, const StepOptions& opts = {})
{
    detail::require_positive_dt(dt);
    const double t_new = s.t + dt;
    const RealField phi_bar = combine(2.0, s.phi_cur, -1.0, s.phi_prev);
    StepReport report;
    auto hist = detail::bdf_history(s, true, opts);
    const auto s_hat = detail::explicit_source(phi_bar, 1.0, p, opts);
    auto sol = detail::finish_solve(hist.sigma, detail::with_source(std::move(hist.g), source, t_new, dt), s_hat,
                                    dt, p, report);
    detail::guard(sol.phi, sol.mu, s.step + 1, opts);
    SchemeState next = detail::advance_state(s, std::move(sol.phi), std::move(sol.mu), s.r_cur, s.xi, dt);
    next.r_prev = s.r_prev;
    return {std::move(next), report};
}

/// SAV-BDF2 baseline with r1 ~ sqrt(int H + c0):
///   (3 phi^{n+1} - 4 phi^n + phi^{n-1}) / (2 dt) = m0 lap(mu^{n+1}) + f,
///   mu^{n+1} = -beta lap(phi^{n+1}) + lambda phi^{n+1} + r1^{n+1} b,   b = h(phi_bar) / sqrt(int H(phi_bar) + c0),
///   3 r1^{n+1} - 4 r1^n + r1^{n-1} = 1/2 int b (3 phi^{n+1} - 4 phi^n + phi^{n-1}).
/// phi^{n+1} = phi_1 + r1^{n+1} phi_2 splits the coupled system into two field solves.
inline StepResult step_sav2(const SchemeState& s, double dt, const PhysicalParams& p, const SourceFn& source = {},
                            const StepOptions& opts = {})
{
    detail::require_positive_dt(dt);
    const double t_new = s.t + dt;
    const RealField phi_bar = combine(2.0, s.phi_cur, -1.0, s.phi_prev);
    const double e1_bar = potential_energy(phi_bar, p) + p.c0;
    if (!(e1_bar > 0.0)) {
        throw NonPositiveEnergy(e1_bar);
    }
    RealField b = potential_h(phi_bar, p);
    b *= 1.0 / std::sqrt(e1_bar);
    SpectralField b_hat = transform_forward(b);
    if (opts.dealias) {
        dealias(b_hat);
        b = transform_inverse(b_hat);
    }

    const auto hist = detail::bdf_history(s, true, opts);
    const bool first = hist.sigma == 1.0;
    const double r_hist = first ? s.sav_r_cur : 2.0 * s.sav_r_cur - 0.5 * s.sav_r_prev;
    const double sigma = hist.sigma;

    const SpectralField g_hat = transform_forward(detail::with_source(hist.g, source, t_new, dt));
    auto part1 = detail::solve_spectral(sigma, g_hat, SpectralField(b.grid()), dt, p);
    auto part2 = detail::solve_spectral(sigma, SpectralField(b.grid()), b_hat, dt, p);
    const RealField phi1 = transform_inverse(part1.phi_hat);
    const RealField phi2 = transform_inverse(part2.phi_hat);

    const double b_phi2 = integrate(multiply(b, phi2));
    const double b_rhs = integrate(multiply(b, combine(sigma, phi1, -1.0, hist.g)));
    const double r_new = (r_hist + 0.5 * b_rhs) / (sigma - 0.5 * sigma * b_phi2);

    SpectralField phi_hat = part1.phi_hat;
    SpectralField mu_hat = part1.mu_hat;
    for (std::size_t k = 0; k < phi_hat.raw().size(); ++k) {
        phi_hat.raw()[k] += r_new * part2.phi_hat.raw()[k];
        mu_hat.raw()[k] += r_new * part2.mu_hat.raw()[k];
    }
    RealField phi = transform_inverse(phi_hat);
    RealField mu = transform_inverse(mu_hat);
    if (!std::isfinite(r_new)) {
        throw Diverged(s.step + 1, "SAV auxiliary variable is not finite");
    }
    detail::guard(phi, mu, s.step + 1, opts);

    StepReport report;
    report.energy = energy_unchecked(phi, phi_hat, p);
    report.dissipation = dissipation(mu_hat, p);
    report.dt = dt;
    report.sav_r = r_new;
    SchemeState next = detail::advance_state(s, std::move(phi), std::move(mu), s.r_cur, s.xi, dt);
    next.r_prev = s.r_prev;
    next.sav_r_prev = s.sav_r_cur;
    next.sav_r_cur = r_new;
    return {std::move(next), report};
}

/// Modified energy of the SAV baseline, beta/2 |grad phi|^2 + lambda/2 |phi|^2 + r1^2 - c0.
inline double sav_modified_energy(const RealField& phi, double sav_r, const PhysicalParams& p)
{
    double quad = 0.0;
    for (double v : phi.values()) {
        quad += v * v;
    }
    quad *= 0.5 * p.lambda * phi.grid().hx() * phi.grid().hy();
    return 0.5 * p.beta * grad_sq_integral(phi) + quad + sav_r * sav_r - p.c0;
}

inline StepResult advance(SchemeKind kind, const SchemeState& s, double dt, const PhysicalParams& p,
                          const SourceFn& source = {}, const StepOptions& opts = {})
{
    switch (kind) {
    case SchemeKind::gpav_1a: return step_1a(s, dt, p, source, opts);
    case SchemeKind::gpav_1b: return step_1b(s, dt, p, source, opts);
    case SchemeKind::gpav_2a: return step_2a(s, dt, p, source, opts);
    case SchemeKind::gpav_2b: return step_2b(s, dt, p, source, opts);
    case SchemeKind::semi_implicit2: return step_semi_implicit2(s, dt, p, source, opts);
    case SchemeKind::sav2: return step_sav2(s, dt, p, source, opts);
    }
    throw InvalidArgument("unknown scheme");
}

} // namespace gpav
