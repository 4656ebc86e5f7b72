#pragma once

#include "gpav/errors.hpp"
#include "gpav/grid.hpp"
#include "gpav/model.hpp"
#include "gpav/schemes.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

namespace gpav {

enum class ProblemKind { manufactured, drop_array };

/// Square lattice of circular drops; centers at offset + spacing * i, i = 0..count-1.
struct DropLattice {
    int count_x = 0;
    int count_y = 0;
    double spacing = 0.0;
    double offset_x = 0.0;
    double offset_y = 0.0;
    double radius = 0.0;

    [[nodiscard]] int count() const noexcept { return count_x * count_y; }
};

struct ProblemSpec {
    ProblemKind kind = ProblemKind::manufactured;
    GridSpec grid{};
    PhysicalParams params{};
    double t0 = 0.0;
    double tf = 1.0;
    double dt = 0.01;
    DropLattice drops{}; ///< drop_array only

    void validate() const
    {
        grid.validate();
        params.validate();
        if (!(t0 < tf)) {
            throw InvalidArgument("t0 must be smaller than tf");
        }
        if (!(dt > 0.0)) {
            throw InvalidArgument("dt must be positive");
        }
        if (kind == ProblemKind::manufactured && (grid.lx != 2.0 || grid.ly != 2.0)) {
            throw InvalidArgument("the manufactured problem lives on [0,2]^2");
        }
        if (kind == ProblemKind::drop_array) {
            if (drops.count_x < 1 || drops.count_y < 1 || !(drops.spacing > 0.0) || !(drops.radius > 0.0)) {
                throw InvalidArgument("drop lattice needs positive counts, spacing and radius");
            }
        }
    }

    [[nodiscard]] long steps() const { return std::lround((tf - t0) / dt); }
};

constexpr std::string_view problem_name(ProblemKind kind) noexcept
{
    return kind == ProblemKind::manufactured ? "manufactured" : "drop_array";
}

// --- manufactured solution phi = cos(pi x) cos(pi y) sin(t) ---------------------------------

inline RealField exact_solution(double t, const GridSpec& grid)
{
    const double st = std::sin(t);
    return RealField::from_function(grid, [st](double x, double y) {
        return std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y) * st;
    });
}

/// f = phi_t - m0 lap(mu(phi)) for the manufactured phi. mu is formed on the grid and
/// differentiated spectrally; phi^3 only reaches mode 3, so the result is alias-free for n >= 8.
inline RealField source_term(double t, const GridSpec& grid, const PhysicalParams& p)
{
    if (grid.nx < 8 || grid.ny < 8) {
        throw GridTooCoarse("manufactured source needs at least 8 points per direction");
    }
    const RealField phi = exact_solution(t, grid);
    RealField f = laplacian(chemical_potential_exact(phi, p));
    f *= -p.m0;
    const double ct = std::cos(t);
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            f(i, j) += std::cos(std::numbers::pi * grid.x(i)) * std::cos(std::numbers::pi * grid.y(j)) * ct;
        }
    }
    return f;
}

/// Manufactured convergence case: [0,2]^2, 20x20, m0 = beta = 0.01, eta = 0.1, c0 = 1, t in [0.1, 1.1].
inline ProblemSpec manufactured_spec(double dt = 0.01)
{
    ProblemSpec spec;
    spec.kind = ProblemKind::manufactured;
    spec.grid = {20, 20, 2.0, 2.0};
    spec.params.m0 = 0.01;
    spec.params.beta = 0.01;
    spec.params.eta = 0.1;
    spec.params.well_amp = spec.params.beta / (spec.params.eta * spec.params.eta);
    spec.params.lambda = 0.0;
    spec.params.c0 = 1.0;
    spec.t0 = 0.1;
    spec.tf = 1.1;
    spec.dt = dt;
    return spec;
}

// --- drop arrays ---------------------------------------------------------------------------

/// phi0 = (N - 1) - sum_d tanh((|x - x_d| - R0) / (sqrt(2) eta)), distances taken to the nearest
/// periodic image. ~+1 inside drops, ~-1 in the background.
inline RealField ic_drop_array(const GridSpec& grid, const ProblemSpec& spec)
{
    const DropLattice& d = spec.drops;
    const double width = std::numbers::sqrt2 * spec.params.eta;
    auto wrap = [](double delta, double length) { return delta - length * std::round(delta / length); };
    RealField phi(grid, static_cast<double>(d.count() - 1));
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.ny; ++j) {
            double sum = 0.0;
            for (int a = 0; a < d.count_x; ++a) {
                const double dx = wrap(grid.x(i) - (d.offset_x + d.spacing * a), grid.lx);
                for (int b = 0; b < d.count_y; ++b) {
                    const double dy = wrap(grid.y(j) - (d.offset_y + d.spacing * b), grid.ly);
                    sum += std::tanh((std::hypot(dx, dy) - d.radius) / width);
                }
            }
            phi(i, j) -= sum;
        }
    }
    return phi;
}

inline constexpr double drop_surface_tension = 151.15;

/// 361 drops on [0,4]^2 at 512^2: spacing 0.2, R0 = 0.085, eta = 0.01, m0 = 1e-6, sigma = 151.15.
inline ProblemSpec paper_drop_spec(double dt = 1e-3)
{
    ProblemSpec spec;
    spec.kind = ProblemKind::drop_array;
    spec.grid = {512, 512, 4.0, 4.0};
    spec.params = applied_params(1e-6, drop_surface_tension, 0.01, 1.0);
    spec.t0 = 0.0;
    spec.tf = 100.0;
    spec.dt = dt;
    spec.drops = {19, 19, 0.2, 0.2, 0.2, 0.085};
    return spec;
}

/// Desk-scale drop benchmark: the full 512^2 configuration scaled by two in length on a 5x5 block.
/// [0,2]^2 at 128^2 keeps eta/h; spacing 0.4 and R0 = 0.17 keep eta/spacing and R0/spacing;
/// m0 = 8e-6 (8x) leaves the time scale of the dynamics unchanged under the length rescale.
inline ProblemSpec desk_scale_drop_spec(double dt = 1e-3)
{
    ProblemSpec spec;
    spec.kind = ProblemKind::drop_array;
    spec.grid = {128, 128, 2.0, 2.0};
    spec.params = applied_params(8e-6, drop_surface_tension, 0.02, 1.0);
    spec.t0 = 0.0;
    spec.tf = 1.0;
    spec.dt = dt;
    spec.drops = {5, 5, 0.4, 0.2, 0.2, 0.17};
    return spec;
}

inline RealField initial_field(const ProblemSpec& spec)
{
    return spec.kind == ProblemKind::manufactured ? exact_solution(spec.t0, spec.grid)
                                                  : ic_drop_array(spec.grid, spec);
}

/// Empty for unforced problems.
inline SourceFn make_source(const ProblemSpec& spec)
{
    if (spec.kind != ProblemKind::manufactured) {
        return {};
    }
    return [grid = spec.grid, params = spec.params](double t) { return source_term(t, grid, params); };
}

} // namespace gpav
