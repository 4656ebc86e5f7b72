#pragma once

// Free energy of the Cahn-Hilliard model
//   E[phi] = int( beta/2 |grad phi|^2 + lambda/2 phi^2 + a/4 (phi^2 - 1)^2 ) dx + c0
// and its variational derivative mu = -beta lap(phi) + lambda phi + a (phi^3 - phi).
// a = 1 gives the textbook form, a = beta / eta^2 the applied form with mobility m0.

#include "gpav/errors.hpp"
#include "gpav/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gpav {

struct PhysicalParams {
    double m0 = 1.0;       ///< mobility
    double beta = 1.0;     ///< mixing-energy coefficient
    double lambda = 0.0;   ///< linear coefficient
    double well_amp = 1.0; ///< double-well amplitude a; 0 switches the nonlinearity off
    double eta = 1.0;      ///< interfacial thickness, only used to derive well_amp and initial data
    double c0 = 1.0;       ///< energy shift

    void validate() const
    {
        auto require = [](bool ok, const char* what) {
            if (!ok) {
                throw InvalidArgument(std::string("invalid physical parameter: ") + what);
            }
        };
        require(m0 > 0.0 && std::isfinite(m0), "m0 must be positive");
        require(beta > 0.0 && std::isfinite(beta), "beta must be positive");
        require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be non-negative");
        require(well_amp >= 0.0 && std::isfinite(well_amp), "well_amp must be non-negative");
        require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
        require(std::isfinite(c0), "c0 must be finite");
    }
};

/// beta = 3/(2 sqrt 2) sigma eta for surface tension sigma.
constexpr double sigma_to_beta(double sigma, double eta) noexcept
{
    return 3.0 / (2.0 * std::numbers::sqrt2) * sigma * eta;
}

/// Applied-form parameters: beta from the surface tension, a = beta / eta^2.
inline PhysicalParams applied_params(double m0, double sigma, double eta, double c0 = 1.0)
{
    PhysicalParams p;
    p.m0 = m0;
    p.eta = eta;
    p.beta = sigma_to_beta(sigma, eta);
    p.well_amp = p.beta / (eta * eta);
    p.c0 = c0;
    return p;
}

/// h(phi) = a (phi^3 - phi), pointwise.
inline RealField potential_h(const RealField& phi, const PhysicalParams& p)
{
    RealField out(phi.grid());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double v = phi[k];
        out[k] = p.well_amp * (v * v * v - v);
    }
    return out;
}

/// int H(phi) dx with H = a/4 (phi^2 - 1)^2.
inline double potential_energy(const RealField& phi, const PhysicalParams& p)
{
    double s = 0.0;
    for (double v : phi.values()) {
        const double w = v * v - 1.0;
        s += w * w;
    }
    return 0.25 * p.well_amp * s * phi.grid().hx() * phi.grid().hy();
}

/// E[phi] without the positivity check; phi_hat must be transform_forward(phi).
inline double energy_unchecked(const RealField& phi, const SpectralField& phi_hat, const PhysicalParams& p)
{
    double quad = 0.0;
    if (p.lambda != 0.0) {
        for (double v : phi.values()) {
            quad += v * v;
        }
        quad *= 0.5 * p.lambda * phi.grid().hx() * phi.grid().hy();
    }
    return 0.5 * p.beta * grad_sq_integral(phi_hat) + quad + potential_energy(phi, p) + p.c0;
}

/// E[phi] without the positivity check; lets callers inspect bad configurations.
inline double energy_unchecked(const RealField& phi, const PhysicalParams& p)
{
    return energy_unchecked(phi, transform_forward(phi), p);
}

/// Shifted total energy. Throws NonPositiveEnergy when E <= 0.
inline double energy_total(const RealField& phi, const PhysicalParams& p)
{
    const double e = energy_unchecked(phi, p);
    if (!(e > 0.0)) {
        throw NonPositiveEnergy(e);
    }
    return e;
}

/// m0 int |grad mu|^2, the energy dissipation rate.
inline double dissipation(const RealField& mu, const PhysicalParams& p) { return p.m0 * grad_sq_integral(mu); }
inline double dissipation(const SpectralField& mu_hat, const PhysicalParams& p)
{
    return p.m0 * grad_sq_integral(mu_hat);
}

inline RealField chemical_potential_exact(const RealField& phi, const PhysicalParams& p)
{
    RealField mu = laplacian(phi);
    mu *= -p.beta;
    const RealField h = potential_h(phi, p);
    for (std::size_t k = 0; k < mu.size(); ++k) {
        mu[k] += p.lambda * phi[k] + h[k];
    }
    return mu;
}

} // namespace gpav
