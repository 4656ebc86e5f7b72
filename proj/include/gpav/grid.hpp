#pragma once

// Periodic 2D grid, real/Fourier field containers, FFT transforms, spectral
// operators and quadrature.
//
// Transform convention: the (0,0) Fourier coefficient equals the field mean,
//   f(x, y) = sum_{p,q} c(p,q) exp(i (kx x + ky y)),  kx = 2 pi p / lx,  ky = 2 pi q / ly.
// Only the non-redundant half spectrum (q >= 0) of a real field is stored.

#include "gpav/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gpav {

struct GridSpec {
    int nx{};
    int ny{};
    double lx{};
    double ly{};

    /// Throws InvalidArgument unless nx, ny >= 4 and even, lx, ly > 0.
    void validate() const
    {
        if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0) {
            throw InvalidArgument("grid point counts must be even and >= 4, got " + std::to_string(nx) + "x" +
                                  std::to_string(ny));
        }
        if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
            throw InvalidArgument("grid lengths must be positive");
        }
    }

    [[nodiscard]] double hx() const noexcept { return lx / nx; }
    [[nodiscard]] double hy() const noexcept { return ly / ny; }
    [[nodiscard]] double area() const noexcept { return lx * ly; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
    [[nodiscard]] double x(int i) const noexcept { return i * hx(); }
    [[nodiscard]] double y(int j) const noexcept { return j * hy(); }
    [[nodiscard]] std::size_t index(int i, int j) const noexcept
    {
        return static_cast<std::size_t>(i) * ny + static_cast<std::size_t>(j);
    }

    /// Number of stored spectral columns, ny/2 + 1.
    [[nodiscard]] int spectral_columns() const noexcept { return ny / 2 + 1; }

    bool operator==(const GridSpec&) const = default;
};

/// Real scalar per grid point, row-major with x as the slow index.
class RealField {
public:
    RealField() = default;

    explicit RealField(const GridSpec& grid, double value = 0.0) : grid_(grid), values_(grid.size(), value) {}

    RealField(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
    {
        if (values_.size() != grid_.size()) {
            throw InvalidArgument("field length does not match grid");
        }
    }

    /// Samples fn(x, y) at every grid point.
    template <class Fn>
    static RealField from_function(const GridSpec& grid, Fn&& fn)
    {
        RealField out(grid);
        for (int i = 0; i < grid.nx; ++i) {
            for (int j = 0; j < grid.ny; ++j) {
                out(i, j) = fn(grid.x(i), grid.y(j));
            }
        }
        return out;
    }

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double* data() noexcept { return values_.data(); }
    [[nodiscard]] const double* data() const noexcept { return values_.data(); }

    double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    RealField& operator+=(const RealField& other)
    {
        check_same_grid(other);
        for (std::size_t k = 0; k < values_.size(); ++k) {
            values_[k] += other.values_[k];
        }
        return *this;
    }

    RealField& operator-=(const RealField& other)
    {
        check_same_grid(other);
        for (std::size_t k = 0; k < values_.size(); ++k) {
            values_[k] -= other.values_[k];
        }
        return *this;
    }

    RealField& operator*=(double s) noexcept
    {
        for (double& v : values_) {
            v *= s;
        }
        return *this;
    }

    [[nodiscard]] bool all_finite() const noexcept
    {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    [[nodiscard]] double max_abs() const noexcept
    {
        double m = 0.0;
        for (double v : values_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    void check_same_grid(const RealField& other) const
    {
        if (!(grid_ == other.grid_)) {
            throw InvalidArgument("fields live on different grids");
        }
    }

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

inline RealField operator+(RealField a, const RealField& b) { return a += b; }
inline RealField operator-(RealField a, const RealField& b) { return a -= b; }
inline RealField operator*(double s, RealField a) { return a *= s; }

/// a*f + b*g, the extrapolation/averaging workhorse of the multistep schemes.
inline RealField combine(double a, const RealField& f, double b, const RealField& g)
{
    f.check_same_grid(g);
    RealField out(f.grid());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = a * f[k] + b * g[k];
    }
    return out;
}

/// Pointwise product.
inline RealField multiply(const RealField& f, const RealField& g)
{
    f.check_same_grid(g);
    RealField out(f.grid());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = f[k] * g[k];
    }
    return out;
}

/// Half-spectrum Fourier coefficients of a real field.
/// Storage row i holds mode p = i (i <= nx/2) or p = i - nx; column c holds q = c.
class SpectralField {
public:
    using Complex = std::complex<double>;

    SpectralField() = default;
    explicit SpectralField(const GridSpec& grid)
        : grid_(grid), coeffs_(static_cast<std::size_t>(grid.nx) * grid.spectral_columns())
    {
    }

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] int rows() const noexcept { return grid_.nx; }
    [[nodiscard]] int cols() const noexcept { return grid_.spectral_columns(); }
    [[nodiscard]] std::span<Complex> raw() noexcept { return coeffs_; }
    [[nodiscard]] std::span<const Complex> raw() const noexcept { return coeffs_; }

    Complex& at_storage(int row, int col) noexcept { return coeffs_[static_cast<std::size_t>(row) * cols() + col]; }
    [[nodiscard]] Complex at_storage(int row, int col) const noexcept
    {
        return coeffs_[static_cast<std::size_t>(row) * cols() + col];
    }

    /// Signed mode index of a storage row.
    [[nodiscard]] int mode_x(int row) const noexcept { return row <= grid_.nx / 2 ? row : row - grid_.nx; }

    [[nodiscard]] double kx(int row) const noexcept { return 2.0 * std::numbers::pi * mode_x(row) / grid_.lx; }
    [[nodiscard]] double ky(int col) const noexcept { return 2.0 * std::numbers::pi * col / grid_.ly; }
    [[nodiscard]] double k_squared(int row, int col) const noexcept
    {
        const double a = kx(row);
        const double b = ky(col);
        return a * a + b * b;
    }

    /// Coefficient of mode (p, q) for |p| <= nx/2, |q| <= ny/2; negative q via conjugate symmetry.
    [[nodiscard]] Complex coeff(int p, int q) const
    {
        if (std::abs(p) > grid_.nx / 2 || std::abs(q) > grid_.ny / 2) {
            throw InvalidArgument("mode index out of range");
        }
        if (q < 0) {
            return std::conj(coeff(-p, -q));
        }
        const int row = p >= 0 ? p : p + grid_.nx;
        // The Nyquist row is shared by p = nx/2 and p = -nx/2.
        return at_storage(row % grid_.nx, q);
    }

    /// Multiplicity of a stored column in the full spectrum (interior columns stand for q and -q).
    [[nodiscard]] double column_weight(int col) const noexcept
    {
        return (col == 0 || 2 * col == grid_.ny) ? 1.0 : 2.0;
    }

    /// Calls fn(k_squared, coefficient&) for every stored mode.
    template <class Fn>
    void for_each_mode(Fn&& fn)
    {
        for (int r = 0; r < rows(); ++r) {
            for (int c = 0; c < cols(); ++c) {
                fn(k_squared(r, c), at_storage(r, c));
            }
        }
    }

    SpectralField& operator*=(double s) noexcept
    {
        for (Complex& c : coeffs_) {
            c *= s;
        }
        return *this;
    }

private:
    GridSpec grid_{};
    std::vector<Complex> coeffs_;
};

namespace detail {

struct FftPlans {
    fftw_plan forward{};
    fftw_plan inverse{};
};

// FFTW planning is not thread-safe; execution through the new-array interface is.
inline const FftPlans& plans_for(int nx, int ny)
{
    static std::mutex mutex;
    static std::map<std::pair<int, int>, FftPlans> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({nx, ny});
    if (it != cache.end()) {
        return it->second;
    }
    const std::size_t n_real = static_cast<std::size_t>(nx) * ny;
    const std::size_t n_cplx = static_cast<std::size_t>(nx) * (ny / 2 + 1);
    double* in = fftw_alloc_real(n_real);
    fftw_complex* out = fftw_alloc_complex(n_cplx);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    FftPlans plans;
    plans.forward = fftw_plan_dft_r2c_2d(nx, ny, in, out, flags);
    plans.inverse = fftw_plan_dft_c2r_2d(nx, ny, out, in, flags);
    fftw_free(in);
    fftw_free(out);
    return cache.emplace(std::pair{nx, ny}, plans).first->second;
}

} // namespace detail

inline SpectralField transform_forward(const RealField& f)
{
    const GridSpec& g = f.grid();
    SpectralField out(g);
    const auto& plans = detail::plans_for(g.nx, g.ny);
    // Out-of-place r2c leaves its input untouched.
    fftw_execute_dft_r2c(plans.forward, const_cast<double*>(f.data()),
                         reinterpret_cast<fftw_complex*>(out.raw().data()));
    out *= 1.0 / static_cast<double>(g.size());
    return out;
}

inline RealField transform_inverse(const SpectralField& c)
{
    const GridSpec& g = c.grid();
    // c2r overwrites its input.
    std::vector<std::complex<double>> scratch(c.raw().begin(), c.raw().end());
    RealField out(g);
    const auto& plans = detail::plans_for(g.nx, g.ny);
    fftw_execute_dft_c2r(plans.inverse, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
    return out;
}

inline SpectralField laplacian(SpectralField f)
{
    f.for_each_mode([](double k2, std::complex<double>& c) { c *= -k2; });
    return f;
}

inline RealField laplacian(const RealField& f) { return transform_inverse(laplacian(transform_forward(f))); }

/// 2/3-rule truncation: zeroes modes with |p| > nx/3 or |q| > ny/3.
inline void dealias(SpectralField& f)
{
    const int px = f.grid().nx / 3;
    const int qy = f.grid().ny / 3;
    for (int r = 0; r < f.rows(); ++r) {
        for (int c = 0; c < f.cols(); ++c) {
            if (std::abs(f.mode_x(r)) > px || c > qy) {
                f.at_storage(r, c) = 0.0;
            }
        }
    }
}

inline RealField dealiased(const RealField& f)
{
    auto c = transform_forward(f);
    dealias(c);
    return transform_inverse(c);
}

/// Periodic trapezoid rule, hx*hy*sum.
inline double integrate(const RealField& f)
{
    double s = 0.0;
    for (double v : f.values()) {
        s += v;
    }
    return s * f.grid().hx() * f.grid().hy();
}

inline double mean(const RealField& f) { return integrate(f) / f.grid().area(); }

inline double l2_norm(const RealField& f)
{
    double s = 0.0;
    for (double v : f.values()) {
        s += v * v;
    }
    return std::sqrt(s * f.grid().hx() * f.grid().hy());
}

/// sum over the full spectrum of weight(|k|^2) |c|^2, times the domain area.
template <class Weight>
double spectral_sum(const SpectralField& f, Weight&& weight)
{
    double s = 0.0;
    for (int r = 0; r < f.rows(); ++r) {
        for (int c = 0; c < f.cols(); ++c) {
            s += f.column_weight(c) * weight(f.k_squared(r, c)) * std::norm(f.at_storage(r, c));
        }
    }
    return s * f.grid().area();
}

/// Integral of |grad f|^2 by Parseval.
inline double grad_sq_integral(const SpectralField& f)
{
    return spectral_sum(f, [](double k2) { return k2; });
}

inline double grad_sq_integral(const RealField& f) { return grad_sq_integral(transform_forward(f)); }

/// sqrt(sum (1 + |k|^2)^2 |c|^2 |Omega|), norm-equivalent to the H^2 norm.
inline double h2_norm(const SpectralField& f)
{
    return std::sqrt(spectral_sum(f, [](double k2) { return (1.0 + k2) * (1.0 + k2); }));
}

inline double h2_norm(const RealField& f) { return h2_norm(transform_forward(f)); }

} // namespace gpav
