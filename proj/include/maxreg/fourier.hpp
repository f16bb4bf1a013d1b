#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace maxreg {

using cplx = std::complex<double>;

enum class Sampling {
    node,          ///< t_j = t_start + j * dt
    cell_centered, ///< t_j = t_start + (j + 1/2) * dt
};

/// Uniform periodized grid on [t_start, t_end). The period is the window
/// length; frequencies are 2*pi*k/period for k = -n/2 .. n/2 - 1, stored in
/// DFT order (k = 0, 1, ..., n/2 - 1, -n/2, ..., -1).
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    std::size_t n_points = 8;
    Sampling sampling = Sampling::node;

    /// Validating constructor: n >= 8, power of two, t_end > t_start.
    static TimeGrid make(double t_start, double t_end, std::size_t n_points,
                         Sampling sampling = Sampling::node);

    void validate() const;

    double period() const { return t_end - t_start; }
    double dt() const { return period() / static_cast<double>(n_points); }
    double point(std::size_t j) const;
    std::vector<double> points() const;

    /// Signed integer wavenumber of DFT slot k (the Nyquist slot is -n/2).
    long wavenumber(std::size_t k) const;
    /// Angular frequency tau of DFT slot k.
    double frequency(std::size_t k) const;

    /// Index of the grid point closest to t (no wrap-around).
    std::size_t nearest_index(double t) const;

    bool operator==(const TimeGrid&) const = default;
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Samples on a TimeGrid, possibly vector-valued: values[j * dim + c].
struct TimeSignal {
    TimeGrid grid;
    std::size_t dim = 1;
    std::vector<cplx> values;

    TimeSignal() = default;
    TimeSignal(TimeGrid g, std::size_t d);
    TimeSignal(TimeGrid g, std::size_t d, std::vector<cplx> v);

    static TimeSignal from_function(const TimeGrid& g, const std::function<cplx(double)>& f);

    std::size_t size() const { return values.size(); }
    cplx& at(std::size_t j, std::size_t c = 0) { return values[j * dim + c]; }
    const cplx& at(std::size_t j, std::size_t c = 0) const { return values[j * dim + c]; }

    /// Component c as a scalar signal.
    TimeSignal component(std::size_t c) const;

    TimeSignal& operator+=(const TimeSignal& o);
    TimeSignal& operator-=(const TimeSignal& o);
    TimeSignal& operator*=(cplx s);

    bool operator==(const TimeSignal&) const = default;
};

TimeSignal operator+(TimeSignal a, const TimeSignal& b);
TimeSignal operator-(TimeSignal a, const TimeSignal& b);
TimeSignal operator*(cplx s, TimeSignal a);

/// Order of a fractional derivative, 0 < alpha <= 1.
class FracOrder {
public:
    explicit FracOrder(double alpha);
    double value() const { return alpha_; }

private:
    double alpha_;
};

/// Symbol function: tau -> multiplier. Applied per component.
using Symbol = std::function<cplx(double tau)>;

/// Multiplies the DFT of every component by symbol(tau) and transforms back.
TimeSignal apply_symbol(const TimeSignal& u, const Symbol& symbol);

/// In-place multiplier on raw time-major data (n samples of `batch` components).
void apply_symbol_inplace(std::span<cplx> data, const TimeGrid& grid, std::size_t batch,
                          const Symbol& symbol);

/// D_t^alpha: Fourier symbol |tau|^alpha. The zero mode maps to zero.
TimeSignal frac_derivative(const TimeSignal& u, FracOrder a);

/// H_t: Fourier symbol i*sgn(tau), zero mode maps to zero. The Nyquist slot
/// has tau < 0, so H_t(H_t u) = -(u - mean(u)) holds on the whole grid.
TimeSignal hilbert_transform(const TimeSignal& u);

/// u + delta * H_t u, 0 < delta < 1.
TimeSignal twist_operator(const TimeSignal& u, double delta);
/// Exact inverse of twist_operator by symbol division.
TimeSignal untwist_operator(const TimeSignal& u, double delta);

/// Spectral time derivative, symbol i*tau.
TimeSignal time_derivative(const TimeSignal& u);

/// Discrete L^2 inner product over the period: dt * sum_j sum_c u conj(v).
cplx time_inner_product(const TimeSignal& u, const TimeSignal& v);
double time_norm(const TimeSignal& u);

/// dt/n * sum_k |u_hat_k|^2, the Plancherel side of time_inner_product(u, u).
double spectral_energy(const TimeSignal& u);

/// Mean over the period, per component.
std::vector<cplx> time_mean(const TimeSignal& u);

/// Trigonometric interpolant of u evaluated at an arbitrary time t.
std::vector<cplx> evaluate_trigonometric(const TimeSignal& u, double t);

/// Time reversal about the window center: sample j <-> n-1-j for
/// cell-centered grids, j <-> (n-j) mod n about t_start for node grids.
TimeSignal time_reverse(const TimeSignal& u);

/// Resamples arbitrary-length uniform samples on [t_start, t_end) onto the
/// next power-of-two grid by periodic linear interpolation. Samples are taken
/// to sit at `sampling` positions of their own uniform grid.
TimeSignal resample_to_power_of_two(std::span<const cplx> samples, double t_start, double t_end,
                                    Sampling sampling);

void require_finite(const TimeSignal& u, const char* what);
void require_same_grid(const TimeSignal& u, const TimeSignal& v, const char* what);

} // namespace maxreg
