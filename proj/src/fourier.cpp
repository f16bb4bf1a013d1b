#include "maxreg/fourier.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace maxreg {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

TimeGrid TimeGrid::make(double t_start, double t_end, std::size_t n_points, Sampling sampling) {
    TimeGrid g{t_start, t_end, n_points, sampling};
    g.validate();
    return g;
}

void TimeGrid::validate() const {
    if (!(std::isfinite(t_start) && std::isfinite(t_end)) || !(t_end > t_start))
        throw ValidationError("TimeGrid: need finite t_end > t_start");
    if (n_points < 8 || !is_power_of_two(n_points))
        throw ValidationError("TimeGrid: n_points must be a power of two >= 8, got " +
                              std::to_string(n_points));
}

double TimeGrid::point(std::size_t j) const {
    const double offset = sampling == Sampling::cell_centered ? 0.5 : 0.0;
    return t_start + (static_cast<double>(j) + offset) * dt();
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> t(n_points);
    for (std::size_t j = 0; j < n_points; ++j) t[j] = point(j);
    return t;
}

long TimeGrid::wavenumber(std::size_t k) const {
    const auto n = static_cast<long>(n_points);
    const auto kk = static_cast<long>(k);
    return kk < n / 2 ? kk : kk - n;
}

double TimeGrid::frequency(std::size_t k) const {
    return 2.0 * std::numbers::pi * static_cast<double>(wavenumber(k)) / period();
}

std::size_t TimeGrid::nearest_index(double t) const {
    const double offset = sampling == Sampling::cell_centered ? 0.5 : 0.0;
    const double x = (t - t_start) / dt() - offset;
    const double r = std::clamp(std::round(x), 0.0, static_cast<double>(n_points - 1));
    return static_cast<std::size_t>(r);
}

TimeSignal::TimeSignal(TimeGrid g, std::size_t d) : grid(g), dim(d), values(g.n_points * d) {
    grid.validate();
    if (d == 0) throw ValidationError("TimeSignal: dimension must be positive");
}

TimeSignal::TimeSignal(TimeGrid g, std::size_t d, std::vector<cplx> v)
    : grid(g), dim(d), values(std::move(v)) {
    grid.validate();
    if (d == 0 || values.size() != grid.n_points * dim)
        throw ValidationError("TimeSignal: values length must be n_points * dim");
}

TimeSignal TimeSignal::from_function(const TimeGrid& g, const std::function<cplx(double)>& f) {
    TimeSignal s(g, 1);
    for (std::size_t j = 0; j < g.n_points; ++j) s.values[j] = f(g.point(j));
    return s;
}

TimeSignal TimeSignal::component(std::size_t c) const {
    if (c >= dim) throw ValidationError("TimeSignal::component: index out of range");
    TimeSignal s(grid, 1);
    for (std::size_t j = 0; j < grid.n_points; ++j) s.values[j] = at(j, c);
    return s;
}

void require_same_grid(const TimeSignal& u, const TimeSignal& v, const char* what) {
    if (!(u.grid == v.grid) || u.dim != v.dim)
        throw ValidationError(std::string(what) + ": grid or dimension mismatch");
}

void require_finite(const TimeSignal& u, const char* what) {
    for (const auto& z : u.values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ValidationError(std::string(what) + ": non-finite sample");
}

TimeSignal& TimeSignal::operator+=(const TimeSignal& o) {
    require_same_grid(*this, o, "TimeSignal +=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

TimeSignal& TimeSignal::operator-=(const TimeSignal& o) {
    require_same_grid(*this, o, "TimeSignal -=");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

TimeSignal& TimeSignal::operator*=(cplx s) {
    for (auto& z : values) z *= s;
    return *this;
}

TimeSignal operator+(TimeSignal a, const TimeSignal& b) { return a += b; }
TimeSignal operator-(TimeSignal a, const TimeSignal& b) { return a -= b; }
TimeSignal operator*(cplx s, TimeSignal a) { return a *= s; }

FracOrder::FracOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ValidationError("FracOrder: alpha must lie in (0, 1]");
}

void apply_symbol_inplace(std::span<cplx> data, const TimeGrid& grid, std::size_t batch,
                          const Symbol& symbol) {
    const std::size_t n = grid.n_points;
    fft::forward(data, n, batch);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx m = symbol(grid.frequency(k)) * scale;
        for (std::size_t c = 0; c < batch; ++c) data[k * batch + c] *= m;
    }
    fft::backward(data, n, batch);
}

TimeSignal apply_symbol(const TimeSignal& u, const Symbol& symbol) {
    TimeSignal out = u;
    apply_symbol_inplace(out.values, out.grid, out.dim, symbol);
    return out;
}

namespace {

double sgn(double tau) { return tau > 0.0 ? 1.0 : (tau < 0.0 ? -1.0 : 0.0); }

void require_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ValidationError("twist: delta must lie in (0, 1)");
}

} // namespace

TimeSignal frac_derivative(const TimeSignal& u, FracOrder a) {
    require_finite(u, "frac_derivative");
    const double alpha = a.value();
    return apply_symbol(u, [alpha](double tau) -> cplx {
        return tau == 0.0 ? 0.0 : std::pow(std::abs(tau), alpha);
    });
}

TimeSignal hilbert_transform(const TimeSignal& u) {
    require_finite(u, "hilbert_transform");
    return apply_symbol(u, [](double tau) { return cplx(0.0, sgn(tau)); });
}

TimeSignal twist_operator(const TimeSignal& u, double delta) {
    require_delta(delta);
    require_finite(u, "twist_operator");
    return apply_symbol(u, [delta](double tau) { return cplx(1.0, delta * sgn(tau)); });
}

TimeSignal untwist_operator(const TimeSignal& u, double delta) {
    require_delta(delta);
    require_finite(u, "untwist_operator");
    return apply_symbol(u, [delta](double tau) { return 1.0 / cplx(1.0, delta * sgn(tau)); });
}

TimeSignal time_derivative(const TimeSignal& u) {
    require_finite(u, "time_derivative");
    return apply_symbol(u, [](double tau) { return cplx(0.0, tau); });
}

cplx time_inner_product(const TimeSignal& u, const TimeSignal& v) {
    require_same_grid(u, v, "time_inner_product");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) acc += u.values[i] * std::conj(v.values[i]);
    return acc * u.grid.dt();
}

double time_norm(const TimeSignal& u) { return std::sqrt(time_inner_product(u, u).real()); }

double spectral_energy(const TimeSignal& u) {
    std::vector<cplx> data = u.values;
    fft::forward(data, u.grid.n_points, u.dim);
    double acc = 0.0;
    for (const auto& z : data) acc += std::norm(z);
    return acc * u.grid.dt() / static_cast<double>(u.grid.n_points);
}

std::vector<cplx> time_mean(const TimeSignal& u) {
    std::vector<cplx> m(u.dim, 0.0);
    for (std::size_t j = 0; j < u.grid.n_points; ++j)
        for (std::size_t c = 0; c < u.dim; ++c) m[c] += u.at(j, c);
    for (auto& z : m) z /= static_cast<double>(u.grid.n_points);
    return m;
}

std::vector<cplx> evaluate_trigonometric(const TimeSignal& u, double t) {
    const std::size_t n = u.grid.n_points;
    std::vector<cplx> data = u.values;
    fft::forward(data, n, u.dim);
    const double s = t - u.grid.point(0);
    std::vector<cplx> out(u.dim, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = u.grid.frequency(k);
        cplx phase = std::polar(1.0, tau * s);
        if (u.grid.wavenumber(k) == -static_cast<long>(n / 2))
            phase = std::cos(tau * s); // split the Nyquist slot symmetrically
        for (std::size_t c = 0; c < u.dim; ++c) out[c] += data[k * u.dim + c] * phase;
    }
    for (auto& z : out) z /= static_cast<double>(n);
    return out;
}

TimeSignal time_reverse(const TimeSignal& u) {
    const std::size_t n = u.grid.n_points;
    TimeSignal out(u.grid, u.dim);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t r = u.grid.sampling == Sampling::cell_centered ? n - 1 - j : (n - j) % n;
        for (std::size_t c = 0; c < u.dim; ++c) out.at(r, c) = u.at(j, c);
    }
    return out;
}

TimeSignal resample_to_power_of_two(std::span<const cplx> samples, double t_start, double t_end,
                                    Sampling sampling) {
    const std::size_t m = samples.size();
    if (m == 0) throw ValidationError("resample: no samples");
    const std::size_t n = std::max<std::size_t>(8, next_power_of_two(m));
    TimeGrid grid = TimeGrid::make(t_start, t_end, n, sampling);
    if (m == n) return TimeSignal(grid, 1, std::vector<cplx>(samples.begin(), samples.end()));

    const double offset = sampling == Sampling::cell_centered ? 0.5 : 0.0;
    const double src_dt = grid.period() / static_cast<double>(m);
    TimeSignal out(grid, 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = (grid.point(j) - t_start) / src_dt - offset;
        const double fl = std::floor(x);
        const double w = x - fl;
        const auto i0 = static_cast<long>(fl);
        const auto mm = static_cast<long>(m);
        const auto a = static_cast<std::size_t>(((i0 % mm) + mm) % mm);
        const auto b = static_cast<std::size_t>((((i0 + 1) % mm) + mm) % mm);
        out.values[j] = (1.0 - w) * samples[a] + w * samples[b];
    }
    return out;
}

} // namespace maxreg
