#pragma once

#include "maxreg/fourier.hpp"
#include "maxreg/spacetime.hpp"

#include <cmath>
#include <random>

namespace maxreg::testing {

inline TimeSignal random_signal(const TimeGrid& g, std::size_t dim, std::uint64_t seed, bool real = false) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    TimeSignal s(g, dim);
    for (auto& v : s.values) v = real ? cplx(n(rng), 0.0) : cplx(n(rng), n(rng));
    return s;
}

inline TimeSignal remove_mean(TimeSignal s) {
    const auto m = time_mean(s);
    for (std::size_t j = 0; j < s.grid.n_points; ++j)
        for (std::size_t c = 0; c < s.dim; ++c) s.at(j, c) -= m[c];
    return s;
}

inline SpaceTimeField random_field(const TimeGrid& g, const SpaceMesh& m, std::uint64_t seed) {
    SpaceTimeField f(g, m);
    f.data = random_signal(g, f.dofs(), seed);
    return f;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double max_abs_diff(const TimeSignal& a, const TimeSignal& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

inline double max_abs(const TimeSignal& a) {
    double m = 0.0;
    for (const auto& v : a.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace maxreg::testing
