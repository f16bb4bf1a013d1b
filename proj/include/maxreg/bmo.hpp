#pragma once

#include "maxreg/fourier.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace maxreg {

enum class FamilyStyle {
    dyadic,  ///< dyadic tree over the window plus half-shifted copies
    sliding, ///< every dyadic length at every grid offset
    all,     ///< every grid interval with at least two points
    single,  ///< the whole window only
};

std::string to_string(FamilyStyle s);
FamilyStyle family_style_from_string(const std::string& s);

/// A run of `count` consecutive grid points starting at `first`. For
/// periodic families the run may wrap past the end of the grid.
struct Interval {
    std::size_t first = 0;
    std::size_t count = 0;
    bool operator==(const Interval&) const = default;
};

/// Intervals of a time window [a, b) on a grid. Every interval holds at least
/// two grid points. Quadrature is the midpoint rule with weight dt per point,
/// so an interval of m points has length m * dt.
class IntervalFamily {
public:
    /// Window [a, b) collects the grid points t_j with a <= t_j < b.
    static IntervalFamily make(const TimeGrid& grid, FamilyStyle style, double a, double b);
    static IntervalFamily make(const TimeGrid& grid, FamilyStyle style);
    /// Sliding family on the torus: all dyadic lengths, all n offsets, wrapping.
    static IntervalFamily periodic_sliding(const TimeGrid& grid);

    const TimeGrid& grid() const { return grid_; }
    FamilyStyle style() const { return style_; }
    bool periodic() const { return periodic_; }
    std::size_t window_first() const { return window_first_; }
    std::size_t window_count() const { return window_count_; }
    std::size_t size() const;

    /// Visits every interval; enumerated lazily for FamilyStyle::all.
    void for_each(const std::function<void(const Interval&)>& visit) const;

    /// Interval as time endpoints (cell edges around the first and last point).
    std::pair<double, double> bounds(const Interval& iv) const;
    double length(const Interval& iv) const { return static_cast<double>(iv.count) * grid_.dt(); }
    /// Grid index of the i-th point of the interval.
    std::size_t index(const Interval& iv, std::size_t i) const {
        return (iv.first + i) % grid_.n_points;
    }

private:
    TimeGrid grid_;
    FamilyStyle style_ = FamilyStyle::dyadic;
    bool periodic_ = false;
    std::size_t window_first_ = 0;
    std::size_t window_count_ = 0;
    std::vector<Interval> intervals_;
};

/// A measured sup-type (or integral-type) functional value.
struct SeminormValue {
    double value = 0.0;
    std::size_t family_size = 0;
    std::optional<std::pair<double, double>> achieving_interval;
};

/// How |f(t) - f(s)| is measured for vector-valued samples. With
/// matrix_dim = n > 1 and n*n components the samples are read as row-major
/// n x n matrices and the difference is measured in operator norm;
/// otherwise the Euclidean norm of the component vector is used.
struct SampleNorm {
    std::size_t matrix_dim = 0;
};

/// sup over the family of the mean of |f - f_I| on I. Matrix samples are
/// handled entrywise (max over entries).
SeminormValue bmo_seminorm(const TimeSignal& f, const IntervalFamily& fam);

/// sup over I of (1/l(I)) * sum_{s != t in I} |f(t)-f(s)|^2 / |t-s|^(1+2 alpha) dt^2.
/// The diagonal s = t is omitted. alpha = 1/2 gives the scale-invariant
/// half-derivative condition; smaller alpha the fractional variant.
SeminormValue scale_invariant_sobolev(const TimeSignal& f, const IntervalFamily& fam,
                                      double alpha = 0.5, SampleNorm norm = {});
SeminormValue scale_invariant_half_sobolev(const TimeSignal& f, const IntervalFamily& fam,
                                           SampleNorm norm = {});

/// Double sum over the window without the sup or 1/l normalization.
SeminormValue frac_sobolev_seminorm(const TimeSignal& f, FracOrder a, std::pair<double, double> window,
                                    SampleNorm norm = {});

/// max over grid pairs in the window of |f(t)-f(s)| / |t-s|^alpha.
SeminormValue holder_constant(const TimeSignal& f, FracOrder a, std::pair<double, double> window,
                              SampleNorm norm = {});
SeminormValue holder_constant(const TimeSignal& f, FracOrder a, SampleNorm norm = {});

/// sum_{k >= 1} omega(k dt)^q / (k dt)^(1+q/2) dt with
/// omega(h) = max_s |f(s+h) - f(s)| over pairs inside the window. The lag
/// integral starts one grid cell above zero and ends at the window length.
SeminormValue dini_integral(const TimeSignal& f, double q, std::pair<double, double> window,
                            SampleNorm norm = {});
SeminormValue dini_integral(const TimeSignal& f, double q, SampleNorm norm = {});

/// Pointwise difference norm used by the quadratic functionals.
double difference_norm(std::span<const cplx> a, std::span<const cplx> b, SampleNorm norm);

/// Verdict of a refinement sweep: values measured at successive dyadic
/// refinements of the same underlying function.
struct RefinementVerdict {
    std::vector<double> values;
    std::vector<std::size_t> resolutions;
    bool divergent = false;
    /// Relative growth v[k+1]/v[k] - 1 per refinement.
    std::vector<double> growth;
    /// Ratio of the last two increments (v3 - v2)/(v2 - v1).
    double increment_ratio = 0.0;
    /// max/min of the values.
    double spread = 1.0;
};

struct DivergenceRule {
    /// Relative growth per refinement that counts as divergence.
    double growth_threshold = 0.25;
    /// Increments that fail to shrink by at least this factor are treated as
    /// non-summable (log-type divergence).
    double increment_ratio_threshold = 0.97;
    /// Increments below this fraction of the value are converged noise.
    double increment_floor = 1e-3;
};

/// Classifies a refinement sequence (at least three values). Divergent if the
/// relative growth is at or above the threshold over the last three
/// resolutions, or if the last two increments are both positive and the
/// later one is not smaller than increment_ratio_threshold times the first.
RefinementVerdict classify_refinement(std::span<const double> values,
                                      std::span<const std::size_t> resolutions,
                                      const DivergenceRule& rule = {});

/// Convenience: evaluates `measure(n)` at each resolution and classifies.
RefinementVerdict refinement_sweep(const std::function<double(std::size_t)>& measure,
                                   std::span<const std::size_t> resolutions,
                                   const DivergenceRule& rule = {});

} // namespace maxreg
