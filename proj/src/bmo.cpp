#include "maxreg/bmo.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace maxreg {

std::string to_string(FamilyStyle s) {
    switch (s) {
    case FamilyStyle::dyadic: return "dyadic";
    case FamilyStyle::sliding: return "sliding";
    case FamilyStyle::all: return "all";
    case FamilyStyle::single: return "single";
    }
    return "dyadic";
}

FamilyStyle family_style_from_string(const std::string& s) {
    if (s == "dyadic") return FamilyStyle::dyadic;
    if (s == "sliding") return FamilyStyle::sliding;
    if (s == "all") return FamilyStyle::all;
    if (s == "single") return FamilyStyle::single;
    throw ValidationError("unknown interval family style '" + s + "'");
}

namespace {

std::pair<std::size_t, std::size_t> window_indices(const TimeGrid& grid, double a, double b) {
    const double eps = 1e-9 * grid.dt();
    std::size_t first = grid.n_points;
    std::size_t count = 0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double t = grid.point(j);
        if (t >= a - eps && t < b - eps) {
            if (first == grid.n_points) first = j;
            ++count;
        }
    }
    if (count < 2) throw ValidationError("interval family: window holds fewer than two grid points");
    return {first, count};
}

} // namespace

IntervalFamily IntervalFamily::make(const TimeGrid& grid, FamilyStyle style) {
    return make(grid, style, grid.t_start, grid.t_end);
}

IntervalFamily IntervalFamily::make(const TimeGrid& grid, FamilyStyle style, double a, double b) {
    grid.validate();
    IntervalFamily fam;
    fam.grid_ = grid;
    fam.style_ = style;
    std::tie(fam.window_first_, fam.window_count_) = window_indices(grid, a, b);
    const std::size_t w0 = fam.window_first_;
    const std::size_t W = fam.window_count_;

    switch (style) {
    case FamilyStyle::single:
        fam.intervals_.push_back({w0, W});
        break;
    case FamilyStyle::dyadic:
        for (std::size_t L = W; L >= 2; L /= 2) {
            for (std::size_t s = 0; s + L <= W; s += L) fam.intervals_.push_back({w0 + s, L});
            for (std::size_t s = L / 2; s + L <= W; s += L) fam.intervals_.push_back({w0 + s, L});
        }
        break;
    case FamilyStyle::sliding:
        for (std::size_t L = W; L >= 2; L /= 2)
            for (std::size_t s = 0; s + L <= W; ++s) fam.intervals_.push_back({w0 + s, L});
        break;
    case FamilyStyle::all:
        break; // enumerated lazily
    }
    return fam;
}

IntervalFamily IntervalFamily::periodic_sliding(const TimeGrid& grid) {
    grid.validate();
    IntervalFamily fam;
    fam.grid_ = grid;
    fam.style_ = FamilyStyle::sliding;
    fam.periodic_ = true;
    fam.window_first_ = 0;
    fam.window_count_ = grid.n_points;
    const std::size_t n = grid.n_points;
    fam.intervals_.push_back({0, n});
    for (std::size_t L = n / 2; L >= 2; L /= 2)
        for (std::size_t s = 0; s < n; ++s) fam.intervals_.push_back({s, L});
    return fam;
}

std::size_t IntervalFamily::size() const {
    if (style_ == FamilyStyle::all) return window_count_ * (window_count_ - 1) / 2;
    return intervals_.size();
}

void IntervalFamily::for_each(const std::function<void(const Interval&)>& visit) const {
    if (style_ != FamilyStyle::all) {
        for (const auto& iv : intervals_) visit(iv);
        return;
    }
    for (std::size_t c = 2; c <= window_count_; ++c)
        for (std::size_t s = 0; s + c <= window_count_; ++s) visit({window_first_ + s, c});
}

std::pair<double, double> IntervalFamily::bounds(const Interval& iv) const {
    const double dt = grid_.dt();
    const double lo = grid_.point(iv.first) - 0.5 * dt;
    return {lo, lo + static_cast<double>(iv.count) * dt};
}

double difference_norm(std::span<const cplx> a, std::span<const cplx> b, SampleNorm norm) {
    const std::size_t d = a.size();
    const std::size_t n = norm.matrix_dim;
    if (d == 1) return std::abs(a[0] - b[0]);
    if (n > 1 && n * n == d) {
        Eigen::MatrixXcd m(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) m(r, c) = a[r * n + c] - b[r * n + c];
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        return svd.singularValues()(0);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc);
}

namespace {

struct Best {
    double value = 0.0;
    Interval where{};
};

std::vector<Interval> materialize(const IntervalFamily& fam) {
    std::vector<Interval> out;
    out.reserve(fam.size());
    fam.for_each([&](const Interval& iv) { out.push_back(iv); });
    return out;
}

SeminormValue finish(const IntervalFamily& fam, const Best& best) {
    SeminormValue v;
    v.value = best.value;
    v.family_size = fam.size();
    if (best.value > 0.0) v.achieving_interval = fam.bounds(best.where);
    return v;
}

/// Pairwise weights on a window with 2D prefix sums; block sums over I x I in O(1).
class PairSums {
public:
    PairSums(const TimeSignal& f, std::size_t w0, std::size_t W, double alpha, SampleNorm norm)
        : W_(W), prefix_((W + 1) * (W + 1), 0.0) {
        const double dt = f.grid.dt();
        std::vector<double> kernel(W, 0.0);
        for (std::size_t k = 1; k < W; ++k)
            kernel[k] = dt * dt / std::pow(static_cast<double>(k) * dt, 1.0 + 2.0 * alpha);

        const std::size_t d = f.dim;
        std::vector<double> row(W);
        for (std::size_t i = 0; i < W; ++i) {
            std::span<const cplx> fi(&f.values[(w0 + i) * d], d);
            for (std::size_t j = 0; j < W; ++j) {
                if (i == j) {
                    row[j] = 0.0;
                    continue;
                }
                std::span<const cplx> fj(&f.values[(w0 + j) * d], d);
                const double diff = difference_norm(fi, fj, norm);
                row[j] = diff * diff * kernel[i > j ? i - j : j - i];
            }
            double running = 0.0;
            for (std::size_t j = 0; j < W; ++j) {
                running += row[j];
                at(i + 1, j + 1) = at(i, j + 1) + running;
            }
        }
    }

    /// Sum over [p, p+L) x [p, p+L), window-relative.
    double block(std::size_t p, std::size_t L) const {
        const std::size_t q = p + L;
        return at(q, q) - at(p, q) - at(q, p) + at(p, p);
    }

    double total() const { return at(W_, W_); }

private:
    double& at(std::size_t a, std::size_t b) { return prefix_[a * (W_ + 1) + b]; }
    double at(std::size_t a, std::size_t b) const { return prefix_[a * (W_ + 1) + b]; }

    std::size_t W_;
    std::vector<double> prefix_;
};

} // namespace

SeminormValue bmo_seminorm(const TimeSignal& f, const IntervalFamily& fam) {
    if (!(f.grid == fam.grid())) throw ValidationError("bmo_seminorm: grid mismatch with family");
    if (fam.size() == 0) throw ValidationError("bmo_seminorm: empty interval family");
    require_finite(f, "bmo_seminorm");

    const auto intervals = materialize(fam);
    const std::size_t workers = std::min<std::size_t>(default_workers(), 8);
    std::vector<Best> partial(workers);
    const std::size_t chunk = (intervals.size() + workers - 1) / workers;
    const std::size_t d = f.dim;

    parallel_for(workers, [&](std::size_t w) {
        Best best;
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(intervals.size(), lo + chunk);
        for (std::size_t k = lo; k < hi; ++k) {
            const Interval& iv = intervals[k];
            for (std::size_t c = 0; c < d; ++c) {
                cplx mean = 0.0;
                for (std::size_t i = 0; i < iv.count; ++i) mean += f.values[fam.index(iv, i) * d + c];
                mean /= static_cast<double>(iv.count);
                double osc = 0.0;
                for (std::size_t i = 0; i < iv.count; ++i)
                    osc += std::abs(f.values[fam.index(iv, i) * d + c] - mean);
                osc /= static_cast<double>(iv.count);
                if (osc > best.value) best = {osc, iv};
            }
        }
        partial[w] = best;
    }, workers);

    Best best;
    for (const auto& p : partial)
        if (p.value > best.value) best = p;
    return finish(fam, best);
}

SeminormValue scale_invariant_sobolev(const TimeSignal& f, const IntervalFamily& fam, double alpha,
                                      SampleNorm norm) {
    if (!(f.grid == fam.grid())) throw ValidationError("scale_invariant_sobolev: grid mismatch with family");
    if (fam.size() == 0) throw ValidationError("scale_invariant_sobolev: empty interval family");
    if (fam.periodic()) throw ValidationError("scale_invariant_sobolev: periodic families are not supported");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("scale_invariant_sobolev: alpha must lie in (0, 1)");
    require_finite(f, "scale_invariant_sobolev");

    const std::size_t w0 = fam.window_first();
    const PairSums sums(f, w0, fam.window_count(), alpha, norm);
    Best best;
    fam.for_each([&](const Interval& iv) {
        const double v = sums.block(iv.first - w0, iv.count) / fam.length(iv);
        if (v > best.value) best = {v, iv};
    });
    return finish(fam, best);
}

SeminormValue scale_invariant_half_sobolev(const TimeSignal& f, const IntervalFamily& fam, SampleNorm norm) {
    return scale_invariant_sobolev(f, fam, 0.5, norm);
}

SeminormValue frac_sobolev_seminorm(const TimeSignal& f, FracOrder a, std::pair<double, double> window,
                                    SampleNorm norm) {
    if (!(a.value() < 1.0)) throw ValidationError("frac_sobolev_seminorm: alpha must lie in (0, 1)");
    require_finite(f, "frac_sobolev_seminorm");
    const auto fam = IntervalFamily::make(f.grid, FamilyStyle::single, window.first, window.second);
    const PairSums sums(f, fam.window_first(), fam.window_count(), a.value(), norm);
    SeminormValue v;
    v.value = sums.total();
    v.family_size = 1;
    if (v.value > 0.0) v.achieving_interval = window;
    return v;
}

SeminormValue holder_constant(const TimeSignal& f, FracOrder a, std::pair<double, double> window,
                              SampleNorm norm) {
    require_finite(f, "holder_constant");
    const auto fam = IntervalFamily::make(f.grid, FamilyStyle::single, window.first, window.second);
    const std::size_t w0 = fam.window_first();
    const std::size_t W = fam.window_count();
    const double dt = f.grid.dt();
    const std::size_t d = f.dim;

    std::vector<double> kernel(W, 0.0);
    for (std::size_t k = 1; k < W; ++k) kernel[k] = 1.0 / std::pow(static_cast<double>(k) * dt, a.value());

    double best = 0.0;
    std::pair<std::size_t, std::size_t> where{0, 0};
    for (std::size_t i = 0; i < W; ++i) {
        std::span<const cplx> fi(&f.values[(w0 + i) * d], d);
        for (std::size_t j = i + 1; j < W; ++j) {
            std::span<const cplx> fj(&f.values[(w0 + j) * d], d);
            const double v = difference_norm(fi, fj, norm) * kernel[j - i];
            if (v > best) {
                best = v;
                where = {w0 + i, w0 + j};
            }
        }
    }
    SeminormValue out;
    out.value = best;
    out.family_size = W * (W - 1) / 2;
    if (best > 0.0) out.achieving_interval = std::make_pair(f.grid.point(where.first), f.grid.point(where.second));
    return out;
}

SeminormValue holder_constant(const TimeSignal& f, FracOrder a, SampleNorm norm) {
    return holder_constant(f, a, {f.grid.t_start, f.grid.t_end}, norm);
}

SeminormValue dini_integral(const TimeSignal& f, double q, std::pair<double, double> window, SampleNorm norm) {
    if (!(q >= 1.0 && q <= 2.0)) throw ValidationError("dini_integral: q must lie in [1, 2]");
    require_finite(f, "dini_integral");
    const auto fam = IntervalFamily::make(f.grid, FamilyStyle::single, window.first, window.second);
    const std::size_t w0 = fam.window_first();
    const std::size_t W = fam.window_count();
    const double dt = f.grid.dt();
    const std::size_t d = f.dim;

    double total = 0.0;
    double best_term = 0.0;
    std::pair<double, double> where{};
    for (std::size_t k = 1; k < W; ++k) {
        double omega = 0.0;
        std::size_t at = w0;
        for (std::size_t i = 0; i + k < W; ++i) {
            std::span<const cplx> a(&f.values[(w0 + i) * d], d);
            std::span<const cplx> b(&f.values[(w0 + i + k) * d], d);
            const double v = difference_norm(a, b, norm);
            if (v > omega) {
                omega = v;
                at = w0 + i;
            }
        }
        const double h = static_cast<double>(k) * dt;
        const double term = std::pow(omega, q) / std::pow(h, 1.0 + 0.5 * q) * dt;
        total += term;
        if (term > best_term) {
            best_term = term;
            where = {f.grid.point(at), f.grid.point(at) + h};
        }
    }
    SeminormValue out;
    out.value = total;
    out.family_size = W - 1;
    if (total > 0.0) out.achieving_interval = where;
    return out;
}

SeminormValue dini_integral(const TimeSignal& f, double q, SampleNorm norm) {
    return dini_integral(f, q, {f.grid.t_start, f.grid.t_end}, norm);
}

RefinementVerdict classify_refinement(std::span<const double> values, std::span<const std::size_t> resolutions,
                                      const DivergenceRule& rule) {
    if (values.size() < 3) throw ValidationError("classify_refinement: need at least three resolutions");
    if (resolutions.size() != values.size())
        throw ValidationError("classify_refinement: values and resolutions differ in length");

    RefinementVerdict v;
    v.values.assign(values.begin(), values.end());
    v.resolutions.assign(resolutions.begin(), resolutions.end());
    const std::size_t m = values.size();
    for (std::size_t k = 0; k + 1 < m; ++k)
        v.growth.push_back(values[k] > 0.0 ? values[k + 1] / values[k] - 1.0 : (values[k + 1] > 0.0 ? 1.0 : 0.0));

    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    v.spread = *lo > 0.0 ? *hi / *lo : (*hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);

    const bool growth_rule = v.growth[m - 2] >= rule.growth_threshold && v.growth[m - 3] >= rule.growth_threshold;

    const double d1 = values[m - 2] - values[m - 3];
    const double d2 = values[m - 1] - values[m - 2];
    v.increment_ratio = d1 != 0.0 ? d2 / d1 : 0.0;
    const double scale = std::abs(values[m - 1]);
    const bool increments_rule = d1 > rule.increment_floor * scale && d2 > rule.increment_floor * scale &&
                                 d2 >= rule.increment_ratio_threshold * d1;

    v.divergent = growth_rule || increments_rule;
    return v;
}

RefinementVerdict refinement_sweep(const std::function<double(std::size_t)>& measure,
                                   std::span<const std::size_t> resolutions, const DivergenceRule& rule) {
    std::vector<double> values;
    values.reserve(resolutions.size());
    for (auto n : resolutions) values.push_back(measure(n));
    return classify_refinement(values, resolutions, rule);
}

} // namespace maxreg
