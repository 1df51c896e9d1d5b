#pragma once
// Piecewise affine maps of [0, 1): affine interval exchanges, their translated
// families and periodic points found by composing branches exactly.

#include "parallel.hpp"
#include "tracer.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

namespace dilatone {

/// x -> slope * x + offset on [lo, hi).
struct AffineBranch {
    Scalar lo, hi;
    Scalar slope = 1, offset = 0;
    Scalar apply(const Scalar& x) const { return slope * x + offset; }
};

struct PeriodicPoint {
    Scalar x;
    int period = 0;
    Scalar multiplier = 1;
    std::vector<int> itinerary;  ///< branch indices visited
};

/// A subinterval on which the period-p composition is the identity.
struct PeriodicFamily {
    Scalar lo, hi;
    int period = 0;
};

struct PeriodicSearch {
    std::vector<PeriodicPoint> points;
    std::vector<PeriodicFamily> families;
    bool truncated = false;  ///< the composition budget ran out before max_period
    bool empty() const { return points.empty() && families.empty(); }
};

namespace aiet_detail {

inline bool is_proper_power(const std::vector<int>& w)
{
    std::size_t n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
        if (ok) return true;
    }
    return false;
}

}  // namespace aiet_detail

/// Periodic points of the piecewise affine map given by `branches`, up to
/// `max_period`. Every composition of branches that is realised on a nonempty
/// interval is solved exactly. `first_only` stops at the first find.
inline PeriodicSearch periodic_points(const std::vector<AffineBranch>& branches, int max_period, bool first_only = false,
                                      std::size_t max_compositions = 5000000)
{
    struct Node {
        Scalar lo, hi;  // points whose itinerary starts with `word`
        Scalar S, O;    // composed map
        std::vector<int> word;
    };
    PeriodicSearch res;
    std::map<Scalar, std::size_t> seen_points;
    std::vector<Node> level;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto& b = branches[i];
        if (b.lo < b.hi) level.push_back({b.lo, b.hi, b.slope, b.offset, {static_cast<int>(i)}});
    }
    std::size_t work = 0;
    for (int depth = 1; depth <= max_period && !level.empty(); ++depth) {
        for (const auto& n : level) {
            if (aiet_detail::is_proper_power(n.word)) continue;
            if (n.S == 1) {
                if (sgn(n.O) == 0) {
                    res.families.push_back({n.lo, n.hi, depth});
                    if (first_only) return res;
                }
                continue;
            }
            Scalar x = n.O / (1 - n.S);
            if (n.lo <= x && x < n.hi && !seen_points.count(x)) {
                seen_points[x] = res.points.size();
                res.points.push_back({x, depth, n.S, n.word});
                if (first_only) return res;
            }
        }
        if (depth == max_period) break;
        std::vector<Node> next;
        for (const auto& n : level) {
            // image of [lo, hi) under the increasing map S x + O
            Scalar ilo = n.S * n.lo + n.O, ihi = n.S * n.hi + n.O;
            for (std::size_t i = 0; i < branches.size(); ++i) {
                const auto& b = branches[i];
                Scalar lo = std::max(ilo, b.lo), hi = std::min(ihi, b.hi);
                if (!(lo < hi)) continue;
                if (++work > max_compositions) {
                    res.truncated = true;
                    goto done;
                }
                Node m;
                m.lo = (lo - n.O) / n.S;
                m.hi = (hi - n.O) / n.S;
                m.S = b.slope * n.S;
                m.O = b.slope * n.O + b.offset;
                m.word = n.word;
                m.word.push_back(static_cast<int>(i));
                next.push_back(std::move(m));
            }
        }
        level = std::move(next);
    }
done:
    std::sort(res.points.begin(), res.points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
    // merge touching families of the same period
    std::sort(res.families.begin(), res.families.end(), [](const auto& a, const auto& b) {
        return a.period != b.period ? a.period < b.period : a.lo < b.lo;
    });
    std::vector<PeriodicFamily> merged;
    for (const auto& f : res.families) {
        if (!merged.empty() && merged.back().period == f.period && merged.back().hi == f.lo) merged.back().hi = f.hi;
        else merged.push_back(f);
    }
    res.families = std::move(merged);
    return res;
}

/// Affine interval exchange of [0, 1): interval i = [breakpoints[i], breakpoints[i+1])
/// is mapped by x -> slopes[i] * x + offsets[i].
class Aiet {
public:
    Aiet() = default;
    Aiet(std::vector<Scalar> breakpoints, std::vector<Scalar> slopes, std::vector<Scalar> offsets)
        : bp_(std::move(breakpoints)), slope_(std::move(slopes)), off_(std::move(offsets))
    {
        check();
    }

    static Aiet from_branches(const std::vector<AffineBranch>& bs)
    {
        std::vector<Scalar> bp, sl, of;
        for (const auto& b : bs) {
            if (bp.empty()) bp.push_back(b.lo);
            else if (bp.back() != b.lo) throw DomainError("branches do not tile the interval");
            bp.push_back(b.hi);
            sl.push_back(b.slope);
            of.push_back(b.offset);
        }
        return Aiet(bp, sl, of);
    }

    /// Interval i has length lengths[i] and image length image_lengths[i]; the images
    /// are stacked from 0 in the order given by `order` (interval indices).
    static Aiet from_lengths(const std::vector<Scalar>& lengths, const std::vector<Scalar>& image_lengths, const std::vector<int>& order)
    {
        std::size_t k = lengths.size();
        if (image_lengths.size() != k || order.size() != k) throw DomainError("inconsistent AIET data");
        std::vector<Scalar> bp{0};
        for (const auto& l : lengths) bp.push_back(bp.back() + l);
        // order[j] = index of the interval placed j-th in the image
        std::vector<Scalar> start(k);
        Scalar acc = 0;
        for (int j : order) {
            start[static_cast<std::size_t>(j)] = acc;
            acc += image_lengths[static_cast<std::size_t>(j)];
        }
        std::vector<Scalar> sl(k), of(k);
        for (std::size_t i = 0; i < k; ++i) {
            sl[i] = image_lengths[i] / lengths[i];
            of[i] = start[i] - sl[i] * bp[i];
        }
        return Aiet(bp, sl, of);
    }

    std::size_t size() const { return slope_.size(); }
    const std::vector<Scalar>& breakpoints() const { return bp_; }
    const std::vector<Scalar>& slopes() const { return slope_; }
    const std::vector<Scalar>& offsets() const { return off_; }

    std::size_t interval_of(const Scalar& x) const
    {
        if (sgn(x) < 0 || x >= 1) throw DomainError("point outside [0, 1)");
        auto it = std::upper_bound(bp_.begin(), bp_.end(), x);
        return static_cast<std::size_t>(it - bp_.begin()) - 1;
    }

    /// Right-continuous at breakpoints.
    Scalar operator()(const Scalar& x) const
    {
        std::size_t i = interval_of(x);
        return slope_[i] * x + off_[i];
    }

    Scalar inverse(const Scalar& y) const
    {
        for (std::size_t i = 0; i < size(); ++i) {
            Scalar lo = slope_[i] * bp_[i] + off_[i], hi = slope_[i] * bp_[i + 1] + off_[i];
            if (lo <= y && y < hi) return (y - off_[i]) / slope_[i];
        }
        throw DomainError("point outside [0, 1)");
    }

    std::vector<AffineBranch> branches() const
    {
        std::vector<AffineBranch> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back({bp_[i], bp_[i + 1], slope_[i], off_[i]});
        return out;
    }

    bool is_isometric() const
    {
        return std::all_of(slope_.begin(), slope_.end(), [](const Scalar& s) { return s == 1; });
    }

private:
    void check() const
    {
        if (bp_.size() < 2 || slope_.size() + 1 != bp_.size() || off_.size() != slope_.size())
            throw DomainError("AIET needs k + 1 breakpoints and k slopes and offsets");
        if (sgn(bp_.front()) != 0 || bp_.back() != 1) throw DomainError("AIET breakpoints must run from 0 to 1");
        for (std::size_t i = 0; i + 1 < bp_.size(); ++i)
            if (!(bp_[i] < bp_[i + 1])) throw DomainError("AIET breakpoints must increase");
        std::vector<std::pair<Scalar, Scalar>> img;
        for (std::size_t i = 0; i < slope_.size(); ++i) {
            if (sgn(slope_[i]) <= 0) throw DomainError("AIET slopes must be positive");
            img.push_back({slope_[i] * bp_[i] + off_[i], slope_[i] * bp_[i + 1] + off_[i]});
        }
        std::sort(img.begin(), img.end());
        Scalar at = 0;
        for (const auto& [lo, hi] : img) {
            if (lo != at) throw DomainError("AIET images do not tile [0, 1)");
            at = hi;
        }
        if (at != 1) throw DomainError("AIET images do not tile [0, 1)");
    }

    std::vector<Scalar> bp_, slope_, off_;
};

/// x -> base(x) + t mod 1.
struct AietFamily {
    Aiet base;

    Aiet member(Scalar t) const
    {
        t -= Scalar(mpz_class(floor_of(t)));
        std::vector<AffineBranch> out;
        for (const auto& b : base.branches()) {
            Scalar ylo = b.apply(b.lo) + t, yhi = b.apply(b.hi) + t;
            if (ylo >= 1) out.push_back({b.lo, b.hi, b.slope, b.offset + t - 1});
            else if (yhi <= 1) out.push_back({b.lo, b.hi, b.slope, b.offset + t});
            else {
                Scalar cut = (1 - b.offset - t) / b.slope;
                out.push_back({b.lo, cut, b.slope, b.offset + t});
                out.push_back({cut, b.hi, b.slope, b.offset + t - 1});
            }
        }
        return Aiet::from_branches(out);
    }

private:
    static mpz_class floor_of(const Scalar& t)
    {
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
        return q;
    }
};

/// The return map as an AIET on the unit-normalised transversal.
inline Aiet from_return_map(const PiecewiseAffineReturnMap& m)
{
    std::vector<AffineBranch> bs;
    for (const auto& b : m.branches) {
        if (b.kind != ReturnBranch::Kind::Resolved) throw DomainError("return map has unresolved branches");
        bs.push_back({b.lo, b.hi, b.slope, b.offset});
    }
    return Aiet::from_branches(bs);
}

inline PeriodicSearch periodic_points(const Aiet& T, int max_period = 64, bool first_only = false)
{
    return periodic_points(T.branches(), max_period, first_only);
}

struct DensitySweep {
    std::vector<Scalar> grid;
    std::vector<char> periodic;   ///< per grid parameter
    std::vector<char> truncated;  ///< search budget ran out at that parameter
    Scalar step, window;
    int max_period = 64;
    std::size_t windows = 0, windows_covered = 0;
    Scalar largest_empty;  ///< longest run of grid parameters without a find, times step
    double coverage() const { return windows == 0 ? 0.0 : static_cast<double>(windows_covered) / static_cast<double>(windows); }
};

/// Tests the family member at every t = k * step in [0, 1). A window is every
/// cyclic run of grid parameters spanning `window`.
inline DensitySweep density_sweep(const AietFamily& F, const Scalar& step, const Scalar& window, int max_period = 64,
                                  unsigned workers = 1)
{
    if (!(sgn(step) > 0 && step < window)) throw DomainError("density sweep needs 0 < step < window");
    DensitySweep r;
    r.step = step;
    r.window = window;
    r.max_period = max_period;
    for (Scalar t = 0; t < 1; t += step) r.grid.push_back(t);
    std::size_t n = r.grid.size();
    r.periodic.assign(n, 0);
    r.truncated.assign(n, 0);
    parallel_for(n, workers, [&](std::size_t i) {
        auto res = periodic_points(F.member(r.grid[i]).branches(), max_period, true);
        r.periodic[i] = !res.empty();
        r.truncated[i] = res.truncated;
    });
    // grid points per window
    mpz_class per;
    Scalar q = window / step;
    mpz_fdiv_q(per.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    std::size_t w = std::max<std::size_t>(1, per.get_ui());
    std::size_t longest = 0, run = 0;
    bool any = std::any_of(r.periodic.begin(), r.periodic.end(), [](char c) { return c != 0; });
    if (!any) longest = n;
    else
        for (std::size_t k = 0; k < 2 * n; ++k) {
            if (r.periodic[k % n]) run = 0;
            else longest = std::max(longest, ++run);
        }
    longest = std::min(longest, n);
    r.windows = n;
    for (std::size_t s = 0; s < n; ++s) {
        bool hit = false;
        for (std::size_t k = 0; k < w && !hit; ++k) hit = r.periodic[(s + k) % n];
        r.windows_covered += hit;
    }
    r.largest_empty = step * static_cast<long>(longest);
    return r;
}

}  // namespace dilatone
