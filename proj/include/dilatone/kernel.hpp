#pragma once
// Exact planar kernel: rationals, points, directions, dilation maps and the
// sign-exact predicates everything else is built on.

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace dilatone {

using Scalar = mpq_class;

/// Error raised for violated domain preconditions (exit code 1 in the CLI).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline int sign(const Scalar& s) { return sgn(s); }

inline Scalar parse_scalar(std::string_view text)
{
    std::string s(text);
    auto trim = [](std::string& t) {
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    };
    trim(s);
    if (s.empty()) throw DomainError("empty rational literal");
    // decimal literals ("0.25", "-1.5e-3") are converted exactly
    if (s.find_first_of(".eE") != std::string::npos && s.find('/') == std::string::npos) {
        std::size_t epos = s.find_first_of("eE");
        std::string mant = s.substr(0, epos);
        long exp10 = 0;
        if (epos != std::string::npos) exp10 = std::stol(s.substr(epos + 1));
        bool neg = !mant.empty() && mant[0] == '-';
        if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) mant.erase(0, 1);
        std::size_t dot = mant.find('.');
        std::string digits = mant;
        if (dot != std::string::npos) {
            exp10 -= static_cast<long>(mant.size() - dot - 1);
            digits = mant.substr(0, dot) + mant.substr(dot + 1);
        }
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw DomainError("malformed rational literal '" + s + "'");
        mpz_class num(digits, 10);
        mpz_class ten = 10, pw;
        mpz_pow_ui(pw.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(exp10)));
        Scalar q = exp10 >= 0 ? Scalar(num * pw) : Scalar(num, pw);
        q.canonicalize();
        return neg ? Scalar(-q) : q;
    }
    for (char c : s)
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+'))
            throw DomainError("malformed rational literal '" + s + "'");
    Scalar q;
    if (q.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0) throw DomainError("malformed rational literal '" + s + "'");
    if (q.get_den() == 0) throw DomainError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

/// Canonical a/b; the two-argument mpq_class constructor does not reduce.
inline Scalar frac(long a, long b)
{
    if (b == 0) throw DomainError("zero denominator");
    Scalar q(a, b);
    q.canonicalize();
    return q;
}

inline std::string format_scalar(const Scalar& s) { return s.get_str(); }

inline double to_double(const Scalar& s) { return s.get_d(); }

/// Best rational approximation of a finite double within `tol` (continued fractions).
inline Scalar rationalize(double x, double tol = 1e-15)
{
    if (!std::isfinite(x)) throw DomainError("cannot rationalize a non-finite value");
    mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(r);
        mpz_class a(fl);
        mpz_class h2 = a * h1 + h0, k2 = a * k1 + k0;
        h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        Scalar approx(h1, k1);
        approx.canonicalize();
        if (std::fabs(approx.get_d() - x) <= tol) return approx;
        double frac = r - fl;
        if (frac < 1e-300) break;
        r = 1.0 / frac;
    }
    Scalar approx(h1, k1);
    approx.canonicalize();
    return approx;
}

/// Exact square root when the rational is a perfect square.
inline std::optional<Scalar> exact_sqrt(const Scalar& s)
{
    if (s < 0) return std::nullopt;
    const mpz_class& n = s.get_num();
    const mpz_class& d = s.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return std::nullopt;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    Scalar r(rn, rd);
    r.canonicalize();
    return r;
}

struct Point {
    Scalar x, y;

    Point() = default;
    Point(Scalar x_, Scalar y_) : x(std::move(x_)), y(std::move(y_)) {}
    Point(long x_, long y_) : x(x_), y(y_) {}

    friend Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator-(const Point& a) { return {-a.x, -a.y}; }
    friend Point operator*(const Scalar& s, const Point& a) { return {s * a.x, s * a.y}; }
    friend Point operator*(const Point& a, const Scalar& s) { return {s * a.x, s * a.y}; }
    friend Point operator/(const Point& a, const Scalar& s) { return {a.x / s, a.y / s}; }
    friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
    friend bool operator<(const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }
    friend std::ostream& operator<<(std::ostream& os, const Point& p)
    {
        return os << '(' << p.x.get_str() << ", " << p.y.get_str() << ')';
    }
};

using Vector = Point;

inline Scalar cross(const Vector& a, const Vector& b) { return a.x * b.y - a.y * b.x; }
inline Scalar dot(const Vector& a, const Vector& b) { return a.x * b.x + a.y * b.y; }
inline Scalar norm2(const Vector& a) { return dot(a, a); }
inline double length(const Vector& a) { return std::sqrt(norm2(a).get_d()); }
inline Vector rot90(const Vector& a) { return {-a.y, a.x}; }
inline bool is_zero(const Vector& a) { return sgn(a.x) == 0 && sgn(a.y) == 0; }

/// A point of the circle of directions, represented by any nonzero vector;
/// equality is up to positive scaling.
class Direction {
public:
    Direction() : v_(1, 0) {}
    explicit Direction(Vector v) : v_(std::move(v))
    {
        if (is_zero(v_)) throw DomainError("zero direction vector");
    }
    Direction(long dx, long dy) : Direction(Vector(dx, dy)) {}
    Direction(Scalar dx, Scalar dy) : Direction(Vector(std::move(dx), std::move(dy))) {}

    const Vector& vec() const { return v_; }
    const Scalar& dx() const { return v_.x; }
    const Scalar& dy() const { return v_.y; }

    Direction opposite() const { return Direction(-v_); }
    double angle() const
    {
        double a = std::atan2(v_.y.get_d(), v_.x.get_d());
        return a < 0 ? a + 2 * std::numbers::pi : a;
    }
    /// Canonical representative: primitive integer vector.
    Vector primitive() const
    {
        mpz_class l = lcm(v_.x.get_den(), v_.y.get_den());
        mpz_class a = mpz_class(v_.x * l), b = mpz_class(v_.y * l);
        mpz_class g = gcd(a, b);
        return {Scalar(a / g), Scalar(b / g)};
    }

    friend bool operator==(const Direction& a, const Direction& b)
    {
        return sgn(cross(a.v_, b.v_)) == 0 && sgn(dot(a.v_, b.v_)) > 0;
    }
    friend bool operator!=(const Direction& a, const Direction& b) { return !(a == b); }

private:
    Vector v_;
};

/// 0 for angles in [0, pi), 1 for [pi, 2pi).
inline int half_plane(const Vector& v) { return (sgn(v.y) > 0 || (sgn(v.y) == 0 && sgn(v.x) > 0)) ? 0 : 1; }

/// Exact comparison of polar angles in [0, 2pi).
inline int compare_angle(const Vector& a, const Vector& b)
{
    int ha = half_plane(a), hb = half_plane(b);
    if (ha != hb) return ha < hb ? -1 : 1;
    return -sgn(cross(a, b));
}

/// True when `d` lies on the closed counterclockwise arc from `from` to `to`.
/// A degenerate arc (from == to) is the single direction.
inline bool in_ccw_arc(const Vector& d, const Vector& from, const Vector& to)
{
    auto rel = [&](const Vector& v) {
        // angle of v measured from `from`, as a comparable pair
        Vector r{dot(v, from), -cross(v, from)};
        return r;
    };
    Vector rd = rel(d), rt = rel(to);
    return compare_angle(rd, rt) <= 0;
}

/// A rational direction strictly inside the open counterclockwise arc (from, to).
inline Vector direction_between(const Vector& from, const Vector& to)
{
    Scalar c = cross(from, to);
    if (sgn(c) > 0) {
        Scalar nf = norm2(from), nt = norm2(to);
        return from * nt + to * nf; // both weights positive
    }
    if (sgn(c) == 0 && sgn(dot(from, to)) < 0) return rot90(from);
    if (sgn(c) == 0) return -from;  // from == to: the arc is the whole circle
    // reflex arc: go through the opposite of the bisector of the short arc
    Vector mid = from * norm2(to) + to * norm2(from);
    if (is_zero(mid)) return rot90(from);
    return -mid;
}

inline int orient2d(const Point& p, const Point& q, const Point& r) { return sgn(cross(q - p, r - p)); }

inline int incircle(const Point& a, const Point& b, const Point& c, const Point& d)
{
    int o = orient2d(a, b, c);
    if (o == 0) throw DomainError("degenerate triangle");
    Scalar adx = a.x - d.x, ady = a.y - d.y;
    Scalar bdx = b.x - d.x, bdy = b.y - d.y;
    Scalar cdx = c.x - d.x, cdy = c.y - d.y;
    Scalar det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                 (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    return o * sgn(det);
}

struct Circle {
    Point center;
    Scalar radius2;
};

inline Circle circumcircle(const Point& a, const Point& b, const Point& c)
{
    Vector ab = b - a, ac = c - a;
    Scalar d = 2 * cross(ab, ac);
    if (sgn(d) == 0) throw DomainError("degenerate triangle");
    Scalar nb = norm2(ab), nc = norm2(ac);
    Vector off{(ac.y * nb - ab.y * nc) / d, (ab.x * nc - ac.x * nb) / d};
    return {a + off, norm2(off)};
}

/// z -> a z + b with a > 0.
struct DilationMap {
    Scalar a{1};
    Vector b{0, 0};

    DilationMap() = default;
    DilationMap(Scalar a_, Vector b_) : a(std::move(a_)), b(std::move(b_))
    {
        if (sgn(a) <= 0) throw DomainError("dilation ratio must be positive");
    }

    Point operator()(const Point& p) const { return a * p + b; }
    Vector linear(const Vector& v) const { return a * v; }
    bool is_identity() const { return a == 1 && is_zero(b); }

    friend bool operator==(const DilationMap& m, const DilationMap& n) { return m.a == n.a && m.b == n.b; }
};

/// compose(m1, m2)(p) == m1(m2(p)).
inline DilationMap compose(const DilationMap& m1, const DilationMap& m2) { return {m1.a * m2.a, m1.a * m2.b + m1.b}; }

inline DilationMap invert(const DilationMap& m)
{
    Scalar inv = 1 / m.a;
    return {inv, -(m.b * inv)};
}

inline Point apply_dilation(const DilationMap& m, const Point& p) { return m(p); }

/// The dilation taking p0 -> q0 and p1 -> q1, when it exists with positive ratio.
/// Returns the (possibly non-positive) ratio in `ratio` when the segments are parallel.
inline std::optional<DilationMap> dilation_between(const Point& p0, const Point& p1, const Point& q0, const Point& q1,
                                                   std::optional<Scalar>* ratio = nullptr)
{
    Vector u = p1 - p0, v = q1 - q0;
    if (is_zero(u) || sgn(cross(u, v)) != 0) return std::nullopt;
    Scalar a = sgn(u.x) != 0 ? Scalar(v.x / u.x) : Scalar(v.y / u.y);
    if (ratio) *ratio = a;
    if (sgn(a) <= 0) return std::nullopt;
    return DilationMap(a, q0 - a * p0);
}

struct RayHit {
    Point point;
    Scalar param;      ///< ray parameter t >= 0, hit = origin + t * dir
    Scalar seg_param;  ///< position along the segment in [0, 1]
    int endpoint = -1; ///< 0 or 1 when the hit is a segment endpoint
};

inline std::optional<RayHit> ray_hits_segment(const Point& origin, const Direction& dir, const Point& p, const Point& q)
{
    if (p == q) throw DomainError("segment endpoints coincide");
    const Vector& d = dir.vec();
    Vector e = q - p;
    Scalar den = cross(d, e);
    Vector w = p - origin;
    if (sgn(den) == 0) {
        if (sgn(cross(w, d)) == 0) throw DomainError("ray-in-segment-line");
        return std::nullopt;
    }
    Scalar t = cross(w, e) / den;
    Scalar s = cross(w, d) / den;
    if (sgn(t) < 0 || sgn(s) < 0 || s > 1) return std::nullopt;
    RayHit h{origin + t * d, t, s, -1};
    if (sgn(s) == 0) h.endpoint = 0;
    else if (s == 1) h.endpoint = 1;
    return h;
}

/// Counterclockwise angle in [0, 2pi) from u to v.
inline double ccw_angle(const Vector& u, const Vector& v)
{
    double a = std::atan2(cross(u, v).get_d(), dot(u, v).get_d());
    return a < 0 ? a + 2 * std::numbers::pi : a;
}

/// Exact tan(theta/2) for the counterclockwise angle theta from u to v, when
/// |u||v| is rational; nullopt otherwise or when theta = pi.
inline std::optional<Scalar> exact_half_tan(const Vector& u, const Vector& v)
{
    auto r = exact_sqrt(norm2(u) * norm2(v));
    if (!r) return std::nullopt;
    Scalar den = *r + dot(u, v);
    if (sgn(den) == 0) return std::nullopt;
    return Scalar(cross(u, v) / den);
}

}  // namespace dilatone
