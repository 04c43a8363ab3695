#include "radplan/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace radplan {

namespace {

constexpr double kHQuadTol = 1e-10;
constexpr double kTailCutoff = 1e12;
constexpr double kDecadeIncrementFloor = 1e-14;

double model_log_h(double u) { return u; }
double model_log_g(double u) { return u * std::log(u); }

}  // namespace

NonlinearityPair NonlinearityPair::model_log() {
    NonlinearityPair p;
    p.h = model_log_h;
    p.g = model_log_g;
    p.s0 = 1.0;
    p.kind = PairKind::ModelLog;
    return p;
}

NonlinearityPair NonlinearityPair::power(double pe, double qe, double s0) {
    NonlinearityPair p;
    p.h = [pe](double u) { return std::pow(u, pe); };
    p.g = [qe, s0](double u) { return std::pow(u, qe) - std::pow(s0, qe); };
    p.s0 = s0;
    p.kind = PairKind::PowerPair;
    return p;
}

NonlinearityPair NonlinearityPair::custom(ScalarFn h, ScalarFn g, double s0) {
    NonlinearityPair p;
    p.h = std::move(h);
    p.g = std::move(g);
    p.s0 = s0;
    p.kind = PairKind::Custom;
    return p;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate_pair(const NonlinearityPair& pair, int sample_count,
                               double s_max) {
    if (sample_count < 8) throw std::invalid_argument("sample_count must be >= 8");
    if (!(s_max > pair.s0)) throw std::invalid_argument("s_max must exceed s0");

    constexpr double zero_tol = 1e-9;
    ValidationReport rep;

    auto add = [&rep](std::string name, bool ok, bool advisory, double sample,
                      double value, std::string detail) {
        rep.checks.push_back({std::move(name), ok, advisory, sample, value,
                              std::move(detail)});
    };

    // h(0) = 0
    {
        double v = pair.h(0.0);
        bool ok = std::isfinite(v) && std::fabs(v) <= zero_tol;
        add("h(0)=0", ok, false, 0.0, v, ok ? "" : "h(0) not zero");
    }

    // h > 0 and nondecreasing on (0, s_max]
    {
        bool pos_ok = true, mono_ok = true;
        double pos_s = 0, pos_v = 0, mono_s = 0, mono_v = 0;
        double prev = 0.0;
        for (int i = 1; i <= sample_count; ++i) {
            double s = s_max * i / sample_count;
            double v = pair.h(s);
            if (pos_ok && (!std::isfinite(v) || v <= 0.0)) {
                pos_ok = false;
                pos_s = s;
                pos_v = v;
            }
            if (mono_ok && std::isfinite(v) && v < prev - zero_tol) {
                mono_ok = false;
                mono_s = s;
                mono_v = v;
            }
            if (std::isfinite(v)) prev = v;
        }
        add("h>0 on (0,s_max]", pos_ok, false, pos_s, pos_v,
            pos_ok ? "" : "h not positive");
        add("h nondecreasing", mono_ok, false, mono_s, mono_v,
            mono_ok ? "" : "h decreases");
    }

    // g(s0) = 0 within tolerance (scaled by a nearby magnitude of g)
    {
        double v = pair.g(pair.s0);
        double scale = std::max(1.0, std::fabs(pair.g(std::min(s_max, 2.0 * pair.s0))));
        bool ok = std::isfinite(v) && std::fabs(v) <= zero_tol * scale;
        add("g(s0)=0", ok, false, pair.s0, v, ok ? "" : "g(s0) not zero");
    }

    // g < 0 on (0, s0)
    {
        bool ok = true;
        double bad_s = 0, bad_v = 0;
        for (int i = 1; i < sample_count; ++i) {
            double s = pair.s0 * i / sample_count;
            double v = pair.g(s);
            if (!std::isfinite(v) || v >= 0.0) {
                ok = false;
                bad_s = s;
                bad_v = v;
                break;
            }
        }
        add("g<0 on (0,s0)", ok, false, bad_s, bad_v, ok ? "" : "g not negative");
    }

    // g > 0 and nondecreasing on (s0, s_max]
    {
        bool pos_ok = true, mono_ok = true;
        double pos_s = 0, pos_v = 0, mono_s = 0, mono_v = 0;
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 1; i <= sample_count; ++i) {
            double s = pair.s0 + (s_max - pair.s0) * i / sample_count;
            double v = pair.g(s);
            if (pos_ok && (!std::isfinite(v) || v <= 0.0)) {
                pos_ok = false;
                pos_s = s;
                pos_v = v;
            }
            if (mono_ok && std::isfinite(v) && v < prev - zero_tol) {
                mono_ok = false;
                mono_s = s;
                mono_v = v;
            }
            if (std::isfinite(v)) prev = v;
        }
        add("g>0 on (s0,s_max]", pos_ok, false, pos_s, pos_v,
            pos_ok ? "" : "g not positive above s0");
        add("g nondecreasing above s0", mono_ok, false, mono_s, mono_v,
            mono_ok ? "" : "g decreases above s0");
    }

    // Advisory: g(s) -> 0 as s -> 0+. Not gating, see header.
    {
        double probe = pair.s0 * 1e-9;
        double v = pair.g(probe);
        bool ok = std::isfinite(v) && std::fabs(v) <= 1e-6;
        add("g->0 at origin (advisory)", ok, true, probe, v,
            ok ? "" : "g does not vanish near the origin");
    }

    rep.passed = true;
    for (const auto& c : rep.checks)
        if (!c.advisory && !c.passed) rep.passed = false;
    return rep;
}

namespace detail {

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double m, double fm, double whole,
                     double abs_tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(a, fa, m, fm, flm);
    double right = simpson(m, fm, b, fb, frm);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * abs_tol)
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * abs_tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * abs_tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b);
    double m = 0.5 * (a + b);
    double fm = f(m);
    double whole = simpson(a, fa, b, fb, fm);
    double abs_tol = rel_tol * std::max(std::fabs(whole), 1e-300);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, abs_tol, 48);
}

}  // namespace detail

namespace {

// Integrand 1/(h+g) with the domain guard required by condition O machinery.
std::function<double(double)> h_integrand(const NonlinearityPair& pair) {
    return [&pair](double t) {
        double denom = pair.h(t) + pair.g(t);
        if (!std::isfinite(denom) || denom <= 0.0)
            throw std::domain_error(
                "h(t)+g(t) <= 0 at t=" + std::to_string(t) +
                "; u0 below admissible range");
        return 1.0 / denom;
    };
}

// Integrates 1/(h+g) over [lo, hi] splitting at decade boundaries so the
// adaptive recursion never faces a 12-orders-of-magnitude span at once.
double integrate_decades(const NonlinearityPair& pair, double lo, double hi) {
    auto f = h_integrand(pair);
    double total = 0.0;
    double left = lo;
    while (left < hi) {
        double right = std::min(hi, std::max(left * 10.0, left + 1.0));
        total += detail::adaptive_simpson(f, left, right, kHQuadTol);
        left = right;
    }
    return total;
}

}  // namespace

HTransform::HTransform(NonlinearityPair p, double u0_value)
    : pair(std::move(p)), u0(u0_value) {
    if (!(u0 >= pair.s0))
        throw std::invalid_argument("HTransform requires u0 >= s0");
    auto f = h_integrand(pair);
    double total = 0.0;
    double left = u0;
    bool finite = false;
    while (left < kTailCutoff) {
        double right = std::min(kTailCutoff, std::max(left * 10.0, left + 1.0));
        double inc = detail::adaptive_simpson(f, left, right, kHQuadTol);
        total += inc;
        if (right >= 10.0 * u0 && inc < kDecadeIncrementFloor) {
            finite = true;
            break;
        }
        left = right;
    }
    h_infinity = finite ? total : std::numeric_limits<double>::infinity();
}

double eval_H(const HTransform& ht, double s) {
    if (!(s >= ht.u0))
        throw std::invalid_argument("eval_H requires s >= u0");
    if (s == ht.u0) return 0.0;
    return integrate_decades(ht.pair, ht.u0, s);
}

double eval_H_inv(const HTransform& ht, double y) {
    if (!(y >= 0.0)) throw std::invalid_argument("eval_H_inv requires y >= 0");
    if (y == 0.0) return ht.u0;
    if (y >= ht.h_infinity)
        throw std::range_error(
            "eval_H_inv: y beyond guaranteed existence envelope (H(inf) finite)");

    // Expand the bracket until H(hi) >= y. H is strictly increasing.
    double lo = ht.u0, h_lo = 0.0;
    double hi = ht.u0 + 1.0;
    double h_hi = eval_H(ht, hi);
    while (h_hi < y) {
        lo = hi;
        h_lo = h_hi;
        hi *= 2.0;
        if (hi > 1e300)
            throw std::range_error(
                "eval_H_inv: preimage beyond double range");
        h_hi += integrate_decades(ht.pair, lo, hi);
    }

    const double tol = 1e-10 * std::max(1.0, y);
    auto f = h_integrand(ht.pair);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double h_mid = h_lo + detail::adaptive_simpson(f, lo, mid, kHQuadTol);
        if (std::fabs(h_mid - y) <= tol &&
            (hi - lo) <= 1e-12 * std::max(1.0, mid))
            return mid;
        if (h_mid < y) {
            lo = mid;
            h_lo = h_mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= std::numeric_limits<double>::epsilon() * std::fabs(mid))
            return mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace radplan
