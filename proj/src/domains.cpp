#include "equistab/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "equistab/spectral.hpp"

namespace equistab {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::pair<double, double> gamma_curve(double s) {
    if (s < 1.0 || s >= 3.0)
        throw std::runtime_error("gamma_curve: s must lie in [1, 3)");
    if (s == 1.0) return {0.0, 0.0};
    const double sn = std::sin(s * kPi / 3.0);
    const double a = (s * s - 1.0) * (1.0 + std::cos(s * kPi / 3.0)) / (2.0 * s * sn);
    const double b = (s * s - 1.0) / (s * sn);
    return {a, b};
}

double psi(double b) {
    if (b <= 0.0) throw std::runtime_error("psi: b must be positive");
    // gamma_2 is monotone increasing on [1,3) with range [0, inf)
    double lo = 1.0, hi = 3.0 - 1e-13;
    if (gamma_curve(hi).second < b) return gamma_curve(hi).first;  // b beyond range
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_curve(mid).second < b) lo = mid;
        else hi = mid;
    }
    return gamma_curve(0.5 * (lo + hi)).first;
}

bool in_domain(const std::string& label, double a, double b) {
    if (a <= 0.0 || b <= 0.0) return false;
    if (label == "-Z4c" || label == "-Z3t") return a < b;
    if (label == "+Z4c") return 2.0 * a < b;
    if (label == "+Z3t") return a < psi(b);
    throw std::runtime_error("in_domain: group " + label + " has no Table-2 row");
}

namespace {

const std::vector<std::pair<double, double>>& gamma_polyline() {
    static const std::vector<std::pair<double, double>> poly = [] {
        std::vector<std::pair<double, double>> p;
        const int n = 4000;
        for (int i = 0; i <= n; ++i) {
            const double s = 1.0 + (3.0 - 1e-6 - 1.0) * i / n;
            p.push_back(gamma_curve(s));
        }
        return p;
    }();
    return poly;
}

double dist_point_segment(double px, double py, std::pair<double, double> s0,
                          std::pair<double, double> s1) {
    const double vx = s1.first - s0.first, vy = s1.second - s0.second;
    const double wx = px - s0.first, wy = py - s0.second;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (s0.first + t * vx), dy = py - (s0.second + t * vy);
    return std::hypot(dx, dy);
}

}  // namespace

double boundary_distance(const std::string& label, double a, double b) {
    if (label == "-Z4c" || label == "-Z3t")
        return std::abs(b - a) / std::sqrt(2.0);
    if (label == "+Z4c")
        return std::abs(b - 2.0 * a) / std::sqrt(5.0);
    if (label == "+Z3t") {
        const auto& poly = gamma_polyline();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < poly.size(); ++i)
            best = std::min(best, dist_point_segment(a, b, poly[i], poly[i + 1]));
        return best;
    }
    throw std::runtime_error("boundary_distance: group " + label + " has no Table-2 row");
}

std::vector<DomainSample> sample_domain(const std::string& label, double amax,
                                        double bmax, int n, int jobs) {
    std::vector<DomainSample> out;
    if (n <= 0) return out;
    out.resize(static_cast<std::size_t>(n) * n);
    const double k = bifurcation_k(label);
    const SymGroup h = named_group(label);

    auto work = [&](int begin, int end) {
        for (int idx = begin; idx < end; ++idx) {
            const int i = idx / n, j = idx % n;
            DomainSample& s = out[idx];
            s.a = amax * (i + 1) / n;
            s.b = bmax * (j + 1) / n;
            s.inside = in_domain(label, s.a, s.b);
            s.boundary_dist = boundary_distance(label, s.a, s.b);
            const Params p{k * s.a, s.a, s.b};
            try {
                const CharSystem cs = char_system_eq2(p, h, 2.0 * kPi);
                int unstable = 0;
                for (const auto& row : cs.rows)
                    unstable += count_unstable_roots(row).unstable;
                s.unstable = unstable;
                s.agree = (s.boundary_dist <= 0.02) || (s.inside == (unstable == 0));
            } catch (const std::exception&) {
                s.unstable = -1;
                s.agree = s.boundary_dist <= 0.02;
            }
        }
    };

    int nthreads = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::max(1, std::min<int>(nthreads, n * n));
    if (nthreads == 1) {
        work(0, n * n);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n * n + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back(work, t * chunk, std::min(n * n, (t + 1) * chunk));
        for (auto& t : pool) t.join();
    }
    return out;
}

bool self_intersects(const std::vector<std::pair<double, double>>& polyline) {
    auto orient = [](std::pair<double, double> a, std::pair<double, double> b,
                     std::pair<double, double> c) {
        return (b.first - a.first) * (c.second - a.second) -
               (b.second - a.second) * (c.first - a.first);
    };
    auto segments_cross = [&](std::pair<double, double> a, std::pair<double, double> b,
                              std::pair<double, double> c, std::pair<double, double> d) {
        const double o1 = orient(a, b, c), o2 = orient(a, b, d);
        const double o3 = orient(c, d, a), o4 = orient(c, d, b);
        return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
    };
    const std::size_t m = polyline.size();
    for (std::size_t i = 0; i + 1 < m; ++i)
        for (std::size_t j = i + 2; j + 1 < m; ++j)
            if (segments_cross(polyline[i], polyline[i + 1], polyline[j], polyline[j + 1]))
                return true;
    return false;
}

}  // namespace equistab
