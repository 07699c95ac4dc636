#include "equistab/ddesolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "equistab/spectral.hpp"

namespace equistab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kOverflowGuard = 1e6;
}

// ------------------------------------------------------------- HistoryBuffer

void HistoryBuffer::append(double t, Eigen::VectorXd y, Eigen::VectorXd dy) {
    if (!times_.empty() && t <= times_.back())
        throw std::runtime_error("HistoryBuffer: knots must be strictly increasing");
    times_.push_back(t);
    states_.push_back(std::move(y));
    derivs_.push_back(std::move(dy));
}

std::size_t HistoryBuffer::segment(double t) const {
    if (times_.size() < 2) throw std::runtime_error("HistoryBuffer: too few knots");
    if (t < times_.front() - 1e-9 || t > times_.back() + 1e-9)
        throw std::runtime_error("HistoryBuffer: query time outside stored range");
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::distance(times_.begin(), it));
    if (i == 0) i = 1;
    if (i >= times_.size()) i = times_.size() - 1;
    return i - 1;
}

Eigen::VectorXd HistoryBuffer::eval(double t) const {
    const std::size_t i = segment(t);
    const double h = times_[i + 1] - times_[i];
    const double s = std::clamp((t - times_[i]) / h, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * states_[i] + (s3 - 2 * s2 + s) * h * derivs_[i] +
           (-2 * s3 + 3 * s2) * states_[i + 1] + (s3 - s2) * h * derivs_[i + 1];
}

Eigen::VectorXd HistoryBuffer::eval_derivative(double t) const {
    const std::size_t i = segment(t);
    const double h = times_[i + 1] - times_[i];
    const double s = std::clamp((t - times_[i]) / h, 0.0, 1.0);
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * states_[i] / h + (3 * s2 - 4 * s + 1) * derivs_[i] +
            (-6 * s2 + 6 * s) * states_[i + 1] / h + (3 * s2 - 2 * s) * derivs_[i + 1]);
}

HistoryBuffer HistoryBuffer::tail(double span) const {
    if (times_.empty()) throw std::runtime_error("HistoryBuffer: empty");
    const double t0 = times_.back() - span;
    HistoryBuffer out;
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (times_[i] < t0 - 1e-12 &&
            !(i + 1 < times_.size() && times_[i + 1] >= t0 - 1e-12))
            continue;
        if (times_[i] < t0 - 1e-12) continue;
        out.append(times_[i] - times_.back(), states_[i], derivs_[i]);
    }
    // make sure the tail covers the full span
    if (out.times_.empty() || out.times_.front() > -span + 1e-9) {
        out = HistoryBuffer{};
        bool started = false;
        for (std::size_t i = 0; i < times_.size(); ++i) {
            if (!started && i + 1 < times_.size() && times_[i + 1] > t0) started = true;
            if (!started && times_[i] < t0) continue;
            out.append(times_[i] - times_.back(), states_[i], derivs_[i]);
        }
    }
    return out;
}

// ----------------------------------------------------------------- integrate

namespace {

Trajectory integrate_impl(const DdeSystem& sys, HistoryBuffer buf, double t_end, double h) {
    if (h <= 0.0) throw std::runtime_error("integrate: step must be positive");
    double tau_min = 0.0;
    for (double tau : sys.delays) {
        if (tau < 0.0) throw std::runtime_error("integrate: negative delay");
        tau_min = tau_min == 0.0 ? tau : std::min(tau_min, tau);
    }
    if (!sys.delays.empty() && tau_min > 0.0 && h > tau_min)
        throw std::runtime_error("integrate: step exceeds the smallest delay");

    Trajectory traj;
    traj.dense = std::move(buf);
    HistoryBuffer& hist = traj.dense;

    auto delayed_at = [&](double t) {
        std::vector<Eigen::VectorXd> d;
        d.reserve(sys.delays.size());
        for (double tau : sys.delays) d.push_back(hist.eval(t - tau));
        return d;
    };

    double t = hist.t_back();
    Eigen::VectorXd y = hist.knot_state(hist.knots() - 1);
    Eigen::VectorXd k1 = hist.knot_derivative(hist.knots() - 1);
    const double t_stop = t + t_end;
    const long nsteps = std::max<long>(1, std::lround(t_end / h));
    const double step = t_end / static_cast<double>(nsteps);

    for (long n = 0; n < nsteps; ++n) {
        const Eigen::VectorXd k2 =
            sys.rhs(t + step / 2, y + (step / 2) * k1, delayed_at(t + step / 2));
        const Eigen::VectorXd k3 =
            sys.rhs(t + step / 2, y + (step / 2) * k2, delayed_at(t + step / 2));
        const Eigen::VectorXd k4 = sys.rhs(t + step, y + step * k3, delayed_at(t + step));
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = (n + 1 == nsteps) ? t_stop : t + step;
        if (!y.allFinite() || y.lpNorm<Eigen::Infinity>() > kOverflowGuard) {
            traj.unbounded = true;
            break;
        }
        k1 = sys.rhs(t, y, delayed_at(t));
        hist.append(t, y, k1);
    }
    return traj;
}

}  // namespace

Trajectory integrate(const DdeSystem& sys, const std::function<Eigen::VectorXd(double)>& init,
                     const std::function<Eigen::VectorXd(double)>& init_deriv, double t_end,
                     double h) {
    double tau_max = 0.0;
    for (double tau : sys.delays) tau_max = std::max(tau_max, tau);
    HistoryBuffer buf;
    if (tau_max > 0.0) {
        const long n = std::max<long>(2, static_cast<long>(std::ceil(tau_max / h)));
        for (long i = 0; i <= n; ++i) {
            const double t = -tau_max + tau_max * static_cast<double>(i) / n;
            buf.append(t, init(t), init_deriv(t));
        }
    } else {
        buf.append(-h, init(-h), init_deriv(-h));
        buf.append(0.0, init(0.0), init_deriv(0.0));
    }
    return integrate_impl(sys, std::move(buf), t_end, h);
}

Trajectory integrate(const DdeSystem& sys, const HistoryBuffer& history, double t_end,
                     double h) {
    return integrate_impl(sys, history, t_end, h);
}

// ------------------------------------------------------------- detect_period

std::optional<double> detect_period(const Trajectory& traj, int coord,
                                    double transient_fraction, int crossings) {
    const HistoryBuffer& d = traj.dense;
    if (d.knots() < 4) return std::nullopt;
    const double t0 = d.t_front() + transient_fraction * (d.t_back() - d.t_front());

    std::vector<double> xing;
    for (std::size_t i = 0; i + 1 < d.knots(); ++i) {
        if (d.knot_time(i) < t0) continue;
        const double a = d.knot_state(i)(coord);
        const double b = d.knot_state(i + 1)(coord);
        if (a <= 0.0 && b > 0.0) {
            // bisect on the Hermite interpolant
            double lo = d.knot_time(i), hi = d.knot_time(i + 1);
            for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (d.eval(mid)(coord) <= 0.0) lo = mid;
                else hi = mid;
            }
            xing.push_back(0.5 * (lo + hi));
        }
    }
    if (xing.size() < 3) return std::nullopt;
    const std::size_t k = std::min<std::size_t>(crossings, xing.size() - 1);
    const double span = xing.back() - xing[xing.size() - 1 - k];
    return span / static_cast<double>(k);
}

// --------------------------------------------------------- symmetry residual

double symmetry_residual(const Trajectory& traj, const SymGroup& h, double period) {
    const HistoryBuffer& d = traj.dense;
    if (d.t_back() - d.t_front() < 2.0 * period)
        throw std::runtime_error("symmetry_residual: trajectory shorter than one period");
    const int dim = static_cast<int>(d.knot_state(0).size());
    const int nx = dim == 16 ? 8 : dim;
    if (nx != 8)
        throw std::runtime_error("symmetry_residual: expected an 8- or 16-dim state");

    const double t1 = d.t_back();
    const double t_lo = t1 - period;
    const int samples = 64;
    double worst = 0.0;
    for (const auto& g : h.elements) {
        const Matrix8 m = g.matrix();
        const double shift = g.phase.value() * period;
        for (int i = 0; i <= samples; ++i) {
            const double t = t_lo + (t1 - t_lo) * i / samples;
            const Vector8 xt = d.eval(t).head(8);
            const Vector8 xs = d.eval(t - shift).head(8);
            worst = std::max(worst, (m * xs - xt).lpNorm<Eigen::Infinity>());
        }
    }
    return worst;
}

// --------------------------------------------------------------- full system

DdeSystem full_system(const Params& p, const ControlSpec& spec, double tau) {
    DdeSystem sys;
    sys.dim = 16;
    if (tau > 0.0) sys.delays = {tau};
    sys.rhs = [p, spec](double, const Eigen::VectorXd& y,
                        const std::vector<Eigen::VectorXd>& delayed) {
        const Vector8 x = y.head(8);
        const Vector8 v = y.tail(8);
        const Vector8 vd = delayed.empty() ? v : Vector8(delayed[0].tail(8));
        Eigen::VectorXd out(16);
        out.head(8) = v;
        out.tail(8) = controlled_rhs(p, spec, x, v, vd);
        return out;
    };
    return sys;
}

// ---------------------------------------------------------------- tune_delay

TuneResult tune_delay(const ControlSpec& spec, const Params& p, const HistoryBuffer& init,
                      const TuneSettings& settings) {
    TuneResult res;
    const double t0 = spec.delay_fraction.value();
    double tau = t0 * 2.0 * kPi;

    if (t0 == 0.0 || p.b == 0.0) {
        res.tau = tau;
        res.traj = integrate(full_system(p, spec, t0 == 0.0 ? 0.0 : tau), init,
                             settings.t_end, settings.h);
        if (auto per = detect_period(res.traj, settings.period_coord,
                                     settings.transient_fraction))
            res.period = *per;
        res.converged = true;
        return res;
    }

    HistoryBuffer cur = init;
    for (int it = 0; it < settings.max_iter; ++it) {
        res.iterations = it + 1;
        Trajectory traj = integrate(full_system(p, spec, tau), cur, settings.t_end,
                                    settings.h);
        if (traj.unbounded) {
            res.traj = std::move(traj);
            res.tau = tau;
            return res;
        }
        const auto per =
            detect_period(traj, settings.period_coord, settings.transient_fraction);
        if (!per) {
            res.traj = std::move(traj);
            res.tau = tau;
            return res;  // Inconclusive: no oscillation detected
        }
        const double tau_next = t0 * (*per);
        res.period = *per;
        res.tau = tau_next;
        if (std::abs(tau_next - tau) < settings.tol) {
            traj.period = *per;
            res.traj = std::move(traj);
            res.converged = true;
            return res;
        }
        cur = traj.dense.tail(std::max(4.0 * tau_next, 2.5 * (*per)));
        tau = tau_next;
    }
    return res;
}

// ------------------------------------------------------------- verdict logic

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::StabilizedTarget: return "StabilizedTarget";
        case Outcome::ConvergedOther: return "ConvergedOther";
        case Outcome::Unbounded: return "Unbounded";
        default: return "Inconclusive";
    }
}

ExperimentVerdict stabilization_experiment(const std::string& label, ControlLaw law,
                                           double a, double b, double alpha,
                                           std::uint64_t seed,
                                           const ExperimentSettings& settings) {
    const SymGroup group = named_group(label);
    const double alpha0 = bifurcation_k(label) * a;
    const Params p{alpha, a, b};
    const ControlSpec spec = control_matrix(law, group);

    // seed direction on the center channel satisfying the target symmetry
    Eigen::VectorXcd w;
    const Eigen::MatrixXcd dirs = target_center_directions(group, alpha0, a);
    if (dirs.cols() > 0) {
        w = dirs.col(0);
    } else {
        w = isotypical_basis().q.col(0).cast<Complex>();
    }
    w /= w.norm();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd zeta(8);
    for (int i = 0; i < 8; ++i) zeta(i) = Complex(gauss(rng), gauss(rng));
    zeta /= zeta.norm();

    const double amp =
        settings.seed_amplitude_factor * 2.0 * std::sqrt(std::max(alpha - alpha0, 1e-4));
    const Complex i1(0.0, 1.0);
    auto seed_state = [&](double t) {
        const Complex rot = std::exp(i1 * t);
        Eigen::VectorXd y(16);
        y.head(8) = amp * ((rot * w).real() + settings.transverse_fraction * (rot * zeta).real());
        y.tail(8) =
            amp * ((i1 * rot * w).real() + settings.transverse_fraction * (i1 * rot * zeta).real());
        return y;
    };
    auto seed_deriv = [&](double t) {
        Eigen::VectorXd y = seed_state(t);
        Eigen::VectorXd dy(16);
        dy.head(8) = y.tail(8);
        dy.tail(8) = -y.head(8);
        return dy;
    };

    const double tau_guess = spec.delay_fraction.value() * 2.0 * kPi;
    const double cover = std::max(tau_guess, 2.0 * settings.h);
    HistoryBuffer init;
    const long n = std::max<long>(8, static_cast<long>(std::ceil(cover / settings.h)));
    for (long i = 0; i <= n; ++i) {
        const double t = -cover + cover * static_cast<double>(i) / n;
        init.append(t, seed_state(t), seed_deriv(t));
    }

    TuneSettings ts;
    ts.h = settings.h;
    ts.t_end = settings.t_end;
    ts.transient_fraction = settings.transient_fraction;

    ExperimentVerdict verdict;
    const TuneResult tuned = tune_delay(spec, p, init, ts);
    verdict.tau = tuned.tau;
    verdict.period = tuned.period;
    verdict.tune_iterations = tuned.iterations;

    const Trajectory& traj = tuned.traj;
    if (traj.unbounded) {
        verdict.outcome = Outcome::Unbounded;
        return verdict;
    }
    const double t1 = traj.t_end();
    const double final_norm = traj.eval(t1).lpNorm<Eigen::Infinity>();
    if (tuned.period <= 0.0) {
        verdict.outcome =
            final_norm < 1e-5 ? Outcome::ConvergedOther : Outcome::Inconclusive;
        return verdict;
    }
    const double period = tuned.period;

    // amplitude over the last 10 periods, and stationarity across two halves
    auto window_amp = [&](double lo, double hi) {
        double m = 0.0;
        const int samples = 200;
        for (int i = 0; i <= samples; ++i) {
            const double t = lo + (hi - lo) * i / samples;
            m = std::max(m, traj.eval(t).head(8).lpNorm<Eigen::Infinity>());
        }
        return m;
    };
    const double span = std::min(10.0 * period, 0.4 * (t1 - traj.t_begin()));
    const double amp1 = window_amp(t1 - span, t1 - span / 2);
    const double amp2 = window_amp(t1 - span / 2, t1);
    verdict.amplitude = std::max(amp1, amp2);
    if (verdict.amplitude < 1e-4) {
        verdict.outcome = Outcome::ConvergedOther;
        return verdict;
    }
    const bool stationary =
        std::abs(amp1 - amp2) <= 0.01 * std::max(amp1, amp2);

    verdict.symmetry_residual = symmetry_residual(traj, group, period);

    double ctrl = 0.0;
    if (spec.delay_fraction.value() > 0.0 && b > 0.0) {
        const int samples = 200;
        for (int i = 0; i <= samples; ++i) {
            const double t = t1 - period + period * i / samples;
            const Vector8 v = traj.eval(t).tail(8);
            const Vector8 vd = traj.eval(t - tuned.tau).tail(8);
            ctrl = std::max(ctrl, (p.b * (-v + spec.avg * vd)).lpNorm<Eigen::Infinity>());
        }
    }
    verdict.control_residual = ctrl;

    const double tol = 1e-3 * verdict.amplitude;
    if (tuned.converged && stationary && verdict.symmetry_residual < tol &&
        verdict.control_residual < tol) {
        verdict.outcome = Outcome::StabilizedTarget;
    } else if (!tuned.converged || !stationary) {
        verdict.outcome = Outcome::Inconclusive;
    } else {
        verdict.outcome = Outcome::ConvergedOther;
    }
    return verdict;
}

// --------------------------------------------------------- branch asymptotics

namespace {

struct ReducedRun {
    bool ok = false;
    double period = 0.0;
    double first_harmonic = 0.0;
};

ReducedRun run_reduced(const ReducedSystem& red, double alpha, double a, double h) {
    const int n = red.dim;
    const int coord = n > 1 ? 1 : 0;  // measure x2 when present
    const double alpha0 = red.bifurcation_k * a;
    const double r0 = 2.0 * std::sqrt(std::max(alpha - alpha0, 1e-4));

    double period = 2.0 * kPi;
    HistoryBuffer cur;
    ReducedRun out;

    auto make_sys = [&](double T) {
        DdeSystem sys;
        sys.dim = 2 * n;
        for (const auto& f : red.delay_fractions) sys.delays.push_back(f.value() * T);
        sys.rhs = [&red, alpha, a, T, n](double, const Eigen::VectorXd& y,
                                         const std::vector<Eigen::VectorXd>& delayed) {
            std::vector<Eigen::VectorXd> vdel;
            vdel.reserve(delayed.size());
            for (const auto& d : delayed) vdel.push_back(d.tail(n));
            Eigen::VectorXd dy(2 * n);
            dy.head(n) = y.tail(n);
            dy.tail(n) = red.accel(alpha, a, T, y.head(n), y.tail(n), vdel);
            return dy;
        };
        return sys;
    };

    for (int it = 0; it < 8; ++it) {
        const DdeSystem sys = make_sys(period);
        Trajectory traj;
        if (cur.empty()) {
            auto init = [&](double t) {
                Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
                y(coord) = r0 * std::cos(t);
                y(n + coord) = -r0 * std::sin(t);
                return y;
            };
            auto init_d = [&](double t) {
                Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * n);
                y(coord) = -r0 * std::sin(t);
                y(n + coord) = -r0 * std::cos(t);
                return y;
            };
            traj = integrate(sys, init, init_d, 400.0, h);
        } else {
            traj = integrate(sys, cur, 400.0, h);
        }
        if (traj.unbounded) return out;
        const auto per = detect_period(traj, coord, 0.5);
        if (!per) return out;
        const double dT = std::abs(*per - period);
        period = *per;
        cur = traj.dense.tail(std::max(3.0 * period, 2.0));

        if (dT < 1e-7 || it == 7) {
            // first harmonic of the measured coordinate over the last 10 periods
            const double t1 = traj.t_end();
            const double win = 10.0 * period;
            const int samples = static_cast<int>(win / h) + 1;
            Complex acc = 0.0;
            for (int s = 0; s <= samples; ++s) {
                const double t = t1 - win + win * s / samples;
                const double wgt = (s == 0 || s == samples) ? 0.5 : 1.0;
                acc += wgt * traj.eval(t)(coord) *
                       std::exp(Complex(0.0, -2.0 * kPi * t / period));
            }
            acc *= win / samples;
            out.first_harmonic = 2.0 * std::abs(acc) / win;
            out.period = period;
            out.ok = dT < 1e-5;
            return out;
        }
    }
    return out;
}

}  // namespace

SlopeFit amplitude_slope_fit(const std::string& label, double a,
                             const std::vector<double>& alpha_grid) {
    if (alpha_grid.size() < 3)
        throw std::runtime_error("amplitude_slope_fit: need at least 3 grid points");
    const ReducedSystem red = reduced_system(label);
    const double alpha0 = red.bifurcation_k * a;

    SlopeFit fit;
    for (double alpha : alpha_grid) {
        if (alpha <= alpha0)
            throw std::runtime_error("amplitude_slope_fit: grid point below alpha0");
        const ReducedRun run = run_reduced(red, alpha, a, 0.02);
        if (!run.ok) continue;  // drop non-convergent point
        fit.alphas.push_back(alpha);
        fit.amplitudes.push_back(run.first_harmonic);
    }
    if (fit.alphas.size() < 3)
        throw std::runtime_error("amplitude_slope_fit: fewer than 3 convergent points");

    // least squares r^2 = slope (alpha - alpha0) + intercept
    const std::size_t m = fit.alphas.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = fit.alphas[i] - alpha0;
        const double y = fit.amplitudes[i] * fit.amplitudes[i];
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    return fit;
}

}  // namespace equistab
