#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "equistab/model.hpp"
#include "equistab/symgroup.hpp"

namespace equistab {

/// Dense-output storage: (time, state, derivative) knots with cubic Hermite
/// interpolation between them.
class HistoryBuffer {
public:
    void append(double t, Eigen::VectorXd y, Eigen::VectorXd dy);
    Eigen::VectorXd eval(double t) const;
    Eigen::VectorXd eval_derivative(double t) const;

    bool empty() const { return times_.empty(); }
    double t_front() const { return times_.front(); }
    double t_back() const { return times_.back(); }
    std::size_t knots() const { return times_.size(); }
    double knot_time(std::size_t i) const { return times_[i]; }
    const Eigen::VectorXd& knot_state(std::size_t i) const { return states_[i]; }
    const Eigen::VectorXd& knot_derivative(std::size_t i) const { return derivs_[i]; }

    /// Copy of the segment [t_back - span, t_back], times shifted so the
    /// segment ends at 0. Used to continue an integration.
    HistoryBuffer tail(double span) const;

private:
    std::size_t segment(double t) const;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> states_;
    std::vector<Eigen::VectorXd> derivs_;
};

/// First-order DDE y' = f(t, y, delayed states), one entry in delays per
/// delayed argument (all constant).
struct DdeSystem {
    int dim = 0;
    std::vector<double> delays;
    std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y,
                                  const std::vector<Eigen::VectorXd>& delayed)>
        rhs;
};

struct Trajectory {
    HistoryBuffer dense;
    bool unbounded = false;
    std::optional<double> period;

    Eigen::VectorXd eval(double t) const { return dense.eval(t); }
    double t_begin() const { return dense.t_front(); }
    double t_end() const { return dense.t_back(); }
};

/// Fixed-step classical RK4 with method of steps; delayed values come from
/// Hermite interpolation of the accumulated history. The initial history must
/// cover [-max delay, 0]; integration runs over [0, t_end].
/// Requires h <= min(delay)/4 when delays are present.
Trajectory integrate(const DdeSystem& sys, const std::function<Eigen::VectorXd(double)>& init,
                     const std::function<Eigen::VectorXd(double)>& init_deriv, double t_end,
                     double h);

/// Continue from an existing history (its last time is taken as t = 0 origin).
Trajectory integrate(const DdeSystem& sys, const HistoryBuffer& history, double t_end,
                     double h);

/// Mean spacing of the last few upward zero crossings of coordinate coord
/// after discarding the leading transient fraction of the trajectory.
std::optional<double> detect_period(const Trajectory& traj, int coord,
                                    double transient_fraction = 0.6, int crossings = 6);

/// Max over elements of h and sample times in the last window of
/// || r T_h x(t - phi T) - x(t) ||_inf for the position components.
double symmetry_residual(const Trajectory& traj, const SymGroup& h, double period);

/// 16-dimensional first-order controlled system, state ordered (x1..x8, v1..v8).
DdeSystem full_system(const Params& p, const ControlSpec& spec, double tau);

struct TuneSettings {
    double h = 0.03;
    double t_end = 400.0;
    double tol = 1e-6;
    int max_iter = 14;
    double transient_fraction = 0.6;
    int period_coord = 1;  // measured position coordinate
};

struct TuneResult {
    double tau = 0.0;
    double period = 0.0;
    int iterations = 0;
    bool converged = false;
    Trajectory traj;
};

/// Fixed-point iteration tau <- t0 * T(tau) for the level-set control; for a
/// delay-free spec returns the initial guess unchanged.
TuneResult tune_delay(const ControlSpec& spec, const Params& p, const HistoryBuffer& init,
                      const TuneSettings& settings);

enum class Outcome { StabilizedTarget, ConvergedOther, Unbounded, Inconclusive };

std::string outcome_name(Outcome o);

struct ExperimentVerdict {
    Outcome outcome = Outcome::Inconclusive;
    double symmetry_residual = 0.0;
    double control_residual = 0.0;
    double period = 0.0;
    double amplitude = 0.0;
    double tau = 0.0;
    int tune_iterations = 0;
};

struct ExperimentSettings {
    double h = 0.03;
    double t_end = 500.0;
    double transient_fraction = 0.6;
    double seed_amplitude_factor = 1.0;  // scales the 2 sqrt(alpha - alpha0) seed
    double transverse_fraction = 0.1;
};

/// Integrates the controlled full system from a seeded initial history and
/// classifies the outcome against the targeted symmetric branch.
ExperimentVerdict stabilization_experiment(const std::string& label, ControlLaw law,
                                           double a, double b, double alpha,
                                           std::uint64_t seed,
                                           const ExperimentSettings& settings = {});

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> alphas;
    std::vector<double> amplitudes;  // first-harmonic amplitude of the measured coordinate
};

/// Simulates the reduced system of the labeled branch over the alpha grid with
/// self-consistently tuned period and fits amplitude^2 against alpha - alpha0.
SlopeFit amplitude_slope_fit(const std::string& label, double a,
                             const std::vector<double>& alpha_grid);

}  // namespace equistab
