#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "graphflow/operators.hpp"
#include "graphflow/rng.hpp"
#include "graphflow/spectral.hpp"

namespace graphflow {

// Source term s(t). Stochastic sources are piecewise constant: a fresh
// zero-mean Gaussian perturbation with total variance sigma2 (sigma2/N per
// coordinate) is drawn at the start of every accepted step.
class SourceSignal {
public:
    enum class Kind { Constant, TimeFunction, Stochastic };

    static SourceSignal constant(Eigen::VectorXd s_inf) {
        SourceSignal s;
        s.kind_ = Kind::Constant;
        s.s_inf_ = std::move(s_inf);
        s.current_ = s.s_inf_;
        return s;
    }

    // fn(t) should settle to s_inf; s_inf is the reference used for
    // equilibrium bookkeeping.
    static SourceSignal time_function(std::function<Eigen::VectorXd(double)> fn,
                                      Eigen::VectorXd s_inf) {
        SourceSignal s;
        s.kind_ = Kind::TimeFunction;
        s.fn_ = std::move(fn);
        s.s_inf_ = std::move(s_inf);
        return s;
    }

    static SourceSignal stochastic(Eigen::VectorXd s_inf, double sigma2,
                                   std::uint64_t seed) {
        if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
        SourceSignal s;
        s.kind_ = Kind::Stochastic;
        s.s_inf_ = std::move(s_inf);
        s.sigma2_ = sigma2;
        s.seed_ = seed;
        s.current_ = s.s_inf_;
        return s;
    }

    Kind kind() const { return kind_; }
    const Eigen::VectorXd& s_inf() const { return s_inf_; }
    double sigma2() const { return sigma2_; }

    void reset() {
        if (kind_ == Kind::Stochastic) {
            rng_.emplace(seed_);
            current_ = s_inf_;
        }
    }

    void begin_step() {
        if (kind_ == Kind::Stochastic) {
            if (!rng_) rng_.emplace(seed_);
            const int n = static_cast<int>(s_inf_.size());
            current_ = s_inf_ + rng_->normal_vector(n, std::sqrt(sigma2_ / n));
        }
    }

    Eigen::VectorXd eval(double t) const {
        switch (kind_) {
            case Kind::TimeFunction:
                return fn_(t);
            case Kind::Constant:
                return s_inf_;
            case Kind::Stochastic:
            default:
                return current_;
        }
    }

private:
    SourceSignal() = default;
    Kind kind_ = Kind::Constant;
    Eigen::VectorXd s_inf_;
    Eigen::VectorXd current_;
    std::function<Eigen::VectorXd(double)> fn_;
    double sigma2_ = 0.0;
    std::uint64_t seed_ = 0;
    std::optional<Rng> rng_;
};

struct IntegrateOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    long max_steps = 10'000'000;
    // 0 records every accepted step; otherwise samples at this spacing.
    double sample_dt = 0.0;
    bool store_states = false;
    // Optional sharp lambda_max(L); 0 falls back to the Gershgorin bound.
    double lambda_max_hint = 0.0;
    // Stop early once a recorded ||P_perp (h - h_inf)|| falls below this;
    // 0 disables.
    double stop_below_perp = 0.0;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> err;       // ||h - h_inf||
    std::vector<double> perp_err;  // ||P_perp (h - h_inf)||
    std::vector<Eigen::VectorXd> states;
    Eigen::VectorXd final_state;
    Eigen::VectorXd h_inf;
    bool has_reference = false;
    long steps_accepted = 0;
    long steps_rejected = 0;
};

namespace detail {

inline double perp_norm(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return std::sqrt(std::max(0.0, v.squaredNorm() - v.size() * mean * mean));
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4). Steps are capped at the stiffness scale
// 1/(gamma_max + alpha lambda_max + alpha_p J_hat), where J_hat rescans the
// current edge differences, so the explicit pair stays inside its stability
// region even when the error estimate would allow a larger step.
inline Trajectory integrate(const ModelParams& mp, const Graph& g,
                            SourceSignal src, const Eigen::VectorXd& h0,
                            double t_end, const IntegrateOptions& opts = {}) {
    validate(mp);
    const int n = g.node_count();
    if (h0.size() != n) throw std::invalid_argument("h0 size mismatch");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");

    Trajectory traj;
    if (mp.potential.mu() > 0.0) {
        traj.h_inf = solve_equilibrium(mp, g, src.s_inf());
        traj.has_reference = true;
    } else {
        traj.h_inf = Eigen::VectorXd::Zero(n);
    }

    const double gamma_max =
        mp.potential.lipschitz().value_or(mp.potential.mu());
    const double lmax =
        opts.lambda_max_hint > 0.0 ? opts.lambda_max_hint : 2.0 * g.max_degree();

    auto p_stiffness = [&](const Eigen::VectorXd& h) {
        if (mp.alpha_p == 0.0) return 0.0;
        double dmax = 0.0;
        for (const auto& e : g.edges())
            dmax = std::max(dmax, std::abs(h[e.u] - h[e.v]));
        const double coef =
            mp.p == 2.0 ? 1.0 : (dmax == 0.0 ? 0.0 : std::pow(dmax, mp.p - 2.0));
        return mp.alpha_p * (mp.p - 1.0) * coef * 2.0 * g.max_degree();
    };

    auto rhs = [&](double t, const Eigen::VectorXd& h) {
        return (src.eval(t) - drift(mp, g, h)).eval();
    };

    auto record = [&](double t, const Eigen::VectorXd& h) {
        traj.t.push_back(t);
        traj.mass.push_back(total_mass(h));
        traj.energy.push_back(energy(mp, g, h));
        const Eigen::VectorXd e = h - traj.h_inf;
        traj.err.push_back(e.norm());
        traj.perp_err.push_back(detail::perp_norm(e));
        if (opts.store_states) traj.states.push_back(h);
    };

    src.reset();
    Eigen::VectorXd h = h0;
    double t = 0.0;
    record(t, h);
    double next_sample = opts.sample_dt > 0.0 ? opts.sample_dt : 0.0;

    // Dormand-Prince coefficients.
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    src.begin_step();
    Eigen::VectorXd k1 = rhs(t, h);
    double dt_cap = 1.0 / (gamma_max + mp.alpha * lmax + p_stiffness(h) + 1e-30);
    double dt = std::min({dt_cap, t_end,
                          0.01 * (h.norm() + 1.0) / (k1.norm() + 1e-12)});
    bool have_k1 = true;

    while (t < t_end) {
        if (traj.steps_accepted + traj.steps_rejected >= opts.max_steps)
            throw NumericalError("integrate: step budget exhausted", dt);
        dt = std::min({dt, dt_cap, t_end - t});
        if (!have_k1) {
            src.begin_step();
            k1 = rhs(t, h);
            have_k1 = true;
        }
        const Eigen::VectorXd k2 = rhs(t + c2 * dt, h + dt * (a21 * k1));
        const Eigen::VectorXd k3 = rhs(t + c3 * dt, h + dt * (a31 * k1 + a32 * k2));
        const Eigen::VectorXd k4 =
            rhs(t + c4 * dt, h + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXd k5 = rhs(
            t + c5 * dt, h + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXd k6 =
            rhs(t + dt,
                h + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::VectorXd h_new =
            h + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXd k7 = rhs(t + dt, h_new);
        const Eigen::VectorXd err_vec =
            dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = opts.abs_tol +
                              opts.rel_tol * std::max(std::abs(h[i]),
                                                      std::abs(h_new[i]));
            const double q = err_vec[i] / sc;
            acc += q * q;
        }
        const double err_norm = std::sqrt(acc / n);

        if (err_norm <= 1.0) {
            t += dt;
            h = h_new;
            ++traj.steps_accepted;
            if (opts.sample_dt <= 0.0 || t >= next_sample || t >= t_end) {
                record(t, h);
                if (opts.sample_dt > 0.0)
                    while (next_sample <= t) next_sample += opts.sample_dt;
                if (opts.stop_below_perp > 0.0 &&
                    traj.perp_err.back() < opts.stop_below_perp)
                    break;
            }
            dt_cap =
                1.0 / (gamma_max + mp.alpha * lmax + p_stiffness(h) + 1e-30);
            if (src.kind() == SourceSignal::Kind::Stochastic) {
                have_k1 = false;  // noise is redrawn, k7 is stale
            } else {
                k1 = k7;
            }
        } else {
            ++traj.steps_rejected;
        }
        const double factor = std::clamp(
            0.9 * std::pow(std::max(err_norm, 1e-10), -0.2), 0.2, 5.0);
        dt *= factor;
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw NumericalError("integrate: step size collapsed", dt);
    }
    traj.final_state = h;
    return traj;
}

struct RateFit {
    double rate;       // decay rate, the negated slope of log(value) vs t
    double intercept;  // fitted log(value) at t = 0
};

// Least squares slope of log(values) on the window. Values must be positive.
inline RateFit fit_log_slope(const std::vector<double>& ts,
                             const std::vector<double>& vs) {
    if (ts.size() != vs.size() || ts.size() < 2)
        throw std::invalid_argument("fit_log_slope: need at least 2 samples");
    double st = 0, sy = 0, stt = 0, sty = 0;
    const auto m = static_cast<double>(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(vs[i] > 0.0))
            throw NumericalError("fit_log_slope: nonpositive value in window",
                                 vs[i]);
        const double y = std::log(vs[i]);
        st += ts[i];
        sy += y;
        stt += ts[i] * ts[i];
        sty += ts[i] * y;
    }
    const double denom = m * stt - st * st;
    if (denom <= 0.0)
        throw std::invalid_argument("fit_log_slope: degenerate time window");
    const double slope = (m * sty - st * sy) / denom;
    return {-slope, (sy - slope * st) / m};
}

enum class DecayObservable { Err, PerpErr };

inline RateFit measure_decay_rate(const Trajectory& traj, double t1, double t2,
                                  DecayObservable obs = DecayObservable::Err) {
    std::vector<double> ts, vs;
    const auto& col = obs == DecayObservable::Err ? traj.err : traj.perp_err;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.t[i] >= t1 && traj.t[i] <= t2) {
            ts.push_back(traj.t[i]);
            vs.push_back(col[i]);
        }
    }
    return fit_log_slope(ts, vs);
}

struct ThresholdCrossing {
    bool reached;
    double time;
    double final_value;
};

// First time ||P_perp (h - h_inf)|| drops below the threshold, located by
// log-linear interpolation between the bracketing samples.
inline ThresholdCrossing transient_time_to_threshold(
    const ModelParams& mp, const Graph& g, const SourceSignal& src,
    const Eigen::VectorXd& h0, double threshold, double t_max,
    const IntegrateOptions& opts = {}) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("threshold must be positive");
    IntegrateOptions run_opts = opts;
    run_opts.sample_dt = 0.0;  // every-step sampling brackets the crossing
    run_opts.stop_below_perp = threshold;
    const Trajectory traj = integrate(mp, g, src, h0, t_max, run_opts);
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (traj.perp_err[i] < threshold) {
            if (i == 0) return {true, traj.t[0], traj.perp_err[0]};
            const double va = traj.perp_err[i - 1];
            const double vb = traj.perp_err[i];
            const double ta = traj.t[i - 1];
            const double tb = traj.t[i];
            double tc = tb;
            if (va > threshold && vb > 0.0) {
                const double f = (std::log(va) - std::log(threshold)) /
                                 (std::log(va) - std::log(vb));
                tc = ta + f * (tb - ta);
            }
            return {true, tc, vb};
        }
    }
    return {false, t_max, traj.perp_err.back()};
}

struct TwoRegimeConstants {
    double p;
    double kappa2;       // alpha lambda2
    double kappa_p;      // (alpha_p/p) 2^{2-p} C_p N^{1-p/2}
    double u_threshold;  // (kappa2/kappa_p)^{2/(p-2)}

    // Upper bound on the time for u = ||h_perp||^2 to fall from u0 to the
    // threshold; zero when u0 already starts below it.
    double t_bound(double u0) const {
        if (u0 <= u_threshold) return 0.0;
        const double q = (p - 2.0) / 2.0;
        return (std::pow(u_threshold, -q) - std::pow(u0, -q)) /
               (kappa_p * (p - 2.0));
    }
};

inline TwoRegimeConstants two_regime_constants(const ModelParams& mp,
                                               const Graph& g, double cp_value) {
    if (!(mp.p > 2.0))
        throw std::invalid_argument("two-regime constants need p > 2");
    if (!(cp_value > 0.0))
        throw std::invalid_argument("cp_value must be positive");
    const double lambda2 = spectral_summary(g).lambda2;
    const double n = g.node_count();
    TwoRegimeConstants c;
    c.p = mp.p;
    c.kappa2 = mp.alpha * lambda2;
    c.kappa_p = mp.alpha_p / mp.p * std::pow(2.0, 2.0 - mp.p) * cp_value *
                std::pow(n, 1.0 - mp.p / 2.0);
    c.u_threshold = std::pow(c.kappa2 / c.kappa_p, 2.0 / (mp.p - 2.0));
    return c;
}

}  // namespace graphflow
