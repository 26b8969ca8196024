#include "jumpsyn/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace jumpsyn {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

RngStream RngStream::for_run(std::uint64_t master_seed, std::uint64_t run_index) {
    return RngStream(splitmix64(master_seed ^ splitmix64(run_index + 1)));
}

double RngStream::uniform() {
    const std::uint64_t bits = gen_() >> 11; // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw RangeError("exponential rate must be > 0");
    return -std::log(uniform()) / rate;
}

int RngStream::categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw RangeError("categorical weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw RangeError("categorical weights sum to zero");
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

int JumpPath::state_at(double t) const {
    if (events.empty() || t < events.front().time) return initial_state;
    // last event with time <= t
    auto it = std::upper_bound(events.begin(), events.end(), t,
                               [](double value, const JumpEvent& e) { return value < e.time; });
    return std::prev(it)->state;
}

JumpPath sample_ctmc_path(const Matrix& generator, int initial_state, double horizon,
                          RngStream& rng) {
    const int count = static_cast<int>(generator.rows());
    if (initial_state < 0 || initial_state >= count) {
        throw IndexOutOfRange("initial state outside the chain");
    }
    JumpPath path;
    path.state_count = count;
    path.initial_state = initial_state;
    path.horizon = horizon;

    int state = initial_state;
    double t = 0.0;
    std::vector<double> weights(static_cast<std::size_t>(count));
    while (true) {
        const double rate = -generator(state, state);
        if (!(rate > 0.0)) break; // absorbing
        t += rng.exponential(rate);
        if (t > horizon) break;
        for (int j = 0; j < count; ++j) {
            weights[static_cast<std::size_t>(j)] = (j == state) ? 0.0 : generator(state, j);
        }
        state = rng.categorical(weights);
        path.events.push_back({t, state});
    }
    return path;
}

JumpPath sample_observation_path(const JumpPath& r_path, const Matrix& observation_rates,
                                 int robs0, RngStream& rng) {
    const int count = r_path.state_count;
    if (robs0 < 0 || robs0 >= count) throw IndexOutOfRange("robs0 outside the chain");
    JumpPath path;
    path.state_count = count;
    path.initial_state = robs0;
    path.horizon = r_path.horizon;

    int robs = robs0;
    // walk the true-mode segments; within each, at most one catch-up fires
    std::size_t next_event = 0;
    double seg_start = 0.0;
    int r = r_path.initial_state;
    while (true) {
        const double seg_end = (next_event < r_path.events.size())
                                   ? r_path.events[next_event].time
                                   : r_path.horizon;
        if (robs != r) {
            const double h = rng.exponential(observation_rates(robs, r));
            if (seg_start + h < seg_end) {
                robs = r;
                path.events.push_back({seg_start + h, robs});
            }
            // otherwise the pending observation is canceled by the next switch
        }
        if (next_event >= r_path.events.size()) break;
        seg_start = r_path.events[next_event].time;
        r = r_path.events[next_event].state;
        ++next_event;
    }
    return path;
}

JumpPath sample_joint_path_augmented(const Matrix& kappa, int s0, double horizon, RngStream& rng) {
    return sample_ctmc_path(kappa, s0, horizon, rng);
}

namespace {

JumpPath project_path(const JumpPath& joint, int num_modes, bool true_coordinate) {
    JumpPath path;
    path.state_count = num_modes;
    path.horizon = joint.horizon;
    auto decode = [&](int k) { return true_coordinate ? k / num_modes : k % num_modes; };
    path.initial_state = decode(joint.initial_state);
    int current = path.initial_state;
    for (const auto& e : joint.events) {
        const int projected = decode(e.state);
        if (projected != current) {
            current = projected;
            path.events.push_back({e.time, projected});
        }
    }
    return path;
}

} // namespace

JumpPath project_true_mode(const JumpPath& joint, int num_modes) {
    return project_path(joint, num_modes, true);
}

JumpPath project_observed_mode(const JumpPath& joint, int num_modes) {
    return project_path(joint, num_modes, false);
}

std::vector<double> occupation_fractions(const JumpPath& path) {
    std::vector<double> acc(static_cast<std::size_t>(path.state_count), 0.0);
    double t = 0.0;
    int state = path.initial_state;
    for (const auto& e : path.events) {
        acc[static_cast<std::size_t>(state)] += e.time - t;
        t = e.time;
        state = e.state;
    }
    acc[static_cast<std::size_t>(state)] += path.horizon - t;
    for (double& a : acc) a /= path.horizon;
    return acc;
}

double DelaySignal::operator()(double t) const {
    switch (spec.kind) {
        case DelaySignalSpec::Kind::Constant:
            return spec.constant_value;
        case DelaySignalSpec::Kind::Ramp:
            return std::min(tau0, spec.initial + tau_plus * t);
        case DelaySignalSpec::Kind::Sine:
            return spec.offset + spec.amplitude * std::sin(2.0 * M_PI * t / spec.period);
    }
    return 0.0;
}

double DelaySignal::max_value() const {
    switch (spec.kind) {
        case DelaySignalSpec::Kind::Constant: return spec.constant_value;
        case DelaySignalSpec::Kind::Ramp: return tau0;
        case DelaySignalSpec::Kind::Sine: return spec.offset + std::abs(spec.amplitude);
    }
    return 0.0;
}

DelaySignal make_delay_signal(const DelaySpec& delay, const DelaySignalSpec& spec) {
    DelaySignal signal;
    signal.spec = spec;
    signal.tau0 = delay.tau0;
    signal.tau_plus = delay.tau_plus;
    switch (spec.kind) {
        case DelaySignalSpec::Kind::Constant:
            if (spec.constant_value < 0.0 || spec.constant_value > delay.tau0) {
                throw RangeError("constant delay outside [0, tau0]");
            }
            break;
        case DelaySignalSpec::Kind::Ramp:
            if (spec.initial < 0.0 || spec.initial > delay.tau0) {
                throw RangeError("ramp initial delay outside [0, tau0]");
            }
            break;
        case DelaySignalSpec::Kind::Sine:
            if (!(spec.period > 0.0)) throw RangeError("sine delay needs a positive period");
            if (spec.offset - std::abs(spec.amplitude) < 0.0 ||
                spec.offset + std::abs(spec.amplitude) > delay.tau0) {
                throw RangeError("sine delay leaves [0, tau0]");
            }
            signal.admissible = false; // slope changes sign
            break;
    }
    return signal;
}

Vector DisturbanceSignal::operator()(double t) const {
    Vector w = Vector::Zero(dimension);
    switch (spec.kind) {
        case DisturbanceSpec::Kind::Zero:
            break;
        case DisturbanceSpec::Kind::ExampleWaveform: {
            const double value = 0.5 * std::exp(-0.1 * t) * std::sin(0.01 * M_PI * t);
            w.setConstant(value);
            break;
        }
        case DisturbanceSpec::Kind::Sampled: {
            if (t <= spec.times.front()) {
                w = spec.values.front();
            } else if (t >= spec.times.back()) {
                w = spec.values.back();
            } else {
                auto it = std::upper_bound(spec.times.begin(), spec.times.end(), t);
                const std::size_t hi = static_cast<std::size_t>(it - spec.times.begin());
                const std::size_t lo = hi - 1;
                const double a = (t - spec.times[lo]) / (spec.times[hi] - spec.times[lo]);
                w = (1.0 - a) * spec.values[lo] + a * spec.values[hi];
            }
            break;
        }
    }
    return w;
}

DisturbanceSignal make_disturbance_signal(const DisturbanceSpec& spec, int q) {
    DisturbanceSignal signal;
    signal.spec = spec;
    signal.dimension = q;
    if (spec.kind == DisturbanceSpec::Kind::Sampled) {
        for (const auto& v : spec.values) {
            if (static_cast<int>(v.size()) != q) {
                throw DimensionMismatch("sampled disturbance values must have dimension q");
            }
        }
    }
    return signal;
}

Trajectory integrate_closed_loop(const MjlsModel& model, const HistoryFunction& phi, double tau0,
                                 const GainSet& gains, const JumpPath& r_path,
                                 const JumpPath& robs_path, const DelaySignal& tau,
                                 const DisturbanceSignal& w, double horizon, double dt) {
    if (!(dt > 0.0)) throw RangeError("dt must be > 0");
    if (!(horizon > 0.0)) throw RangeError("horizon must be > 0");
    if (static_cast<int>(gains.size()) != model.num_modes) {
        throw DimensionMismatch("gain set must have one gain per mode");
    }
    if (tau.max_value() > 0.0 && dt > tau0) {
        std::ostringstream os;
        os << "dt = " << dt << " exceeds tau0 = " << tau0 << " while the delay is active";
        throw StepTooLarge(os.str());
    }

    // uniform grid plus every jump time of either mode path
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(horizon / dt) + r_path.events.size() +
                 robs_path.events.size() + 2);
    for (int i = 0; i * dt < horizon - 1e-12 * std::max(1.0, horizon); ++i) grid.push_back(i * dt);
    grid.push_back(horizon);
    for (const auto& e : r_path.events) {
        if (e.time > 0.0 && e.time < horizon) grid.push_back(e.time);
    }
    for (const auto& e : robs_path.events) {
        if (e.time > 0.0 && e.time < horizon) grid.push_back(e.time);
    }
    std::sort(grid.begin(), grid.end());
    const double dedup = 1e-12 * std::max(1.0, horizon);
    std::vector<double> times;
    times.reserve(grid.size());
    for (double t : grid) {
        if (times.empty() || t - times.back() > dedup) times.push_back(t);
    }

    const int n = model.n;
    const int M = static_cast<int>(times.size());
    Trajectory traj;
    traj.time = times;
    traj.x.resize(n, M);
    traj.u.resize(model.m, M);
    traj.z.resize(model.l, M);
    traj.y.resize(model.l, M);
    traj.w.resize(model.q, M);
    traj.r.resize(static_cast<std::size_t>(M));
    traj.robs.resize(static_cast<std::size_t>(M));
    traj.tau.resize(static_cast<std::size_t>(M));

    // state history: phi covers (-inf, 0]; integration points append as we go
    std::deque<std::pair<double, Vector>> history;
    history.emplace_back(0.0, phi.at_zero());

    auto delayed_state = [&](double s) {
        if (s <= 0.0) return phi(std::max(s, -tau0));
        auto it = std::lower_bound(history.begin(), history.end(), s,
                                   [](const auto& entry, double value) { return entry.first < value; });
        if (it == history.end()) {
            // read inside the step being computed; extrapolate from the tail
            if (history.size() == 1) return history.back().second;
            const auto& b = history.back();
            const auto& a = *(history.end() - 2);
            const double slope = (s - b.first) / (b.first - a.first);
            return Vector(b.second + slope * (b.second - a.second));
        }
        if (it->first == s || it == history.begin()) return it->second;
        const auto& b = *it;
        const auto& a = *std::prev(it);
        const double alpha = (s - a.first) / (b.first - a.first);
        return Vector((1.0 - alpha) * a.second + alpha * b.second);
    };

    Vector x = phi.at_zero();
    for (int idx = 0; idx < M; ++idx) {
        const double t = times[idx];
        const int r = r_path.state_at(t);
        const int robs = robs_path.state_at(t);
        const auto ri = static_cast<std::size_t>(r);
        const auto oi = static_cast<std::size_t>(robs);
        const Vector wt = w(t);
        const Vector xd = delayed_state(t - tau(t));
        const Vector ut = gains[oi] * xd;

        traj.x.col(idx) = x;
        traj.u.col(idx) = ut;
        traj.z.col(idx) = model.C[ri] * x + model.Psi[ri] * wt;
        traj.y.col(idx) = model.J[ri] * x + model.Phi[ri] * wt;
        traj.w.col(idx) = wt;
        traj.r[static_cast<std::size_t>(idx)] = r;
        traj.robs[static_cast<std::size_t>(idx)] = robs;
        traj.tau[static_cast<std::size_t>(idx)] = tau(t);

        if (!x.allFinite()) {
            std::ostringstream os;
            os << "state became non-finite at t = " << t;
            throw NonFinite(os.str());
        }
        if (idx + 1 == M) break;

        const double h = times[idx + 1] - t;
        auto f = [&](double s, const Vector& xs) {
            return Vector(model.A[ri] * xs + model.B[ri] * (gains[oi] * delayed_state(s - tau(s))) +
                          model.E[ri] * w(s));
        };
        const Vector k1 = f(t, x);
        const Vector k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
        const Vector k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
        const Vector k4 = f(t + h, x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        history.emplace_back(times[idx + 1], x);
        const double keep_from = times[idx + 1] - tau0 - 2.0 * dt;
        while (history.size() > 2 && history[1].first < keep_from) history.pop_front();
    }
    return traj;
}

Trajectory simulate_run(const Scenario& scenario, const GainSet& gains, std::uint64_t run_index,
                        const DisturbanceSpec* disturbance_override, double horizon_override) {
    const double horizon = horizon_override > 0.0 ? horizon_override : scenario.sim.horizon;
    RngStream rng = RngStream::for_run(scenario.sim.seed, run_index);
    const JumpPath r_path =
        sample_ctmc_path(scenario.model.generator, scenario.sim.r0, horizon, rng);
    const JumpPath robs_path =
        sample_observation_path(r_path, scenario.obs.rates, scenario.sim.robs0, rng);
    const DelaySignal tau = make_delay_signal(scenario.delay, scenario.sim.delay_signal);
    const DisturbanceSpec& wspec =
        disturbance_override != nullptr ? *disturbance_override : scenario.sim.disturbance;
    const DisturbanceSignal w = make_disturbance_signal(wspec, scenario.model.q);
    return integrate_closed_loop(scenario.model, scenario.perf.phi, scenario.delay.tau0, gains,
                                 r_path, robs_path, tau, w, horizon, scenario.sim.dt);
}

} // namespace jumpsyn
