#include "jumpsyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace jumpsyn {

namespace {

std::string shape_of(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << " has shape " << shape_of(m) << ", expected " << rows << "x" << cols;
        throw DimensionMismatch(os.str());
    }
}

} // namespace

Vector HistoryFunction::operator()(double t) const {
    if (kind == Kind::Constant) {
        return constant;
    }
    if (times.empty()) {
        throw RangeError("sampled history has no nodes");
    }
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
}

Vector HistoryFunction::at_zero() const {
    return (*this)(0.0);
}

int HistoryFunction::dimension() const {
    if (kind == Kind::Constant) return static_cast<int>(constant.size());
    return values.empty() ? 0 : static_cast<int>(values.front().size());
}

HistoryFunction HistoryFunction::constant_history(Vector value) {
    HistoryFunction phi;
    phi.kind = Kind::Constant;
    phi.constant = std::move(value);
    return phi;
}

void validate_generator(const Matrix& pi, const std::string& name) {
    if (pi.rows() != pi.cols()) {
        throw DimensionMismatch(name + " must be square, got " + shape_of(pi));
    }
    const double tol = kGeneratorRowSumTol * pi.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
        if (pi(i, i) > 0.0) {
            std::ostringstream os;
            os << name << " diagonal entry (" << i + 1 << "," << i + 1 << ") = " << pi(i, i)
               << " must be <= 0";
            throw GeneratorInvalid(os.str());
        }
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < pi.cols(); ++j) {
            if (i != j && pi(i, j) < 0.0) {
                std::ostringstream os;
                os << name << " off-diagonal entry (" << i + 1 << "," << j + 1 << ") = " << pi(i, j)
                   << " must be >= 0";
                throw GeneratorInvalid(os.str());
            }
            row_sum += pi(i, j);
        }
        if (std::abs(row_sum) > tol) {
            std::ostringstream os;
            os << name << " row " << i + 1 << " sums to " << row_sum << " (tolerance " << tol << ")";
            throw GeneratorInvalid(os.str());
        }
    }
}

const MjlsModel& validate_model(const MjlsModel& model) {
    const int N = model.num_modes;
    if (N < 1) throw DimensionMismatch("mode count must be >= 1");
    if (model.n < 1 || model.m < 1 || model.l < 1 || model.q < 1) {
        throw DimensionMismatch("dimensions n, m, l, q must all be >= 1");
    }
    auto require_family = [&](const std::vector<Matrix>& fam, Eigen::Index rows, Eigen::Index cols,
                              const std::string& base) {
        if (static_cast<int>(fam.size()) != N) {
            throw DimensionMismatch(base + " family has " + std::to_string(fam.size()) +
                                    " entries, expected " + std::to_string(N));
        }
        for (int i = 0; i < N; ++i) {
            require_shape(fam[static_cast<std::size_t>(i)], rows, cols,
                          base + "_" + std::to_string(i + 1));
        }
    };
    require_family(model.A, model.n, model.n, "A");
    require_family(model.B, model.n, model.m, "B");
    require_family(model.C, model.l, model.n, "C");
    require_family(model.J, model.l, model.n, "J");
    require_family(model.E, model.n, model.q, "E");
    require_family(model.Psi, model.l, model.q, "Psi");
    require_family(model.Phi, model.l, model.q, "Phi");
    require_shape(model.generator, N, N, "generator");
    validate_generator(model.generator, "generator");
    return model;
}

void validate_observation(const ObservationModel& obs, int num_modes) {
    if (obs.rates.rows() != num_modes || obs.rates.cols() != num_modes) {
        throw DimensionMismatch("observation_rates must be " + std::to_string(num_modes) + "x" +
                                std::to_string(num_modes));
    }
    for (int i = 0; i < num_modes; ++i) {
        for (int j = 0; j < num_modes; ++j) {
            if (i != j && !(obs.rates(i, j) > 0.0)) {
                std::ostringstream os;
                os << "observation rate g(" << i + 1 << "," << j + 1 << ") = " << obs.rates(i, j)
                   << " must be > 0";
                throw RangeError(os.str());
            }
        }
    }
}

void validate_delay(const DelaySpec& delay) {
    if (!(delay.tau0 > 0.0)) {
        throw RangeError("tau0 = " + std::to_string(delay.tau0) + " must be > 0");
    }
    if (!(delay.tau_plus > 0.0) || delay.tau_plus > 1.0) {
        throw RangeError("tau_plus = " + std::to_string(delay.tau_plus) + " must lie in (0, 1]");
    }
}

void validate_performance(const PerformanceSpec& perf, int num_modes, int n) {
    if (!(perf.gamma > 0.0)) throw RangeError("gamma must be > 0");
    if (!(perf.f2 > 0.0)) throw RangeError("f2 must be > 0");
    if (!(perf.f_inf > 0.0)) throw RangeError("f_inf must be > 0");
    if (perf.X < 0.0) throw RangeError("X must be >= 0");
    const int n2 = num_modes * num_modes;
    if (static_cast<int>(perf.L.size()) != n2) {
        throw DimensionMismatch("L family has " + std::to_string(perf.L.size()) +
                                " entries, expected N^2 = " + std::to_string(n2));
    }
    for (int k = 0; k < n2; ++k) {
        const Matrix& Lk = perf.L[static_cast<std::size_t>(k)];
        if (Lk.rows() != n || Lk.cols() != n) {
            throw DimensionMismatch("L_" + std::to_string(k + 1) + " must be " + std::to_string(n) +
                                    "x" + std::to_string(n));
        }
        if (!Lk.isApprox(Lk.transpose(), 1e-12)) {
            throw RangeError("L_" + std::to_string(k + 1) + " must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(Lk);
        if (es.eigenvalues().minCoeff() <= 0.0) {
            throw RangeError("L_" + std::to_string(k + 1) + " must be positive definite");
        }
    }
    if (perf.phi.dimension() != n) {
        throw DimensionMismatch("phi has dimension " + std::to_string(perf.phi.dimension()) +
                                ", expected n = " + std::to_string(n));
    }
    if (perf.phi.kind == HistoryFunction::Kind::Sampled) {
        if (perf.phi.times.size() != perf.phi.values.size() || perf.phi.times.size() < 2) {
            throw RangeError("sampled phi needs matching times/values with at least 2 nodes");
        }
        for (std::size_t i = 1; i < perf.phi.times.size(); ++i) {
            if (!(perf.phi.times[i] > perf.phi.times[i - 1])) {
                throw RangeError("phi sample times must be strictly increasing");
            }
        }
    }
}

void validate_scenario(const Scenario& scenario) {
    validate_model(scenario.model);
    validate_observation(scenario.obs, scenario.model.num_modes);
    validate_delay(scenario.delay);
    validate_performance(scenario.perf, scenario.model.num_modes, scenario.model.n);
    const int N = scenario.model.num_modes;
    if (scenario.sim.r0 < 0 || scenario.sim.r0 >= N) {
        throw IndexOutOfRange("r0 outside {1.." + std::to_string(N) + "}");
    }
    if (scenario.sim.robs0 < 0 || scenario.sim.robs0 >= N) {
        throw IndexOutOfRange("robs0 outside {1.." + std::to_string(N) + "}");
    }
    if (!(scenario.sim.horizon > 0.0)) throw RangeError("horizon must be > 0");
    if (!(scenario.sim.dt > 0.0)) throw RangeError("dt must be > 0");
    if (scenario.sim.runs < 1) throw RangeError("runs must be >= 1");
}

double initial_history_energy(const HistoryFunction& phi, double tau0) {
    // Trapezoid on the stored grid; a constant function integrates exactly.
    std::vector<double> nodes;
    if (phi.kind == HistoryFunction::Kind::Constant) {
        nodes = {-tau0, 0.0};
    } else {
        nodes.push_back(-tau0);
        for (double t : phi.times) {
            if (t > -tau0 && t < 0.0) nodes.push_back(t);
        }
        nodes.push_back(0.0);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double a = phi(nodes[i]).squaredNorm();
        const double b = phi(nodes[i + 1]).squaredNorm();
        acc += 0.5 * (a + b) * (nodes[i + 1] - nodes[i]);
    }
    return std::sqrt(std::max(acc, 0.0));
}

} // namespace jumpsyn
