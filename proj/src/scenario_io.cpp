#include "jumpsyn/scenario_io.hpp"

#include <fstream>
#include <sstream>

namespace jumpsyn {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ParseError(name + ": expected a nested array of numbers");
    }
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ParseError(name + ": ragged rows (row " + std::to_string(r + 1) + ")");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) {
                throw ParseError(name + ": non-numeric entry at (" + std::to_string(r + 1) + "," +
                                 std::to_string(c + 1) + ")");
            }
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

Vector vector_from_json(const json& j, const std::string& name) {
    if (!j.is_array()) throw ParseError(name + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(name + ": non-numeric entry " + std::to_string(i + 1));
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

namespace {

const json& require_key(const json& doc, const std::string& key, const std::string& context) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(context + ": missing key '" + key + "'");
    return *it;
}

double require_number(const json& doc, const std::string& key, const std::string& context) {
    const json& v = require_key(doc, key, context);
    if (!v.is_number()) throw ParseError(context + "." + key + ": expected a number");
    return v.get<double>();
}

int require_int(const json& doc, const std::string& key, const std::string& context) {
    const json& v = require_key(doc, key, context);
    if (!v.is_number_integer()) throw ParseError(context + "." + key + ": expected an integer");
    return v.get<int>();
}

DisturbanceSpec disturbance_from_json(const json& j) {
    DisturbanceSpec d;
    const std::string kind = require_key(j, "kind", "sim.disturbance").get<std::string>();
    if (kind == "zero") {
        d.kind = DisturbanceSpec::Kind::Zero;
    } else if (kind == "example-waveform") {
        d.kind = DisturbanceSpec::Kind::ExampleWaveform;
    } else if (kind == "sampled") {
        d.kind = DisturbanceSpec::Kind::Sampled;
        for (const auto& t : require_key(j, "times", "sim.disturbance")) d.times.push_back(t.get<double>());
        for (const auto& v : require_key(j, "values", "sim.disturbance")) {
            d.values.push_back(vector_from_json(v, "sim.disturbance.values"));
        }
        if (d.times.size() != d.values.size() || d.times.size() < 2) {
            throw ParseError("sim.disturbance: sampled kind needs matching times/values, >= 2 nodes");
        }
    } else {
        throw ParseError("sim.disturbance.kind: unknown kind '" + kind + "'");
    }
    return d;
}

json disturbance_to_json(const DisturbanceSpec& d) {
    json j;
    switch (d.kind) {
        case DisturbanceSpec::Kind::Zero: j["kind"] = "zero"; break;
        case DisturbanceSpec::Kind::ExampleWaveform: j["kind"] = "example-waveform"; break;
        case DisturbanceSpec::Kind::Sampled: {
            j["kind"] = "sampled";
            j["times"] = d.times;
            json vals = json::array();
            for (const auto& v : d.values) {
                json row = json::array();
                for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
                vals.push_back(std::move(row));
            }
            j["values"] = std::move(vals);
            break;
        }
    }
    return j;
}

DelaySignalSpec delay_signal_from_json(const json& j) {
    DelaySignalSpec d;
    const std::string kind = require_key(j, "kind", "sim.delay_signal").get<std::string>();
    if (kind == "constant") {
        d.kind = DelaySignalSpec::Kind::Constant;
        d.constant_value = require_number(j, "value", "sim.delay_signal");
    } else if (kind == "ramp") {
        d.kind = DelaySignalSpec::Kind::Ramp;
        d.initial = j.value("initial", 0.0);
    } else if (kind == "sine") {
        d.kind = DelaySignalSpec::Kind::Sine;
        d.offset = require_number(j, "offset", "sim.delay_signal");
        d.amplitude = require_number(j, "amplitude", "sim.delay_signal");
        d.period = require_number(j, "period", "sim.delay_signal");
    } else {
        throw ParseError("sim.delay_signal.kind: unknown kind '" + kind + "'");
    }
    return d;
}

json delay_signal_to_json(const DelaySignalSpec& d) {
    json j;
    switch (d.kind) {
        case DelaySignalSpec::Kind::Constant:
            j["kind"] = "constant";
            j["value"] = d.constant_value;
            break;
        case DelaySignalSpec::Kind::Ramp:
            j["kind"] = "ramp";
            j["initial"] = d.initial;
            break;
        case DelaySignalSpec::Kind::Sine:
            j["kind"] = "sine";
            j["offset"] = d.offset;
            j["amplitude"] = d.amplitude;
            j["period"] = d.period;
            break;
    }
    return j;
}

} // namespace

Scenario scenario_from_json(const json& doc) {
    Scenario s;

    const json& modes = require_key(doc, "modes", "scenario");
    if (!modes.is_array() || modes.empty()) throw ParseError("scenario.modes: expected a non-empty array");
    const int N = static_cast<int>(modes.size());
    s.model.num_modes = N;
    for (int i = 0; i < N; ++i) {
        const json& mode = modes[static_cast<std::size_t>(i)];
        const std::string ctx = "modes[" + std::to_string(i + 1) + "]";
        s.model.A.push_back(matrix_from_json(require_key(mode, "A", ctx), ctx + ".A"));
        s.model.B.push_back(matrix_from_json(require_key(mode, "B", ctx), ctx + ".B"));
        s.model.C.push_back(matrix_from_json(require_key(mode, "C", ctx), ctx + ".C"));
        s.model.J.push_back(matrix_from_json(require_key(mode, "J", ctx), ctx + ".J"));
        s.model.E.push_back(matrix_from_json(require_key(mode, "E", ctx), ctx + ".E"));
        s.model.Psi.push_back(matrix_from_json(require_key(mode, "Psi", ctx), ctx + ".Psi"));
        s.model.Phi.push_back(matrix_from_json(require_key(mode, "Phi", ctx), ctx + ".Phi"));
    }
    s.model.n = static_cast<int>(s.model.A.front().rows());
    s.model.m = static_cast<int>(s.model.B.front().cols());
    s.model.l = static_cast<int>(s.model.C.front().rows());
    s.model.q = static_cast<int>(s.model.E.front().cols());
    s.model.generator = matrix_from_json(require_key(doc, "generator", "scenario"), "generator");
    s.obs.rates = matrix_from_json(require_key(doc, "observation_rates", "scenario"), "observation_rates");

    const json& delay = require_key(doc, "delay", "scenario");
    s.delay.tau0 = require_number(delay, "tau0", "delay");
    s.delay.tau_plus = require_number(delay, "tau_plus", "delay");

    const json& perf = require_key(doc, "performance", "scenario");
    s.perf.gamma = require_number(perf, "gamma", "performance");
    s.perf.f2 = require_number(perf, "f2", "performance");
    s.perf.f_inf = require_number(perf, "f_inf", "performance");
    s.perf.X = require_number(perf, "X", "performance");
    const json& L = require_key(perf, "L", "performance");
    const int n2 = N * N;
    if (L.is_array() && !L.empty() && L.front().is_array() && !L.front().empty() &&
        L.front().front().is_array()) {
        // array of N^2 matrices
        for (std::size_t k = 0; k < L.size(); ++k) {
            s.perf.L.push_back(matrix_from_json(L[k], "performance.L[" + std::to_string(k + 1) + "]"));
        }
    } else {
        // single matrix applied to every augmented mode
        const Matrix shared = matrix_from_json(L, "performance.L");
        s.perf.L.assign(static_cast<std::size_t>(n2), shared);
    }
    if (perf.contains("phi_grid")) {
        const json& grid = perf["phi_grid"];
        s.perf.phi.kind = HistoryFunction::Kind::Sampled;
        for (const auto& t : require_key(grid, "times", "performance.phi_grid")) {
            s.perf.phi.times.push_back(t.get<double>());
        }
        for (const auto& v : require_key(grid, "values", "performance.phi_grid")) {
            s.perf.phi.values.push_back(vector_from_json(v, "performance.phi_grid.values"));
        }
    } else {
        s.perf.phi =
            HistoryFunction::constant_history(vector_from_json(require_key(perf, "phi0", "performance"), "performance.phi0"));
    }

    const json& sim = require_key(doc, "sim", "scenario");
    s.sim.r0 = require_int(sim, "r0", "sim") - 1;
    s.sim.robs0 = sim.contains("robs0") ? sim["robs0"].get<int>() - 1 : s.sim.r0;
    s.sim.horizon = require_number(sim, "horizon", "sim");
    s.sim.dt = require_number(sim, "dt", "sim");
    s.sim.seed = require_key(sim, "seed", "sim").get<std::uint64_t>();
    s.sim.runs = require_int(sim, "runs", "sim");
    s.sim.disturbance = disturbance_from_json(require_key(sim, "disturbance", "sim"));
    s.sim.delay_signal = delay_signal_from_json(require_key(sim, "delay_signal", "sim"));

    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ParseError(path + ": " + ex.what());
    }
    return scenario_from_json(doc);
}

json scenario_to_json(const Scenario& s) {
    json doc;
    json modes = json::array();
    for (int i = 0; i < s.model.num_modes; ++i) {
        const auto k = static_cast<std::size_t>(i);
        json mode;
        mode["A"] = matrix_to_json(s.model.A[k]);
        mode["B"] = matrix_to_json(s.model.B[k]);
        mode["C"] = matrix_to_json(s.model.C[k]);
        mode["J"] = matrix_to_json(s.model.J[k]);
        mode["E"] = matrix_to_json(s.model.E[k]);
        mode["Psi"] = matrix_to_json(s.model.Psi[k]);
        mode["Phi"] = matrix_to_json(s.model.Phi[k]);
        modes.push_back(std::move(mode));
    }
    doc["modes"] = std::move(modes);
    doc["generator"] = matrix_to_json(s.model.generator);
    doc["observation_rates"] = matrix_to_json(s.obs.rates);
    doc["delay"] = {{"tau0", s.delay.tau0}, {"tau_plus", s.delay.tau_plus}};

    json perf;
    perf["gamma"] = s.perf.gamma;
    perf["f2"] = s.perf.f2;
    perf["f_inf"] = s.perf.f_inf;
    perf["X"] = s.perf.X;
    json L = json::array();
    for (const auto& Lk : s.perf.L) L.push_back(matrix_to_json(Lk));
    perf["L"] = std::move(L);
    if (s.perf.phi.kind == HistoryFunction::Kind::Constant) {
        json phi0 = json::array();
        for (Eigen::Index i = 0; i < s.perf.phi.constant.size(); ++i) phi0.push_back(s.perf.phi.constant(i));
        perf["phi0"] = std::move(phi0);
    } else {
        json grid;
        grid["times"] = s.perf.phi.times;
        json vals = json::array();
        for (const auto& v : s.perf.phi.values) {
            json row = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
            vals.push_back(std::move(row));
        }
        grid["values"] = std::move(vals);
        perf["phi_grid"] = std::move(grid);
        json phi0 = json::array();
        const Vector z = s.perf.phi.at_zero();
        for (Eigen::Index i = 0; i < z.size(); ++i) phi0.push_back(z(i));
        perf["phi0"] = std::move(phi0);
    }
    doc["performance"] = std::move(perf);

    json sim;
    sim["r0"] = s.sim.r0 + 1;
    sim["robs0"] = s.sim.robs0 + 1;
    sim["horizon"] = s.sim.horizon;
    sim["dt"] = s.sim.dt;
    sim["seed"] = s.sim.seed;
    sim["runs"] = s.sim.runs;
    sim["disturbance"] = disturbance_to_json(s.sim.disturbance);
    sim["delay_signal"] = delay_signal_to_json(s.sim.delay_signal);
    doc["sim"] = std::move(sim);
    return doc;
}

} // namespace jumpsyn
