#include "jumpsyn/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jumpsyn/augmentation.hpp"
#include "jumpsyn/performance.hpp"
#include "jumpsyn/scenario_io.hpp"
#include "jumpsyn/simulation.hpp"
#include "jumpsyn/synthesis.hpp"

namespace jumpsyn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Reference values reported for the bundled two-mode example.
const Matrix kReferenceJointGenerator = [] {
    Matrix s(4, 4);
    s << -5, 0, 5, 0, 3, -8, 0, 5, 3, 0, -6, 3, 0, 3, 0, -3;
    return s;
}();

GainSet reference_gains() {
    Matrix k1(1, 2), k2(1, 2);
    k1 << -0.7423, -0.4074;
    k2 << -0.4397, -0.2309;
    return {k1, k2};
}

constexpr double kReferenceLambda = 7.1444;
constexpr double kReferenceBudget = 11.1444; // lambda + Lambda as reported

void write_text_file(const std::string& path, const std::string& content, bool force) {
    if (!force && fs::exists(path)) {
        throw Error(path + " exists; pass --force to overwrite");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json margins_to_json(const std::vector<ConstraintMargin>& margins) {
    json j = json::array();
    for (const auto& m : margins) {
        j.push_back({{"label", m.label}, {"max_eigenvalue", m.max_eigenvalue}, {"required", m.required}});
    }
    return j;
}

json synthesis_to_json(const SynthesisResult& result) {
    json j;
    j["status"] = to_string(result.status);
    j["message"] = result.message;
    j["epsilon"] = result.epsilon;
    if (result.status == SolveStatus::Feasible) {
        json K = json::array(), Y = json::array(), Z = json::array();
        for (const auto& k : result.gains) K.push_back(matrix_to_json(k));
        for (const auto& y : result.Y) Y.push_back(matrix_to_json(y));
        for (const auto& z : result.Z) Z.push_back(matrix_to_json(z));
        j["K"] = std::move(K);
        j["Y"] = std::move(Y);
        j["Z"] = std::move(Z);
        j["lambda"] = result.lambda;
        j["Lambda"] = result.Lambda;
    }
    j["margins"] = margins_to_json(result.margins);
    return j;
}

json analysis_to_json(const AnalysisResult& result) {
    json j;
    j["status"] = to_string(result.status);
    j["message"] = result.message;
    if (result.status == SolveStatus::Feasible) {
        json P = json::array();
        for (const auto& p : result.P) P.push_back(matrix_to_json(p));
        j["P"] = std::move(P);
        if (std::isfinite(result.bound)) j["bound"] = result.bound;
    }
    j["margins"] = margins_to_json(result.margins);
    return j;
}

json estimate_to_json(const McEstimate& est) {
    return json{{"mean", est.mean},
                {"std_error", est.std_error},
                {"runs", est.runs},
                {"horizon", est.horizon},
                {"tail_fraction", est.tail_fraction}};
}

GainSet gains_from_json_doc(const json& doc, const MjlsModel& model) {
    const json* list = nullptr;
    if (doc.contains("K")) {
        list = &doc["K"];
    } else if (doc.contains("gains")) {
        list = &doc["gains"];
    } else {
        throw ParseError("gains file must carry a 'K' (or 'gains') array");
    }
    GainSet gains;
    for (std::size_t j = 0; j < list->size(); ++j) {
        gains.push_back(matrix_from_json((*list)[j], "K[" + std::to_string(j + 1) + "]"));
    }
    if (static_cast<int>(gains.size()) != model.num_modes) {
        throw DimensionMismatch("gains file has " + std::to_string(gains.size()) +
                                " gains, scenario has " + std::to_string(model.num_modes) + " modes");
    }
    for (const auto& k : gains) {
        if (k.rows() != model.m || k.cols() != model.n) {
            throw DimensionMismatch("gains must be m x n");
        }
    }
    return gains;
}

GainSet load_gains(const std::string& spec, const Scenario& scenario, int& exit_code) {
    exit_code = 0;
    if (spec == "from-synth") {
        const AugmentedModel aug = build_augmented_model(scenario.model, scenario.obs);
        const SynthesisResult synth = synthesize(aug, scenario.delay, scenario.perf);
        if (synth.status != SolveStatus::Feasible) {
            std::cerr << "synthesis did not return gains: " << synth.message << "\n";
            exit_code = (synth.status == SolveStatus::Infeasible) ? 2 : 1;
            return {};
        }
        return synth.gains;
    }
    std::ifstream in(spec);
    if (!in) throw ParseError(spec + ": cannot open gains file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& ex) {
        throw ParseError(spec + ": " + ex.what());
    }
    return gains_from_json_doc(doc, scenario.model);
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < traj.x.rows(); ++i) os << ",x" << i + 1;
    for (int i = 0; i < traj.u.rows(); ++i) os << ",u" << i + 1;
    for (int i = 0; i < traj.z.rows(); ++i) os << ",z" << i + 1;
    for (int i = 0; i < traj.y.rows(); ++i) os << ",y" << i + 1;
    os << ",r,robs,tau";
    for (int i = 0; i < traj.w.rows(); ++i) os << ",w" << i + 1;
    os << "\n";
    for (int s = 0; s < traj.samples(); ++s) {
        os << format_double(traj.time[static_cast<std::size_t>(s)]);
        for (int i = 0; i < traj.x.rows(); ++i) os << "," << format_double(traj.x(i, s));
        for (int i = 0; i < traj.u.rows(); ++i) os << "," << format_double(traj.u(i, s));
        for (int i = 0; i < traj.z.rows(); ++i) os << "," << format_double(traj.z(i, s));
        for (int i = 0; i < traj.y.rows(); ++i) os << "," << format_double(traj.y(i, s));
        os << "," << traj.r[static_cast<std::size_t>(s)] + 1 << ","
           << traj.robs[static_cast<std::size_t>(s)] + 1 << ","
           << format_double(traj.tau[static_cast<std::size_t>(s)]);
        for (int i = 0; i < traj.w.rows(); ++i) os << "," << format_double(traj.w(i, s));
        os << "\n";
    }
    return os.str();
}

json augmentation_to_json(const AugmentedModel& aug) {
    json j;
    j["kappa"] = matrix_to_json(aug.kappa);
    json map = json::array();
    for (int k = 0; k < aug.size(); ++k) {
        map.push_back({{"k", k + 1},
                       {"true_mode", aug.true_mode[static_cast<std::size_t>(k)] + 1},
                       {"observed_mode", aug.observed_mode[static_cast<std::size_t>(k)] + 1}});
    }
    j["index_map"] = std::move(map);
    return j;
}

Scenario load_scenario_arg(const std::string& path) {
    if (path == "bundled") {
        return scenario_from_json(json::parse(example_scenario_text()));
    }
    return load_scenario(path);
}

std::vector<double> parse_horizons(const std::string& text) {
    std::vector<double> horizons;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) horizons.push_back(std::stod(item));
    }
    return horizons;
}

int cmd_validate(const std::string& scenario_path, bool as_json) {
    const Scenario s = load_scenario_arg(scenario_path);
    const double energy = initial_history_energy(s.perf.phi, s.delay.tau0);
    if (as_json) {
        json j;
        j["modes"] = s.model.num_modes;
        j["dims"] = {{"n", s.model.n}, {"m", s.model.m}, {"l", s.model.l}, {"q", s.model.q}};
        j["history_energy"] = energy;
        j["X"] = s.perf.X;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "scenario ok: N=" << s.model.num_modes << " n=" << s.model.n
                  << " m=" << s.model.m << " l=" << s.model.l << " q=" << s.model.q << "\n";
        std::cout << "history energy sqrt(int |phi|^2) = " << energy << ", declared X = " << s.perf.X
                  << "\n";
        if (s.perf.X + 1e-9 < energy) {
            std::cout << "warning: X is below the history energy; the Lambda bound may not cover "
                         "the initial data\n";
        }
    }
    return 0;
}

int cmd_augment(const std::string& scenario_path, const std::string& out, bool force) {
    const Scenario s = load_scenario_arg(scenario_path);
    const AugmentedModel aug = build_augmented_model(s.model, s.obs);
    const std::string text = augmentation_to_json(aug).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_file(out, text, force);
    }
    return 0;
}

int cmd_synth(const std::string& scenario_path, const std::string& variant, double eps_scale,
              const std::string& out, bool force) {
    const Scenario s = load_scenario_arg(scenario_path);
    const AugmentedModel aug = build_augmented_model(s.model, s.obs);
    SynthesisOptions options;
    options.variant = (variant == "as-printed") ? LmiVariant::AsPrinted : LmiVariant::Corrected;
    if (eps_scale > 0.0) options.epsilon_scale = eps_scale;
    const SynthesisResult result = synthesize(aug, s.delay, s.perf, options);
    const std::string text = synthesis_to_json(result).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_file(out, text, force);
        std::cout << to_string(result.status) << "\n";
    }
    if (result.status == SolveStatus::Feasible) return 0;
    return result.status == SolveStatus::Infeasible ? 2 : 1;
}

int cmd_analyze(const std::string& scenario_path, const std::string& gains_spec,
                const std::string& mode, const std::string& out, bool force) {
    const Scenario s = load_scenario_arg(scenario_path);
    int code = 0;
    const GainSet gains = load_gains(gains_spec, s, code);
    if (code != 0) return code;
    const AugmentedModel aug = build_augmented_model(s.model, s.obs);

    std::vector<Matrix> Q;
    for (const auto& Lk : s.perf.L) {
        Q.push_back(Eigen::LLT<Matrix>(Lk).solve(Matrix::Identity(s.model.n, s.model.n)));
    }
    InitialData init{s.perf.phi, s.delay.tau0, s.sim.r0 * s.model.num_modes + s.sim.robs0};

    json j;
    bool infeasible = false;
    if (mode == "h2" || mode == "both") {
        const AnalysisResult r = verify_h2_analysis(aug, gains, Q, s.delay.tau_plus, {}, &init);
        j["h2"] = analysis_to_json(r);
        infeasible |= r.status != SolveStatus::Feasible;
    }
    if (mode == "hinf" || mode == "both") {
        const AnalysisResult r =
            verify_hinf_analysis(aug, gains, Q, s.delay.tau_plus, s.perf.gamma, {}, &init);
        j["hinf"] = analysis_to_json(r);
        infeasible |= r.status != SolveStatus::Feasible;
    }
    const std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_file(out, text, force);
    }
    return infeasible ? 2 : 0;
}

int cmd_simulate(const std::string& scenario_path, const std::string& gains_spec, int runs,
                 std::int64_t seed, double dt, const std::string& out_dir, bool force) {
    Scenario s = load_scenario_arg(scenario_path);
    if (runs > 0) s.sim.runs = runs;
    if (seed >= 0) s.sim.seed = static_cast<std::uint64_t>(seed);
    if (dt > 0.0) s.sim.dt = dt;
    int code = 0;
    const GainSet gains = load_gains(gains_spec, s, code);
    if (code != 0) return code;

    fs::create_directories(out_dir);
    json summary;
    summary["runs"] = s.sim.runs;
    summary["seed"] = s.sim.seed;
    summary["dt"] = s.sim.dt;
    summary["horizon"] = s.sim.horizon;
    json per_run = json::array();
    for (int run = 0; run < s.sim.runs; ++run) {
        const Trajectory traj = simulate_run(s, gains, static_cast<std::uint64_t>(run));
        char name[64];
        std::snprintf(name, sizeof(name), "run_%04d.csv", run);
        write_text_file((fs::path(out_dir) / name).string(), trajectory_to_csv(traj), force);
        std::vector<double> xx(static_cast<std::size_t>(traj.samples()));
        for (int i = 0; i < traj.samples(); ++i) xx[static_cast<std::size_t>(i)] = traj.x.col(i).squaredNorm();
        per_run.push_back({{"file", name},
                           {"final_state_sq", traj.x.col(traj.samples() - 1).squaredNorm()},
                           {"state_energy", trapezoid_integral(traj.time, xx)}});
    }
    summary["trajectories"] = std::move(per_run);
    write_text_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n", force);
    std::cout << "wrote " << s.sim.runs << " trajectories to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& scenario_path, const std::string& gains_spec, int runs,
                 std::int64_t seed, const std::string& horizons_text, const std::string& out,
                 bool force) {
    Scenario s = load_scenario_arg(scenario_path);
    if (runs > 0) s.sim.runs = runs;
    if (seed >= 0) s.sim.seed = static_cast<std::uint64_t>(seed);
    int code = 0;
    const GainSet gains = load_gains(gains_spec, s, code);
    if (code != 0) return code;

    std::vector<double> horizons = parse_horizons(horizons_text);
    if (horizons.empty()) {
        horizons = {s.sim.horizon / 3.0, 2.0 * s.sim.horizon / 3.0, s.sim.horizon};
    }

    const McEstimate h2 = estimate_h2(s, gains, s.sim.runs, s.sim.seed);
    const McEstimate hinf = estimate_hinf_functional(s, gains, s.sim.runs, s.sim.seed);
    const StabilityReport stability = stability_diagnostic(s, gains, s.sim.runs, horizons, s.sim.seed);

    json j;
    j["h2"] = estimate_to_json(h2);
    j["hinf"] = estimate_to_json(hinf);
    json st;
    st["verdict"] = to_string(stability.verdict);
    st["horizons"] = stability.horizons;
    json energies = json::array();
    for (const auto& e : stability.energies) energies.push_back(estimate_to_json(e));
    st["state_energy"] = std::move(energies);
    st["final_state_sq"] = estimate_to_json(stability.final_state_sq);
    j["stability"] = std::move(st);

    const std::string text = j.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_file(out, text, force);
    }
    return 0;
}

int cmd_repro_example(const std::string& scenario_path, const std::string& out_dir, int runs,
                      std::int64_t seed, bool force) {
    Scenario s = load_scenario_arg(scenario_path);
    if (runs > 0) s.sim.runs = runs;
    if (seed >= 0) s.sim.seed = static_cast<std::uint64_t>(seed);
    const bool bundled = scenario_path == "bundled";

    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "scenario.json").string(),
                    scenario_to_json(s).dump(2) + "\n", force);

    json summary;
    summary["runs"] = s.sim.runs;
    summary["seed"] = s.sim.seed;

    // stage 1: augmentation
    const AugmentedModel aug = build_augmented_model(s.model, s.obs);
    write_text_file((fs::path(out_dir) / "augmented.json").string(),
                    augmentation_to_json(aug).dump(2) + "\n", force);
    if (bundled) {
        summary["joint_generator_matches_reference"] =
            (aug.kappa - kReferenceJointGenerator).cwiseAbs().maxCoeff() == 0.0;
    }

    // stage 2: synthesis (corrected variant)
    const SynthesisResult synth = synthesize(aug, s.delay, s.perf);
    write_text_file((fs::path(out_dir) / "synth.json").string(),
                    synthesis_to_json(synth).dump(2) + "\n", force);
    summary["synthesis"] = {{"status", to_string(synth.status)}, {"message", synth.message}};
    if (synth.status == SolveStatus::Feasible) {
        summary["synthesis"]["lambda"] = synth.lambda;
        summary["synthesis"]["Lambda"] = synth.Lambda;
        summary["synthesis"]["budget"] = synth.lambda + synth.Lambda;
    }

    // stage 3: pick gains for the simulation phase
    GainSet gains;
    std::string gain_source;
    if (synth.status == SolveStatus::Feasible) {
        gains = synth.gains;
        gain_source = "synthesized";
    } else if (bundled) {
        gains = reference_gains();
        gain_source = "reference (synthesis was " + std::string(to_string(synth.status)) + ")";
    } else {
        std::cerr << "synthesis failed and no reference gains exist for this scenario\n";
        return synth.status == SolveStatus::Infeasible ? 2 : 1;
    }
    summary["gains"] = {{"source", gain_source}};
    json K = json::array();
    for (const auto& k : gains) K.push_back(matrix_to_json(k));
    summary["gains"]["K"] = std::move(K);
    {
        json gains_doc;
        json KK = json::array();
        for (const auto& k : gains) KK.push_back(matrix_to_json(k));
        gains_doc["K"] = std::move(KK);
        gains_doc["source"] = gain_source;
        write_text_file((fs::path(out_dir) / "gains.json").string(), gains_doc.dump(2) + "\n", force);
    }

    // stage 4: one representative trajectory + Monte Carlo evaluation
    const Trajectory traj = simulate_run(s, gains, 0);
    write_text_file((fs::path(out_dir) / "trajectory_run0.csv").string(), trajectory_to_csv(traj),
                    force);

    const McEstimate h2 = estimate_h2(s, gains, s.sim.runs, s.sim.seed);
    const McEstimate hinf = estimate_hinf_functional(s, gains, s.sim.runs, s.sim.seed);
    const StabilityReport stability = stability_diagnostic(
        s, gains, s.sim.runs, {s.sim.horizon / 3.0, 2.0 * s.sim.horizon / 3.0, s.sim.horizon},
        s.sim.seed);
    summary["estimates"] = {{"h2", estimate_to_json(h2)}, {"hinf", estimate_to_json(hinf)}};
    summary["stability"] = {{"verdict", to_string(stability.verdict)},
                            {"final_state_sq", estimate_to_json(stability.final_state_sq)}};

    if (bundled) {
        json reference;
        reference["K"] = {matrix_to_json(reference_gains()[0]), matrix_to_json(reference_gains()[1])};
        reference["lambda"] = kReferenceLambda;
        reference["Lambda"] = 4.0;
        reference["budget"] = kReferenceBudget;
        summary["reference"] = std::move(reference);
        summary["comparison"] = {
            {"h2_within_reference_budget", h2.mean <= kReferenceBudget + 2.0 * h2.std_error},
            {"hinf_within_reference_budget", hinf.mean <= kReferenceBudget + 2.0 * hinf.std_error},
            {"saturating", stability.verdict == StabilityVerdict::Saturating}};
    }

    write_text_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n", force);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"controller synthesis and verification for jump linear systems with state and "
                 "mode-observation delays"};
    app.require_subcommand(1);

    std::string scenario_path, gains_spec = "from-synth", out, variant = "corrected";
    std::string mode = "both", horizons_text;
    double eps_scale = -1.0, dt = -1.0;
    int runs = -1;
    std::int64_t seed = -1;
    bool force = false, as_json = false;

    auto add_scenario = [&](CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--scenario", scenario_path,
                                    "scenario file (or 'bundled' for the built-in example)");
        if (required) opt->required();
    };

    auto* validate = app.add_subcommand("validate", "parse and validate a scenario file");
    add_scenario(validate);
    validate->add_flag("--json", as_json, "machine-readable output");

    auto* augment = app.add_subcommand("augment", "emit the joint generator and index map as JSON");
    add_scenario(augment);
    augment->add_option("--out", out, "write to a file instead of stdout");
    augment->add_flag("--force", force, "overwrite existing outputs");

    auto* synth = app.add_subcommand("synth", "solve the gain-synthesis feasibility program");
    add_scenario(synth);
    synth->add_option("--variant", variant, "corrected | as-printed")
        ->check(CLI::IsMember({"corrected", "as-printed"}));
    synth->add_option("--eps", eps_scale, "strictness scale for the LMI margins");
    synth->add_option("--out", out, "write the result JSON to a file");
    synth->add_flag("--force", force, "overwrite existing outputs");

    auto* analyze = app.add_subcommand("analyze", "verify fixed gains via the analysis programs");
    add_scenario(analyze);
    analyze->add_option("--gains", gains_spec, "gains JSON file or 'from-synth'")->required();
    analyze->add_option("--mode", mode, "h2 | hinf | both")->check(CLI::IsMember({"h2", "hinf", "both"}));
    analyze->add_option("--out", out, "write the report to a file");
    analyze->add_flag("--force", force, "overwrite existing outputs");

    auto* simulate = app.add_subcommand("simulate", "integrate closed-loop runs and write CSVs");
    add_scenario(simulate);
    simulate->add_option("--gains", gains_spec, "gains JSON file or 'from-synth'")->required();
    simulate->add_option("--runs", runs, "number of Monte Carlo runs");
    simulate->add_option("--seed", seed, "master seed");
    simulate->add_option("--dt", dt, "integration step");
    simulate->add_option("--out", out, "output directory")->required();
    simulate->add_flag("--force", force, "overwrite existing outputs");

    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo performance and stability report");
    add_scenario(evaluate);
    evaluate->add_option("--gains", gains_spec, "gains JSON file or 'from-synth'")->required();
    evaluate->add_option("--runs", runs, "number of Monte Carlo runs");
    evaluate->add_option("--seed", seed, "master seed");
    evaluate->add_option("--horizons", horizons_text, "comma-separated stability horizons");
    evaluate->add_option("--out", out, "write the report to a file");
    evaluate->add_flag("--force", force, "overwrite existing outputs");

    auto* repro = app.add_subcommand("repro-example",
                                     "run the bundled example end to end and compare against the "
                                     "reference values");
    repro->add_option("--scenario", scenario_path, "override the bundled scenario");
    repro->add_option("--out", out, "output directory")->required();
    repro->add_option("--runs", runs, "override the run count");
    repro->add_option("--seed", seed, "override the master seed");
    repro->add_flag("--force", force, "overwrite existing outputs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        return app.exit(ex);
    }

    try {
        if (validate->parsed()) return cmd_validate(scenario_path, as_json);
        if (augment->parsed()) return cmd_augment(scenario_path, out, force);
        if (synth->parsed()) return cmd_synth(scenario_path, variant, eps_scale, out, force);
        if (analyze->parsed()) return cmd_analyze(scenario_path, gains_spec, mode, out, force);
        if (simulate->parsed()) return cmd_simulate(scenario_path, gains_spec, runs, seed, dt, out, force);
        if (evaluate->parsed())
            return cmd_evaluate(scenario_path, gains_spec, runs, seed, horizons_text, out, force);
        if (repro->parsed()) {
            if (scenario_path.empty()) scenario_path = "bundled";
            return cmd_repro_example(scenario_path, out, runs, seed, force);
        }
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace jumpsyn
