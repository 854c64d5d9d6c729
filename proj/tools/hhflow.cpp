#include "halfharmonic/config.hpp"
#include "halfharmonic/diagnostics.hpp"
#include "halfharmonic/errors.hpp"
#include "halfharmonic/flow.hpp"
#include "halfharmonic/gluing.hpp"
#include "halfharmonic/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Job {
    std::string config_path;  // empty: built-in defaults
    fs::path out;
    bool to_stdout = true;
};

hh::RunConfig load(const Job& job) {
    return job.config_path.empty() ? hh::default_config() : hh::load_config(job.config_path);
}

std::ofstream open_out(const fs::path& p) {
    fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
    std::ofstream os(p);
    if (!os) throw hh::ConfigError("cannot write " + p.string());
    return os;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int cmd_verify(const Job& job, const std::string& filter) {
    const hh::RunConfig cfg = load(job);
    const auto results = hh::run_verify(cfg.verify_grid, filter);
    std::ostringstream report;
    hh::write_jsonl(report, results);
    if (job.to_stdout) std::cout << report.str();
    if (!job.out.empty()) {
        auto os = open_out(job.out / "verify.jsonl");
        os << report.str();
    }
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
    return ok ? 0 : 1;
}

int cmd_simulate(const Job& job) {
    const hh::RunConfig cfg = load(job);
    const fs::path dir = job.out.empty() ? fs::path(cfg.out_dir) : job.out;
    auto csv = open_out(dir / "trajectory.csv");
    hh::write_csv_header(csv);
    std::vector<std::pair<double, double>> mus;
    double final_energy = std::nan(""), final_t = 0.0;
    std::size_t recorded = 0;
    std::string status = "ok";
    int code = 0;

    hh::FlowConfig fc = cfg.flow;
    fc.keep_states = false;
    try {
        const hh::SphereMapField u0 = hh::initial_map(cfg);
        hh::run_flow(u0, fc, [&](const hh::FlowSample& s, const hh::SphereMapField& u) {
            hh::write_csv_row(csv, s);
            csv.flush();
            if (std::isfinite(s.mu)) mus.emplace_back(s.t, s.mu);
            final_energy = s.energy;
            final_t = s.t;
            if (cfg.dump_stride > 0 && recorded % cfg.dump_stride == 0) {
                std::ostringstream name;
                name << "state_" << std::setw(6) << std::setfill('0') << recorded << ".csv";
                auto os = open_out(dir / "fields" / name.str());
                os << std::setprecision(17);
                hh::write_csv(os, u);
            }
            ++recorded;
        });
    } catch (const hh::NumericError& e) {
        status = std::string("numeric_error: ") + e.what();
        code = 3;
    } catch (const hh::DomainError& e) {
        status = std::string("domain_error: ") + e.what();
        code = 3;
    }

    json summary;
    summary["status"] = status;
    summary["samples"] = recorded;
    summary["final_time"] = final_t;
    summary["final_energy"] = number(final_energy);
    if (mus.size() >= 10) {
        const hh::DecayFit fit = hh::fit_decay_rate(mus);
        summary["kappa_fit"] = number(fit.kappa);
        summary["r_squared"] = number(fit.r_squared);
    } else {
        summary["kappa_fit"] = nullptr;
        summary["r_squared"] = nullptr;
    }
    if (cfg.noise.enabled) {
        try {
            summary["kappa0"] = hh::kappa0(cfg.noise.spec());
        } catch (const hh::SignConditionError&) {
            summary["kappa0"] = nullptr;
        }
    }
    auto os = open_out(dir / "summary.json");
    os << summary.dump(2) << '\n';
    if (code != 0) std::cerr << "simulate: " << status << '\n';
    return code;
}

int cmd_kappa(const Job& job) {
    const hh::RunConfig cfg = load(job);
    if (!cfg.noise.enabled) throw hh::ConfigError("kappa: the [noise] section is disabled");
    const hh::NoiseSpec n = cfg.noise.spec();
    const double f = hh::sign_functional(n);
    std::ostringstream text;
    text << std::setprecision(10) << std::fixed << "sign_functional " << f << '\n';
    const double k = hh::kappa0(n);
    text << "kappa0 " << k << '\n';
    if (job.to_stdout) std::cout << text.str();
    if (!job.out.empty()) {
        auto os = open_out(job.out / "kappa.txt");
        os << text.str();
    }
    return 0;
}

void dump_state(const fs::path& dir, const hh::GluingState& st, const hh::GluingProblem& P) {
    auto in = open_out(dir / "last_state_inner.csv");
    in << std::setprecision(17);
    hh::write_csv(in, P.inner, st.phi.as_field());
    auto out = open_out(dir / "last_state_outer.csv");
    out << std::setprecision(17);
    hh::write_csv(out, P.outer, st.psi);
}

int cmd_glue(const Job& job) {
    const hh::RunConfig cfg = load(job);
    const fs::path dir = job.out.empty() ? fs::path(cfg.out_dir) : job.out;
    std::optional<hh::NoiseSpec> noise;
    if (cfg.noise.enabled) noise = cfg.noise.spec();
    const hh::GluingProblem P = hh::make_problem(cfg.gluing, noise);

    auto csv = open_out(dir / "glue.csv");
    csv << "t,tau,lambda,xi1,proj_Z2,proj_Z3,inner_sup,outer_sup\n" << std::setprecision(17);
    auto row = [&](const hh::GluingState& s) {
        csv << s.t << ',' << s.tau << ',' << s.lambda << ',' << s.xi1 << ',' << s.proj_z2 << ',' << s.proj_z3 << ','
            << hh::sup_norm(s.phi.as_field()) << ',' << hh::sup_norm(s.psi) << '\n';
        csv.flush();
    };

    hh::GluingState st = hh::initial_state(P);
    row(st);
    const hh::SphereMapField start = cfg.cross_check ? hh::reconstruct(st, P) : hh::SphereMapField{};
    std::size_t steps = 0;
    double max_proj = 0.0;
    std::string status = "ok";
    int code = 0;
    try {
        while (st.t < cfg.gluing.t_end - 1e-12) {
            hh::GluingState next = hh::inner_outer_step(st, P);
            st = std::move(next);
            max_proj = std::max({max_proj, std::abs(st.proj_z2), std::abs(st.proj_z3)});
            row(st);
            ++steps;
        }
    } catch (const hh::ConsistencyError& e) {
        status = std::string("consistency_error: ") + e.what();
        code = 5;
        dump_state(dir, st, P);
    } catch (const hh::NumericError& e) {
        status = std::string("numeric_error: ") + e.what();
        code = 3;
        dump_state(dir, st, P);
    } catch (const hh::DomainError& e) {
        status = std::string("domain_error: ") + e.what();
        code = 3;
        dump_state(dir, st, P);
    }

    json summary;
    summary["status"] = status;
    summary["steps"] = steps;
    summary["final_time"] = st.t;
    summary["R"] = cfg.gluing.R();
    summary["kappa0"] = P.ps.kappa0;
    summary["max_abs_projection"] = max_proj;
    if (cfg.cross_check && code == 0 && steps > 0) {
        // Flow the reconstructed start over the same horizon and compare.
        hh::FlowConfig fc;
        fc.t_end = st.t - cfg.gluing.t0;
        fc.dt = fc.t_end / std::ceil(fc.t_end / (0.25 * P.outer.h));
        fc.keep_states = true;
        fc.stride = 1u << 30;
        const hh::Trajectory tr = hh::run_flow(start, fc);
        const hh::SphereMapField glued = hh::reconstruct(st, P);
        summary["cross_check_horizon"] = fc.t_end;
        summary["cross_check_sup_difference"] = hh::sup_diff(glued.as_field(), tr.states.back().as_field());
        summary["cross_check_flow_displacement"] = hh::sup_diff(start.as_field(), tr.states.back().as_field());
    }
    auto os = open_out(dir / "glue_summary.json");
    os << summary.dump(2) << '\n';
    if (code != 0) std::cerr << "glue: " << status << '\n';
    return code;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const hh::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::config);
    } catch (const hh::InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::config);
    } catch (const hh::SignConditionError& e) {
        std::cerr << "sign condition: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::sign);
    } catch (const hh::ConsistencyError& e) {
        std::cerr << "consistency: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::consistency);
    } catch (const hh::NumericError& e) {
        std::cerr << "numeric: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::numeric);
    } catch (const hh::DomainError& e) {
        std::cerr << "numeric: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::numeric);
    } catch (const hh::NoBubbleError& e) {
        std::cerr << "numeric: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::numeric);
    } catch (const hh::ResolutionError& e) {
        std::cerr << "numeric: " << e.what() << '\n';
        return static_cast<int>(hh::ExitCode::numeric);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Half-harmonic map heat flow: identity checks, simulation, blow-up rate, gluing runs"};
    app.require_subcommand(1);
    std::vector<std::string> configs;
    std::string out, filter;
    unsigned jobs = 1;
    app.add_option("--config", configs, "INI config file; repeat to sweep several runs");
    app.add_option("--out", out, "Output directory");
    app.add_option("--filter", filter, "Run only this verify suite");
    app.add_option("--jobs", jobs, "Concurrent runs when several configs are given")->check(CLI::PositiveNumber);
    auto* verify = app.add_subcommand("verify", "Run identity suites and print a JSON-lines report");
    auto* simulate = app.add_subcommand("simulate", "Run the flow and write trajectory.csv and summary.json");
    auto* kappa = app.add_subcommand("kappa", "Print the sign functional and the blow-up rate");
    auto* glue = app.add_subcommand("glue", "Run the inner-outer gluing iteration");
    for (auto* sub : {verify, simulate, kappa, glue}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : static_cast<int>(hh::ExitCode::config);
    }

    std::function<int(const Job&)> command;
    if (*verify)
        command = [&filter](const Job& j) { return cmd_verify(j, filter); };
    else if (*simulate)
        command = cmd_simulate;
    else if (*kappa)
        command = cmd_kappa;
    else
        command = cmd_glue;

    if (configs.size() <= 1) {
        Job j;
        if (!configs.empty()) j.config_path = configs.front();
        if (!out.empty()) j.out = out;
        return guarded([&] { return command(j); });
    }

    // Sweep: each run gets its own output directory and no stdout.
    const fs::path base = out.empty() ? fs::path(".") : fs::path(out);
    std::vector<Job> all;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        Job j;
        j.config_path = configs[i];
        j.out = base / (std::to_string(i) + "_" + fs::path(configs[i]).stem().string());
        j.to_stdout = false;
        all.push_back(j);
    }
    std::vector<int> codes(all.size(), 0);
    for (std::size_t start = 0; start < all.size(); start += jobs) {
        std::vector<std::future<int>> running;
        const std::size_t stop = std::min(all.size(), start + jobs);
        for (std::size_t i = start; i < stop; ++i)
            running.push_back(std::async(std::launch::async, [&, i] { return guarded([&] { return command(all[i]); }); }));
        for (std::size_t i = start; i < stop; ++i) codes[i] = running[i - start].get();
    }
    for (std::size_t i = 0; i < all.size(); ++i) std::cerr << all[i].config_path << ": exit " << codes[i] << '\n';
    return *std::max_element(codes.begin(), codes.end());
}
