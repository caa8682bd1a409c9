// perifem command-line driver.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "perifem/check.hpp"
#include "perifem/config.hpp"
#include "perifem/export.hpp"
#include "perifem/log.hpp"
#include "perifem/pe.hpp"

namespace fs = std::filesystem;
using namespace perifem;

namespace {

struct GlobalOptions {
    std::string output_dir;
    int threads = 0;
    int verbose = 0;
};

ParsedConfig load(const std::string& path, const GlobalOptions& g)
{
    ParsedConfig cfg = load_config(path);
    if (!g.output_dir.empty())
        cfg.output.dir = g.output_dir;
    if (g.threads > 0)
        cfg.run.threads = g.threads;
    return cfg;
}

class VtkWriter : public RunObserver {
public:
    VtkWriter(const ParsedConfig& cfg) : cfg_(cfg) {}

    void on_increment(const RunState& s, const IncrementRecord&) override
    {
        const auto& o = cfg_.output;
        if (!o.vtk || (s.step % o.vtk_every != 0 && s.step != cfg_.run.increments))
            return;
        export_field_vtk(s.mesh, s.displacement, s.damage,
                         o.dir / (o.name + "_step" + std::to_string(s.step) + ".vtk"));
    }

private:
    const ParsedConfig& cfg_;
};

int cmd_run(const std::string& path, const GlobalOptions& g)
{
    const ParsedConfig cfg = load(path, g);
    fs::create_directories(cfg.output.dir);
    const auto& o = cfg.output;
    if (o.mesh) {
        std::ofstream(o.dir / (o.name + ".mesh")) << write_mesh(cfg.run.mesh);
    }
    if (o.pe_csv) {
        std::ofstream os(o.dir / (o.name + "_pes.csv"));
        write_pe_csv(generate_pe_set(cfg.run.mesh, cfg.run.material.delta), os);
    }

    VtkWriter writer(cfg);
    const RunResult result = run_quasi_static(cfg.run, &writer);
    if (o.history)
        export_history_csv(result.history, o.dir / (o.name + "_history.csv"));

    const auto& last = result.history.records.back();
    std::printf("%s: %zu CEs, %zu PEs, %zu bonds, %d increments, %zu bonds broken, max damage %.4f\n",
                o.name.c_str(), cfg.run.mesh.num_elements(), result.num_pes, result.num_bonds,
                cfg.run.increments, last.broken_total, last.max_damage);
    if (!result.first_break_points.empty()) {
        const Vec2 p = result.first_break_points.front();
        std::printf("first bond broke at step %d near (%.4g, %.4g)\n", result.first_break_step, p.x(), p.y());
    }
    return 0;
}

int cmd_mesh(const std::string& path, const GlobalOptions& g)
{
    const ParsedConfig cfg = load(path, g);
    const auto& mesh = cfg.run.mesh;
    const PeSet pes = generate_pe_set(mesh, cfg.run.material.delta);
    std::printf("nodes n        %zu\n", mesh.num_nodes());
    std::printf("elements m     %zu\n", mesh.num_elements());
    std::printf("PEs m_bar      %zu\n", pes.size());
    std::printf("h              %.6g\n", average_element_size(mesh));
    std::printf("delta          %.6g\n", cfg.run.material.delta);
    if (!g.output_dir.empty() || cfg.output.mesh) {
        fs::create_directories(cfg.output.dir);
        const fs::path out = cfg.output.dir / (cfg.output.name + ".mesh");
        std::ofstream os(out);
        os << write_mesh(mesh);
        if (!os)
            throw std::runtime_error("cannot write " + out.string());
        std::printf("wrote %s\n", out.string().c_str());
    }
    return 0;
}

int cmd_check()
{
    bool ok = true;
    for (const auto& c : run_builtin_checks()) {
        std::printf("%s  %-34s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        ok = ok && c.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Peridynamic quasi-static fracture solver (N, mm, MPa)", "perifem"};
    GlobalOptions g;
    app.add_option("--output-dir", g.output_dir, "Directory for result files (overrides [output] dir)");
    app.add_option("--threads", g.threads, "Worker threads for assembly")->check(CLI::PositiveNumber);
    app.add_flag("-v,--verbose", g.verbose, "Progress output; repeat for debug detail");
    app.require_subcommand(1);
    app.fallthrough();

    std::string config;
    auto* run = app.add_subcommand("run", "Run a simulation");
    run->add_option("config", config, "Configuration file")->required();
    auto* mesh = app.add_subcommand("mesh", "Build the mesh and PE set and print statistics");
    mesh->add_option("config", config, "Configuration file")->required();
    auto* check = app.add_subcommand("check", "Run the built-in invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        const std::string first = argc > 1 ? argv[1] : "";
        const bool unknown = !first.empty() && first[0] != '-' && first != "run" && first != "mesh" && first != "check";
        std::cerr << "error: " << (unknown ? "unknown subcommand '" + first + "'" : std::string(e.what()))
                  << "\n\n" << app.help();
        return 2;
    }

    set_log_level(g.verbose >= 2 ? LogLevel::debug : g.verbose == 1 ? LogLevel::info : LogLevel::warning);
    try {
        if (run->parsed())
            return cmd_run(config, g);
        if (mesh->parsed())
            return cmd_mesh(config, g);
        if (check->parsed())
            return cmd_check();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
