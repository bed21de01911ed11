#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wqf/commands.hpp"
#include "wqf/errors.hpp"
#include "wqf/version.hpp"

namespace fs = std::filesystem;
using wqf::Error;
using wqf::ErrorCode;
using namespace wqf::cli;

namespace {

int exit_code_for(ErrorCode c) {
    switch (c) {
    case ErrorCode::spec_error:
    case ErrorCode::precondition_violated:
    case ErrorCode::parameter_out_of_range:
        return 2;
    case ErrorCode::conjugate_point:
    case ErrorCode::negative_determinant:
        return 3;
    case ErrorCode::admissibility_fail:
        return 4;
    case ErrorCode::z_threshold:
        return 5;
    case ErrorCode::no_convergence:
        return 6;
    default:
        return 1;
    }
}

// <out or env dir>/<input stem with .spec.json stripped><suffix>
std::string output_path(const std::string& input, const std::string& explicit_out, const std::string& suffix) {
    if (!explicit_out.empty())
        return explicit_out;
    fs::path in(input);
    std::string stem = in.filename().string();
    const std::string marker = ".spec.json";
    if (stem.size() > marker.size() && stem.ends_with(marker))
        stem = stem.substr(0, stem.size() - marker.size());
    else
        stem = in.stem().string();
    fs::path dir = in.parent_path();
    if (const char* env = std::getenv("WQF_OUT_DIR"); env && *env)
        dir = env;
    return (dir / (stem + suffix)).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        wqf::fail(ErrorCode::spec_error, "cannot write output file: " + path);
    out << content;
}

std::vector<wqf::Vec> parse_xs(const std::string& raw, std::size_t d) {
    std::vector<wqf::Vec> xs;
    std::istringstream groups(raw);
    std::string group;
    const char group_sep = d == 1 ? ',' : ';';
    while (std::getline(groups, group, group_sep)) {
        if (group.empty())
            continue;
        wqf::Vec x;
        std::istringstream cells(group);
        std::string cell;
        while (std::getline(cells, cell, ','))
            x.push_back(std::stod(cell));
        xs.push_back(std::move(x));
    }
    return xs;
}

struct CommonOpts {
    std::string spec_file;
    std::string out;
    std::string route;
    bool strict = false;
    unsigned workers = 1;
    std::int64_t seed = -1;
};

ProblemSpec load_spec(const CommonOpts& o) {
    ProblemSpec spec = ProblemSpec::load(o.spec_file);
    if (o.route == "riccati")
        spec.route = RouteChoice::riccati;
    else if (o.route == "jacobi")
        spec.route = RouteChoice::jacobi;
    else if (o.route == "both")
        spec.route = RouteChoice::both;
    else if (!o.route.empty())
        wqf::fail(ErrorCode::spec_error, "--route must be riccati | jacobi | both");
    if (o.strict)
        spec.strict_admissibility = true;
    if (o.seed >= 0 && spec.mc)
        spec.mc->seed = static_cast<std::uint64_t>(o.seed);
    return spec;
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_mc) {
    cmd->add_option("spec", o.spec_file, "problem spec (*.spec.json)")->required();
    cmd->add_option("--out", o.out, "output file (default: derived from the input name)");
    cmd->add_option("--route", o.route, "riccati | jacobi | both (overrides the spec)");
    cmd->add_flag("--strict", o.strict, "strict mode: admissibility / z-threshold failures set the exit code");
    if (with_mc) {
        cmd->add_option("--workers", o.workers, "worker threads (0 = all cores); never changes numeric output");
        cmd->add_option("--seed", o.seed, "override the Monte Carlo seed");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Laplace transforms of quadratic Wiener functionals via Riccati / Jacobi ODEs"};
    app.set_version_flag("--version", wqf::kVersion);
    app.require_subcommand(1);

    CommonOpts lap_o, ver_o, ker_o, cond_o, orc_o;
    bool dump_kernels = false;
    double cond_t = 0.0;
    std::string cond_xs;

    CLI::App* lap = app.add_subcommand("laplace", "solve the ODE routes and report prefactors");
    add_common(lap, lap_o, false);

    CLI::App* ver = app.add_subcommand("verify", "Monte Carlo verification of the change-of-variables identities");
    add_common(ver, ver_o, true);

    CLI::App* ker = app.add_subcommand("kernel", "kernel composition, inversion and resolvent report");
    add_common(ker, ker_o, false);
    ker->add_flag("--dump-kernels", dump_kernels, "write eta/rho lower triangles as CSV");

    CLI::App* cond = app.add_subcommand("condexp", "conditional expectation E[e^{p_sigma} | theta(t) = x]");
    add_common(cond, cond_o, false);
    cond->add_option("--time", cond_t, "conditioning time (must be a grid node)")->required();
    cond->add_option("--xs", cond_xs, "points: comma-separated (d=1) or semicolon-separated tuples")->required();

    CLI::App* orc = app.add_subcommand("oracle-compare", "closed form vs ODE routes (and MC when configured)");
    add_common(orc, orc_o, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (lap->parsed()) {
            const ProblemSpec spec = load_spec(lap_o);
            const json result = run_laplace(spec);
            const std::string path = output_path(lap_o.spec_file, lap_o.out, ".result.json");
            write_file(path, result.dump(2) + "\n");
            std::cout << "wrote " << path << "\n";
        } else if (ver->parsed()) {
            const ProblemSpec spec = load_spec(ver_o);
            const json result = run_verify(spec, ver_o.workers);
            const std::string path = output_path(ver_o.spec_file, ver_o.out, ".result.json");
            write_file(path, result.dump(2) + "\n");
            std::cout << "wrote " << path << "\n";
            if (ver_o.strict && !result.at("pass").get<bool>())
                return 5;
        } else if (ker->parsed()) {
            const ProblemSpec spec = load_spec(ker_o);
            KernelCommandResult result = run_kernel(spec);
            const std::string path = output_path(ker_o.spec_file, ker_o.out, ".result.json");
            write_file(path, result.report.dump(2) + "\n");
            std::cout << "wrote " << path << "\n";
            if (dump_kernels) {
                if (result.eta) {
                    const std::string p = output_path(ker_o.spec_file, "", ".eta.csv");
                    write_file(p, kernel_to_csv(*result.eta));
                    std::cout << "wrote " << p << "\n";
                }
                if (result.rho) {
                    const std::string p = output_path(ker_o.spec_file, "", ".rho.csv");
                    write_file(p, kernel_to_csv(*result.rho));
                    std::cout << "wrote " << p << "\n";
                }
            }
        } else if (cond->parsed()) {
            const ProblemSpec spec = load_spec(cond_o);
            const std::string csv = run_condexp(spec, cond_t, parse_xs(cond_xs, spec.d));
            const std::string path = output_path(cond_o.spec_file, cond_o.out, ".condexp.csv");
            write_file(path, csv);
            std::cout << "wrote " << path << "\n";
        } else if (orc->parsed()) {
            const ProblemSpec spec = load_spec(orc_o);
            const json result = run_oracle_compare(spec, orc_o.workers);
            const std::string path = output_path(orc_o.spec_file, orc_o.out, ".result.json");
            write_file(path, result.dump(2) + "\n");
            std::cout << "wrote " << path << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
