#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "wqf/kernel.hpp"
#include "wqf/laplace.hpp"
#include "wqf/matrix_function.hpp"
#include "wqf/montecarlo.hpp"

namespace wqf::cli {

using nlohmann::json;

// kind "constant": fixed matrix; "samples": one matrix per node;
// "trig": c0 + c1 sin(w1 t) + c2 cos(w2 t) with exact derivative.
struct MatrixFunctionSpec {
    enum class Kind { constant, samples, trig };
    Kind kind = Kind::constant;
    Mat constant_value;
    std::vector<Mat> sample_values;
    Mat c0, c1, c2;
    double w1 = 1.0, w2 = 1.0;

    static MatrixFunctionSpec parse(const json& j, std::size_t d);
    json to_json() const;
    MatrixFunction build(const TimeGrid& grid, Role role) const;
};

// kind "embed-chi": eta(t,s) = chi(t) for t > s;
// "constant": eta = C with C symmetric;
// "cos-sum": amplitude * cos(freq (t+s)) * M with M symmetric;
// "random-smooth": seeded cosine series rescaled to target_norm on the grid.
struct KernelSpec {
    enum class Kind { embed_chi, constant, cos_sum, random_smooth };
    Kind kind = Kind::embed_chi;
    std::optional<MatrixFunctionSpec> chi;
    Mat constant_value;
    double amplitude = 0.0, freq = 1.0;
    Mat amp_matrix;
    std::uint64_t seed = 0;
    double target_norm = 0.0;
    std::size_t modes = 3;

    static KernelSpec parse(const json& j, std::size_t d);
    json to_json() const;
    Kernel build(const TimeGrid& grid, std::size_t d) const;
};

struct FunctionalSpec {
    enum class Kind { constant_one, cos_terminal, cos_cylinder };
    Kind kind = Kind::constant_one;
    Vec ell;
    std::vector<std::pair<std::size_t, Vec>> legs; // node indices on the base grid
    std::size_t base_steps = 0;

    static FunctionalSpec parse(const json& j, std::size_t d, std::size_t base_steps);
    json to_json() const;
    TestFunctional build(const TimeGrid& grid) const;
};

struct McSpec {
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    FunctionalSpec functional;

    static McSpec parse(const json& j, std::size_t d, std::size_t base_steps);
    json to_json() const;
};

enum class RouteChoice { riccati, jacobi, both };

struct ProblemSpec {
    double T = 1.0;
    std::size_t d = 1;
    std::size_t n_steps = 0;

    enum class Variant { sigma, gamma_kappa, eta, builtin };
    Variant variant = Variant::sigma;
    std::optional<MatrixFunctionSpec> sigma;
    std::optional<MatrixFunctionSpec> gamma;
    std::optional<MatrixFunctionSpec> kappa;
    std::optional<KernelSpec> eta;
    bool eta_is_rho = false; // the kernel block was given as "rho"
    std::string builtin_name;
    double lambda = 1.0;

    std::optional<McSpec> mc;
    RouteChoice route = RouteChoice::both;
    bool strict_admissibility = false;

    static ProblemSpec parse(const json& j);
    static ProblemSpec load(const std::string& path);
    json to_json() const;

    TimeGrid grid() const { return TimeGrid(T, n_steps); }
};

// A problem instantiated on a concrete grid (possibly refined for bias runs).
struct ResolvedProblem {
    TimeGrid grid{1.0, 1};
    std::size_t d = 1;
    std::optional<MatrixFunction> sigma;
    double extra_log_factor = 0.0; // gamma/kappa problems
    std::optional<MatrixFunction> gamma, kappa;
    std::optional<MatrixFunction> direct_chi; // chi-constant builtin
    std::optional<Kernel> eta;
    bool kernel_is_rho = false;
    std::optional<double> oracle;
    bool oracle_out_of_range = false;
    std::string oracle_name;
};

ResolvedProblem resolve(const ProblemSpec& spec);
ResolvedProblem resolve(const ProblemSpec& spec, const TimeGrid& grid);

} // namespace wqf::cli
