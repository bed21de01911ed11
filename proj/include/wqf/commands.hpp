#pragma once

#include <istream>
#include <string>

#include "wqf/problem.hpp"

namespace wqf::cli {

inline constexpr double kZThreshold = 4.0;

// Solves the requested ODE route(s) and reports prefactors, trace integrals,
// cross-route consistency, and the admissibility left-hand sides.
json run_laplace(const ProblemSpec& spec);

// Monte Carlo verification of the identity matching the problem variant
// (t-to-q for sigma-type problems, cv0 + cvf2 for kernel problems), with a
// Richardson bias run on the refined grid.
json run_verify(const ProblemSpec& spec, unsigned workers);

struct KernelCommandResult {
    json report;
    std::optional<Kernel> eta;
    std::optional<Kernel> rho;
};

// Kernel calculus report: norms, the composition bound, fixed-point
// round-trip, and the resolvent series tails.
KernelCommandResult run_kernel(const ProblemSpec& spec);

// CSV rows (x..., value) of E[e^{p_sigma} | theta(t) = x].
std::string run_condexp(const ProblemSpec& spec, double t, const std::vector<Vec>& xs);

// Closed form vs. both ODE routes (and the MC estimate when an mc block is given).
json run_oracle_compare(const ProblemSpec& spec, unsigned workers);

std::string kernel_to_csv(const Kernel& k);
Kernel kernel_from_csv(std::istream& in, const TimeGrid& grid, std::size_t d);

json estimate_json(const Estimate& e);

} // namespace wqf::cli
