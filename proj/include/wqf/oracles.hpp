#pragma once

#include <string>

namespace wqf {

// Closed forms for the classical quadratic functionals, derived from the
// library's own ODE routes (see docs/oracles.md). Ground truth for the
// acceptance suite.

// E[exp(-(lambda^2/2) int_0^T |theta|^2 dt)] = (cosh(lambda T))^{-1/2}.
double cameron_martin(double lambda, double T);

// E[exp(lambda * Area)] = 1 / cos(lambda T / 2) for planar Brownian motion;
// requires |lambda| T < pi.
double levy_area(double lambda, double T);

// E[exp(lambda (theta(T)^2 - T) / 2)] = e^{-lambda T/2} (1 - lambda T)^{-1/2};
// requires lambda T < 1.
double ou_square(double lambda, double T);

struct OracleCase {
    std::string name;
    double lambda = 0.0;
    double T = 1.0;
    std::size_t d = 1;
    double closed_form = 1.0;
    std::string validity;
};

// Names: cameron-martin, harmonic-oscillator (cameron-martin at lambda = 1),
// levy-area, ou-square.
OracleCase oracle_case(const std::string& name, double lambda, double T);

} // namespace wqf
