#include "wqf/oracles.hpp"

#include <cmath>

#include "wqf/errors.hpp"

namespace wqf {

double cameron_martin(double lambda, double T) {
    if (!(T > 0.0))
        fail(ErrorCode::parameter_out_of_range, "cameron_martin: need T > 0");
    return 1.0 / std::sqrt(std::cosh(lambda * T));
}

double levy_area(double lambda, double T) {
    if (!(std::abs(lambda) * T < M_PI))
        fail(ErrorCode::parameter_out_of_range, "levy_area: need |lambda| T < pi");
    return 1.0 / std::cos(lambda * T / 2.0);
}

double ou_square(double lambda, double T) {
    if (!(lambda * T < 1.0))
        fail(ErrorCode::parameter_out_of_range, "ou_square: need lambda T < 1");
    return std::exp(-lambda * T / 2.0) / std::sqrt(1.0 - lambda * T);
}

OracleCase oracle_case(const std::string& name, double lambda, double T) {
    OracleCase c;
    c.name = name;
    c.lambda = lambda;
    c.T = T;
    if (name == "cameron-martin") {
        c.d = 1;
        c.closed_form = cameron_martin(lambda, T);
        c.validity = "any lambda, T > 0";
    } else if (name == "harmonic-oscillator") {
        c.d = 1;
        c.lambda = lambda;
        c.closed_form = cameron_martin(lambda, T);
        c.validity = "any lambda, T > 0";
    } else if (name == "levy-area") {
        c.d = 2;
        c.closed_form = levy_area(lambda, T);
        c.validity = "|lambda| T < pi";
    } else if (name == "ou-square") {
        c.d = 1;
        c.closed_form = ou_square(lambda, T);
        c.validity = "lambda T < 1";
    } else {
        fail(ErrorCode::spec_error, "unknown oracle case: " + name);
    }
    return c;
}

} // namespace wqf
