#include "wqf/commands.hpp"

#include <cmath>
#include <sstream>

#include "wqf/condexp.hpp"
#include "wqf/errors.hpp"
#include "wqf/version.hpp"

namespace wqf::cli {

namespace {

// Values written to result files stay finite so the output is plain JSON.
double finite_or_sentinel(double v) {
    if (std::isfinite(v))
        return v;
    return std::copysign(1e308, v);
}

json admissibility_json(const AdmissibilityReport& rep) {
    json j;
    j["t_chi_norm"] = rep.t_chi_norm;
    j["inv_condition"] = rep.inv_condition;
    j["k0"] = rep.k0;
    j["eps_value"] = rep.eps_value ? json(*rep.eps_value) : json(nullptr);
    j["eps_lhs_1"] = rep.eps_lhs_1 ? json(*rep.eps_lhs_1) : json(nullptr);
    j["eps_lhs_2"] = rep.eps_lhs_2 ? json(*rep.eps_lhs_2) : json(nullptr);
    j["delta_value"] = rep.delta_value ? json(*rep.delta_value) : json(nullptr);
    j["delta_lhs"] = rep.delta_lhs ? json(*rep.delta_lhs) : json(nullptr);
    j["pass"] = json{{"t_chi", rep.pass_t_chi()},
                     {"inverse", rep.pass_inv()},
                     {"eps_1", rep.pass_eps_1()},
                     {"eps_2", rep.pass_eps_2()},
                     {"delta", rep.pass_delta()},
                     {"all", rep.all_pass()}};
    return j;
}

json chi_samples_json(const MatrixFunction& chi) {
    json rows = json::array();
    for (const Mat& m : chi.samples())
        rows.push_back(m.data());
    return rows;
}

json grid_json(const TimeGrid& grid, std::size_t d) {
    return json{{"T", grid.horizon}, {"d", d}, {"n_steps", grid.steps}};
}

const char* case_name(IdentityCase c) {
    switch (c) {
    case IdentityCase::t_to_q:
        return "t-to-q";
    case IdentityCase::cv0:
        return "cv0";
    case IdentityCase::cvf2:
        return "cvf2";
    }
    return "?";
}

json identity_json(const IdentityReport& rep) {
    json j;
    j["case"] = case_name(rep.kind);
    j["lhs"] = estimate_json(rep.lhs);
    j["rhs"] = estimate_json(rep.rhs);
    j["diff"] = estimate_json(rep.diff);
    j["z"] = finite_or_sentinel(rep.z);
    j["rhs_constant"] = rep.rhs_constant;
    if (rep.admissibility)
        j["admissibility"] = admissibility_json(*rep.admissibility);
    if (rep.eta_norm)
        j["eta_norm"] = *rep.eta_norm;
    bool pass = std::abs(rep.z) <= kZThreshold;
    if (rep.has_bias) {
        j["bias"] = json{{"estimate", rep.bias_estimate},
                         {"diff_fine", estimate_json(rep.diff_fine)},
                         {"z_corrected", finite_or_sentinel(rep.z_bias_corrected)}};
        pass = pass && std::abs(rep.z_bias_corrected) <= kZThreshold;
    }
    j["pass"] = pass;
    return j;
}

Route pick_route(RouteChoice rc) { return rc == RouteChoice::jacobi ? Route::jacobi : Route::riccati; }

// The sigma-type laplace chain shared by several commands.
struct SolvedRoutes {
    std::optional<LaplaceResult> riccati;
    std::optional<RiccatiSolution> riccati_sol;
    std::optional<LaplaceResult> jacobi;
    std::optional<JacobiSolution> jacobi_sol;

    const LaplaceResult& primary() const { return riccati ? *riccati : *jacobi; }
};

SolvedRoutes solve_routes(const MatrixFunction& sigma, RouteChoice rc) {
    SolvedRoutes out;
    if (rc == RouteChoice::riccati || rc == RouteChoice::both) {
        out.riccati_sol = solve_riccati(sigma);
        out.riccati = prefactor_riccati(sigma, *out.riccati_sol);
    }
    if (rc == RouteChoice::jacobi || rc == RouteChoice::both) {
        out.jacobi_sol = solve_jacobi(sigma);
        out.jacobi = prefactor_jacobi(sigma, *out.jacobi_sol);
    }
    return out;
}

double direct_prefactor(const MatrixFunction& chi, const MatrixFunction& sigma) {
    std::vector<double> tr(chi.grid().nodes());
    for (std::size_t i = 0; i < tr.size(); ++i)
        tr[i] = trace(chi.at(i) - sigma.at(i));
    return std::exp(0.5 * trapezoid_scalar(chi.grid(), tr));
}

} // namespace

json estimate_json(const Estimate& e) {
    return json{{"mean", e.mean},
                {"std_error", e.std_error},
                {"n_paths", e.n_paths},
                {"n_steps", e.n_steps},
                {"seed", e.seed}};
}

json run_laplace(const ProblemSpec& spec) {
    const ResolvedProblem res = resolve(spec);
    if (!res.sigma)
        fail(ErrorCode::spec_error, "laplace: problem does not define a quadratic functional (sigma)");
    const MatrixFunction& sigma = *res.sigma;

    const SolvedRoutes routes = solve_routes(sigma, spec.route);
    const MatrixFunction& chi =
        res.direct_chi ? *res.direct_chi : routes.primary().chi;
    const AdmissibilityReport adm = admissibility(chi, &sigma);
    if (spec.strict_admissibility && !adm.all_pass())
        fail(ErrorCode::admissibility_fail, "strict admissibility: a smallness condition failed");

    json out;
    out["version"] = kVersion;
    out["spec"] = spec.to_json();
    out["grid"] = grid_json(res.grid, res.d);
    out["extra_log_factor"] = res.extra_log_factor;
    const double extra = std::exp(res.extra_log_factor);

    if (routes.riccati) {
        const LaplaceResult& r = *routes.riccati;
        const RiccatiSolution& sol = *routes.riccati_sol;
        out["riccati"] = json{{"prefactor", r.prefactor},
                              {"trace_integral", r.trace_integral},
                              {"total_with_extra", extra * r.prefactor},
                              {"phi1_dev_sup", sol.phi1_dev_sup},
                              {"phi1_within_half", sol.phi1_within_half},
                              {"max_residual", sol.max_residual},
                              {"chi_sup", sup_norm(r.chi)}};
    }
    if (routes.jacobi) {
        const LaplaceResult& r = *routes.jacobi;
        const JacobiSolution& sol = *routes.jacobi_sol;
        out["jacobi"] = json{{"prefactor", r.prefactor},
                             {"trace_integral", r.trace_integral},
                             {"total_with_extra", extra * r.prefactor},
                             {"det_A0", r.det_A0},
                             {"min_abs_det", sol.min_abs_det},
                             {"sigma_prime_approximated", r.sigma_prime_approximated}};
    }
    if (routes.riccati && routes.jacobi) {
        const ChiConsistency cc = chi_consistency(sigma, *routes.riccati_sol, *routes.jacobi_sol);
        out["consistency"] = json{{"max_chi_diff", cc.max_chi_diff},
                                  {"prefactor_diff", cc.prefactor_diff},
                                  {"max_det_identity_err", cc.max_det_identity_err}};
    }
    if (res.direct_chi)
        out["direct"] = json{{"prefactor", direct_prefactor(*res.direct_chi, sigma)}};
    out["admissibility"] = admissibility_json(adm);
    out["chi_samples"] = chi_samples_json(chi);

    if (res.oracle) {
        json o;
        o["name"] = res.oracle_name;
        o["closed_form"] = *res.oracle;
        if (routes.riccati)
            o["abs_error_riccati"] = std::abs(extra * routes.riccati->prefactor - *res.oracle);
        if (routes.jacobi)
            o["abs_error_jacobi"] = std::abs(extra * routes.jacobi->prefactor - *res.oracle);
        out["oracle"] = o;
    }
    return out;
}

json run_verify(const ProblemSpec& spec, unsigned workers) {
    if (!spec.mc)
        fail(ErrorCode::spec_error, "verify: spec has no mc block");
    const ResolvedProblem res = resolve(spec);
    if (res.oracle_out_of_range)
        fail(ErrorCode::parameter_out_of_range,
             "verify: builtin parameters outside the integrability region");

    const McConfig mc{spec.mc->paths, spec.mc->seed, workers};
    const Route route = pick_route(spec.route);
    const FunctionalSpec fspec = spec.mc->functional;

    json cases = json::array();
    bool all_pass = true;
    auto add_case = [&](IdentityCase kind, const IdentityBuilder& builder) {
        const IdentityReport rep = run_identity(kind, builder, spec.grid(), mc, true);
        json cj = identity_json(rep);
        cj["functional"] = fspec.to_json();
        all_pass = all_pass && cj["pass"].get<bool>();
        cases.push_back(cj);
    };

    if (res.eta) {
        IdentityBuilder cv0 = [spec, fspec, route](const TimeGrid& g) {
            ResolvedProblem r = resolve(spec, g);
            Kernel eta = r.kernel_is_rho ? invert_rho(*r.eta, 1e-10, 500).eta : std::move(*r.eta);
            return make_cv0_sides(eta, fspec.build(g));
        };
        IdentityBuilder cvf2 = [spec, fspec](const TimeGrid& g) {
            ResolvedProblem r = resolve(spec, g);
            Kernel eta = r.kernel_is_rho ? invert_rho(*r.eta, 1e-10, 500).eta : std::move(*r.eta);
            return make_cvf2_sides(eta, fspec.build(g));
        };
        add_case(IdentityCase::cv0, cv0);
        add_case(IdentityCase::cvf2, cvf2);
    } else if (res.gamma) {
        IdentityBuilder b = [spec, fspec, route](const TimeGrid& g) {
            ResolvedProblem r = resolve(spec, g);
            return make_gamma_kappa_sides(*r.gamma, *r.kappa, route, fspec.build(g));
        };
        add_case(IdentityCase::t_to_q, b);
    } else if (res.sigma) {
        IdentityBuilder b = [spec, fspec, route](const TimeGrid& g) {
            ResolvedProblem r = resolve(spec, g);
            return make_t_to_q_sides(*r.sigma, route, fspec.build(g));
        };
        add_case(IdentityCase::t_to_q, b);
    } else {
        fail(ErrorCode::spec_error, "verify: nothing to verify for this problem");
    }

    json out;
    out["version"] = kVersion;
    out["spec"] = spec.to_json();
    out["grid"] = grid_json(res.grid, res.d);
    out["z_threshold"] = kZThreshold;
    out["cases"] = cases;
    out["pass"] = all_pass;
    return out;
}

KernelCommandResult run_kernel(const ProblemSpec& spec) {
    if (spec.variant != ProblemSpec::Variant::eta)
        fail(ErrorCode::spec_error, "kernel: spec must provide an eta or rho kernel");
    const ResolvedProblem res = resolve(spec);

    KernelCommandResult rc;
    json out;
    out["version"] = kVersion;
    out["spec"] = spec.to_json();
    out["grid"] = grid_json(res.grid, res.d);

    if (!res.kernel_is_rho) {
        const Kernel& eta = *res.eta;
        const double eta_norm = l2_norm(eta);
        Kernel rho = compose_rho(eta);
        const double rho_norm = l2_norm(rho);
        const double dist = l2_distance(rho, eta);
        out["eta_norm"] = eta_norm;
        out["rho_norm"] = rho_norm;
        // || rho - eta ||_2^2 <= 1/2 ||eta||_2^4, with grid slack.
        out["composition_bound"] =
            json{{"lhs", dist * dist},
                 {"rhs", 0.5 * std::pow(eta_norm, 4)},
                 {"pass", dist * dist <= 0.5 * std::pow(eta_norm, 4) + 1e-9}};
        if (rho_norm < 0.25) {
            InversionResult inv = invert_rho(rho, 1e-9, 500);
            out["round_trip"] = json{{"residual", inv.residual},
                                     {"eta_error", l2_distance(inv.eta, eta)},
                                     {"iterations", inv.iterations}};
        } else {
            out["round_trip"] = json{{"skipped", "||rho||_2 >= 1/4"}};
        }
        if (rho_norm < 1.0 / 3.0) {
            const ResolventSeries series = resolvent_series(rho, 8);
            json norms = json::array();
            bool bound_ok = true;
            for (std::size_t n = 0; n < series.term_norms.size(); ++n) {
                norms.push_back(series.term_norms[n]);
                bound_ok = bound_ok &&
                           series.term_norms[n] <= std::pow(rho_norm, static_cast<double>(n + 1)) * (1.0 + 1e-8) + 1e-12;
            }
            out["resolvent"] = json{{"term_norms", norms},
                                    {"tail_bound", series.tail_bound},
                                    {"norm_bound_pass", bound_ok},
                                    {"phi_norm", l2_norm(series.phi)}};
        } else {
            out["resolvent"] = json{{"skipped", "||rho||_2 >= 1/3"}};
        }
        rc.eta = eta;
        rc.rho = std::move(rho);
    } else {
        const Kernel& rho = *res.eta;
        const double rho_norm = l2_norm(rho);
        out["rho_norm"] = rho_norm;
        InversionResult inv = invert_rho(rho, 1e-9, 500);
        out["inversion"] = json{{"residual", inv.residual},
                                {"eta_norm", l2_norm(inv.eta)},
                                {"iterations", inv.iterations}};
        rc.eta = std::move(inv.eta);
        rc.rho = rho;
    }
    rc.report = std::move(out);
    return rc;
}

std::string run_condexp(const ProblemSpec& spec, double t, const std::vector<Vec>& xs) {
    const ResolvedProblem res = resolve(spec);
    if (!res.sigma)
        fail(ErrorCode::spec_error, "condexp: problem does not define sigma");
    const MatrixFunction& sigma = *res.sigma;

    MatrixFunction chi =
        res.direct_chi ? *res.direct_chi : solve_routes(sigma, spec.route).primary().chi;
    const double pref = direct_prefactor(chi, sigma);
    const AlphaSolution alpha = solve_alpha(chi);

    const TimeGrid& grid = res.grid;
    const double tol = 1e-9 * grid.horizon;
    std::size_t t_index = grid.nodes();
    for (std::size_t i = 0; i < grid.nodes(); ++i)
        if (std::abs(grid.node(i) - t) <= tol) {
            t_index = i;
            break;
        }
    if (t_index >= grid.nodes())
        fail(ErrorCode::spec_error, "condexp: t is not a grid node");
    if (t_index == 0)
        fail(ErrorCode::spec_error, "condexp: need t > 0");

    const Covariance cov = covariance(alpha.alpha, t_index);
    std::ostringstream csv;
    csv.precision(17);
    for (std::size_t c = 0; c < res.d; ++c)
        csv << "x" << (c + 1) << ",";
    csv << "value\n";
    for (const Vec& x : xs) {
        if (x.size() != res.d)
            fail(ErrorCode::spec_error, "condexp: x has wrong dimension");
        for (double xc : x)
            csv << xc << ",";
        csv << cond_exp(pref, cov, x) << "\n";
    }
    return csv.str();
}

json run_oracle_compare(const ProblemSpec& spec, unsigned workers) {
    if (spec.variant != ProblemSpec::Variant::builtin)
        fail(ErrorCode::spec_error, "oracle-compare: spec must use a builtin problem");
    const ResolvedProblem res = resolve(spec);
    if (!res.oracle)
        fail(ErrorCode::parameter_out_of_range, "oracle-compare: parameters outside the validity region");

    json out = run_laplace(spec);
    out["oracle"]["validity"] = res.oracle_out_of_range ? "violated" : "ok";

    if (spec.mc) {
        const McConfig mc{spec.mc->paths, spec.mc->seed, workers};
        PathFunctional fn;
        if (res.gamma) {
            auto gam = std::make_shared<MatrixFunction>(*res.gamma);
            auto kap = std::make_shared<MatrixFunction>(*res.kappa);
            fn = [gam, kap](const WienerPath& w) { return std::exp(quad_q(*gam, *kap, w)); };
        } else {
            auto sig = std::make_shared<MatrixFunction>(*res.sigma);
            fn = [sig](const WienerPath& w) { return std::exp(ito_p_sigma(*sig, w)); };
        }
        const Estimate est = estimate(fn, res.grid, res.d, mc);
        const double z = est.std_error > 0.0 ? (est.mean - *res.oracle) / est.std_error : 0.0;
        out["mc"] = json{{"estimate", estimate_json(est)}, {"z_vs_closed_form", finite_or_sentinel(z)}};
    }
    return out;
}

std::string kernel_to_csv(const Kernel& k) {
    std::ostringstream csv;
    csv.precision(17);
    const std::size_t d = k.dim();
    csv << "i,j,t,s";
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
            csv << ",e" << r << c;
    csv << "\n";
    for (std::size_t i = 1; i <= k.grid().steps; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            csv << i << "," << j << "," << k.grid().node(i) << "," << k.grid().node(j);
            const double* e = k.entry(i, j);
            for (std::size_t v = 0; v < d * d; ++v)
                csv << "," << e[v];
            csv << "\n";
        }
    return csv.str();
}

Kernel kernel_from_csv(std::istream& in, const TimeGrid& grid, std::size_t d) {
    Kernel k(grid, d);
    std::string line;
    if (!std::getline(in, line))
        fail(ErrorCode::spec_error, "kernel csv: empty input");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string cell;
        auto next = [&]() -> double {
            if (!std::getline(row, cell, ','))
                fail(ErrorCode::spec_error, "kernel csv: short row");
            return std::stod(cell);
        };
        const std::size_t i = static_cast<std::size_t>(next());
        const std::size_t j = static_cast<std::size_t>(next());
        if (i > grid.steps || j >= i)
            fail(ErrorCode::spec_error, "kernel csv: bad indices");
        next();
        next();
        double* e = k.entry(i, j);
        for (std::size_t v = 0; v < d * d; ++v)
            e[v] = next();
    }
    return k;
}

} // namespace wqf::cli
