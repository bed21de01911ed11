#include "wqf/problem.hpp"

#include <cmath>
#include <fstream>

#include "wqf/errors.hpp"
#include "wqf/oracles.hpp"
#include "wqf/philox.hpp"

namespace wqf::cli {

namespace {

Mat parse_matrix(const json& j, std::size_t d, const char* what) {
    if (!j.is_array() || j.size() != d)
        fail(ErrorCode::spec_error, std::string(what) + ": expected a " + std::to_string(d) + "-row matrix");
    Mat m(d);
    for (std::size_t r = 0; r < d; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != d)
            fail(ErrorCode::spec_error, std::string(what) + ": row " + std::to_string(r) + " has wrong length");
        for (std::size_t c = 0; c < d; ++c)
            m(r, c) = row[c].get<double>();
    }
    return m;
}

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.dim(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.dim(); ++c)
            row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Vec parse_vec(const json& j, std::size_t d, const char* what) {
    if (!j.is_array() || j.size() != d)
        fail(ErrorCode::spec_error, std::string(what) + ": expected a length-" + std::to_string(d) + " vector");
    Vec v(d);
    for (std::size_t c = 0; c < d; ++c)
        v[c] = j[c].get<double>();
    return v;
}

// Deterministic coefficient stream for the random-smooth kernel family.
double coeff_normal(std::uint64_t seed, std::uint32_t p, std::uint32_t q, std::uint32_t entry) {
    return standard_normal(seed, (static_cast<std::uint64_t>(p) << 32) | q, entry, 0);
}

} // namespace

MatrixFunctionSpec MatrixFunctionSpec::parse(const json& j, std::size_t d) {
    if (!j.is_object() || !j.contains("kind"))
        fail(ErrorCode::spec_error, "matrix function spec: missing kind");
    const std::string kind = j.at("kind").get<std::string>();
    MatrixFunctionSpec s;
    if (kind == "constant") {
        s.kind = Kind::constant;
        s.constant_value = parse_matrix(j.at("matrix"), d, "constant matrix function");
    } else if (kind == "samples") {
        s.kind = Kind::samples;
        const json& vals = j.at("values");
        if (!vals.is_array())
            fail(ErrorCode::spec_error, "samples: values must be an array of matrices");
        for (const json& v : vals)
            s.sample_values.push_back(parse_matrix(v, d, "sample"));
    } else if (kind == "trig") {
        s.kind = Kind::trig;
        const Mat zero(d);
        s.c0 = j.contains("c0") ? parse_matrix(j.at("c0"), d, "c0") : zero;
        s.c1 = j.contains("c1") ? parse_matrix(j.at("c1"), d, "c1") : zero;
        s.c2 = j.contains("c2") ? parse_matrix(j.at("c2"), d, "c2") : zero;
        s.w1 = j.value("w1", 1.0);
        s.w2 = j.value("w2", 1.0);
    } else {
        fail(ErrorCode::spec_error, "matrix function spec: unknown kind '" + kind + "'");
    }
    return s;
}

json MatrixFunctionSpec::to_json() const {
    json j;
    switch (kind) {
    case Kind::constant:
        j["kind"] = "constant";
        j["matrix"] = matrix_json(constant_value);
        break;
    case Kind::samples: {
        j["kind"] = "samples";
        json vals = json::array();
        for (const Mat& m : sample_values)
            vals.push_back(matrix_json(m));
        j["values"] = vals;
        break;
    }
    case Kind::trig:
        j["kind"] = "trig";
        j["c0"] = matrix_json(c0);
        j["c1"] = matrix_json(c1);
        j["c2"] = matrix_json(c2);
        j["w1"] = w1;
        j["w2"] = w2;
        break;
    }
    return j;
}

MatrixFunction MatrixFunctionSpec::build(const TimeGrid& grid, Role role) const {
    switch (kind) {
    case Kind::constant:
        return MatrixFunction::constant(grid, constant_value, role);
    case Kind::samples:
        if (sample_values.size() != grid.nodes())
            fail(ErrorCode::spec_error, "samples: need n_steps + 1 matrices, got " +
                                            std::to_string(sample_values.size()));
        return MatrixFunction(grid, sample_values, role);
    case Kind::trig: {
        const Mat a0 = c0, a1 = c1, a2 = c2;
        const double v1 = w1, v2 = w2;
        auto fn = [a0, a1, a2, v1, v2](double t) {
            return a0 + std::sin(v1 * t) * a1 + std::cos(v2 * t) * a2;
        };
        auto dfn = [a1, a2, v1, v2](double t) {
            return (v1 * std::cos(v1 * t)) * a1 + (-v2 * std::sin(v2 * t)) * a2;
        };
        return MatrixFunction::from_function(grid, fn, dfn, role);
    }
    }
    fail(ErrorCode::spec_error, "unreachable matrix function kind");
}

KernelSpec KernelSpec::parse(const json& j, std::size_t d) {
    if (!j.is_object() || !j.contains("kind"))
        fail(ErrorCode::spec_error, "kernel spec: missing kind");
    const std::string kind = j.at("kind").get<std::string>();
    KernelSpec s;
    if (kind == "embed-chi") {
        s.kind = Kind::embed_chi;
        s.chi = MatrixFunctionSpec::parse(j.at("chi"), d);
    } else if (kind == "constant") {
        s.kind = Kind::constant;
        s.constant_value = parse_matrix(j.at("matrix"), d, "constant kernel");
        if (frob_norm(s.constant_value - transpose(s.constant_value)) > 1e-12)
            fail(ErrorCode::spec_error, "constant kernel: matrix must be symmetric");
    } else if (kind == "cos-sum") {
        s.kind = Kind::cos_sum;
        s.amplitude = j.value("amplitude", 1.0);
        s.freq = j.value("freq", 1.0);
        s.amp_matrix = j.contains("matrix") ? parse_matrix(j.at("matrix"), d, "cos-sum matrix")
                                            : Mat::identity(d);
        if (frob_norm(s.amp_matrix - transpose(s.amp_matrix)) > 1e-12)
            fail(ErrorCode::spec_error, "cos-sum kernel: matrix must be symmetric");
    } else if (kind == "random-smooth") {
        s.kind = Kind::random_smooth;
        s.seed = j.value("seed", 0ull);
        s.target_norm = j.at("target_norm").get<double>();
        s.modes = j.value("modes", std::size_t{3});
    } else {
        fail(ErrorCode::spec_error, "kernel spec: unknown kind '" + kind + "'");
    }
    return s;
}

json KernelSpec::to_json() const {
    json j;
    switch (kind) {
    case Kind::embed_chi:
        j["kind"] = "embed-chi";
        j["chi"] = chi->to_json();
        break;
    case Kind::constant:
        j["kind"] = "constant";
        j["matrix"] = matrix_json(constant_value);
        break;
    case Kind::cos_sum:
        j["kind"] = "cos-sum";
        j["amplitude"] = amplitude;
        j["freq"] = freq;
        j["matrix"] = matrix_json(amp_matrix);
        break;
    case Kind::random_smooth:
        j["kind"] = "random-smooth";
        j["seed"] = seed;
        j["target_norm"] = target_norm;
        j["modes"] = modes;
        break;
    }
    return j;
}

Kernel KernelSpec::build(const TimeGrid& grid, std::size_t d) const {
    switch (kind) {
    case Kind::embed_chi:
        return embed_chi(chi->build(grid, Role::chi));
    case Kind::constant: {
        const Mat c = constant_value;
        return Kernel::from_function(grid, d, [c](double, double) { return c; });
    }
    case Kind::cos_sum: {
        const Mat m = amp_matrix;
        const double a = amplitude, f = freq;
        return Kernel::from_function(grid, d,
                                     [m, a, f](double t, double s) { return (a * std::cos(f * (t + s))) * m; });
    }
    case Kind::random_smooth: {
        // Cosine series sum_{p,q < modes} cos(p pi t / T) cos(q pi s / T) C_pq
        // with C_qp = C_pq^T, rescaled on this grid to hit target_norm.
        const std::size_t P = modes;
        std::vector<Mat> coef(P * P, Mat(d));
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t q = 0; q <= p; ++q) {
                Mat c(d);
                for (std::size_t r = 0; r < d; ++r)
                    for (std::size_t cc = 0; cc < d; ++cc)
                        c(r, cc) = coeff_normal(seed, static_cast<std::uint32_t>(p),
                                                static_cast<std::uint32_t>(q),
                                                static_cast<std::uint32_t>(r * d + cc));
                if (p == q)
                    c = sym_part(c);
                coef[p * P + q] = c;
                if (p != q)
                    coef[q * P + p] = transpose(c);
            }
        const double T = grid.horizon;
        auto fn = [&coef, P, T, d](double t, double s) {
            Mat out(d);
            for (std::size_t p = 0; p < P; ++p)
                for (std::size_t q = 0; q < P; ++q) {
                    const double b = std::cos(static_cast<double>(p) * M_PI * t / T) *
                                     std::cos(static_cast<double>(q) * M_PI * s / T);
                    out += b * coef[p * P + q];
                }
            return out;
        };
        Kernel k = Kernel::from_function(grid, d, fn);
        const double norm = l2_norm(k);
        if (norm == 0.0)
            fail(ErrorCode::spec_error, "random-smooth kernel degenerated to zero");
        const double scale = target_norm / norm;
        for (double& v : k.raw())
            v *= scale;
        return k;
    }
    }
    fail(ErrorCode::spec_error, "unreachable kernel kind");
}

FunctionalSpec FunctionalSpec::parse(const json& j, std::size_t d, std::size_t base_steps) {
    FunctionalSpec s;
    s.base_steps = base_steps;
    if (!j.is_object() || !j.contains("kind"))
        fail(ErrorCode::spec_error, "functional spec: missing kind");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "const") {
        s.kind = Kind::constant_one;
    } else if (kind == "cos-terminal") {
        s.kind = Kind::cos_terminal;
        s.ell = parse_vec(j.at("ell"), d, "cos-terminal ell");
    } else if (kind == "cos-cylinder") {
        s.kind = Kind::cos_cylinder;
        for (const json& leg : j.at("legs"))
            s.legs.emplace_back(leg.at("node").get<std::size_t>(), parse_vec(leg.at("ell"), d, "leg ell"));
    } else {
        fail(ErrorCode::spec_error, "functional spec: unknown kind '" + kind + "'");
    }
    return s;
}

json FunctionalSpec::to_json() const {
    json j;
    switch (kind) {
    case Kind::constant_one:
        j["kind"] = "const";
        break;
    case Kind::cos_terminal:
        j["kind"] = "cos-terminal";
        j["ell"] = ell;
        break;
    case Kind::cos_cylinder: {
        j["kind"] = "cos-cylinder";
        json legs_j = json::array();
        for (const auto& [node, l] : legs)
            legs_j.push_back(json{{"node", node}, {"ell", l}});
        j["legs"] = legs_j;
        break;
    }
    }
    return j;
}

TestFunctional FunctionalSpec::build(const TimeGrid& grid) const {
    switch (kind) {
    case Kind::constant_one:
        return TestFunctional::one();
    case Kind::cos_terminal:
        return TestFunctional::cosine(ell);
    case Kind::cos_cylinder: {
        // Node indices refer to the base grid; rescale so the legs sit at the
        // same times when the identity is rerun on a refined grid.
        if (base_steps == 0 || grid.steps % base_steps != 0)
            fail(ErrorCode::spec_error, "cylinder functional: grid is not a refinement of the base grid");
        const std::size_t factor = grid.steps / base_steps;
        std::vector<std::pair<std::size_t, Vec>> scaled;
        for (const auto& [node, l] : legs) {
            if (node > base_steps)
                fail(ErrorCode::spec_error, "cylinder functional: node beyond grid");
            scaled.emplace_back(node * factor, l);
        }
        return TestFunctional::cylinder(std::move(scaled));
    }
    }
    return TestFunctional::one();
}

McSpec McSpec::parse(const json& j, std::size_t d, std::size_t base_steps) {
    McSpec s;
    s.paths = j.at("paths").get<std::size_t>();
    s.seed = j.value("seed", 0ull);
    s.functional.base_steps = base_steps;
    if (j.contains("functional"))
        s.functional = FunctionalSpec::parse(j.at("functional"), d, base_steps);
    return s;
}

json McSpec::to_json() const {
    return json{{"paths", paths}, {"seed", seed}, {"functional", functional.to_json()}};
}

ProblemSpec ProblemSpec::parse(const json& j) {
    ProblemSpec s;
    s.T = j.at("T").get<double>();
    s.d = j.at("d").get<std::size_t>();
    s.n_steps = j.at("n_steps").get<std::size_t>();
    if (!(s.T > 0.0) || s.d < 1 || s.n_steps < 16)
        fail(ErrorCode::spec_error, "need T > 0, d >= 1, n_steps >= 16");

    const json& p = j.at("problem");
    int variants = 0;
    if (p.contains("sigma")) {
        ++variants;
        s.variant = Variant::sigma;
        s.sigma = MatrixFunctionSpec::parse(p.at("sigma"), s.d);
    }
    if (p.contains("gamma") || p.contains("kappa")) {
        ++variants;
        s.variant = Variant::gamma_kappa;
        s.gamma = MatrixFunctionSpec::parse(p.at("gamma"), s.d);
        s.kappa = MatrixFunctionSpec::parse(p.at("kappa"), s.d);
    }
    if (p.contains("eta") || p.contains("rho")) {
        ++variants;
        s.variant = Variant::eta;
        s.eta_is_rho = p.contains("rho");
        s.eta = KernelSpec::parse(p.at(s.eta_is_rho ? "rho" : "eta"), s.d);
    }
    if (p.contains("builtin")) {
        ++variants;
        s.variant = Variant::builtin;
        const json& b = p.at("builtin");
        s.builtin_name = b.at("name").get<std::string>();
        s.lambda = b.value("lambda", 1.0);
    }
    if (variants != 1)
        fail(ErrorCode::spec_error, "problem must contain exactly one of sigma | gamma+kappa | eta/rho | builtin");

    if (j.contains("mc"))
        s.mc = McSpec::parse(j.at("mc"), s.d, s.n_steps);

    const std::string route = j.value("route", std::string("both"));
    if (route == "riccati")
        s.route = RouteChoice::riccati;
    else if (route == "jacobi")
        s.route = RouteChoice::jacobi;
    else if (route == "both")
        s.route = RouteChoice::both;
    else
        fail(ErrorCode::spec_error, "route must be riccati | jacobi | both");

    s.strict_admissibility = j.value("strict_admissibility", false);
    return s;
}

ProblemSpec ProblemSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::spec_error, "cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::spec_error, std::string("spec is not valid JSON: ") + e.what());
    }
    return parse(j);
}

json ProblemSpec::to_json() const {
    json j;
    j["T"] = T;
    j["d"] = d;
    j["n_steps"] = n_steps;
    json p;
    switch (variant) {
    case Variant::sigma:
        p["sigma"] = sigma->to_json();
        break;
    case Variant::gamma_kappa:
        p["gamma"] = gamma->to_json();
        p["kappa"] = kappa->to_json();
        break;
    case Variant::eta:
        p[eta_is_rho ? "rho" : "eta"] = eta->to_json();
        break;
    case Variant::builtin:
        p["builtin"] = json{{"name", builtin_name}, {"lambda", lambda}};
        break;
    }
    j["problem"] = p;
    if (mc)
        j["mc"] = mc->to_json();
    j["route"] = route == RouteChoice::riccati ? "riccati" : (route == RouteChoice::jacobi ? "jacobi" : "both");
    j["strict_admissibility"] = strict_admissibility;
    return j;
}

ResolvedProblem resolve(const ProblemSpec& spec) { return resolve(spec, spec.grid()); }

ResolvedProblem resolve(const ProblemSpec& spec, const TimeGrid& grid) {
    ResolvedProblem r;
    r.grid = grid;
    r.d = spec.d;
    switch (spec.variant) {
    case ProblemSpec::Variant::sigma:
        r.sigma = spec.sigma->build(grid, Role::sigma);
        break;
    case ProblemSpec::Variant::gamma_kappa: {
        r.gamma = spec.gamma->build(grid, Role::gamma);
        r.kappa = spec.kappa->build(grid, Role::kappa);
        GammaKappaReduction red = gamma_kappa_reduce(*r.gamma, *r.kappa);
        r.sigma = std::move(red.sigma);
        r.extra_log_factor = red.extra_log_factor;
        break;
    }
    case ProblemSpec::Variant::eta:
        r.eta = spec.eta->build(grid, spec.d);
        r.kernel_is_rho = spec.eta_is_rho;
        break;
    case ProblemSpec::Variant::builtin: {
        const std::string& name = spec.builtin_name;
        const double lam = spec.lambda;
        const double T = grid.horizon;
        if (name == "ou-square") {
            r.d = 1;
            r.sigma = MatrixFunction::constant(grid, Mat{{lam}}, Role::sigma);
        } else if (name == "levy-area") {
            r.d = 2;
            const Mat j{{0.0, -1.0}, {1.0, 0.0}};
            r.sigma = MatrixFunction::constant(grid, (lam / 2.0) * j, Role::sigma);
        } else if (name == "harmonic-oscillator" || name == "cameron-martin") {
            r.d = 1;
            r.gamma = MatrixFunction::zero(grid, 1, Role::gamma);
            r.kappa = MatrixFunction::constant(grid, Mat{{-lam * lam}}, Role::kappa);
            GammaKappaReduction red = gamma_kappa_reduce(*r.gamma, *r.kappa);
            r.sigma = std::move(red.sigma);
            r.extra_log_factor = red.extra_log_factor;
        } else if (name == "chi-constant") {
            r.d = spec.d;
            const Mat chi = lam * Mat::identity(r.d);
            MatrixFunction chif = MatrixFunction::constant(grid, chi, Role::chi);
            r.direct_chi = chif;
            r.sigma = sigma_from_chi(chif);
            r.oracle = std::exp(static_cast<double>(r.d) * lam * lam * T * T / 4.0);
            r.oracle_name = name;
            return r;
        } else {
            fail(ErrorCode::spec_error, "unknown builtin problem: " + name);
        }
        r.oracle_name = name;
        try {
            r.oracle = oracle_case(name, lam, T).closed_form;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::parameter_out_of_range)
                throw;
            r.oracle_out_of_range = true;
        }
        break;
    }
    }
    return r;
}

} // namespace wqf::cli
