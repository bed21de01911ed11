#include "wqf/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <thread>

#include "wqf/errors.hpp"
#include "wqf/philox.hpp"
#include "wqf/transforms.hpp"

namespace wqf {

namespace {

// Fixed chunk size decouples accumulation boundaries from the worker count;
// chunks are merged in index order, so any worker count yields the same bits.
constexpr std::size_t kChunk = 4096;

struct Welford {
    std::size_t count = 0;
    std::vector<double> mean, m2;

    explicit Welford(std::size_t k) : mean(k, 0.0), m2(k, 0.0) {}

    void add(const double* x) {
        ++count;
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t j = 0; j < mean.size(); ++j) {
            const double delta = x[j] - mean[j];
            mean[j] += delta * inv;
            m2[j] += delta * (x[j] - mean[j]);
        }
    }

    void merge(const Welford& o) {
        if (o.count == 0)
            return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n1 = static_cast<double>(count);
        const double n2 = static_cast<double>(o.count);
        const double n = n1 + n2;
        for (std::size_t j = 0; j < mean.size(); ++j) {
            const double delta = o.mean[j] - mean[j];
            mean[j] += delta * (n2 / n);
            m2[j] += o.m2[j] + delta * delta * (n1 * n2 / n);
        }
        count += o.count;
    }
};

double safe_z(const Estimate& diff) {
    if (diff.std_error == 0.0)
        return diff.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff.mean);
    return diff.mean / diff.std_error;
}

std::uint64_t decorrelated_seed(std::uint64_t seed) {
    std::uint64_t x = seed ^ 0x9E3779B97F4A7C15ull;
    x *= 6364136223846793005ull;
    x += 1442695040888963407ull;
    return x;
}

} // namespace

WienerPath sample_path(std::uint64_t seed, std::uint64_t path_index, const TimeGrid& grid, std::size_t dim) {
    const std::size_t n = grid.steps;
    const double sqrt_dt = std::sqrt(grid.dt());
    WienerPath w(grid, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < dim; ++c)
            w.value(i + 1, c) =
                w.value(i, c) + sqrt_dt * standard_normal(seed, path_index, static_cast<std::uint32_t>(i),
                                                          static_cast<std::uint32_t>(c));
    return w;
}

double ito_p_sigma(const MatrixFunction& sigma, const WienerPath& w) {
    require_same_grid(sigma.grid(), w.grid(), "ito_p_sigma");
    if (sigma.dim() != w.dim())
        fail(ErrorCode::grid_mismatch, "ito_p_sigma: dimension mismatch");
    const std::size_t n = w.grid().steps;
    const std::size_t d = w.dim();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Mat& m = sigma.at(i);
        const double* wi = w.node(i);
        const double* wn = w.node(i + 1);
        for (std::size_t r = 0; r < d; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                s += m(r, c) * wi[c];
            acc += s * (wn[r] - wi[r]);
        }
    }
    return acc;
}

double quad_q(const MatrixFunction& gamma, const MatrixFunction& kappa, const WienerPath& w) {
    require_same_grid(kappa.grid(), w.grid(), "quad_q");
    const std::size_t n = w.grid().steps;
    const std::size_t d = w.dim();
    double trap = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const Mat& m = kappa.at(i);
        const double* wi = w.node(i);
        double v = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c)
                s += m(r, c) * wi[c];
            v += s * wi[r];
        }
        trap += (i == 0 || i == n) ? 0.5 * v : v;
    }
    return ito_p_sigma(gamma, w) + 0.5 * w.grid().dt() * trap;
}

std::vector<Estimate> estimate_multi(const MultiFunctional& fn, std::size_t n_out, const TimeGrid& grid,
                                     std::size_t dim, const McConfig& mc) {
    if (mc.n_paths < 2)
        fail(ErrorCode::spec_error, "estimate: need n_paths >= 2");
    const std::size_t n_chunks = (mc.n_paths + kChunk - 1) / kChunk;
    std::vector<Welford> parts(n_chunks, Welford(n_out));

    auto run_chunk = [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t hi = std::min(mc.n_paths, lo + kChunk);
        Welford wf(n_out);
        std::vector<double> out(n_out);
        for (std::size_t p = lo; p < hi; ++p) {
            const WienerPath w = sample_path(mc.seed, p, grid, dim);
            fn(w, out.data());
            wf.add(out.data());
        }
        parts[c] = std::move(wf);
    };

    unsigned workers = mc.workers == 0 ? std::thread::hardware_concurrency() : mc.workers;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_chunks)));
    if (workers == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            run_chunk(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
                    run_chunk(c);
            });
        for (auto& th : pool)
            th.join();
    }

    Welford total(n_out);
    for (const Welford& p : parts)
        total.merge(p);

    std::vector<Estimate> est(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
        est[j].mean = total.mean[j];
        est[j].std_error =
            std::sqrt(total.m2[j] / (static_cast<double>(total.count - 1) * static_cast<double>(total.count)));
        est[j].n_paths = mc.n_paths;
        est[j].n_steps = grid.steps;
        est[j].seed = mc.seed;
    }
    return est;
}

Estimate estimate(const PathFunctional& fn, const TimeGrid& grid, std::size_t dim, const McConfig& mc) {
    auto multi = [&fn](const WienerPath& w, double* out) { out[0] = fn(w); };
    return estimate_multi(multi, 1, grid, dim, mc)[0];
}

double TestFunctional::operator()(const WienerPath& w) const {
    switch (kind) {
    case Kind::constant_one:
        return 1.0;
    case Kind::cos_terminal: {
        const double* p = w.node(w.grid().steps);
        double s = 0.0;
        for (std::size_t c = 0; c < w.dim(); ++c)
            s += ell[c] * p[c];
        return std::cos(s);
    }
    case Kind::cos_cylinder: {
        double s = 0.0;
        for (const auto& [node, l] : legs) {
            const double* p = w.node(node);
            for (std::size_t c = 0; c < w.dim(); ++c)
                s += l[c] * p[c];
        }
        return std::cos(s);
    }
    }
    return 1.0;
}

IdentitySides make_t_to_q_sides(const MatrixFunction& sigma, Route route, const TestFunctional& f) {
    LaplaceResult lap;
    if (route == Route::riccati)
        lap = prefactor_riccati(sigma, solve_riccati(sigma));
    else
        lap = prefactor_jacobi(sigma, solve_jacobi(sigma));
    AlphaSolution alpha = solve_alpha(lap.chi);

    auto sig = std::make_shared<MatrixFunction>(sigma);
    auto inv = std::make_shared<InverseTransform>(lap.chi, alpha.alpha);
    const double pref = lap.prefactor;

    IdentitySides sides;
    sides.grid = sigma.grid();
    sides.dim = sigma.dim();
    sides.rhs_constant = pref;
    sides.admissibility = admissibility(lap.chi, &sigma);
    sides.eval = [sig, inv, pref, f](const WienerPath& w, double& lhs, double& rhs) {
        lhs = std::exp(ito_p_sigma(*sig, w)) * f(w);
        rhs = pref * f((*inv)(w));
    };
    return sides;
}

IdentitySides make_gamma_kappa_sides(const MatrixFunction& gamma, const MatrixFunction& kappa, Route route,
                                     const TestFunctional& f) {
    const GammaKappaReduction red = gamma_kappa_reduce(gamma, kappa);
    LaplaceResult lap;
    if (route == Route::riccati)
        lap = prefactor_riccati(red.sigma, solve_riccati(red.sigma));
    else
        lap = prefactor_jacobi(red.sigma, solve_jacobi(red.sigma));
    AlphaSolution alpha = solve_alpha(lap.chi);

    auto gam = std::make_shared<MatrixFunction>(gamma);
    auto kap = std::make_shared<MatrixFunction>(kappa);
    auto inv = std::make_shared<InverseTransform>(lap.chi, alpha.alpha);
    const double scale = std::exp(red.extra_log_factor) * lap.prefactor;

    IdentitySides sides;
    sides.grid = gamma.grid();
    sides.dim = gamma.dim();
    sides.rhs_constant = scale;
    sides.admissibility = admissibility(lap.chi, &red.sigma);
    sides.eval = [gam, kap, inv, scale, f](const WienerPath& w, double& lhs, double& rhs) {
        lhs = std::exp(quad_q(*gam, *kap, w)) * f(w);
        rhs = scale * f((*inv)(w));
    };
    return sides;
}

IdentitySides make_cv0_sides(const Kernel& eta, const TestFunctional& f) {
    const double norm = l2_norm(eta);
    if (norm > 0.5)
        fail(ErrorCode::parameter_out_of_range,
             "cv0: ||eta||_2 = " + std::to_string(norm) + " above the 0.5 verification cap");
    auto eta_p = std::make_shared<Kernel>(eta);
    auto rho_p = std::make_shared<Kernel>(compose_rho(eta));
    const double c = std::exp(norm * norm / 4.0);

    IdentitySides sides;
    sides.grid = eta.grid();
    sides.dim = eta.dim();
    sides.rhs_constant = c;
    sides.eta_norm = norm;
    sides.eval = [eta_p, rho_p, c, f](const WienerPath& w, double& lhs, double& rhs) {
        const WienerPath g = apply_G(*eta_p, w);
        lhs = f(w + g) * std::exp(quad_form(*rho_p, w));
        rhs = c * f(w);
    };
    return sides;
}

IdentitySides make_cvf2_sides(const Kernel& eta, const TestFunctional& f) {
    const double norm = l2_norm(eta);
    if (!(norm < 1.0))
        fail(ErrorCode::parameter_out_of_range,
             "cvf2: needs ||eta||_2 < 1, got " + std::to_string(norm));
    auto eta_p = std::make_shared<Kernel>(eta);

    IdentitySides sides;
    sides.grid = eta.grid();
    sides.dim = eta.dim();
    sides.rhs_constant = 1.0;
    sides.eta_norm = norm;
    sides.eval = [eta_p, f](const WienerPath& w, double& lhs, double& rhs) {
        const std::vector<double> sums = inner_ito_sums(*eta_p, w);
        const WienerPath g = apply_G_from_sums(sums, w.grid(), w.dim());
        const double q = quad_form_from_sums(sums, w);
        const double h = h_eta_from_sums(sums, w.grid(), w.dim());
        lhs = f(w + g) * std::exp(q - h);
        rhs = f(w);
    };
    return sides;
}

IdentityReport run_identity(IdentityCase kind, const IdentityBuilder& builder, const TimeGrid& grid,
                            const McConfig& mc, bool richardson) {
    const IdentitySides sides = builder(grid);
    auto wrap = [&sides](const WienerPath& w, double* out) {
        double lhs = 0.0, rhs = 0.0;
        sides.eval(w, lhs, rhs);
        out[0] = lhs;
        out[1] = rhs;
        out[2] = lhs - rhs;
    };
    const std::vector<Estimate> est = estimate_multi(wrap, 3, sides.grid, sides.dim, mc);

    IdentityReport rep;
    rep.kind = kind;
    rep.lhs = est[0];
    rep.rhs = est[1];
    rep.diff = est[2];
    rep.z = safe_z(rep.diff);
    rep.rhs_constant = sides.rhs_constant;
    rep.admissibility = sides.admissibility;
    rep.eta_norm = sides.eta_norm;

    if (richardson) {
        const TimeGrid fine = grid.refined();
        const IdentitySides sides2 = builder(fine);
        auto wrap2 = [&sides2](const WienerPath& w, double* out) {
            double lhs = 0.0, rhs = 0.0;
            sides2.eval(w, lhs, rhs);
            out[0] = lhs;
            out[1] = rhs;
            out[2] = lhs - rhs;
        };
        McConfig mc2{std::max<std::size_t>(2, mc.n_paths / 2), decorrelated_seed(mc.seed), mc.workers};
        const std::vector<Estimate> est2 = estimate_multi(wrap2, 3, sides2.grid, sides2.dim, mc2);
        rep.has_bias = true;
        rep.diff_fine = est2[2];
        rep.bias_estimate = 2.0 * (rep.diff.mean - rep.diff_fine.mean);
        const double se = std::sqrt(rep.diff.std_error * rep.diff.std_error +
                                    4.0 * rep.diff_fine.std_error * rep.diff_fine.std_error);
        const double extrap = 2.0 * rep.diff_fine.mean - rep.diff.mean;
        rep.z_bias_corrected = se == 0.0 ? (extrap == 0.0 ? 0.0 : std::copysign(1e18, extrap)) : extrap / se;
    }
    return rep;
}

} // namespace wqf
