#pragma once

#include "lcorder/divergence.hpp"
#include "lcorder/kernels.hpp"
#include "lcorder/lc_order.hpp"
#include "lcorder/verdict.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lcorder {

struct GridSpec
{
    /// Log-spaced nodes per pdf; must be 4k+1 so the every-other-node
    /// subgrid also supports Simpson.
    int nodes = 4097;
    /// Simpson points per half of each convolution integral (4k+1).
    int quadrature_points = 513;
    /// Mass left outside the window in each tail of a gamma pdf.
    double eps = 1e-8;

    /// Same windows with half the node spacing.
    [[nodiscard]] GridSpec refined() const;
};

/// A density on (0, inf) sampled on log-spaced nodes over [lo, hi].
///
/// Integrals use composite Simpson in u = log x (weights include the dx/du
/// factor x). `analytic`, when set, evaluates the log-density anywhere;
/// otherwise off-node values come from cubic interpolation of the log
/// density in u and are -inf outside the window.
struct GridPdf
{
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> nodes;
    std::vector<double> density;
    std::vector<double> log_density;
    /// Absolute error estimate of each density value (0 when analytic).
    std::vector<double> density_error;
    std::vector<double> weights;
    /// Mass outside [lo, hi].
    double tail_bound = 0.0;
    std::string quadrature = "simpson-log-u";
    std::string label;
    kernels::LogDensity analytic;

    [[nodiscard]] double log_density_at(double x) const;
    /// Relative error of the density near x (nearest node).
    [[nodiscard]] double relative_error_at(double x) const;
    [[nodiscard]] bool is_analytic() const { return static_cast<bool>(analytic); }
};

struct Integral
{
    double value = 0.0;
    /// Error bound |S_h - S_2h| from the every-other-node rule.
    double error = 0.0;
};

/// Simpson integral of values sampled at the pdf's nodes.
Integral integrate(GridPdf const& f, std::span<const double> values);

GridPdf grid_from_log_density(double lo, double hi, int nodes, kernels::LogDensity log_density,
                              double tail_bound, std::string label, bool keep_analytic = true);

double gamma_log_density(double x, double alpha, double beta);

/// gam(alpha, beta) = beta^-alpha x^(alpha-1) e^(-x/beta) / Gamma(alpha) on its
/// [eps, 1-eps] quantile window; tail_bound = 2 eps.
GridPdf pdf_gamma(double alpha, double beta, GridSpec const& spec = {});

/// Scale mixture sum_j w_j gam(alpha, beta_j); gam(alpha, b) <=_lc it for
/// every b.
GridPdf pdf_gamma_mixture(double alpha, std::span<const double> betas, std::span<const double> mix,
                          GridSpec const& spec = {});

/// Density of X + Y by direct quadrature of the convolution integral.
GridPdf convolve(GridPdf const& f, GridPdf const& g, GridSpec const& spec = {});

/// Density of sum_i beta_i X_i with X_i ~ gam(alpha_i, 1) independent.
GridPdf weighted_gamma_sum(std::span<const double> alphas, std::span<const double> betas,
                           GridSpec const& spec = {});

DivergenceValue differential_entropy(GridPdf const& f);

/// D(f|g) integrated on f's grid.
DivergenceValue kl_continuous(GridPdf const& f, GridPdf const& g);

/// Relative entropy checked against this default; the grid second
/// differences carry quadrature noise that the discrete check does not.
inline constexpr double kContinuousLcTolerance = 1e-8;

/// log(f/g) concave on the overlap of the windows: the value at each node
/// must not fall below the chord through its neighbours by more than
/// tol (1 + |log f| + |log g|) plus the propagated density error.
LcReport lc_le_continuous(GridPdf const& f, GridPdf const& g, double tol = kContinuousLcTolerance);

/// Entropy of sum beta_i X_i against random mean-preserving changes of the
/// betas: the equal-beta configuration must have the smallest entropy.
Verdict check_gamma_minentropy(std::span<const double> alphas, std::span<const double> betas, int n_perturbations,
                               std::uint64_t rng_seed, GridSpec const& spec = {});

/// D(f|gam(a',b)) >= D(f|g_a) + D(g_a|gam(a',b)) for a' >= a >= alpha_+ with
/// g_a = gam(a, sum alpha_i beta_i / a), plus D(f|g_a) >= D(f|g_{alpha_+}).
std::vector<Verdict> check_gamma_triangle(std::span<const double> alphas, std::span<const double> betas,
                                          std::span<const double> a_grid, std::span<const double> b_grid,
                                          GridSpec const& spec = {});

/// gam(alpha_+, 1) <=_lc density of sum beta_i X_i.
Verdict check_gamma_lower_bound(std::span<const double> alphas, std::span<const double> betas,
                                GridSpec const& spec = {});

/// f, g random scale mixtures over gam(a1, .) and gam(a2, .);
/// gam(a1 + a2, 1) <=_lc f * g.
Verdict check_gamma_convolution(double a1, double a2, std::uint64_t rng_seed, GridSpec const& spec = {});

nlohmann::json grid_header(GridPdf const& f);

} // namespace lcorder
