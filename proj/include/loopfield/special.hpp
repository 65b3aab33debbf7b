#pragma once

// Special functions and Wick renormalisation: monic generalised Laguerre and
// Hermite polynomials, modified Bessel functions of the first kind, Wick
// powers of the occupation field and of the Gaussian free field, and the
// algebraic identities tying them together.

#include <string>
#include <vector>

#include "loopfield/graph.hpp"
#include "loopfield/mc.hpp"

namespace loopfield::special {

inline constexpr int kMaxDegree = 60;

/// Coefficients (lowest degree first) of the monic Laguerre polynomial
/// L_n^{(theta-1)}, orthogonal for the Gamma(theta) law.
std::vector<double> laguerre_coefficients(int n, double theta);
/// L_n^{(theta-1)}(u), monic. Requires n <= kMaxDegree.
double laguerre(int n, double theta, double u);

/// Coefficients of the monic Hermite polynomial H_n (He_n).
std::vector<double> hermite_coefficients(int n);
/// H_n(x), monic, orthogonal for the standard Gaussian. Requires n <= kMaxDegree.
double hermite(int n, double x);

/// Modified Bessel function I_nu(z) for nu > -1, z >= 0. Power series below
/// z = 650, leading asymptotic e^z / sqrt(2 pi z) above.
double bessel_i(double nu, double z);
/// e^{-z} I_nu(z), finite for all z >= 0 (nu > -1, z > 0 when nu < 0).
double bessel_i_scaled(double nu, double z);

/// Gamma function; throws outside the poles-free positive axis.
double gamma_fn(double x);

/// :ell^n: = G^n L_n^{(theta-1)}(ell / G).
double wick_local(double ell, double green, int n, double theta);
/// :phi^n: = G^{n/2} H_n(phi / sqrt(G)).
double wick_gff(double phi, double green, int n);
/// :h ell^n: = h G^n L_n^{(theta*-1)}(ell / G), theta* = 2 - theta.
double wick_mixed(double h, double ell, double green, int n, double theta);

/// |sum_{n<=80} (gamma^2 t/2)^n L_n^{(theta-1)}(u^2/(2t)) / (n! Gamma(theta+n))
///   - e^{-gamma^2 t/2} (gamma^2 u^2/4)^{(1-theta)/2} I_{theta-1}(gamma u)|.
/// Requires positive arguments and gamma^2 t/2 <= 30.
double identity_laguerre_bessel(double t, double u, double gamma, double theta);

/// |2^{-n} G^{(2n+1)/2} H_{2n+1}(h/sqrt G) - h G^n L_n^{(1/2)}(h^2/(2G))|.
double identity_hermite_laguerre(double h, double green, int n);

/// |sum_{n<=40} gamma^n t^{n/2} H_n(u/sqrt t)/n! - e^{gamma u - gamma^2 t/2}|.
double identity_hermite_exp(double gamma, double t, double u);

struct IdentityPoint {
  std::vector<std::pair<std::string, double>> parameters;
  double residual = 0.0;
};

struct IdentityReport {
  std::string which;
  double tolerance = 0.0;
  std::vector<IdentityPoint> points;
  double max_residual() const;
};

/// Evaluates an identity over its default grid. `which` is one of
/// laguerre-bessel, hermite-laguerre, hermite-exp.
IdentityReport identity_grid(const std::string& which);

struct WickCovariance {
  mc::Estimate estimate;
  double predicted = 0.0;
};

/// Monte Carlo estimate of E[:ell_z^n: :ell_w^m:] for the theta-soup,
/// compared with 1{n=m} Gamma(theta+n) n!/Gamma(theta) G(z,w)^{2n}.
WickCovariance estimate_wick_covariance(const LatticeDomain& domain, double theta, int n, int m, Vertex z, Vertex w,
                                        const mc::RunSpec& run);

/// Predicted Wick covariance 1{n=m} Gamma(theta+n) n!/Gamma(theta) g^{2n}.
double predicted_wick_covariance(double theta, int n, int m, double g);

}  // namespace loopfield::special
