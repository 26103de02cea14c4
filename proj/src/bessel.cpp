#include "respec/bessel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "respec/error.hpp"

namespace respec {

namespace {

// u_k(p) = p^k * sum_j kDebye[k][j] * p^(2j)
constexpr std::array<std::array<double, 9>, 9> kDebye = {{
    {1.0000000000000000},
    {0.12500000000000000, -0.20833333333333333},
    {0.070312500000000000, -0.40104166666666667, 0.33420138888888889},
    {0.073242187500000000, -0.89121093750000000, 1.8464626736111111, -1.0258125964506173},
    {0.11215209960937500, -2.3640869140625000, 8.7891235351562500, -11.207002616222994, 4.6695844234262474},
    {0.22710800170898438, -7.3687943594796317, 42.534998745388455, -91.818241543240017, 84.636217674600735,
     -28.212072558200245},
    {0.57250142097473145, -26.491430486951556, 218.19051174421159, -699.57962737613254, 1059.9904525279999,
     -765.25246814118164, 212.57013003921712},
    {1.7277275025844574, -108.09091978839466, 1200.9029132163525, -5305.6469786134031, 11655.393336864533,
     -13586.550006434137, 8061.7221817373094, -1919.4576623184070},
    {6.0740420012734830, -493.91530477308801, 7109.5143024893637, -41192.654968897551, 122200.46498301746,
     -203400.17728041553, 192547.00123253153, -96980.598388637513, 20204.291330966149},
}};

double debye_poly(std::size_t k, double p) {
  const double p2 = p * p;
  double acc = 0.0;
  // Horner over p^2 from the highest stored coefficient.
  for (std::size_t j = k + 1; j-- > 0;) acc = acc * p2 + kDebye[k][j];
  return acc * std::pow(p, static_cast<double>(k));
}

}  // namespace

namespace detail {

double log_bessel_i_series(double nu, double x) {
  // I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k q^k / (k! (nu+1)_k),  q = x^2/4.
  // rest holds sum_{k>=1}; head holds the k = 0 term. Both carry the common
  // scale exp(log_scale) so that intermediate terms near exp(x) stay finite.
  constexpr double kRescale = 1e250;
  const double log_rescale = std::log(kRescale);
  const double q = 0.25 * x * x;
  double head = 1.0;
  double rest = 0.0;
  double term = 1.0;
  double log_scale = 0.0;
  for (int k = 1; k < 1000000; ++k) {
    const double kk = static_cast<double>(k);
    term *= q / (kk * (kk + nu));
    rest += term;
    if (rest > kRescale) {
      rest /= kRescale;
      term /= kRescale;
      head /= kRescale;
      log_scale += log_rescale;
    }
    if (kk * (kk + nu) > q && term <= 1e-17 * (head + rest)) break;
  }
  const double log_sum = log_scale == 0.0 ? std::log1p(rest) : log_scale + std::log(head + rest);
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + log_sum;
}

double log_bessel_i_debye(double nu, double x) {
  // I_nu(nu z) ~ exp(nu eta) / (sqrt(2 pi nu) (1+z^2)^(1/4)) * sum_k u_k(p) / nu^k
  const double z = x / nu;
  const double sq = std::sqrt(1.0 + z * z);
  const double p = 1.0 / sq;
  const double eta = sq + std::log(z / (1.0 + sq));
  double series = 0.0;
  double inv_pow = 1.0;
  for (std::size_t k = 1; k < kDebye.size(); ++k) {
    inv_pow /= nu;
    series += debye_poly(k, p) * inv_pow;
  }
  return nu * eta - 0.5 * std::log(2.0 * std::numbers::pi * nu) - 0.5 * std::log(sq) + std::log1p(series);
}

}  // namespace detail

double log_bessel_i(double nu, double x) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorCode::InvalidArgument, "Bessel order must be finite and >= 0, got " + std::to_string(nu));
  }
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::NonPositiveKappa, "Bessel argument must be finite and > 0, got " + std::to_string(x));
  }
  return nu < kDebyeMinOrder ? detail::log_bessel_i_series(nu, x) : detail::log_bessel_i_debye(nu, x);
}

}  // namespace respec
