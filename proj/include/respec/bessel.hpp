#pragma once

namespace respec {

/// ln I_nu(x), the modified Bessel function of the first kind, for nu >= 0 and
/// x > 0. Never forms I_nu(x) itself, so it stays finite where I_nu overflows
/// (x up to several thousand) or underflows (nu in the hundreds, small x).
///
/// nu < kDebyeMinOrder: rescaled power series, all terms positive.
/// nu >= kDebyeMinOrder: uniform asymptotic (Debye) expansion through u_8.
double log_bessel_i(double nu, double x);

inline constexpr double kDebyeMinOrder = 50.0;

namespace detail {
double log_bessel_i_series(double nu, double x);
double log_bessel_i_debye(double nu, double x);
}  // namespace detail

}  // namespace respec
