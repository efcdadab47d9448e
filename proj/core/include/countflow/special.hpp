#pragma once

namespace countflow {

// Complementary error function, rational Chebyshev approximation
// (W. J. Cody's CALERF constant set). Absolute error below 1e-15 on
// the real line; used instead of std::erfc so results do not depend
// on the platform's libm.
double erfc_cody(double x);

double erf_cody(double x);

// Standard normal cdf, evaluated through erfc_cody.
double norm_cdf(double x);

// Standard normal density.
double norm_pdf(double x);

// Standard normal quantile, Wichura's PPND16 rational approximation.
// Requires p in (0, 1); accurate to about 1e-16 relative error.
double norm_quantile(double p);

}  // namespace countflow
