#pragma once

namespace auvtune::normal {

double pdf(double z);
double cdf(double z);
/// log(cdf(z)), accurate far into the lower tail.
double log_cdf(double z);
/// pdf(z) / cdf(z) without overflow for very negative z.
double inverse_mills(double z);

}  // namespace auvtune::normal
