#pragma once

namespace spikegh {

// ln K_order(x) for the modified Bessel function of the second kind.
// Valid for any finite real order and x > 0; evaluated fully in log
// domain so extreme orders/arguments never overflow. Throws
// std::domain_error for x <= 0 or non-finite inputs.
double log_bessel_k(double order, double x);

// ln( K_{order+1}(x) / K_order(x) ), sharing one series/recurrence pass
// where possible instead of exponentiating and dividing.
double log_bessel_k_ratio(double order, double x);

}  // namespace spikegh
