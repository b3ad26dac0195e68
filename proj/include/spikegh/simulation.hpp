#pragma once

#include <cstdint>

#include "spikegh/model.hpp"
#include "spikegh/rng.hpp"

namespace spikegh {

// Synthetic spike-train scenario: a handful of positive spikes observed
// through the parametric response at a controlled noise level. When
// enforce_snr is set, the spike amplitudes are rescaled so the realized
// signal-to-noise ratio 10*log10(|Hz|^2 / (N*noise_var)) hits snr_db exactly.
struct Scenario {
  int signal_length = 84;   // N
  int ir_length = 21;       // L_h, odd
  double ir_scale = 3.0;    // s used to generate the data
  int spike_count = 5;
  double amp_var = 1.0;     // amplitude law N+(0, amp_var) before rescaling
  bool enforce_snr = true;
  double snr_db = 10.0;
  double noise_var = 5.5e-7;
  std::uint64_t seed = 1;

  int site_count() const { return signal_length - ir_length + 1; }
};
void validate(const Scenario& sc);

struct GeneratedScenario {
  Observation obs;     // noisy signal with its parametric dictionary
  LatentState truth;   // true support and amplitudes
  Hyperparams hp;      // generating parameter values (post-rescale amp_var)
  double snr_db;       // realized signal-to-noise ratio
  double clean_power;  // |Hz|^2 of the noiseless signal
};

GeneratedScenario generate_scenario(const Scenario& sc, RandomStream& rng);
// deterministic form, seeded from the scenario itself
GeneratedScenario generate_scenario(const Scenario& sc);

struct ReconstructionMetrics {
  double rmse;       // amplitude root-mean-square error over all sites
  double precision;  // detected sites with a true spike within the tolerance
  double recall;     // true spikes with a detected site within the tolerance
  int detected;      // sites with inclusion frequency above one half
};

// compares a posterior-mean amplitude vector and per-site inclusion
// frequencies against the generating truth, with +-tolerance_shift site
// matching for the support metrics
ReconstructionMetrics reconstruction_metrics(const Vector& mean_x,
                                             const Vector& inclusion,
                                             const LatentState& truth,
                                             int tolerance_shift);

}  // namespace spikegh
