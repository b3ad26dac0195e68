#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spikegh/diagnostics.hpp"
#include "spikegh/model.hpp"
#include "spikegh/samplers.hpp"
#include "spikegh/simulation.hpp"

namespace spikegh {

// raised for unreadable, unwritable, or malformed files, so callers can
// separate I/O failures from numerical ones
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All writers are deterministic: identical inputs give byte-identical files.
// Numbers are printed with enough digits to round-trip exactly.

std::string format_double(double v);

// scenario files: one "key = value" line per field
std::string scenario_to_text(const Scenario& sc);
Scenario parse_scenario(const std::string& text);
void save_scenario(const Scenario& sc, const std::string& path);
Scenario load_scenario(const std::string& path);

// dataset: the observed signal, one sample per line
void save_signal(const Vector& y, const std::string& path);
Vector load_signal(const std::string& path);

// ground truth: header "site,amplitude", one active site per row
void save_truth(const std::vector<std::uint8_t>& q, const Vector& x,
                const std::string& path);
// returns (q, x) over site_count sites
std::pair<std::vector<std::uint8_t>, Vector> load_truth(const std::string& path,
                                                        int site_count);

// chain trajectory: one record per iteration holding the iteration index,
// the support as a bit-string, the amplitudes as comma-separated floats
// ("-" on iterations where thinning skipped the amplitude row), the
// hyperparameter draws, the response scale, and the cumulative per-move
// proposal/acceptance counters
void save_chain(const ChainStore& chain, const std::string& path);
ChainStore load_chain(const std::string& path);

// sidecar metadata: sampler settings, seed, the mixing-law fit in use, and
// acceptance-rate summaries, as a small JSON document
void save_chain_metadata(const ChainStore& chain, const SamplerConfig& cfg,
                         const FittedGhApprox& fit, const std::string& fit_source,
                         const std::string& path);

// monitoring trace: header "samples_used,R,log10_R"
void save_trace(const std::vector<TracePoint>& trace, const std::string& path);
std::vector<TracePoint> load_trace(const std::string& path);

// posterior-mean estimates: header "site,pm_x,inclusion_freq[,true_x]";
// the truth column appears only when truth amplitudes are supplied
void save_estimates(const Vector& pm_x, const Vector& inclusion,
                    const Vector* true_x, const std::string& path);

}  // namespace spikegh
