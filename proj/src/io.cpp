#include "spikegh/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

namespace spikegh {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& tok, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError("cannot parse " + what + " from '" + tok + "'");
  }
}

long long parse_int(const std::string& tok, const std::string& what) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw IoError("cannot parse " + what + " from '" + tok + "'");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw IoError("number formatting failed");
  return std::string(buf, res.ptr);
}

std::string scenario_to_text(const Scenario& sc) {
  std::ostringstream out;
  out << "signal_length = " << sc.signal_length << "\n";
  out << "ir_length = " << sc.ir_length << "\n";
  out << "ir_scale = " << format_double(sc.ir_scale) << "\n";
  out << "spike_count = " << sc.spike_count << "\n";
  out << "amp_var = " << format_double(sc.amp_var) << "\n";
  out << "enforce_snr = " << (sc.enforce_snr ? "true" : "false") << "\n";
  out << "snr_db = " << format_double(sc.snr_db) << "\n";
  out << "noise_var = " << format_double(sc.noise_var) << "\n";
  out << "seed = " << sc.seed << "\n";
  return out.str();
}

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  bool seen[9] = {};
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError("scenario line without '=': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "signal_length") {
      sc.signal_length = static_cast<int>(parse_int(val, key));
      seen[0] = true;
    } else if (key == "ir_length") {
      sc.ir_length = static_cast<int>(parse_int(val, key));
      seen[1] = true;
    } else if (key == "ir_scale") {
      sc.ir_scale = parse_double(val, key);
      seen[2] = true;
    } else if (key == "spike_count") {
      sc.spike_count = static_cast<int>(parse_int(val, key));
      seen[3] = true;
    } else if (key == "amp_var") {
      sc.amp_var = parse_double(val, key);
      seen[4] = true;
    } else if (key == "enforce_snr") {
      if (val == "true" || val == "1")
        sc.enforce_snr = true;
      else if (val == "false" || val == "0")
        sc.enforce_snr = false;
      else
        throw IoError("enforce_snr must be true/false, got '" + val + "'");
      seen[5] = true;
    } else if (key == "snr_db") {
      sc.snr_db = parse_double(val, key);
      seen[6] = true;
    } else if (key == "noise_var") {
      sc.noise_var = parse_double(val, key);
      seen[7] = true;
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(parse_int(val, key));
      seen[8] = true;
    } else {
      throw IoError("unknown scenario key '" + key + "'");
    }
  }
  static const char* names[9] = {"signal_length", "ir_length", "ir_scale",
                                 "spike_count",   "amp_var",   "enforce_snr",
                                 "snr_db",        "noise_var", "seed"};
  for (int i = 0; i < 9; ++i)
    if (!seen[i])
      throw IoError(std::string("scenario file is missing '") + names[i] + "'");
  return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
  auto out = open_out(path);
  out << scenario_to_text(sc);
  finish_out(out, path);
}

Scenario load_scenario(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void save_signal(const Vector& y, const std::string& path) {
  auto out = open_out(path);
  for (double v : y) out << format_double(v) << "\n";
  finish_out(out, path);
}

Vector load_signal(const std::string& path) {
  auto in = open_in(path);
  Vector y;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    y.push_back(parse_double(line, "signal sample"));
  }
  if (y.empty()) throw IoError("signal file '" + path + "' is empty");
  return y;
}

void save_truth(const std::vector<std::uint8_t>& q, const Vector& x,
                const std::string& path) {
  if (q.size() != x.size())
    throw std::invalid_argument("support and amplitude lengths differ");
  auto out = open_out(path);
  out << "site,amplitude\n";
  for (size_t k = 0; k < q.size(); ++k)
    if (q[k]) out << k << "," << format_double(x[k]) << "\n";
  finish_out(out, path);
}

std::pair<std::vector<std::uint8_t>, Vector> load_truth(const std::string& path,
                                                        int site_count) {
  auto in = open_in(path);
  std::vector<std::uint8_t> q(site_count, 0);
  Vector x(site_count, 0.0);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line == "site,amplitude") continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 2)
      throw IoError("truth row needs 2 columns: '" + line + "'");
    const long long site = parse_int(trim(cols[0]), "site");
    if (site < 0 || site >= site_count)
      throw IoError("truth site out of range: " + std::to_string(site));
    q[site] = 1;
    x[site] = parse_double(trim(cols[1]), "amplitude");
  }
  return {std::move(q), std::move(x)};
}

void save_chain(const ChainStore& chain, const std::string& path) {
  const size_t iters = chain.q_hist.size();
  if (chain.theta_hist.size() != iters || chain.counter_hist.size() != iters)
    throw std::invalid_argument("chain history rows are inconsistent");
  auto out = open_out(path);
  out << "# spikegh-chain v1 kind=" << (chain.kind == SamplerKind::kBgh ? "bgh" : "btg")
      << " seed=" << chain.seed << " sites=" << chain.site_count
      << " burn_in=" << chain.burn_in << " thin=" << chain.thin << "\n";
  out << "# iter support amplitudes bern_prob noise_var amp_var ir_scale"
         " birth_p birth_a death_p death_a update_p update_a amp_var_p amp_var_a"
         " scale_p scale_a\n";
  size_t xi = 0;
  for (size_t r = 0; r < iters; ++r) {
    const int iter = static_cast<int>(r) + 1;
    out << iter << ' ';
    for (std::uint8_t b : chain.q_hist[r]) out << (b ? '1' : '0');
    out << ' ';
    if (xi < chain.x_iters.size() && chain.x_iters[xi] == iter) {
      const Vector& x = chain.x_hist[xi];
      for (size_t k = 0; k < x.size(); ++k) {
        if (k) out << ',';
        out << format_double(x[k]);
      }
      ++xi;
    } else {
      out << '-';
    }
    const ThetaSample& th = chain.theta_hist[r];
    out << ' ' << format_double(th.bern_prob) << ' ' << format_double(th.noise_var)
        << ' ' << format_double(th.amp_var) << ' ' << format_double(th.ir_scale);
    const MoveCounters& c = chain.counter_hist[r];
    out << ' ' << c.birth_proposed << ' ' << c.birth_accepted << ' '
        << c.death_proposed << ' ' << c.death_accepted << ' ' << c.update_proposed
        << ' ' << c.update_accepted << ' ' << c.amp_var_proposed << ' '
        << c.amp_var_accepted << ' ' << c.scale_proposed << ' ' << c.scale_accepted
        << "\n";
  }
  finish_out(out, path);
}

ChainStore load_chain(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw IoError("chain file '" + path + "' is empty");
  std::istringstream head(line);
  std::string tag, version, field;
  head >> tag >> version;
  if (tag != "#" || version != "spikegh-chain")
    throw IoError("'" + path + "' is not a chain file");
  head >> field;  // v1
  ChainStore chain;
  while (head >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq);
    const std::string val = field.substr(eq + 1);
    if (key == "kind") {
      if (val == "bgh")
        chain.kind = SamplerKind::kBgh;
      else if (val == "btg")
        chain.kind = SamplerKind::kBtg;
      else
        throw IoError("unknown sampler kind '" + val + "'");
    } else if (key == "seed") {
      chain.seed = static_cast<std::uint64_t>(parse_int(val, "seed"));
    } else if (key == "sites") {
      chain.site_count = static_cast<int>(parse_int(val, "sites"));
    } else if (key == "burn_in") {
      chain.burn_in = static_cast<int>(parse_int(val, "burn_in"));
    } else if (key == "thin") {
      chain.thin = static_cast<int>(parse_int(val, "thin"));
    }
  }
  if (chain.site_count <= 0)
    throw IoError("chain header lacks a positive site count");

  chain.pm_x.assign(chain.site_count, 0.0);
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    int iter = 0;
    std::string qs, xs;
    ThetaSample th{};
    MoveCounters c{};
    if (!(row >> iter >> qs >> xs >> th.bern_prob >> th.noise_var >> th.amp_var >>
          th.ir_scale >> c.birth_proposed >> c.birth_accepted >> c.death_proposed >>
          c.death_accepted >> c.update_proposed >> c.update_accepted >>
          c.amp_var_proposed >> c.amp_var_accepted >> c.scale_proposed >>
          c.scale_accepted))
      throw IoError("malformed chain record: '" + line + "'");
    if (static_cast<int>(qs.size()) != chain.site_count)
      throw IoError("support bit-string length mismatch");
    std::vector<std::uint8_t> q(chain.site_count, 0);
    for (int k = 0; k < chain.site_count; ++k) {
      if (qs[k] != '0' && qs[k] != '1')
        throw IoError("support bit-string must be 0/1");
      q[k] = qs[k] == '1' ? 1 : 0;
    }
    chain.q_hist.push_back(std::move(q));
    chain.theta_hist.push_back(th);
    chain.counter_hist.push_back(c);
    if (xs != "-") {
      const auto cols = split(xs, ',');
      if (static_cast<int>(cols.size()) != chain.site_count)
        throw IoError("amplitude row length mismatch");
      Vector x(chain.site_count);
      for (int k = 0; k < chain.site_count; ++k)
        x[k] = parse_double(cols[k], "amplitude");
      chain.x_hist.push_back(std::move(x));
      chain.x_iters.push_back(iter);
    }
  }
  if (chain.q_hist.empty())
    throw IoError("chain file '" + path + "' has no records");
  chain.counters = chain.counter_hist.back();
  const ThetaSample& last = chain.theta_hist.back();
  chain.final_hp = Hyperparams{last.bern_prob, last.noise_var, last.amp_var,
                               last.ir_scale};
  // posterior means recomputed from the recorded amplitude rows
  for (size_t r = 0; r < chain.x_hist.size(); ++r) {
    if (chain.x_iters[r] <= chain.burn_in) continue;
    for (int k = 0; k < chain.site_count; ++k) chain.pm_x[k] += chain.x_hist[r][k];
    ++chain.pm_count;
  }
  if (chain.pm_count > 0)
    for (double& v : chain.pm_x) v /= chain.pm_count;
  return chain;
}

namespace {

json counters_json(long long proposed, long long accepted) {
  json j;
  j["proposed"] = proposed;
  j["accepted"] = accepted;
  j["rate"] = proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  return j;
}

}  // namespace

void save_chain_metadata(const ChainStore& chain, const SamplerConfig& cfg,
                         const FittedGhApprox& fit, const std::string& fit_source,
                         const std::string& path) {
  json j;
  j["kind"] = chain.kind == SamplerKind::kBgh ? "bgh" : "btg";
  j["seed"] = chain.seed;
  j["site_count"] = chain.site_count;
  j["iterations"] = chain.q_hist.size();
  j["burn_in"] = chain.burn_in;
  j["thin"] = chain.thin;

  json sc;
  sc["iterations"] = cfg.iterations;
  sc["burn_in"] = cfg.burn_in;
  sc["seed"] = cfg.seed;
  sc["sample_bern_prob"] = cfg.sample_bern_prob;
  sc["sample_amp_var"] = cfg.sample_amp_var;
  sc["sample_noise_var"] = cfg.sample_noise_var;
  sc["sample_scale"] = cfg.sample_scale;
  sc["amp_var_step"] = cfg.amp_var_step;
  sc["scale_step"] = cfg.scale_step;
  sc["scale_min"] = cfg.scale_min;
  sc["scale_max"] = cfg.scale_max;
  sc["amp_var_min"] = cfg.amp_var_min;
  sc["amp_var_max"] = cfg.amp_var_max;
  sc["noise_prior_shape"] = cfg.noise_prior_shape;
  sc["noise_prior_rate"] = cfg.noise_prior_rate;
  sc["thin"] = cfg.thin;
  sc["shuffle_sites"] = cfg.shuffle_sites;
  sc["move_death_prob"] = cfg.moves.p10;
  sc["move_update_prob"] = cfg.moves.p11;
  sc["move_update_mix"] = cfg.moves.update_mix;
  j["sampler_config"] = sc;

  if (chain.kind == SamplerKind::kBgh) {
    json f;
    f["source"] = fit_source;
    f["lambda"] = fit.nu_N.lambda;
    f["alpha"] = fit.nu_N.alpha;
    f["beta"] = fit.nu_N.beta;
    f["delta"] = fit.nu_N.delta;
    f["mu"] = fit.nu_N.mu;
    f["fit_sample_count"] = fit.fit_sample_count;
    f["fit_seed"] = fit.fit_seed;
    f["fit_kl_estimate"] = fit.fit_kl_estimate;
    j["mixing_fit"] = f;
  }

  const MoveCounters& c = chain.counters;
  json acc;
  if (chain.kind == SamplerKind::kBgh) {
    acc["birth"] = counters_json(c.birth_proposed, c.birth_accepted);
    acc["death"] = counters_json(c.death_proposed, c.death_accepted);
    acc["update"] = counters_json(c.update_proposed, c.update_accepted);
  }
  acc["amp_var"] = counters_json(c.amp_var_proposed, c.amp_var_accepted);
  acc["scale"] = counters_json(c.scale_proposed, c.scale_accepted);
  j["acceptance"] = acc;

  json fin;
  fin["bern_prob"] = chain.final_hp.bern_prob;
  fin["noise_var"] = chain.final_hp.noise_var;
  fin["amp_var"] = chain.final_hp.amp_var;
  fin["ir_scale"] = chain.final_hp.ir_scale;
  j["final_hyperparams"] = fin;

  auto out = open_out(path);
  out << j.dump(2) << "\n";
  finish_out(out, path);
}

void save_trace(const std::vector<TracePoint>& trace, const std::string& path) {
  auto out = open_out(path);
  out << "samples_used,R,log10_R\n";
  for (const TracePoint& p : trace)
    out << p.length << ',' << format_double(p.r) << ','
        << format_double(std::log10(p.r)) << "\n";
  finish_out(out, path);
}

std::vector<TracePoint> load_trace(const std::string& path) {
  auto in = open_in(path);
  std::vector<TracePoint> trace;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line == "samples_used,R,log10_R") continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 3)
      throw IoError("trace row needs 3 columns: '" + line + "'");
    TracePoint p;
    p.length = static_cast<int>(parse_int(trim(cols[0]), "samples_used"));
    p.r = parse_double(trim(cols[1]), "R");
    trace.push_back(p);
  }
  return trace;
}

void save_estimates(const Vector& pm_x, const Vector& inclusion,
                    const Vector* true_x, const std::string& path) {
  if (pm_x.size() != inclusion.size())
    throw std::invalid_argument("estimate and inclusion lengths differ");
  if (true_x && true_x->size() != pm_x.size())
    throw std::invalid_argument("truth length differs from the estimate");
  auto out = open_out(path);
  out << (true_x ? "site,pm_x,inclusion_freq,true_x" : "site,pm_x,inclusion_freq")
      << "\n";
  for (size_t k = 0; k < pm_x.size(); ++k) {
    out << k << ',' << format_double(pm_x[k]) << ',' << format_double(inclusion[k]);
    if (true_x) out << ',' << format_double((*true_x)[k]);
    out << "\n";
  }
  finish_out(out, path);
}

}  // namespace spikegh
