#include "twotier/simulation.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <deque>
#include <iostream>
#include <numeric>
#include <sstream>

#include "twotier/covariance.hpp"
#include "twotier/errors.hpp"
#include "twotier/tracker.hpp"

namespace twotier::harness {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

// shortest round-trip decimal form, identical across runs
std::string fmt(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return Rng(seed).derive(a).derive(b).derive(c).seed();
}

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

struct SchemeSpec {
  std::string id;
  enum class Kind { oracle, compensated, gradient_only, one_tier } kind;
  int latency = 0;
};

std::vector<SchemeSpec> expand_schemes(const SimConfig& cfg) {
  std::vector<SchemeSpec> out;
  for (const std::string& s : cfg.scheme_set) {
    if (s == "oracle") out.push_back({s, SchemeSpec::Kind::oracle, 0});
    else if (s == "compensated") out.push_back({s, SchemeSpec::Kind::compensated, 0});
    else if (s == "gradient_only") out.push_back({s, SchemeSpec::Kind::gradient_only, 0});
    else if (s == "one_tier")
      for (int lat : cfg.latency_subframes)
        out.push_back({"one_tier_l" + std::to_string(lat), SchemeSpec::Kind::one_tier, lat});
    else throw ConfigError("run_simulation: unknown scheme '" + s + "'");
  }
  return out;
}

// log2 det(I + R^-1 S S^H) for Hermitian PD R, via Cholesky whitening
double rate_logdet(const MatrixXcd& s, MatrixXcd r) {
  const int d = static_cast<int>(r.rows());
  Eigen::LLT<MatrixXcd> llt(r);
  if (llt.info() != Eigen::Success) {
    std::cerr << "compute_rates: interference covariance not positive definite, jittering\n";
    r += 1e-12 * r.trace().real() * MatrixXcd::Identity(d, d);
    llt.compute(r);
    if (llt.info() != Eigen::Success)
      throw Error("compute_rates: interference covariance stayed non positive definite");
  }
  const MatrixXcd w = llt.matrixL().solve(s);
  const MatrixXcd m = MatrixXcd::Identity(d, d) + w * w.adjoint();
  const Eigen::LLT<MatrixXcd> lltm(m);
  if (lltm.info() != Eigen::Success) throw Error("compute_rates: rate matrix not positive definite");
  double rate = 0.0;
  const MatrixXcd l = lltm.matrixL();
  for (int i = 0; i < d; ++i) rate += 2.0 * std::log2(l(i, i).real());
  return rate;
}

}  // namespace

TransmitSet two_tier_transmit(const channel::ChannelSet& csi,
                              const std::vector<manifold::SubspacePoint>& phis, double w, int d,
                              double power, precode::FeedbackCounter* fb) {
  const int g = csi.g;
  const int users = csi.users_per_cell;
  if (static_cast<int>(phis.size()) != g)
    throw DimensionError("two_tier_transmit: one outer subspace per BS required");
  TransmitSet out;
  out.d = d;
  out.tx.resize(g);
  out.receivers.assign(g, std::vector<MatrixXcd>(users));
  for (int cell = 0; cell < g; ++cell) {
    const int m = phis[cell].rank();
    MatrixXcd stacked(users * d, m);
    for (int u = 0; u < users; ++u) {
      std::vector<MatrixXcd> effective(g);
      for (int b = 0; b < g; ++b) effective[b] = csi.at(b, cell, u) * phis[b].basis;
      const MatrixXcd shaped = precode::receiver_shaping(effective, cell, w, d);
      out.receivers[cell][u] = shaped;
      stacked.middleRows(u * d, d) =
          precode::effective_channel(shaped, csi.at(cell, cell, u), phis[cell], fb);
    }
    out.tx[cell] = phis[cell].basis * precode::inner_zf(stacked, power);
  }
  return out;
}

VectorXd compute_rates(const channel::ChannelSet& csi, const TransmitSet& t, double noise_power) {
  const int g = csi.g;
  const int users = csi.users_per_cell;
  const int d = t.d;
  if (!(noise_power > 0.0)) throw ValidationError("compute_rates: noise power must be positive");
  if (static_cast<int>(t.tx.size()) != g || static_cast<int>(t.receivers.size()) != g)
    throw DimensionError("compute_rates: transmit set does not match the network size");
  for (int b = 0; b < g; ++b) {
    if (static_cast<int>(t.receivers[b].size()) != users)
      throw DimensionError("compute_rates: one receiver per user required");
    if (t.tx[b].cols() != static_cast<Eigen::Index>(users) * d)
      throw DimensionError("compute_rates: transmit columns must be d per user");
  }

  VectorXd per_cell = VectorXd::Zero(g);
  for (int cell = 0; cell < g; ++cell) {
    for (int u = 0; u < users; ++u) {
      const MatrixXcd& rx = t.receivers[cell][u];
      const MatrixXcd own_channel = rx.adjoint() * csi.at(cell, cell, u);  // d x n_t
      const MatrixXcd signal = own_channel * t.tx[cell].middleCols(u * d, d);
      MatrixXcd r = noise_power * MatrixXcd::Identity(d, d);
      for (int j = 0; j < users; ++j) {
        if (j == u) continue;
        const MatrixXcd x = own_channel * t.tx[cell].middleCols(j * d, d);
        r += x * x.adjoint();
      }
      for (int b = 0; b < g; ++b) {
        if (b == cell) continue;
        const MatrixXcd x = rx.adjoint() * csi.at(b, cell, u) * t.tx[b];
        r += x * x.adjoint();
      }
      per_cell(cell) += rate_logdet(signal, std::move(r));
    }
  }
  return per_cell;
}

SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  SimReport rep;
  rep.config_echo = cfg.to_key_values();
  rep.feedback = counters::count_feedback(cfg.n_t, cfg.n_r, cfg.k, cfg.superframe_len);
  rep.complexity = counters::count_complexity(cfg.n_t, cfg.m, cfg.n_cg, cfg.seed);

  const std::vector<SchemeSpec> schemes = expand_schemes(cfg);
  const int g = cfg.g;
  const int upc = cfg.clusters_per_cell * cfg.k;
  const int d = cfg.streams_per_user();
  const int n_schemes = static_cast<int>(schemes.size());
  const int n_powers = static_cast<int>(cfg.power_dbs.size());

  bool track_compensated = false, track_gradient = false, any_one_tier = false;
  int max_latency = 0;
  int first_two_tier = -1, first_one_tier = -1;
  for (int s = 0; s < n_schemes; ++s) {
    const auto k = schemes[s].kind;
    if (k == SchemeSpec::Kind::compensated) track_compensated = true;
    if (k == SchemeSpec::Kind::gradient_only) track_gradient = true;
    if (k == SchemeSpec::Kind::one_tier) {
      any_one_tier = true;
      max_latency = std::max(max_latency, schemes[s].latency);
      if (first_one_tier < 0) first_one_tier = s;
    } else if (first_two_tier < 0) {
      first_two_tier = s;
    }
  }

  precode::FeedbackCounter fb_two, fb_one;
  long long counted_subframes = 0;

  if (cfg.n_superframes == 0) return rep;

  std::string ctx_scheme = "setup";
  int ctx_superframe = -1, ctx_subframe = -1;
  try {
    for (size_t si = 0; si < cfg.speeds_kmh.size(); ++si) {
      const double speed_kmh = cfg.speeds_kmh[si];
      const double speed_mps = speed_kmh / 3.6;
      ctx_scheme = "setup";
      ctx_superframe = ctx_subframe = -1;

      channel::NetworkConfig ncfg;
      ncfg.angular_spread_deg = cfg.angular_spread_deg;
      ncfg.speed_mps = speed_mps;
      // geometry seeded independently of speed so operating points share it
      auto topo = channel::build_network(g, cfg.clusters_per_cell, cfg.k, ncfg, cfg.seed);
      const auto geom = channel::ArrayGeometry::ula_half_wavelength(cfg.n_t);
      auto fading = channel::FadingState::init(g * upc, cfg.n_r, cfg.n_t, speed_mps,
                                               cfg.carrier_hz, cfg.subframe_duration,
                                               Rng(cfg.seed).derive(2));

      auto corr = channel::correlation_table(topo, geom, cfg.quadrature_points);
      auto prof = cov::assemble_q(cov::exact_table(topo, corr, cfg.n_r), cfg.w, 0);

      std::vector<manifold::SubspacePoint> oracle_phi(g);
      for (int b = 0; b < g; ++b) oracle_phi[b] = track::oracle_outer(prof.q_per_bs[b], cfg.m);

      std::vector<track::TrackerState> comp, grad;
      for (int b = 0; b < g; ++b) {
        if (track_compensated)
          comp.emplace_back(oracle_phi[b], prof.q_per_bs[b], cfg.gamma_policy, cfg.n_cg,
                            sub_seed(cfg.seed, 3, si, b));
        if (track_gradient)
          grad.emplace_back(oracle_phi[b], prof.q_per_bs[b], cfg.gamma_policy, cfg.n_cg,
                            sub_seed(cfg.seed, 4, si, b));
      }

      std::deque<channel::ChannelSet> history;
      // per scheme, per power: one mean per-cell rate per superframe
      std::vector<std::vector<std::vector<double>>> per_sf(
          n_schemes, std::vector<std::vector<double>>(n_powers));

      for (int n = 0; n < cfg.n_superframes; ++n) {
        ctx_superframe = n;
        ctx_subframe = -1;
        if (n > 0) {
          ctx_scheme = "statistics";
          channel::advance_topology(topo, cfg.superframe_len * cfg.subframe_duration);
          corr = channel::correlation_table(topo, geom, cfg.quadrature_points);
          prof = cov::assemble_q(cov::exact_table(topo, corr, cfg.n_r), cfg.w, n);
          for (int b = 0; b < g; ++b)
            oracle_phi[b] = track::oracle_outer(prof.q_per_bs[b], cfg.m);
          for (int b = 0; b < g; ++b) {
            if (track_compensated) {
              ctx_scheme = "compensated";
              const track::StepInfo info =
                  track_superframe(comp[b], prof.q_per_bs[b], track::TrackMode::compensated);
              if (si == 0)
                rep.diagnostics.push_back(
                    {n, b, manifold::subspace_distance(comp[b].phi, oracle_phi[b]),
                     info.gradient_norm, info.compensation_norm, info.degenerate});
            }
            if (track_gradient) {
              ctx_scheme = "gradient_only";
              const track::StepInfo info =
                  track_superframe(grad[b], prof.q_per_bs[b], track::TrackMode::gradient_only);
              if (!track_compensated && si == 0)
                rep.diagnostics.push_back(
                    {n, b, manifold::subspace_distance(grad[b].phi, oracle_phi[b]),
                     info.gradient_norm, 0.0, info.degenerate});
            }
          }
        }
        const auto sqrts = channel::sqrt_table(corr);

        std::vector<std::vector<double>> acc(n_schemes, std::vector<double>(n_powers, 0.0));
        for (int j = 0; j < cfg.superframe_len; ++j) {
          ctx_subframe = j;
          ctx_scheme = "channel";
          const auto csi = channel::realize_channels(topo, sqrts, fading);
          if (any_one_tier) {
            history.push_back(csi);
            while (static_cast<int>(history.size()) > max_latency + 1) history.pop_front();
          }
          ++counted_subframes;

          for (int s = 0; s < n_schemes; ++s) {
            const SchemeSpec& spec = schemes[s];
            ctx_scheme = spec.id;
            TransmitSet unit;
            if (spec.kind == SchemeSpec::Kind::one_tier) {
              const int back = std::min<int>(spec.latency, static_cast<int>(history.size()) - 1);
              const channel::ChannelSet& stale = history[history.size() - 1 - back];
              auto r = precode::one_tier_zf(stale, d, 1.0,
                                             s == first_one_tier ? &fb_one : nullptr);
              unit.tx = std::move(r.precoders);
              unit.receivers = std::move(r.receivers);
              unit.d = d;
            } else {
              const std::vector<manifold::SubspacePoint>* phis = &oracle_phi;
              std::vector<manifold::SubspacePoint> tracked(g);
              if (spec.kind != SchemeSpec::Kind::oracle) {
                const auto& states = spec.kind == SchemeSpec::Kind::compensated ? comp : grad;
                for (int b = 0; b < g; ++b) tracked[b] = states[b].phi;
                phis = &tracked;
              }
              unit = two_tier_transmit(csi, *phis, cfg.w, d, 1.0,
                                       s == first_two_tier ? &fb_two : nullptr);
            }
            // ZF directions do not depend on the budget, so one unit-power
            // solve serves every power point after scaling
            for (int pi = 0; pi < n_powers; ++pi) {
              const double amp = std::sqrt(std::pow(10.0, cfg.power_dbs[pi] / 10.0));
              TransmitSet scaled = unit;
              for (auto& tx : scaled.tx) tx *= amp;
              acc[s][pi] += compute_rates(csi, scaled, 1.0).mean();
            }
          }
          ctx_scheme = "fading";
          channel::advance_fading(fading);
        }
        for (int s = 0; s < n_schemes; ++s)
          for (int pi = 0; pi < n_powers; ++pi)
            per_sf[s][pi].push_back(acc[s][pi] / cfg.superframe_len);
      }

      for (int s = 0; s < n_schemes; ++s)
        for (int pi = 0; pi < n_powers; ++pi) {
          const auto [mean, se] = mean_stderr(per_sf[s][pi]);
          rep.rates.push_back({schemes[s].id, cfg.power_dbs[pi], speed_kmh, mean, se,
                               cfg.n_superframes});
        }
    }
  } catch (const Error& e) {
    std::ostringstream os;
    os << "run aborted (scheme " << ctx_scheme << ", superframe " << ctx_superframe
       << ", subframe " << ctx_subframe << "): " << e.what();
    throw Error(os.str());
  }

  if (counted_subframes > 0) {
    rep.measured_two_tier_feedback =
        static_cast<double>(fb_two.complex_scalars) / (static_cast<double>(g) * counted_subframes);
    rep.measured_one_tier_feedback =
        static_cast<double>(fb_one.complex_scalars) / (static_cast<double>(g) * counted_subframes);
  }
  return rep;
}

std::string SimReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["config"] = config_echo;
  j["rates"] = nlohmann::ordered_json::array();
  for (const auto& r : rates)
    j["rates"].push_back({{"scheme", r.scheme},
                          {"power_db", r.power_db},
                          {"speed_kmh", r.speed_kmh},
                          {"mean_per_cell_rate_bps_hz", r.mean_per_cell_rate},
                          {"stderr", r.stderr_rate},
                          {"n_superframes", r.n_superframes}});
  j["diagnostics"] = nlohmann::ordered_json::array();
  for (const auto& row : diagnostics)
    j["diagnostics"].push_back({{"superframe", row.superframe},
                                {"bs_index", row.bs_index},
                                {"subspace_error", row.subspace_error},
                                {"gradient_norm", row.gradient_norm},
                                {"compensation_norm", row.compensation_norm},
                                {"degenerate_flag", row.degenerate_flag}});
  j["feedback"] = {{"one_tier_feedback", feedback.one_tier_feedback},
                   {"two_tier_feedback", feedback.two_tier_feedback},
                   {"one_tier_signaling", feedback.one_tier_signaling},
                   {"two_tier_signaling", feedback.two_tier_signaling},
                   {"measured_two_tier_per_cell_subframe", measured_two_tier_feedback},
                   {"measured_one_tier_per_cell_subframe", measured_one_tier_feedback}};
  j["complexity"] = {{"formula_macs", complexity.formula_macs},
                     {"instrumented_macs", complexity.instrumented_macs},
                     {"svd_macs", complexity.svd_macs}};
  return j.dump(2) + "\n";
}

std::string SimReport::rates_csv() const {
  std::string out = "scheme,power_db,speed_kmh,mean_per_cell_rate_bps_hz,stderr,n_superframes\n";
  for (const auto& r : rates)
    out += r.scheme + "," + fmt(r.power_db) + "," + fmt(r.speed_kmh) + "," +
           fmt(r.mean_per_cell_rate) + "," + fmt(r.stderr_rate) + "," +
           std::to_string(r.n_superframes) + "\n";
  return out;
}

std::string SimReport::diagnostics_csv() const {
  std::string out = "superframe,bs_index,subspace_error,gradient_norm,compensation_norm,degenerate_flag\n";
  for (const auto& r : diagnostics)
    out += std::to_string(r.superframe) + "," + std::to_string(r.bs_index) + "," +
           fmt(r.subspace_error) + "," + fmt(r.gradient_norm) + "," +
           fmt(r.compensation_norm) + "," + (r.degenerate_flag ? "1" : "0") + "\n";
  return out;
}

}  // namespace twotier::harness
