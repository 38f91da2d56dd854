// Copyright 2026 The shipdomain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shipdomain/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "shipdomain/csv.hpp"
#include "shipdomain/error.hpp"

namespace shipdomain::evaluation {
namespace {

std::ofstream open_out(const std::filesystem::path& path, std::string_view stamp) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  if (!stamp.empty()) out << "# " << stamp << '\n';
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

double planar_distance(const waterway::WaterwayAxis& axis, waterway::CurvilinearPose a,
                       waterway::CurvilinearPose b) {
  const auto pa = axis.to_cartesian(a);
  const auto pb = axis.to_cartesian(b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

}  // namespace

FdeResult fde(std::span<const models::PredictionSet> predictions, std::span<const traffic::WindowSet> truths,
              const waterway::WaterwayAxis& axis) {
  if (predictions.size() != truths.size()) throw ValidationError("predictions and truths differ in window count");
  FdeResult res;
  for (std::size_t w = 0; w < truths.size(); ++w) {
    const auto& ps = predictions[w];
    const auto& ws = truths[w];
    if (ps.situation_id != ws.situation_id || ps.vessels.size() != ws.vessels.size()) {
      throw ValidationError("prediction set does not match window of " + ws.situation_id);
    }
    for (std::size_t v = 0; v < ws.vessels.size(); ++v) {
      const auto& pv = ps.vessels[v];
      const auto& tv = ws.vessels[v];
      if (pv.vessel_id != tv.vessel_id || pv.poses.size() != tv.future_poses.size()) {
        throw ValidationError("prediction for " + pv.vessel_id + " does not match its window");
      }
      for (std::size_t t = 0; t < tv.future_poses.size(); ++t) {
        if (!tv.mask[t]) continue;
        try {
          res.records.push_back({ws.situation_id, tv.vessel_id, static_cast<int>(t) + 1,
                                 planar_distance(axis, pv.poses[t], tv.future_poses[t])});
        } catch (const ValidationError&) {
          ++res.skipped;
        }
      }
    }
  }
  std::stable_sort(res.records.begin(), res.records.end(), [](const FdeRecord& a, const FdeRecord& b) {
    return std::tie(a.situation_id, a.vessel_id) < std::tie(b.situation_id, b.vessel_id);
  });
  return res;
}

std::vector<models::PredictionSet> predict_all(const models::TrajectoryModel& model,
                                               std::span<const std::vector<traffic::WindowSet>> situations,
                                               std::size_t workers) {
  std::vector<std::vector<models::PredictionSet>> per(situations.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < situations.size(); i = next++) {
      try {
        per[i] = model.predict(situations[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, situations.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<models::PredictionSet> out;
  for (auto& p : per) {
    for (auto& s : p) out.push_back(std::move(s));
  }
  return out;
}

const HorizonStats* FdeSummary::at(int horizon) const {
  for (const auto& h : horizons) {
    if (h.horizon == horizon) return &h;
  }
  return nullptr;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

FdeSummary summarize(std::span<const FdeRecord> records, std::string model) {
  if (records.empty()) throw ValidationError("cannot summarize an empty record set");
  std::map<int, std::vector<const FdeRecord*>> by_h;
  for (const auto& r : records) by_h[r.horizon].push_back(&r);
  FdeSummary s;
  s.model = std::move(model);
  for (const auto& [h, recs] : by_h) {
    HorizonStats st;
    st.horizon = h;
    st.count = recs.size();
    std::vector<double> e;
    e.reserve(recs.size());
    for (const auto* r : recs) e.push_back(r->error_m);
    double sum = 0.0;
    for (double x : e) sum += x;
    st.mean = sum / static_cast<double>(e.size());
    double ss = 0.0;
    for (double x : e) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(e.size()));
    std::sort(e.begin(), e.end());
    st.median = quantile_sorted(e, 0.5);
    st.q1 = quantile_sorted(e, 0.25);
    st.q3 = quantile_sorted(e, 0.75);
    st.min = e.front();
    st.max = e.back();
    for (const auto* r : recs) {
      if (r->error_m > kOutlierThresholdM) st.outliers.push_back(*r);
    }
    s.horizons.push_back(std::move(st));
  }
  return s;
}

void write_fde_records_csv(std::span<const FdeRecord> records, const std::filesystem::path& path,
                           std::string_view stamp) {
  auto out = open_out(path, stamp);
  out << "situation_id,vessel_id,horizon,error_m\n";
  for (const auto& r : records) {
    out << r.situation_id << ',' << r.vessel_id << ',' << r.horizon << ',' << csv::format_double(r.error_m) << '\n';
  }
  finish(out, path);
}

void write_fde_summary_csv(std::span<const FdeSummary> summaries, const std::filesystem::path& path,
                           std::string_view stamp) {
  auto out = open_out(path, stamp);
  out << "horizon,statistic";
  for (const auto& s : summaries) out << ',' << s.model;
  out << '\n';
  std::vector<int> horizons;
  for (const auto& s : summaries) {
    for (const auto& h : s.horizons) horizons.push_back(h.horizon);
  }
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  using Getter = std::string (*)(const HorizonStats&);
  const std::pair<const char*, Getter> stats[] = {
      {"count", [](const HorizonStats& h) { return std::to_string(h.count); }},
      {"mean", [](const HorizonStats& h) { return csv::format_double(h.mean); }},
      {"median", [](const HorizonStats& h) { return csv::format_double(h.median); }},
      {"std", [](const HorizonStats& h) { return csv::format_double(h.stddev); }},
      {"q1", [](const HorizonStats& h) { return csv::format_double(h.q1); }},
      {"q3", [](const HorizonStats& h) { return csv::format_double(h.q3); }},
      {"min", [](const HorizonStats& h) { return csv::format_double(h.min); }},
      {"max", [](const HorizonStats& h) { return csv::format_double(h.max); }},
      {"outliers_over_300m", [](const HorizonStats& h) { return std::to_string(h.outliers.size()); }},
  };
  for (int h : horizons) {
    for (const auto& [name, get] : stats) {
      out << h << ',' << name;
      for (const auto& s : summaries) {
        out << ',';
        if (const auto* st = s.at(h)) out << get(*st);
      }
      out << '\n';
    }
  }
  finish(out, path);
}

std::vector<BoxplotRow> boxplot_rows(std::span<const FdeSummary> summaries, std::span<const FdeRecord> records) {
  std::vector<BoxplotRow> rows;
  for (const auto& s : summaries) {
    for (const auto& h : s.horizons) {
      BoxplotRow row{s.model, h.horizon, h.count, 0.0, h.q1, h.median, h.q3, 0.0, {}};
      const double iqr = h.q3 - h.q1;
      const double lo_fence = h.q1 - 1.5 * iqr;
      const double hi_fence = h.q3 + 1.5 * iqr;
      row.whisker_low = h.q1;
      row.whisker_high = h.q3;
      for (const auto& r : records) {
        if (r.horizon != h.horizon) continue;
        if (r.error_m < lo_fence || r.error_m > hi_fence) {
          row.outliers.push_back(r.error_m);
        } else {
          row.whisker_low = std::min(row.whisker_low, r.error_m);
          row.whisker_high = std::max(row.whisker_high, r.error_m);
        }
      }
      std::sort(row.outliers.begin(), row.outliers.end());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_boxplot_csv(std::span<const BoxplotRow> rows, const std::filesystem::path& path, std::string_view stamp) {
  auto out = open_out(path, stamp);
  out << "model,horizon,count,whisker_low,q1,median,q3,whisker_high,n_outliers,outliers\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.horizon << ',' << r.count << ',' << csv::format_double(r.whisker_low) << ','
        << csv::format_double(r.q1) << ',' << csv::format_double(r.median) << ',' << csv::format_double(r.q3) << ','
        << csv::format_double(r.whisker_high) << ',' << r.outliers.size() << ',';
    for (std::size_t i = 0; i < r.outliers.size(); ++i) {
      if (i > 0) out << ';';
      out << csv::format_double(r.outliers[i]);
    }
    out << '\n';
  }
  finish(out, path);
}

std::string_view finding_name(DomainFinding f) {
  switch (f) {
    case DomainFinding::kGrown: return "grown";
    case DomainFinding::kShrunk: return "shrunk";
    case DomainFinding::kUnchanged: return "unchanged";
  }
  return "unchanged";
}

DomainFinding classify_domain_value(double value, double init) {
  const double band = kDomainChangeFraction * std::abs(init);
  if (value > init + band) return DomainFinding::kGrown;
  if (value < init - band) return DomainFinding::kShrunk;
  return DomainFinding::kUnchanged;
}

const DomainAggregate& DomainReport::aggregate(std::size_t theta_idx, std::size_t phi_idx) const {
  if (theta_idx >= encounter::kThetaBuckets || phi_idx >= encounter::kPhiBuckets) {
    throw ValidationError("aggregate index out of range");
  }
  return aggregates[theta_idx * encounter::kPhiBuckets + phi_idx];
}

DomainReport domain_report(const encounter::ShipDomainTensor& domain) {
  DomainReport rep;
  rep.init = domain.init_value();
  for (auto& row : encounter::export_domain(domain)) {
    const auto finding = classify_domain_value(row.value_wkm, rep.init);
    rep.cells.push_back({std::move(row), finding});
  }
  for (std::size_t th = 0; th < encounter::kThetaBuckets; ++th) {
    for (std::size_t ph = 0; ph < encounter::kPhiBuckets; ++ph) {
      DomainAggregate a{th, ph, 0.0, 0.0, 0.0, DomainFinding::kUnchanged};
      double sum = 0.0;
      for (std::size_t g = 0; g < encounter::kGammaBuckets; ++g) {
        const double v = domain.at({th, ph, g});
        sum += v;
        a.min = g == 0 ? v : std::min(a.min, v);
        a.max = g == 0 ? v : std::max(a.max, v);
      }
      a.mean = sum / static_cast<double>(encounter::kGammaBuckets);
      a.finding = classify_domain_value(a.mean, rep.init);
      rep.aggregates.push_back(a);
    }
  }
  return rep;
}

DomainReport domain_report(const models::ModelCheckpoint& ckpt) {
  if (!ckpt.config.has_domain() || ckpt.params.find("ship_domain") == nullptr) {
    throw ValidationError("variant has no ship-domain tensor");
  }
  const auto& p = ckpt.params.at("ship_domain");
  return domain_report(encounter::ShipDomainTensor(p.value.data(), ckpt.config.domain_init));
}

void write_domain_report_csv(const DomainReport& report, const std::filesystem::path& path,
                             std::string_view stamp) {
  auto out = open_out(path, stamp);
  out << "kind,theta,phi_lo,phi_hi,gamma_lo,gamma_hi,value_wkm,delta_vs_init,finding\n";
  for (const auto& c : report.cells) {
    const auto& r = c.row;
    out << "cell," << r.theta << ',' << csv::format_double(r.phi_lo) << ',' << csv::format_double(r.phi_hi) << ','
        << csv::format_double(r.gamma_lo) << ',' << csv::format_double(r.gamma_hi) << ','
        << csv::format_double(r.value_wkm) << ',' << csv::format_double(r.delta_vs_init) << ','
        << finding_name(c.finding) << '\n';
  }
  const double g_lo = encounter::gamma_bounds(0).first;
  const double g_hi = encounter::gamma_bounds(encounter::kGammaBuckets - 1).second;
  for (const auto& a : report.aggregates) {
    const auto [p_lo, p_hi] = encounter::phi_bounds(a.phi_idx);
    out << "aggregate," << encounter::theta_label(a.theta_idx) << ',' << csv::format_double(p_lo) << ','
        << csv::format_double(p_hi) << ',' << csv::format_double(g_lo) << ',' << csv::format_double(g_hi) << ','
        << csv::format_double(a.mean) << ',' << csv::format_double(a.mean - report.init) << ','
        << finding_name(a.finding) << '\n';
  }
  finish(out, path);
}

Perturbation::Kind parse_perturbation(std::string_view name) {
  if (name == "lateral_shift") return Perturbation::Kind::kLateralShift;
  if (name == "speed_scale") return Perturbation::Kind::kSpeedScale;
  if (name == "removal") return Perturbation::Kind::kRemoval;
  throw ValidationError("unknown perturbation " + std::string(name));
}

std::string_view perturbation_name(Perturbation::Kind kind) {
  switch (kind) {
    case Perturbation::Kind::kLateralShift: return "lateral_shift";
    case Perturbation::Kind::kSpeedScale: return "speed_scale";
    case Perturbation::Kind::kRemoval: return "removal";
  }
  return "removal";
}

namespace {

std::size_t vessel_index(const traffic::WindowSet& w, std::string_view id) {
  for (std::size_t i = 0; i < w.vessels.size(); ++i) {
    if (w.vessels[i].vessel_id == id) return i;
  }
  throw ValidationError("vessel " + std::string(id) + " not in window");
}

void check_on_axis(const waterway::WaterwayAxis& axis, waterway::CurvilinearPose p) {
  if (std::abs(p.f) > axis.options().lateral_margin_m) {
    throw ValidationError("perturbation pushes the vessel outside the axis");
  }
  try {
    (void)axis.to_cartesian(p);
  } catch (const ValidationError&) {
    throw ValidationError("perturbation pushes the vessel outside the axis");
  }
}

}  // namespace

traffic::WindowSet perturb_window(const traffic::WindowSet& window, std::string_view vessel_id,
                                  const Perturbation& p, const waterway::WaterwayAxis& axis) {
  traffic::WindowSet out = window;
  if (p.kind == Perturbation::Kind::kRemoval) return out;
  auto& v = out.vessels[vessel_index(out, vessel_id)];
  const double k0 = v.obs_poses.front().k;
  auto move = [&](waterway::CurvilinearPose& pose) {
    if (p.kind == Perturbation::Kind::kLateralShift) {
      pose.f += p.value;
    } else {
      pose.k = k0 + p.value * (pose.k - k0);
    }
    check_on_axis(axis, pose);
  };
  for (auto& pose : v.obs_poses) move(pose);
  for (std::size_t t = 0; t < v.future_poses.size(); ++t) {
    if (v.mask[t]) move(v.future_poses[t]);
  }
  for (std::size_t t = 1; t < v.obs_poses.size(); ++t) {
    v.obs_x[t - 1] = traffic::input_features(axis, v.obs_poses[t], v.obs_poses[t - 1]);
  }
  for (std::size_t t = 0; t < v.future_poses.size(); ++t) {
    if (!v.mask[t]) continue;
    const auto prev = t == 0 ? v.obs_poses.back() : v.future_poses[t - 1];
    v.target_y[t] = {v.future_poses[t].k - prev.k, v.future_poses[t].f - prev.f};
  }
  return out;
}

ProbeResult counterfactual_probe(const models::TrajectoryModel& model, const traffic::WindowSet& window,
                                 std::string_view target, std::string_view neighbor, const Perturbation& p,
                                 const waterway::WaterwayAxis& axis) {
  if (target == neighbor) throw ValidationError("target and neighbor must differ");
  const std::size_t ti = vessel_index(window, target);
  const std::size_t ni = vessel_index(window, neighbor);

  auto run = [&](const traffic::WindowSet& w, bool detach, models::ForwardTrace* trace) {
    const std::array<traffic::WindowSet, 1> ws{w};
    auto batch = models::make_batch(ws, model.normalizer());
    if (detach) batch.detached[ni] = 1;
    nn::Tape tape;
    const auto out = model.forward(tape, batch, models::DecodeMode::kAutoregressive, false, trace);
    return out.poses[ti];
  };

  models::ForwardTrace trace;
  const auto original = run(window, false, &trace);
  const bool removal = p.kind == Perturbation::Kind::kRemoval;
  const auto perturbed = run(removal ? window : perturb_window(window, neighbor, p, axis), removal, nullptr);

  ProbeResult res;
  res.target = std::string(target);
  res.neighbor = std::string(neighbor);
  res.perturbation = p;
  for (std::size_t t = 0; t < original.size(); ++t) {
    double d;
    try {
      d = planar_distance(axis, original[t], perturbed[t]);
    } catch (const ValidationError&) {
      // Predictions beyond the axis ends: fall back to the curvilinear metric.
      d = std::hypot((original[t].k - perturbed[t].k) * 1000.0, original[t].f - perturbed[t].f);
    }
    res.displacement_m.push_back(d);
    res.max_displacement_m = std::max(res.max_displacement_m, d);
  }
  for (const auto& w : trace.weights) {
    if (w.target == ti && w.source == ni) res.weights.push_back(w);
  }
  return res;
}

void to_json(nlohmann::json& j, const ProbeResult& r) {
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : r.weights) {
    weights.push_back({{"phase", w.phase == models::WeightRecord::Phase::kEncoder ? "encoder" : "decoder"},
                       {"step", w.step},
                       {"theta", encounter::theta_label(w.key.theta_idx)},
                       {"phi_idx", w.key.phi_idx},
                       {"gamma_idx", w.key.gamma_idx},
                       {"delta_wkm", w.delta},
                       {"weight", w.weight}});
  }
  j = {{"target", r.target},
       {"neighbor", r.neighbor},
       {"perturbation", {{"kind", perturbation_name(r.perturbation.kind)}, {"value", r.perturbation.value}}},
       {"max_displacement_m", r.max_displacement_m},
       {"displacement_m", r.displacement_m},
       {"weights", weights}};
}

}  // namespace shipdomain::evaluation
