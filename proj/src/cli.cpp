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

#include "shipdomain/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "shipdomain/csv.hpp"
#include "shipdomain/error.hpp"
#include "shipdomain/evaluation.hpp"
#include "shipdomain/models/checkpoint.hpp"
#include "shipdomain/models/gradcheck.hpp"
#include "shipdomain/models/train.hpp"

namespace shipdomain::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const RunConfig& c) {
  j = json{{"seed", c.seed},
           {"paths",
            {{"output_dir", c.paths.output_dir},
             {"dataset_dir", c.paths.dataset_dir},
             {"axis_csv", c.paths.axis_csv},
             {"axis_sidecar", c.paths.axis_sidecar},
             {"ingest_csv", c.paths.ingest_csv},
             {"checkpoint", c.paths.checkpoint}}},
           {"variant", c.variant},
           {"generator", c.generator},
           {"training", {{"epochs", c.training.epochs}, {"learning_rate", c.training.learning_rate}}},
           {"evaluation",
            {{"split", c.evaluation.split},
             {"checkpoints", c.evaluation.checkpoints},
             {"workers", c.evaluation.workers}}},
           {"probe",
            {{"situation_id", c.probe.situation_id},
             {"start_minute", c.probe.start_minute},
             {"target", c.probe.target},
             {"neighbor", c.probe.neighbor},
             {"kind", c.probe.kind},
             {"value", c.probe.value}}},
           {"gradcheck",
            {{"hidden_size", c.gradcheck.hidden_size},
             {"horizon", c.gradcheck.horizon},
             {"tolerance", c.gradcheck.tolerance},
             {"variants", c.gradcheck.variants}}}};
}

void from_json(const json& j, RunConfig& c) {
  const RunConfig d;
  c.seed = j.value("seed", d.seed);
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    c.paths.output_dir = p.value("output_dir", d.paths.output_dir);
    c.paths.dataset_dir = p.value("dataset_dir", d.paths.dataset_dir);
    c.paths.axis_csv = p.value("axis_csv", d.paths.axis_csv);
    c.paths.axis_sidecar = p.value("axis_sidecar", d.paths.axis_sidecar);
    c.paths.ingest_csv = p.value("ingest_csv", d.paths.ingest_csv);
    c.paths.checkpoint = p.value("checkpoint", d.paths.checkpoint);
  }
  if (j.contains("variant")) c.variant = j.at("variant").get<models::VariantConfig>();
  if (j.contains("generator")) c.generator = j.at("generator").get<traffic::GenConfig>();
  if (j.contains("training")) {
    const auto& t = j.at("training");
    c.training.epochs = t.value("epochs", d.training.epochs);
    c.training.learning_rate = t.value("learning_rate", d.training.learning_rate);
  }
  if (j.contains("evaluation")) {
    const auto& e = j.at("evaluation");
    c.evaluation.split = e.value("split", d.evaluation.split);
    c.evaluation.checkpoints = e.value("checkpoints", d.evaluation.checkpoints);
    c.evaluation.workers = e.value("workers", d.evaluation.workers);
  }
  if (j.contains("probe")) {
    const auto& p = j.at("probe");
    c.probe.situation_id = p.value("situation_id", d.probe.situation_id);
    c.probe.start_minute = p.value("start_minute", d.probe.start_minute);
    c.probe.target = p.value("target", d.probe.target);
    c.probe.neighbor = p.value("neighbor", d.probe.neighbor);
    c.probe.kind = p.value("kind", d.probe.kind);
    c.probe.value = p.value("value", d.probe.value);
  }
  if (j.contains("gradcheck")) {
    const auto& g = j.at("gradcheck");
    c.gradcheck.hidden_size = g.value("hidden_size", d.gradcheck.hidden_size);
    c.gradcheck.horizon = g.value("horizon", d.gradcheck.horizon);
    c.gradcheck.tolerance = g.value("tolerance", d.gradcheck.tolerance);
    c.gradcheck.variants = g.value("variants", d.gradcheck.variants);
  }
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file not found: " + path.string());
  try {
    return json::parse(in).get<RunConfig>();
  } catch (const json::exception& e) {
    throw ValidationError("malformed config " + path.string() + ": " + e.what());
  }
}

std::string config_hash(const RunConfig& c) {
  json j = c;
  j.erase("paths");
  j["evaluation"].erase("workers");
  j["evaluation"].erase("checkpoints");
  return csv::fnv1a_hex(j.dump());
}

std::string stamp(const RunConfig& c) { return "config_hash=" + config_hash(c) + " seed=" + std::to_string(c.seed); }

namespace {

fs::path out_dir(const RunConfig& c) {
  fs::path p(c.paths.output_dir);
  fs::create_directories(p);
  return p;
}

fs::path dataset_dir(const RunConfig& c) {
  return c.paths.dataset_dir.empty() ? fs::path(c.paths.output_dir) : fs::path(c.paths.dataset_dir);
}

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw ValidationError("missing " + std::string(what) + ": " + p.string());
}

std::pair<fs::path, fs::path> axis_files(const RunConfig& c, const fs::path& dir) {
  if (!c.paths.axis_csv.empty()) {
    fs::path csv(c.paths.axis_csv);
    fs::path side = c.paths.axis_sidecar.empty() ? fs::path(csv).replace_extension(".json") : fs::path(c.paths.axis_sidecar);
    return {csv, side};
  }
  return {dir / "axis.csv", dir / "axis.json"};
}

waterway::WaterwayAxis load_dataset_axis(const RunConfig& c) {
  const auto [csv_path, side] = axis_files(c, dataset_dir(c));
  require_file(csv_path, "axis file");
  require_file(side, "axis sidecar");
  return waterway::load_axis(csv_path, side);
}

std::vector<models::SituationWindows> load_split(const RunConfig& c, const waterway::WaterwayAxis& axis,
                                                 std::string_view split) {
  const fs::path file = dataset_dir(c) / (std::string(split) + ".ndjson");
  require_file(file, "dataset split");
  std::vector<models::SituationWindows> out;
  for (const auto& s : traffic::read_ndjson(file)) {
    auto w = traffic::window_situation(s, axis, c.variant.horizon, c.variant.horizon);
    if (!w.empty()) out.push_back(std::move(w));
  }
  spdlog::info("{}: {} situations with windows", split, out.size());
  return out;
}

models::VariantConfig effective_variant(const RunConfig& c) {
  models::VariantConfig v = c.variant;
  v.seed = c.seed;
  v.validate();
  return v;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

std::string checkpoint_name(models::Variant v) { return "model_" + std::string(models::variant_name(v)) + ".ckpt"; }

}  // namespace

void cmd_gen(const RunConfig& c) {
  c.generator.validate();
  const fs::path out = out_dir(c);
  std::optional<waterway::WaterwayAxis> axis;
  if (!c.paths.axis_csv.empty()) {
    const auto [csv_path, side] = axis_files(c, out);
    require_file(csv_path, "axis file");
    require_file(side, "axis sidecar");
    axis.emplace(waterway::load_axis(csv_path, side));
  } else {
    axis.emplace(traffic::make_axis(c.generator.axis));
  }
  waterway::save_axis(*axis, out / "axis.csv", out / "axis.json");

  json meta{{"config_hash", config_hash(c)}, {"seed", c.seed}, {"generator", c.generator}};
  if (!c.paths.ingest_csv.empty()) {
    require_file(c.paths.ingest_csv, "ingest file");
    const auto res = traffic::ingest_csv(c.paths.ingest_csv, *axis);
    if (res.dropped_rows > 0) spdlog::warn("ingest dropped {} implausible rows", res.dropped_rows);
    traffic::write_ndjson(res.situations, out / (c.evaluation.split + ".ndjson"));
    meta["ingested"] = {{"split", c.evaluation.split}, {"situations", res.situations.size()},
                        {"dropped_rows", res.dropped_rows}};
  } else {
    const std::pair<const char*, std::size_t> splits[] = {{"train", c.generator.train_situations},
                                                          {"val", c.generator.val_situations},
                                                          {"test", c.generator.test_situations}};
    json counts = json::object();
    for (const auto& [name, count] : splits) {
      const auto sits = traffic::generate_scenarios(c.generator, *axis, c.seed, name, count, c.evaluation.workers);
      traffic::write_ndjson(sits, out / (std::string(name) + ".ndjson"));
      counts[name] = sits.size();
      spdlog::info("gen {}: {} situations", name, sits.size());
    }
    meta["splits"] = counts;
  }
  write_json(out / "gen_meta.json", meta);
}

void cmd_train(const RunConfig& c) {
  const auto variant = effective_variant(c);
  const auto axis = load_dataset_axis(c);
  const auto train_set = load_split(c, axis, "train");
  const auto val_set = load_split(c, axis, "val");
  const fs::path out = out_dir(c);
  const std::string vname(models::variant_name(variant.variant));

  models::TrainConfig tc;
  tc.epochs = c.training.epochs;
  tc.adam.learning_rate = c.training.learning_rate;
  tc.seed = c.seed;
  tc.config_hash = config_hash(c);
  tc.stamp = stamp(c);
  tc.metrics_path = out / ("metrics_" + vname + ".csv");
  const auto result = models::train(train_set, val_set, variant, tc, [&](const models::EpochMetrics& m) {
    spdlog::info("{} epoch {}: train {:.6f} val {:.6f}", vname, m.epoch, m.train_loss, m.val_loss);
  });
  models::save_checkpoint(result.checkpoint, out / checkpoint_name(variant.variant));
  spdlog::info("{}: best epoch {} (val {:.6f})", vname, result.checkpoint.metadata.best_epoch,
               result.checkpoint.metadata.best_val_loss);
}

void cmd_eval(const RunConfig& c) {
  std::vector<std::string> ckpts = c.evaluation.checkpoints;
  if (ckpts.empty() && !c.paths.checkpoint.empty()) ckpts.push_back(c.paths.checkpoint);
  if (ckpts.empty()) throw ValidationError("no checkpoint given for eval");
  for (const auto& p : ckpts) require_file(p, "checkpoint");

  const auto axis = load_dataset_axis(c);
  const fs::path out = out_dir(c);
  const std::string st = stamp(c);
  std::vector<evaluation::FdeSummary> summaries;
  std::vector<evaluation::FdeRecord> all_records;
  std::vector<std::string> labels;
  for (const auto& p : ckpts) {
    const auto ckpt = models::load_checkpoint(p);
    const auto model = ckpt.model();
    RunConfig rc = c;
    rc.variant.horizon = ckpt.config.horizon;
    const auto data = load_split(rc, axis, c.evaluation.split);
    std::vector<traffic::WindowSet> flat;
    for (const auto& s : data) flat.insert(flat.end(), s.begin(), s.end());
    const auto preds = evaluation::predict_all(model, data, c.evaluation.workers);
    const auto res = evaluation::fde(preds, flat, axis);
    if (res.skipped > 0) spdlog::warn("{}: {} horizons skipped outside the axis range", p, res.skipped);

    std::string label(models::variant_name(ckpt.config.variant));
    for (int n = 2; std::find(labels.begin(), labels.end(), label) != labels.end(); ++n) {
      label = std::string(models::variant_name(ckpt.config.variant)) + "#" + std::to_string(n);
    }
    labels.push_back(label);
    fs::create_directories(out / label);
    evaluation::write_fde_records_csv(res.records, out / label / "fde_records.csv", st);
    if (res.records.empty()) {
      spdlog::warn("{}: no records", label);
      continue;
    }
    auto summary = evaluation::summarize(res.records, label);
    for (const auto& h : summary.horizons) {
      spdlog::info("{} FDE_{}: mean {:.2f} m, median {:.2f} m, n={}", label, h.horizon, h.mean, h.median, h.count);
    }
    summaries.push_back(std::move(summary));
    all_records.insert(all_records.end(), res.records.begin(), res.records.end());
  }
  evaluation::write_fde_summary_csv(summaries, out / "fde_summary.csv", st);
  std::vector<evaluation::BoxplotRow> box;
  // all_records holds the models back to back, in summary order.
  std::size_t offset = 0;
  for (const auto& s : summaries) {
    std::size_t n = 0;
    for (const auto& h : s.horizons) n += h.count;
    const auto rows = evaluation::boxplot_rows(std::span(&s, 1), std::span(all_records).subspan(offset, n));
    box.insert(box.end(), rows.begin(), rows.end());
    offset += n;
  }
  evaluation::write_boxplot_csv(box, out / "boxplot.csv", st);
}

void cmd_domain(const RunConfig& c) {
  if (c.paths.checkpoint.empty()) throw ValidationError("no checkpoint given for domain");
  require_file(c.paths.checkpoint, "checkpoint");
  const auto ckpt = models::load_checkpoint(c.paths.checkpoint);
  const auto report = evaluation::domain_report(ckpt);
  const fs::path out = out_dir(c);
  const std::string st = stamp(c);
  evaluation::write_domain_report_csv(report, out / "domain_report.csv", st);
  const auto rows = encounter::export_domain(ckpt.model().ship_domain());
  encounter::write_domain_csv(rows, out / "ship_domain.csv", st);
  for (const auto& a : report.aggregates) {
    if (a.finding != evaluation::DomainFinding::kUnchanged) {
      spdlog::info("{} phi#{}: mean {:.4f} wkm ({})", encounter::theta_label(a.theta_idx), a.phi_idx, a.mean,
                   evaluation::finding_name(a.finding));
    }
  }
}

void cmd_probe(const RunConfig& c) {
  if (c.paths.checkpoint.empty()) throw ValidationError("no checkpoint given for probe");
  require_file(c.paths.checkpoint, "checkpoint");
  const auto ckpt = models::load_checkpoint(c.paths.checkpoint);
  const auto model = ckpt.model();
  const auto axis = load_dataset_axis(c);
  RunConfig rc = c;
  rc.variant.horizon = ckpt.config.horizon;
  const auto data = load_split(rc, axis, c.evaluation.split);

  auto has = [](const traffic::WindowSet& w, const std::string& id) {
    return std::any_of(w.vessels.begin(), w.vessels.end(), [&](const auto& v) { return v.vessel_id == id; });
  };
  const traffic::WindowSet* chosen = nullptr;
  for (const auto& sit : data) {
    for (const auto& w : sit) {
      if (!c.probe.situation_id.empty() && w.situation_id != c.probe.situation_id) continue;
      if (c.probe.start_minute >= 0 && w.start_minute != c.probe.start_minute) continue;
      if (w.vessels.size() < 2) continue;
      if (!c.probe.target.empty() && !has(w, c.probe.target)) continue;
      if (!c.probe.neighbor.empty() && !has(w, c.probe.neighbor)) continue;
      chosen = &w;
      break;
    }
    if (chosen != nullptr) break;
  }
  if (chosen == nullptr) throw ValidationError("no window matches the probe selection");
  const std::string target = c.probe.target.empty() ? chosen->vessels[0].vessel_id : c.probe.target;
  std::string neighbor = c.probe.neighbor;
  if (neighbor.empty()) neighbor = chosen->vessels[chosen->vessels[0].vessel_id == target ? 1 : 0].vessel_id;

  const evaluation::Perturbation p{evaluation::parse_perturbation(c.probe.kind), c.probe.value};
  const auto res = evaluation::counterfactual_probe(model, *chosen, target, neighbor, p, axis);
  json j = res;
  j["config_hash"] = config_hash(c);
  j["seed"] = c.seed;
  j["variant"] = models::variant_name(ckpt.config.variant);
  j["situation_id"] = chosen->situation_id;
  j["start_minute"] = chosen->start_minute;
  write_json(out_dir(c) / "probe.json", j);
  spdlog::info("probe {} <- {}: max displacement {:.6f} m", target, neighbor, res.max_displacement_m);
}

bool cmd_gradcheck(const RunConfig& c) {
  std::vector<models::Variant> variants;
  for (const auto& name : c.gradcheck.variants) variants.push_back(models::parse_variant(name));
  if (variants.empty()) {
    variants = {models::Variant::kED, models::Variant::kEADA, models::Variant::kEDA, models::Variant::kEDDA};
  }
  json results = json::array();
  bool ok = true;
  for (auto v : variants) {
    auto gc = models::make_gradcheck_case(v, c.gradcheck.hidden_size, c.gradcheck.horizon, c.seed);
    const auto rep = models::check_gradients(gc, c.gradcheck.tolerance);
    ok = ok && rep.passed();
    const shipdomain::nn::GradCheckEntry* worst = nullptr;
    for (const auto& e : rep.entries) {
      if (worst == nullptr || e.rel_error > worst->rel_error) worst = &e;
    }
    results.push_back({{"variant", models::variant_name(v)},
                       {"max_rel_error", rep.max_rel_error},
                       {"worst_parameter", rep.worst_parameter},
                       {"worst_index", rep.worst_index},
                       {"worst_analytic", worst ? worst->analytic : 0.0},
                       {"worst_numeric", worst ? worst->numeric : 0.0},
                       {"checked", rep.checked},
                       {"skipped", rep.skipped},
                       {"passed", rep.passed()}});
    std::cout << (rep.passed() ? "PASS " : "FAIL ") << models::variant_name(v) << " max_rel_error="
              << csv::format_double(rep.max_rel_error) << " (" << rep.worst_parameter << '[' << rep.worst_index
              << "])\n";
  }
  write_json(out_dir(c) / "gradcheck.json", json{{"config_hash", config_hash(c)},
                                                  {"seed", c.seed},
                                                  {"tolerance", c.gradcheck.tolerance},
                                                  {"results", results}});
  return ok;
}

int run(std::span<const std::string> args) {
  if (const char* lvl = std::getenv("SHIPDOMAIN_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Interaction-aware ship trajectory prediction", "shipdomain"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out, variant;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "Seed for generation, initialization and shuffling");
  app.add_option("--out", out, "Output directory");
  app.add_option("--variant", variant, "E-D, EA-DA, E-DA or E-DDA");
  app.add_option("--workers", workers, "Worker threads for gen and eval");
  auto* gen = app.add_subcommand("gen", "Generate or ingest a dataset");
  auto* train = app.add_subcommand("train", "Train one variant");
  auto* eval = app.add_subcommand("eval", "Displacement errors of checkpoints");
  auto* domain = app.add_subcommand("domain", "Ship-domain report of a checkpoint");
  auto* probe = app.add_subcommand("probe", "Counterfactual neighbor probe");
  auto* gradcheck = app.add_subcommand("gradcheck", "Gradient check on a tiny model");
  std::vector<std::string> ckpt_flags;
  for (auto* sub : {eval, domain, probe}) sub->add_option("--checkpoint", ckpt_flags, "Checkpoint file(s)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) c.seed = *seed;
    if (!out.empty()) c.paths.output_dir = out;
    if (!variant.empty()) {
      c.variant.variant = models::parse_variant(variant);
      c.gradcheck.variants = {variant};
    }
    if (workers) c.evaluation.workers = std::max<std::size_t>(1, *workers);
    if (!ckpt_flags.empty()) {
      c.paths.checkpoint = ckpt_flags.front();
      c.evaluation.checkpoints = ckpt_flags;
    }

    if (gen->parsed()) cmd_gen(c);
    if (train->parsed()) cmd_train(c);
    if (eval->parsed()) cmd_eval(c);
    if (domain->parsed()) cmd_domain(c);
    if (probe->parsed()) cmd_probe(c);
    if (gradcheck->parsed() && !cmd_gradcheck(c)) {
      spdlog::error("gradient check failed");
      return kExitRuntime;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const RuntimeFailure& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace shipdomain::cli
