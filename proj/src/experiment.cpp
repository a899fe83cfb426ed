#include "gridids/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "gridids/error.hpp"
#include "gridids/hierarchy.hpp"
#include "gridids/pipeline.hpp"
#include "gridids/power_system.hpp"
#include "gridids/rng.hpp"
#include "gridids/serialize.hpp"

namespace gridids {

using nlohmann::json;

std::string_view to_string(ModelChoice m) {
  switch (m) {
    case ModelChoice::Flat: return "flat";
    case ModelChoice::Hierarchical: return "hierarchical";
    case ModelChoice::PrimaryDefault: return "primary-default";
  }
  return "hierarchical";
}

std::string_view to_string(ImputePolicy p) {
  switch (p) {
    case ImputePolicy::Mean: return "mean";
    case ImputePolicy::Median: return "median";
    case ImputePolicy::Drop: return "drop";
    case ImputePolicy::Zero: return "zero";
  }
  return "zero";
}

std::string_view to_string(ScalerKind k) {
  switch (k) {
    case ScalerKind::None: return "none";
    case ScalerKind::Standard: return "standard";
    case ScalerKind::MeanNormalization: return "mean-normalization";
    case ScalerKind::MinMax: return "minmax";
  }
  return "standard";
}

ImputePolicy parse_impute_policy(std::string_view name) {
  for (auto p : {ImputePolicy::Mean, ImputePolicy::Median, ImputePolicy::Drop, ImputePolicy::Zero})
    if (to_string(p) == name) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown imputation policy '" + std::string(name) + "'");
}

ScalerKind parse_scaler(std::string_view name) {
  for (auto k : {ScalerKind::None, ScalerKind::Standard, ScalerKind::MeanNormalization, ScalerKind::MinMax})
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown scaler '" + std::string(name) + "'");
}

// ---- config parsing ---------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) pos = s.size();
    auto item = trim(s.substr(start, pos - start));
    if (!item.empty()) out.emplace_back(item);
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::InvalidArgument, "bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v);
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

/// "1-6,13,14" -> {1,...,6,13,14}
std::set<int> parse_label_set(std::string_view key, std::string_view v) {
  std::set<int> out;
  for (const auto& item : split_list(v, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.insert(parse_int(key, item));
    } else {
      const int lo = parse_int(key, trim(std::string_view(item).substr(0, dash)));
      const int hi = parse_int(key, trim(std::string_view(item).substr(dash + 1)));
      if (hi < lo) bad_value(key, v);
      for (int l = lo; l <= hi; ++l) out.insert(l);
    }
  }
  return out;
}

bool apply_forest_setting(ForestParams& p, std::string_view key, std::string_view v) {
  if (key == "trees") p.n_estimators = parse_u64(key, v);
  else if (key == "max_features") p.max_features = parse_max_features(v);
  else if (key == "criterion") p.criterion = parse_criterion(v);
  else if (key == "max_depth") p.max_depth = v == "none" ? std::nullopt : std::optional<std::size_t>(parse_u64(key, v));
  else if (key == "min_samples_split") p.min_samples_split = parse_u64(key, v);
  else if (key == "bootstrap") p.bootstrap = parse_bool(key, v);
  else return false;
  return true;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  const auto v = trim(value);
  if (key == "inputs") {
    cfg.inputs.clear();
    for (const auto& p : split_list(v, ',')) cfg.inputs.emplace_back(p);
  } else if (key == "demo") cfg.demo = parse_bool(key, v);
  else if (key == "demo.majority_rows") cfg.demo_config.majority_rows = parse_u64(key, v);
  else if (key == "demo.imbalance") cfg.demo_config.imbalance = parse_double(key, v);
  else if (key == "demo.separation") cfg.demo_config.separation = parse_double(key, v);
  else if (key == "demo.missing_rate") cfg.demo_config.missing_rate = parse_double(key, v);
  else if (key == "demo.seed") cfg.demo_config.seed = parse_u64(key, v);
  else if (key == "label_column") cfg.label_column = std::string(v);
  else if (key == "natural_labels") cfg.taxonomy.natural_labels = parse_label_set(key, v);
  else if (key == "attack_labels") cfg.taxonomy.attack_labels = parse_label_set(key, v);
  else if (key == "drop_logs") cfg.drop_logs = parse_bool(key, v);
  else if (key == "drop_list") cfg.drop_list = split_list(v, ',');
  else if (key == "apparent_power") cfg.apparent_power = parse_bool(key, v);
  else if (key == "phasor_groups") {
    cfg.phasor_groups.clear();
    for (const auto& g : split_list(v, ';')) {
      const auto parts = split_list(g, '|');
      if (parts.size() != 6) bad_value(key, g);
      cfg.phasor_groups.push_back({parts[0], parts[1], parts[2], parts[3], parts[4], parts[5]});
    }
  } else if (key == "feature_set") {
    if (v == "all") cfg.drop_logs = cfg.apparent_power = false;
    else if (v == "drop-logs") cfg.drop_logs = true, cfg.apparent_power = false;
    else if (v == "apparent-power") cfg.drop_logs = cfg.apparent_power = true;
    else bad_value(key, v);
  } else if (key == "imputation") cfg.imputation = parse_impute_policy(v);
  else if (key == "impute_fit") {
    if (v == "full") cfg.impute_on_train_only = false;
    else if (v == "train") cfg.impute_on_train_only = true;
    else bad_value(key, v);
  } else if (key == "scaler") cfg.scaler = parse_scaler(v);
  else if (key == "scale_order") {
    if (v == "before-resample") cfg.scale_before_resample = true;
    else if (v == "after-resample") cfg.scale_before_resample = false;
    else bad_value(key, v);
  } else if (key == "resample_order") {
    if (v == "after-split") cfg.resample_before_split = false;
    else if (v == "before-split") cfg.resample_before_split = true;
    else bad_value(key, v);
  } else if (key == "resampler") cfg.resample.method = parse_resample_method(v);
  else if (key == "k_neighbors") cfg.resample.k_neighbors = parse_u64(key, v);
  else if (key == "m_neighbors") cfg.resample.m_neighbors = parse_u64(key, v);
  else if (key == "target_count")
    cfg.resample.target_count = v == "majority" ? std::nullopt : std::optional<std::size_t>(parse_u64(key, v));
  else if (key == "adasyn_cap") cfg.resample.adasyn_cap = parse_bool(key, v);
  else if (key == "train_fraction") cfg.train_fraction = parse_double(key, v);
  else if (key == "split_mode") {
    if (v == "stratified") cfg.split_mode = SplitMode::Stratified;
    else if (v == "shuffle") cfg.split_mode = SplitMode::Shuffle;
    else bad_value(key, v);
  } else if (key == "seed") cfg.seed = parse_u64(key, v);
  else if (key == "model") {
    if (v == "flat") cfg.model = ModelChoice::Flat;
    else if (v == "hierarchical") cfg.model = ModelChoice::Hierarchical;
    else if (v == "primary-default") cfg.model = ModelChoice::PrimaryDefault;
    else bad_value(key, v);
  } else if (key == "baselines") cfg.baselines = parse_bool(key, v);
  else if (key == "top_n") cfg.top_n = parse_u64(key, v);
  else if (key == "out") cfg.out = std::string(v);
  else if (key == "model_out") cfg.model_out = std::string(v);
  else if (key.starts_with("layer1.")) {
    if (!apply_forest_setting(cfg.layer1, key.substr(7), v)) bad_value(key, v);
  } else if (key.starts_with("layer2.")) {
    if (!apply_forest_setting(cfg.layer2, key.substr(7), v)) bad_value(key, v);
  } else if (key.starts_with("flat.")) {
    if (!apply_forest_setting(cfg.flat, key.substr(5), v)) bad_value(key, v);
  } else if (apply_forest_setting(cfg.flat, key, v)) {
    apply_forest_setting(cfg.layer1, key, v);
    apply_forest_setting(cfg.layer2, key, v);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown setting '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void ExperimentConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");
  if (!demo && inputs.empty()) throw Error(ErrorCode::InvalidArgument, "no input files (set inputs or demo)");
  if (impute_on_train_only && resample_before_split)
    throw Error(ErrorCode::InvalidArgument, "impute_fit = train cannot be combined with resample_order = before-split");
  resample.validate();
  flat.validate();
  layer1.validate();
  layer2.validate();
  taxonomy.validate();
}

namespace {

json forest_json(const ForestParams& p) {
  return {{"trees", p.n_estimators},
          {"max_features", to_string(p.max_features)},
          {"criterion", to_string(p.criterion)},
          {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
          {"min_samples_split", p.min_samples_split},
          {"bootstrap", p.bootstrap}};
}

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
  json inputs = json::array();
  for (const auto& p : cfg.inputs) inputs.push_back(p.string());
  json groups = json::array();
  for (const auto& g : cfg.phasor_groups) groups.push_back({g.v_mag, g.v_angle, g.i_mag, g.i_angle, g.s_mag, g.s_angle});
  return {
      {"inputs", inputs},
      {"demo", cfg.demo},
      {"demo_config",
       {{"majority_rows", cfg.demo_config.majority_rows},
        {"imbalance", cfg.demo_config.imbalance},
        {"separation", cfg.demo_config.separation},
        {"missing_rate", cfg.demo_config.missing_rate},
        {"seed", cfg.demo_config.seed}}},
      {"label_column", cfg.label_column},
      {"natural_labels", cfg.taxonomy.natural_labels},
      {"attack_labels", cfg.taxonomy.attack_labels},
      {"drop_logs", cfg.drop_logs},
      {"drop_list", cfg.drop_list},
      {"apparent_power", cfg.apparent_power},
      {"phasor_groups", groups},
      {"imputation", to_string(cfg.imputation)},
      {"impute_fit", cfg.impute_on_train_only ? "train" : "full"},
      {"scaler", to_string(cfg.scaler)},
      {"scale_order", cfg.scale_before_resample ? "before-resample" : "after-resample"},
      {"resample_order", cfg.resample_before_split ? "before-split" : "after-split"},
      {"resampler", to_string(cfg.resample.method)},
      {"k_neighbors", cfg.resample.k_neighbors},
      {"m_neighbors", cfg.resample.m_neighbors},
      {"target_count", cfg.resample.target_count ? json(*cfg.resample.target_count) : json("majority")},
      {"adasyn_cap", cfg.resample.adasyn_cap},
      {"train_fraction", cfg.train_fraction},
      {"split_mode", cfg.split_mode == SplitMode::Stratified ? "stratified" : "shuffle"},
      {"seed", cfg.seed},
      {"model", to_string(cfg.model)},
      {"flat", forest_json(cfg.flat)},
      {"layer1", forest_json(cfg.layer1)},
      {"layer2", forest_json(cfg.layer2)},
      {"baselines", cfg.baselines},
      {"top_n", cfg.top_n},
      {"out", cfg.out.string()},
      {"model_out", cfg.model_out.string()},
  };
}

// ---- report helpers ---------------------------------------------------------------

namespace {

json metrics_json(const MetricSet& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json counts_json(const ConfusionCounts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}; }

json report_json(const MulticlassReport& r) {
  json per_class = json::array();
  for (const auto& [label, cm] : r.per_class) {
    json row = metrics_json(cm.metrics);
    row["label"] = label;
    row["support"] = cm.support;
    row["counts"] = counts_json(cm.counts);
    per_class.push_back(row);
  }
  return {{"accuracy", r.accuracy},
          {"rows", r.rows},
          {"macro", metrics_json(r.macro)},
          {"weighted", metrics_json(r.weighted)},
          {"per_class", per_class}};
}

json population_json(std::span<const int> labels) {
  json out = json::array();
  for (const auto& [label, n] : class_population(labels).counts) out.push_back({{"label", label}, {"count", n}});
  return out;
}

json importance_json(const std::string& model, const Forest& forest, const FeatureSchema& schema, std::size_t top_n) {
  const auto imp = mdi_importance(forest);
  std::vector<std::size_t> order(imp.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  json ranking = json::array();
  for (std::size_t k = 0; k < std::min(top_n, order.size()); ++k)
    ranking.push_back({{"feature", schema.feature_names[order[k]]}, {"index", order[k]}, {"value", imp[order[k]]}});
  return {{"model", model}, {"ranking", ranking}};
}

double binary_collapsed_accuracy(std::span<const int> pred, std::span<const int> truth, const LabelTaxonomy& tax) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += tax.is_natural(pred[i]) == tax.is_natural(truth[i]);
  return truth.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(truth.size());
}

bool taxonomy_covers(std::span<const int> labels, const LabelTaxonomy& tax) {
  return std::all_of(labels.begin(), labels.end(), [&](int l) { return tax.contains(l); });
}

class StageTimer {
 public:
  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(f())>) {
        f();
        record(name, start);
      } else {
        auto result = f();
        record(name, start);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e);
    } catch (const std::exception& e) {
      throw StageError(name, Error(ErrorCode::InvalidArgument, e.what()));
    }
  }

  json timings() const { return timings_; }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  json timings_ = json::object();
};

struct Seeds {
  std::uint64_t split, resample, flat, layer1, layer2, primary;
};

Seeds derive_seeds(std::uint64_t seed) {
  return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 12),
          derive_seed(seed, 10), derive_seed(seed, 11), derive_seed(seed, 13)};
}

}  // namespace

json report_body(const json& report) {
  json body = report;
  body.erase("timings");
  return body;
}

json run_experiment(const ExperimentConfig& cfg_in) {
  StageTimer timer;
  const ExperimentConfig cfg = timer.run("config", [&] {
    cfg_in.validate();
    return cfg_in;
  });
  const Seeds seeds = derive_seeds(cfg.seed);
  json report;
  report["schema_version"] = 1;
  report["config"] = config_to_json(cfg);
  report["seeds"] = {{"run", cfg.seed},        {"split", seeds.split},   {"resample", seeds.resample},
                     {"flat", seeds.flat},     {"layer1", seeds.layer1}, {"layer2", seeds.layer2},
                     {"primary_default", seeds.primary}};
  json shapes = json::array();
  auto shape = [&](const char* stage, std::size_t rows, std::size_t features) {
    shapes.push_back({{"stage", stage}, {"rows", rows}, {"features", features}});
  };

  const RawDataset raw = timer.run("load", [&] {
    if (cfg.demo) return generate_demo(cfg.demo_config);
    const auto schema = infer_schema(cfg.inputs.front(), cfg.label_column);
    return load_csv(cfg.inputs, schema);
  });
  shape("loaded", raw.rows(), raw.schema.size());

  PipelineSpec pipeline;
  pipeline.input_schema = raw.schema;
  std::optional<SplitIndices> early_split;
  Dataset data = timer.run("impute", [&] {
    const bool train_only = cfg.impute_on_train_only &&
                            (cfg.imputation == ImputePolicy::Mean || cfg.imputation == ImputePolicy::Median);
    if (train_only) {
      early_split = split_indices(raw.labels, cfg.train_fraction, seeds.split, cfg.split_mode);
      pipeline.impute = fit_imputer(raw, cfg.imputation, early_split->train);
    } else {
      pipeline.impute = fit_imputer(raw, cfg.imputation);
    }
    return apply_imputer(pipeline.impute, raw);
  });
  if (early_split && data.rows() != raw.rows()) early_split.reset();
  shape("imputed", data.rows(), data.features());
  json population;
  population["full"] = population_json(data.labels);

  data = timer.run("features", [&] {
    Dataset d = std::move(data);
    if (cfg.drop_logs) {
      pipeline.drop = cfg.drop_list.empty() ? d.schema.names_of_kind(FeatureKind::LogOrStatus) : cfg.drop_list;
      d = drop_features(d, pipeline.drop);
      shape("drop_logs", d.rows(), d.features());
    }
    if (cfg.apparent_power) {
      pipeline.phasor_groups = cfg.phasor_groups.empty() ? power_system_phasor_groups() : cfg.phasor_groups;
      d = derive_apparent_power(d, pipeline.phasor_groups);
      shape("apparent_power", d.rows(), d.features());
    }
    return d;
  });

  ResampleConfig rcfg = cfg.resample;
  rcfg.seed = seeds.resample;

  Dataset train, test;
  timer.run("split", [&] {
    if (cfg.resample_before_split) {
      population["train"] = population_json(data.labels);
      data = resample(data, rcfg);
      population["resampled"] = population_json(data.labels);
      shape("resampled", data.rows(), data.features());
    }
    const auto idx = early_split ? *early_split : split_indices(data.labels, cfg.train_fraction, seeds.split, cfg.split_mode);
    train = data.select_rows(idx.train);
    test = data.select_rows(idx.test);
  });
  shape("train", train.rows(), train.features());
  shape("test", test.rows(), test.features());

  timer.run("scale_resample", [&] {
    if (cfg.resample_before_split) {
      pipeline.scaler = fit_scaler(train, cfg.scaler);
      train = apply_scaler(pipeline.scaler, train);
      return;
    }
    population["train"] = population_json(train.labels);
    if (cfg.scale_before_resample) {
      pipeline.scaler = fit_scaler(train, cfg.scaler);
      train = apply_scaler(pipeline.scaler, train);
      train = resample(train, rcfg);
    } else {
      train = resample(train, rcfg);
      pipeline.scaler = fit_scaler(train, cfg.scaler);
      train = apply_scaler(pipeline.scaler, train);
    }
    population["resampled"] = population_json(train.labels);
    shape("resampled", train.rows(), train.features());
  });
  test = apply_scaler(pipeline.scaler, test);
  report["class_population"] = population;
  report["shapes"] = shapes;
  pipeline.feature_names = train.schema.feature_names;

  const auto& tax = cfg.taxonomy;
  const bool want_h = cfg.model == ModelChoice::Hierarchical || cfg.baselines;
  const bool want_f = cfg.model == ModelChoice::Flat || cfg.baselines;
  const bool want_p = cfg.model == ModelChoice::PrimaryDefault || cfg.baselines;
  const bool covered = taxonomy_covers(train.labels, tax) && taxonomy_covers(test.labels, tax);
  if (cfg.model == ModelChoice::Hierarchical && !covered)
    throw StageError("train", Error(ErrorCode::UnknownLabel, "dataset labels are not covered by the taxonomy"));

  json models = json::array();
  json importance = json::array();
  std::vector<int> test_universe = label_universe(test.labels);
  {
    auto u = label_universe(train.labels);
    test_universe.insert(test_universe.end(), u.begin(), u.end());
    test_universe = label_universe(test_universe);
  }

  if (want_h && covered) {
    ForestParams p1 = cfg.layer1, p2 = cfg.layer2;
    p1.seed = seeds.layer1;
    p2.seed = seeds.layer2;
    const auto model = timer.run("train_hierarchical", [&] { return train_hierarchical(train, tax, p1, p2); });
    const auto eval = timer.run("evaluate_hierarchical", [&] { return evaluate_hierarchical(model, test); });
    models.push_back({{"name", "hierarchical"},
                      {"accuracy", eval.overall_accuracy},
                      {"binary_accuracy", eval.layer1.accuracy},
                      {"attack_accuracy", eval.attack_accuracy},
                      {"natural_accuracy", eval.natural_accuracy}});
    importance.push_back(importance_json("layer1", model.layer1, train.schema, cfg.top_n));
    importance.push_back(importance_json("layer2", model.layer2, train.schema, cfg.top_n));
    json l2 = {{"routed_rows_count", eval.routed_to_layer2}};
    l2["attack_rows"] = eval.layer2_attack_rows ? report_json(*eval.layer2_attack_rows) : json(nullptr);
    l2["routed_rows"] = eval.layer2_routed_rows ? report_json(*eval.layer2_routed_rows) : json(nullptr);
    report["layer1"] = {{"accuracy", eval.layer1.accuracy},
                        {"natural_counts", counts_json(eval.layer1_natural_counts)},
                        {"natural_metrics", metrics_json(metric_set(eval.layer1_natural_counts))},
                        {"report", report_json(eval.layer1)}};
    report["layer2"] = l2;
    if (cfg.model == ModelChoice::Hierarchical) {
      report["overall"] = {{"model", "hierarchical"},
                           {"accuracy", eval.overall_accuracy},
                           {"natural_class_label", kNaturalClass},
                           {"report", report_json(eval.joint)}};
      if (!cfg.model_out.empty())
        timer.run("save_model", [&] {
          save_hierarchical(cfg.model_out, model);
          save_pipeline(pipeline_path(cfg.model_out), pipeline);
        });
    }
  }

  auto run_flat = [&](const std::string& name, ForestParams params, bool primary) {
    const auto forest = timer.run("train_" + name, [&] { return train_forest(train, params); });
    const auto pred = timer.run("evaluate_" + name, [&] { return forest.predict_batch(test.values); });
    const auto rep = multiclass_report(pred, test.labels, test_universe);
    json entry = {{"name", name}, {"accuracy", rep.accuracy}};
    entry["binary_accuracy"] = covered ? json(binary_collapsed_accuracy(pred, test.labels, tax)) : json(nullptr);
    models.push_back(entry);
    importance.push_back(importance_json(name, forest, train.schema, cfg.top_n));
    if (primary) {
      report["overall"] = {{"model", name}, {"accuracy", rep.accuracy}, {"report", report_json(rep)}};
      if (!cfg.model_out.empty())
        timer.run("save_model", [&] {
          save_forest(cfg.model_out, forest);
          save_pipeline(pipeline_path(cfg.model_out), pipeline);
        });
    }
  };
  if (want_f) {
    ForestParams p = cfg.flat;
    p.seed = seeds.flat;
    run_flat("flat", p, cfg.model == ModelChoice::Flat);
  }
  if (want_p) {
    ForestParams p = ForestParams::primary_default();
    p.seed = seeds.primary;
    run_flat("primary-default", p, cfg.model == ModelChoice::PrimaryDefault);
  }

  report["models"] = models;
  report["primary_model"] = to_string(cfg.model);
  report["importance"] = importance;
  report["timings"] = timer.timings();

  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) throw StageError("report", Error(ErrorCode::Io, "cannot write '" + cfg.out.string() + "'"));
    out << report.dump(2) << '\n';
  }
  return report;
}

// ---- sweep -------------------------------------------------------------------------

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::Imputation, SweepAxis::Resampler, SweepAxis::Scaler, SweepAxis::MaxFeatures,
                 SweepAxis::Criterion, SweepAxis::NEstimators, SweepAxis::FeatureSet})
    if (to_string(a) == name) return a;
  throw Error(ErrorCode::InvalidArgument, "unknown sweep axis '" + std::string(name) + "'");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Imputation: return "imputation";
    case SweepAxis::Resampler: return "resampler";
    case SweepAxis::Scaler: return "scaler";
    case SweepAxis::MaxFeatures: return "max_features";
    case SweepAxis::Criterion: return "criterion";
    case SweepAxis::NEstimators: return "n_estimators";
    case SweepAxis::FeatureSet: return "feature_set";
  }
  return "imputation";
}

namespace {

std::string_view setting_key(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::NEstimators: return "trees";
    default: return to_string(axis);
  }
}

}  // namespace

json sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<std::string>& values) {
  json rows = json::array();
  for (const auto& value : values) {
    json row = {{"value", value}};
    const auto start = std::chrono::steady_clock::now();
    try {
      ExperimentConfig c = cfg;
      c.out.clear();
      c.model_out.clear();
      apply_setting(c, setting_key(axis), value);
      const auto report = run_experiment(c);
      row["ok"] = true;
      row["accuracy"] = report["overall"]["accuracy"];
      row["layer1_accuracy"] = report.contains("layer1") ? report["layer1"]["accuracy"] : json(nullptr);
      row["models"] = report["models"];
    } catch (const std::exception& e) {
      row["ok"] = false;
      row["error"] = e.what();
    }
    row["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return {{"axis", to_string(axis)}, {"config", config_to_json(cfg)}, {"rows", rows}};
}

std::string sweep_table(const json& result) {
  std::ostringstream out;
  out << result.at("axis").get<std::string>() << "\taccuracy\tlayer1_accuracy\tseconds\terror\n";
  for (const auto& row : result.at("rows")) {
    out << row.at("value").get<std::string>() << '\t';
    if (row.at("ok").get<bool>()) {
      out << row.at("accuracy").get<double>() << '\t';
      if (row.at("layer1_accuracy").is_null()) out << "-";
      else out << row.at("layer1_accuracy").get<double>();
      out << '\t' << row.at("seconds").get<double>() << "\t-\n";
    } else {
      out << "-\t-\t" << row.at("seconds").get<double>() << '\t' << row.at("error").get<std::string>() << '\n';
    }
  }
  return out.str();
}

// ---- plot data -----------------------------------------------------------------------

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "class_population") return PlotKind::ClassPopulation;
  if (name == "importance_topN" || name == "importance") return PlotKind::ImportanceTopN;
  if (name == "model_comparison") return PlotKind::ModelComparison;
  throw Error(ErrorCode::InvalidArgument, "unknown plot kind '" + std::string(name) + "'");
}

std::string emit_plot_data(const json& report, PlotKind kind, const PlotOptions& options) {
  std::ostringstream out;
  out.precision(17);
  auto missing = [](const std::string& what) { return Error(ErrorCode::MissingSection, "report has no " + what); };
  switch (kind) {
    case PlotKind::ClassPopulation: {
      if (!report.contains("class_population") || !report["class_population"].contains(options.population_stage))
        throw missing("class_population." + options.population_stage);
      std::vector<std::pair<int, std::uint64_t>> rows;
      for (const auto& e : report["class_population"][options.population_stage])
        rows.emplace_back(e.at("label").get<int>(), e.at("count").get<std::uint64_t>());
      std::sort(rows.begin(), rows.end());
      out << "class,count\n";
      for (const auto& [label, n] : rows) out << label << ',' << n << '\n';
      break;
    }
    case PlotKind::ImportanceTopN: {
      if (!report.contains("importance") || report["importance"].empty()) throw missing("importance");
      const json* section = nullptr;
      for (const auto& e : report["importance"])
        if (options.importance_model.empty() || e.at("model") == options.importance_model) {
          section = &e;
          break;
        }
      if (!section) throw missing("importance for model '" + options.importance_model + "'");
      std::vector<std::pair<std::string, double>> rows;
      for (const auto& r : section->at("ranking")) rows.emplace_back(r.at("feature"), r.at("value"));
      std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      if (options.top_n && rows.size() > *options.top_n) rows.resize(*options.top_n);
      out << "feature,importance\n";
      for (const auto& [name, v] : rows) out << name << ',' << v << '\n';
      break;
    }
    case PlotKind::ModelComparison: {
      if (!report.contains("models") || report["models"].empty()) throw missing("models");
      out << "model,accuracy\n";
      for (const auto& m : report["models"]) out << m.at("name").get<std::string>() << ',' << m.at("accuracy").get<double>() << '\n';
      break;
    }
  }
  return out.str();
}

}  // namespace gridids
