// Command-line front end: run, sweep, plotdata, gen-demo, train, predict.

#include <fstream>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridids/demo.hpp"
#include "gridids/error.hpp"
#include "gridids/experiment.hpp"
#include "gridids/hierarchy.hpp"
#include "gridids/metrics.hpp"
#include "gridids/pipeline.hpp"
#include "gridids/serialize.hpp"

namespace {

using namespace gridids;

struct Overrides {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::string> inputs;
  bool demo = false;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string model;
  std::string resampler;
  std::string imputation;
  std::string scaler;
  std::optional<std::size_t> trees;
  std::string max_features;
  std::string criterion;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "key = value config file");
    app->add_option("--set", sets, "extra key=value setting, applied after the config file");
    app->add_option("-i,--input", inputs, "input CSV file(s)");
    app->add_flag("--demo", demo, "use the synthetic demo dataset instead of input files");
    app->add_option("--seed", seed, "master seed");
    app->add_option("-o,--out", out, "report path");
    app->add_option("--model", model, "flat | hierarchical | primary-default");
    app->add_option("--resampler", resampler, "none | ros | smote | borderline-smote | adasyn");
    app->add_option("--imputation", imputation, "mean | median | drop | zero");
    app->add_option("--scaler", scaler, "none | standard | mean-normalization | minmax");
    app->add_option("--trees", trees, "trees per forest");
    app->add_option("--max-features", max_features, "sqrt | log2 | all");
    app->add_option("--criterion", criterion, "gini | entropy");
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (!config.empty()) cfg = load_config(config);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--set expects key=value, got '" + s + "'");
      apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!inputs.empty()) {
      cfg.inputs.assign(inputs.begin(), inputs.end());
      cfg.demo = false;
    }
    if (demo) cfg.demo = true;
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out = out;
    if (!model.empty()) apply_setting(cfg, "model", model);
    if (!resampler.empty()) apply_setting(cfg, "resampler", resampler);
    if (!imputation.empty()) apply_setting(cfg, "imputation", imputation);
    if (!scaler.empty()) apply_setting(cfg, "scaler", scaler);
    if (trees) apply_setting(cfg, "trees", std::to_string(*trees));
    if (!max_features.empty()) apply_setting(cfg, "max_features", max_features);
    if (!criterion.empty()) apply_setting(cfg, "criterion", criterion);
    return cfg;
  }
};

void print_summary(const nlohmann::json& report) {
  std::cout << "model\taccuracy\tbinary_accuracy\n";
  for (const auto& m : report["models"]) {
    std::cout << m["name"].get<std::string>() << '\t' << m["accuracy"].get<double>() << '\t';
    if (m["binary_accuracy"].is_null()) std::cout << "-";
    else std::cout << m["binary_accuracy"].get<double>();
    std::cout << '\n';
  }
  std::cout << "primary: " << report["overall"]["model"].get<std::string>()
            << " accuracy " << report["overall"]["accuracy"].get<double>() << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
}

int predict(const std::string& model_path, const std::vector<std::string>& inputs, const std::string& out_path) {
  const auto spec = load_pipeline(pipeline_path(model_path));
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  const auto data = prepare(spec, load_csv(paths, spec.input_schema));

  std::vector<int> pred;
  std::vector<int> truth;
  if (model_kind(model_path) == ModelKind::Hierarchical) {
    const auto model = load_hierarchical(model_path);
    for (const auto& v : predict_hierarchical_batch(model, data.values)) pred.push_back(verdict_label(v));
    for (int l : data.labels) truth.push_back(model.taxonomy.contains(l) ? collapse_label(l, model.taxonomy) : l);
  } else {
    pred = load_forest(model_path).predict_batch(data.values);
    truth = data.labels;
  }
  std::ostringstream csv;
  csv << "row,prediction," << spec.input_schema.label_column << '\n';
  for (std::size_t i = 0; i < pred.size(); ++i) csv << i << ',' << pred[i] << ',' << data.labels[i] << '\n';
  write_text(out_path, csv.str());
  std::cerr << "rows " << pred.size() << " accuracy " << accuracy(pred, truth) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical random-forest intrusion detection for PMU records"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "run the full pipeline and write a JSON report");
  run_opts.attach(run);
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "do not print the summary");

  Overrides train_opts;
  std::string model_out;
  auto* train = app.add_subcommand("train", "run the pipeline and persist the primary model");
  train_opts.attach(train);
  train->add_option("--model-out", model_out, "model file")->required();

  Overrides sweep_opts;
  std::string axis;
  std::vector<std::string> values;
  std::string table_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "vary one setting and tabulate accuracy");
  sweep_opts.attach(sweep_cmd);
  sweep_cmd->add_option("--axis", axis, "imputation | resampler | scaler | max_features | criterion | n_estimators | feature_set")
      ->required();
  sweep_cmd->add_option("--values", values, "values to try")->required()->delimiter(',');
  sweep_cmd->add_option("--table", table_out, "also write the table here");

  std::string report_path, kind, plot_out, stage = "full", importance_model;
  std::optional<std::size_t> top_n;
  auto* plot = app.add_subcommand("plotdata", "emit plot-ready CSV from a report");
  plot->add_option("--report", report_path, "report JSON")->required();
  plot->add_option("--kind", kind, "class_population | importance_topN | model_comparison")->required();
  plot->add_option("--stage", stage, "population stage: full | train | resampled");
  plot->add_option("--importance-model", importance_model, "model whose importances to emit");
  plot->add_option("--top-n", top_n, "keep the first N features");
  plot->add_option("-o,--out", plot_out, "output CSV (default stdout)");

  DemoConfig demo_cfg;
  std::string demo_out;
  auto* gen = app.add_subcommand("gen-demo", "write the synthetic demo dataset as CSV");
  gen->add_option("-o,--out", demo_out, "output CSV")->required();
  gen->add_option("--rows", demo_cfg.majority_rows, "rows of the largest class");
  gen->add_option("--imbalance", demo_cfg.imbalance, "largest / smallest class size");
  gen->add_option("--separation", demo_cfg.separation, "class-center offset in noise units");
  gen->add_option("--missing-rate", demo_cfg.missing_rate, "fraction of cells left missing");
  gen->add_option("--seed", demo_cfg.seed, "generator seed");

  std::string predict_model, predict_out;
  std::vector<std::string> predict_inputs;
  auto* pred = app.add_subcommand("predict", "score CSV rows with a saved model");
  pred->add_option("--model", predict_model, "model file written by train")->required();
  pred->add_option("-i,--input", predict_inputs, "input CSV file(s)")->required();
  pred->add_option("-o,--out", predict_out, "predictions CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto report = run_experiment(run_opts.build());
      if (!quiet) print_summary(report);
    } else if (train->parsed()) {
      auto cfg = train_opts.build();
      cfg.model_out = model_out;
      print_summary(run_experiment(cfg));
      std::cout << "model written to " << model_out << '\n';
    } else if (sweep_cmd->parsed()) {
      auto cfg = sweep_opts.build();
      const auto out = cfg.out;
      const auto result = sweep(cfg, parse_sweep_axis(axis), values);
      const auto table = sweep_table(result);
      std::cout << table;
      if (!table_out.empty()) write_text(table_out, table);
      if (!out.empty()) write_text(out.string(), result.dump(2) + "\n");
    } else if (plot->parsed()) {
      PlotOptions options;
      options.population_stage = stage;
      options.importance_model = importance_model;
      options.top_n = top_n;
      write_text(plot_out, emit_plot_data(read_json(report_path), parse_plot_kind(kind), options));
    } else if (gen->parsed()) {
      write_csv(demo_out, generate_demo(demo_cfg));
    } else if (pred->parsed()) {
      return predict(predict_model, predict_inputs, predict_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
