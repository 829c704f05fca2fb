#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "deckmotion/evaluate.hpp"
#include "deckmotion/restperiod.hpp"
#include "deckmotion/series.hpp"
#include "deckmotion/svg.hpp"
#include "deckmotion/train.hpp"
#include "deckmotion/wavegen.hpp"

namespace deckmotion::cli {

namespace fs = std::filesystem;

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_readable(const std::string& path) {
  if (!fs::is_regular_file(path)) throw IoFailure("input file not found: " + path);
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read " + path);
}

void require_output_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw IoFailure("output directory does not exist: " + parent.string());
  if (fs::is_directory(path)) throw IoFailure("output path is a directory: " + path);
}

// Collects every output in memory and writes them together; on any failure
// the files already written are removed.
class OutputSet {
 public:
  void add(std::string path, std::string content) {
    files_.push_back({std::move(path), std::move(content)});
  }

  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, content] : files_) {
        const fs::path p(path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot write " + path);
        written.push_back(p);
        out << content;
        out.close();
        if (!out) throw IoFailure("failed writing " + path);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Globals {
  std::uint64_t seed = 0;
  double dt = 0.1;
  bool quiet = false;
};

struct SimulateArgs {
  std::string model = "knox";
  std::string spec_file;
  std::string model_file;
  std::size_t n = 2000;
  std::string out;
  std::string save_model;
  bool random_phases = false;
};

struct TrainArgs {
  std::string data;
  std::size_t lookback = 40;
  double split = 0.7;
  int hidden = 64;
  int epochs = 200;
  int batch = 32;
  double lr = 1e-3;
  std::string optimizer = "adam";
  std::string out;
  std::string report;
  bool record_timing = false;
};

struct ForecastArgs {
  std::string model;
  std::string data;
  std::optional<std::size_t> start_index;
  bool renormalize = false;
};

struct PredictArgs {
  ForecastArgs f;
  std::string out;
};

struct EvaluateArgs {
  ForecastArgs f;
  std::string out_csv;
  std::string out_json;
  std::string svg_dir;
};

struct RestArgs {
  ForecastArgs f;
  double pitch_max = 0.5;
  double roll_max = 3.0;
  std::optional<double> heave_rate_max;
  double min_duration = 0.0;
  bool on_truth = false;
  std::string out;
  std::string out_json;
};

struct PlotArgs {
  std::string input;
  std::string out_dir;
};

void add_forecast_options(CLI::App* sub, ForecastArgs& f, bool model_required) {
  auto* m = sub->add_option("--model", f.model, "Trained model JSON");
  if (model_required) m->required();
  sub->add_option("--data", f.data, "Series CSV (t,heave,pitch,roll)")->required();
  sub->add_option("--start-index", f.start_index,
                  "First predicted index (default: the model's lookback)");
  sub->add_flag("--renormalize", f.renormalize,
                "Normalize with statistics of the whole input series instead of the model's "
                "stored training normalizer");
}

MotionSeries load_series(const std::string& path, const Globals& g) {
  return series_from_csv(read_file(path), g.dt);
}

ForecastResult run_forecast(const ForecastArgs& f, const ModelArtifact& art,
                            const MotionSeries& series) {
  const std::size_t start = f.start_index.value_or(static_cast<std::size_t>(art.config.lookback));
  const Normalizer norm =
      f.renormalize ? fit_normalizer(series, series.size()) : art.normalizer;
  return predict_series(art.params, norm, series, start);
}

void log(const Globals& g, std::ostream& err, const std::string& msg) {
  if (!g.quiet) err << msg << '\n';
}

int do_simulate(const SimulateArgs& a, const Globals& g, std::ostream& err) {
  if (!a.spec_file.empty()) require_readable(a.spec_file);
  if (!a.model_file.empty()) require_readable(a.model_file);
  require_output_dir(a.out);
  if (!a.save_model.empty()) require_output_dir(a.save_model);

  WaveModel model;
  if (!a.model_file.empty()) {
    model = wave_model_from_json(nlohmann::json::parse(read_file(a.model_file)));
  } else if (a.model == "knox") {
    model = knox_training_model();
  } else if (a.model == "seastate5") {
    model = sea_state5_reference_model();
  } else {
    const SeaStateSpec spec =
        a.spec_file.empty()
            ? sea_state5_spec()
            : sea_state_spec_from_json(nlohmann::json::parse(read_file(a.spec_file)));
    model = random_sea_state_model(spec, g.seed, a.random_phases);
  }
  const MotionSeries series = sample_series(model, a.n, g.dt);

  OutputSet outputs;
  outputs.add(a.out, series_to_csv(series));
  if (!a.save_model.empty()) outputs.add(a.save_model, to_json(model).dump(2) + "\n");
  outputs.commit();
  log(g, err, "wrote " + std::to_string(series.size()) + " samples of model '" + model.label +
                  "' to " + a.out);
  return kOk;
}

int do_train(const TrainArgs& a, const Globals& g, std::ostream& err) {
  require_readable(a.data);
  require_output_dir(a.out);
  if (!a.report.empty()) require_output_dir(a.report);

  const MotionSeries series = load_series(a.data, g);
  if (series.size() < a.lookback + 2)
    throw InvalidSeries("training needs at least lookback + 2 samples");

  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.optimizer = a.optimizer == "sgd" ? Optimizer::sgd : Optimizer::adam;
  cfg.shuffle_seed = g.seed;
  cfg.hidden_dim = a.hidden;
  cfg.lookback = static_cast<int>(a.lookback);
  cfg.validate();

  const PreparedData data = prepare_training_data(series, a.lookback, a.split);
  log(g, err,
      "training on " + std::to_string(data.split.train.size()) + " windows, testing on " +
          std::to_string(data.split.test.size()) + " (boundary index " +
          std::to_string(data.split.boundary_index) + ")");

  EpochCallback progress;
  if (!g.quiet) {
    progress = [&](int epoch, double loss) {
      if ((epoch + 1) % 10 == 0 || epoch == 0 || epoch + 1 == cfg.epochs)
        err << "epoch " << (epoch + 1) << "/" << cfg.epochs << " loss " << format_double(loss)
            << '\n';
    };
  }
  TrainResult result = train(data.split, data.normalizer, cfg, g.seed, progress);
  result.artifact.provenance =
      "data=" + fs::path(a.data).filename().string() + " " + result.artifact.provenance;

  OutputSet outputs;
  outputs.add(a.out, to_json(result.artifact).dump(1) + "\n");
  if (!a.report.empty())
    outputs.add(a.report, to_json(result.report, a.record_timing).dump(2) + "\n");
  outputs.commit();
  log(g, err, "final test loss " + format_double(result.report.final_test_loss) + ", model written to " + a.out);
  return kOk;
}

int do_predict(const PredictArgs& a, const Globals& g, std::ostream& err) {
  require_readable(a.f.model);
  require_readable(a.f.data);
  require_output_dir(a.out);
  const ModelArtifact art = load_model(a.f.model);
  const MotionSeries series = load_series(a.f.data, g);
  const ForecastResult r = run_forecast(a.f, art, series);

  OutputSet outputs;
  outputs.add(a.out, series_to_csv(predictions_as_series(r, series.dt, series.t0)));
  outputs.commit();
  log(g, err, "wrote " + std::to_string(r.size()) + " predictions to " + a.out);
  return kOk;
}

int do_evaluate(const EvaluateArgs& a, const Globals& g, std::ostream& err) {
  require_readable(a.f.model);
  require_readable(a.f.data);
  require_output_dir(a.out_csv);
  require_output_dir(a.out_json);
  const ModelArtifact art = load_model(a.f.model);
  const MotionSeries series = load_series(a.f.data, g);
  const ForecastResult r = run_forecast(a.f, art, series);
  const ErrorReport rep = error_report(r);

  OutputSet outputs;
  outputs.add(a.out_csv, errors_to_csv(r, rep, series.dt, series.t0));
  outputs.add(a.out_json, summary_json(rep).dump(2) + "\n");
  if (!a.svg_dir.empty()) {
    std::vector<double> times;
    for (std::size_t j : r.target_indices) times.push_back(series.time(j));
    for (auto& plot : forecast_plots(times, r, rep))
      outputs.add((fs::path(a.svg_dir) / plot.file_name).string(), std::move(plot.svg));
  }
  outputs.commit();
  for (Channel ch : kChannels)
    log(g, err, std::string(channel_name(ch)) + " mae " + format_double(rep[ch].mae) + " max " +
                    format_double(rep[ch].max_error));
  return kOk;
}

int do_rest(const RestArgs& a, const Globals& g, std::ostream& err) {
  if (!a.on_truth) {
    if (a.f.model.empty()) throw CLI::RequiredError("--model (or pass --truth)");
    require_readable(a.f.model);
  }
  require_readable(a.f.data);
  require_output_dir(a.out);
  if (!a.out_json.empty()) require_output_dir(a.out_json);

  RestCriteria crit;
  crit.pitch_max = a.pitch_max;
  crit.roll_max = a.roll_max;
  crit.heave_rate_max = a.heave_rate_max;
  crit.min_duration = a.min_duration;
  crit.validate();

  const MotionSeries series = load_series(a.f.data, g);
  std::vector<RestInterval> intervals;
  if (a.on_truth) {
    intervals = detect_rest_periods(series, crit);
  } else {
    const ModelArtifact art = load_model(a.f.model);
    const ForecastResult r = run_forecast(a.f, art, series);
    intervals = rest_periods_from_forecast(r, series.dt, crit, series.t0);
  }

  OutputSet outputs;
  outputs.add(a.out, intervals_to_csv(intervals));
  if (!a.out_json.empty()) outputs.add(a.out_json, intervals_to_json(intervals, crit).dump(2) + "\n");
  outputs.commit();
  log(g, err, "found " + std::to_string(intervals.size()) + " rest periods");
  return kOk;
}

int do_plot(const PlotArgs& a, const Globals& g, std::ostream& err) {
  require_readable(a.input);
  if (fs::exists(a.out_dir) && !fs::is_directory(a.out_dir))
    throw IoFailure("output path is not a directory: " + a.out_dir);
  const std::string text = read_file(a.input);
  std::vector<NamedSvg> plots;
  if (text.rfind("t,channel,", 0) == 0) {
    const ForecastTable table = forecast_from_errors_csv(text);
    plots = forecast_plots(table.times, table.result, error_report(table.result));
  } else {
    plots = series_plots(series_from_csv(text, g.dt));
  }
  OutputSet outputs;
  for (auto& p : plots) outputs.add((fs::path(a.out_dir) / p.file_name).string(), std::move(p.svg));
  outputs.commit();
  log(g, err, "wrote " + std::to_string(plots.size()) + " plots to " + a.out_dir);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ship deck motion simulation, LSTM prediction and rest-period detection",
               "deckmotion"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--dt", g.dt, "Sampling interval in seconds")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Sample a sine-superposition model into a series CSV");
  s->add_option("--model", sim.model, "Built-in model")
      ->capture_default_str()
      ->check(CLI::IsMember({"knox", "seastate5", "random"}));
  s->add_option("--spec-file", sim.spec_file,
                "Sea-state envelope JSON for --model random (default: sea state 5 table)");
  s->add_option("--model-file", sim.model_file, "Wave model JSON to sample instead of a built-in");
  s->add_option("--n", sim.n, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
  s->add_option("--out", sim.out, "Output series CSV")->required();
  s->add_option("--save-model", sim.save_model, "Also write the wave model JSON here");
  s->add_flag("--random-phases", sim.random_phases,
              "Draw phases uniformly in [0, 2pi) for --model random");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the composite LSTM on a series CSV");
  t->add_option("--data", tr.data, "Series CSV")->required();
  t->add_option("--lookback", tr.lookback, "Window length")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--split", tr.split, "Training fraction of the series")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  t->add_option("--hidden", tr.hidden, "Hidden units")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--batch", tr.batch, "Mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--lr", tr.lr, "Learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
  t->add_option("--optimizer", tr.optimizer, "Optimizer")
      ->capture_default_str()
      ->check(CLI::IsMember({"adam", "sgd"}));
  t->add_option("--out", tr.out, "Output model JSON")->required();
  t->add_option("--report", tr.report, "Output training report JSON");
  t->add_flag("--record-timing", tr.record_timing,
              "Include wall-clock time in the report (makes it non-reproducible)");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "One-step-ahead predictions as a series CSV");
  add_forecast_options(p, pr.f, true);
  p->add_option("--out", pr.out, "Output predictions CSV")->required();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Absolute-error curves and MAE of one-step predictions");
  add_forecast_options(e, ev.f, true);
  e->add_option("--out-csv", ev.out_csv, "Error CSV (t,channel,truth,prediction,abs_error)")->required();
  e->add_option("--out-json", ev.out_json, "Per-channel summary JSON")->required();
  e->add_option("--svg", ev.svg_dir, "Directory for SVG plots");

  RestArgs rs;
  auto* r = app.add_subcommand("rest", "Detect rest periods in forecast (or observed) motion");
  add_forecast_options(r, rs.f, false);
  r->add_option("--pitch-max", rs.pitch_max, "Max |pitch|")->required()->check(CLI::PositiveNumber);
  r->add_option("--roll-max", rs.roll_max, "Max |roll|")->required()->check(CLI::PositiveNumber);
  r->add_option("--heave-rate-max", rs.heave_rate_max, "Max |heave rate| (optional)")
      ->check(CLI::PositiveNumber);
  r->add_option("--min-duration", rs.min_duration, "Minimum interval duration in seconds")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  r->add_flag("--truth", rs.on_truth, "Use the observed series instead of the forecast");
  r->add_option("--out", rs.out, "Output intervals CSV (start_t,end_t,duration)")->required();
  r->add_option("--out-json", rs.out_json, "Output intervals JSON");

  PlotArgs pl;
  auto* q = app.add_subcommand("plot", "Render SVG plots from a series CSV or an error CSV");
  q->add_option("--input", pl.input, "Series CSV or error CSV")->required();
  q->add_option("--out", pl.out_dir, "Output directory")->required();

  for (CLI::App* sub : {s, t, p, e, r, q})
    sub->footer(
        "Global options:\n"
        "  --seed UINT    Seed for every random draw (default: 0)\n"
        "  --dt FLOAT     Sampling interval in seconds (default: 0.1)\n"
        "  --quiet        Suppress progress messages");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    out << app.help("", CLI::AppFormatMode::Normal);
    (void)ex;
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    // Subcommand help is reported through the parse error path.
    if (ex.get_exit_code() == 0) {
      CLI::App* target = &app;
      for (CLI::App* sub : app.get_subcommands()) target = sub;
      out << target->help();
      return kOk;
    }
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }

  try {
    if (*s) return do_simulate(sim, g, err);
    if (*t) return do_train(tr, g, err);
    if (*p) return do_predict(pr, g, err);
    if (*e) return do_evaluate(ev, g, err);
    if (*r) return do_rest(rs, g, err);
    if (*q) return do_plot(pl, g, err);
  } catch (const TrainingDiverged& ex) {
    err << "error: " << ex.what() << "\n";
    return kDiverged;
  } catch (const IoFailure& ex) {
    err << "error: " << ex.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kIoError;
  } catch (const CLI::Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const std::runtime_error& ex) {
    // Model files that cannot be opened surface as runtime_error from load_model.
    err << "error: " << ex.what() << "\n";
    return dynamic_cast<const ModelFileError*>(&ex) ? kBadInput : kIoError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kBadInput;
  }
  return kUsage;
}

}  // namespace deckmotion::cli
