// Copyright 2026 The RolFor Authors
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

// rolfor: data generation, training, evaluation, probes and plots on top of
// the C API.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rolfor/rolfor.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Failure carrying the process exit code.
struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void usage_error(const std::string& message) { throw CliError{kExitUsage, message}; }

void check(rolfor_status status, const char* what) {
  if (status == ROLFOR_OK) return;
  const bool usage = status == ROLFOR_ERR_CONFIG || status == ROLFOR_ERR_INVALID_ARGUMENT;
  throw CliError{usage ? kExitUsage : kExitRuntime, std::string(what) + ": " + rolfor_last_error()};
}

std::string take_string(char* text) {
  std::string out = text ? text : "";
  rolfor_free_string(text);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw CliError{kExitRuntime, "cannot write '" + path.string() + "'"};
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) usage_error(std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) usage_error(std::string(what) + " '" + path + "' does not exist");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string git_describe() {
  std::string out;
  if (FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r")) {
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out.empty() ? "unknown" : out;
}

std::string invocation_id() {
  std::random_device rd;
  const auto now = std::chrono::system_clock::now().time_since_epoch().count();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08x%08x-%016llx", rd(), rd(), static_cast<unsigned long long>(now));
  return buf;
}

// Run manifest, written before any compute and rewritten when the command ends.
class Manifest {
 public:
  Manifest(fs::path out_dir, std::string command, std::string run_id, json config)
      : path_(out_dir / "manifest.json") {
    fs::create_directories(out_dir);
    doc_["run_id"] = std::move(run_id);
    doc_["invocation_id"] = invocation_id();
    doc_["command"] = std::move(command);
    doc_["config"] = std::move(config);
    doc_["git_describe"] = git_describe();
    doc_["started_at"] = utc_now();
    doc_["finished_at"] = nullptr;
    doc_["status"] = "running";
    doc_["outputs"] = json::array();
    flush();
  }

  void output(const fs::path& p) { doc_["outputs"].push_back(p.string()); }

  void finish(const std::string& status) {
    doc_["finished_at"] = utc_now();
    doc_["status"] = status;
    flush();
  }

 private:
  void flush() { write_text(path_, doc_.dump(2) + "\n"); }

  fs::path path_;
  json doc_;
};

void log_line(const char* line, void*) { std::cerr << line << '\n'; }

struct Dataset {
  rolfor_dataset* ptr = nullptr;
  Dataset() = default;
  explicit Dataset(const std::string& path) { check(rolfor_dataset_load(path.c_str(), &ptr), "loading dataset"); }
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
  ~Dataset() { rolfor_dataset_free(ptr); }
  std::size_t size() const {
    std::size_t n = 0;
    check(rolfor_dataset_size(ptr, &n), "dataset size");
    return n;
  }
};

struct Model {
  rolfor_model* ptr = nullptr;
  Model() = default;
  explicit Model(const std::string& path) { check(rolfor_model_load(path.c_str(), &ptr), "loading checkpoint"); }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  ~Model() { rolfor_model_free(ptr); }
  json config() const {
    char* text = nullptr;
    check(rolfor_model_config(ptr, &text), "reading model config");
    return json::parse(take_string(text));
  }
};

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') usage_error("not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const int lo = std::stoi(item.substr(0, dash)), hi = std::stoi(item.substr(dash + 1));
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(std::stoi(item));
      }
    } catch (const std::exception&) {
      usage_error("not an integer list: '" + text + "'");
    }
  }
  return out;
}

// Key = value config file (TOML subset) -> JSON object with typed values.
json read_config_file(const std::string& path) {
  require_file(path, "config");
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    usage_error("cannot parse config '" + path + "': " + e.what());
  }
  json j = json::object();
  auto scalar = [](const std::string& v) -> json {
    if (v == "true") return true;
    if (v == "false") return false;
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (!v.empty() && end && *end == '\0') {
      if (v.find_first_of(".eE") == std::string::npos) {
        const long long i = std::strtoll(v.c_str(), nullptr, 10);
        if (i >= 0) return static_cast<unsigned long long>(i);
        return i;
      }
      return d;
    }
    return v;
  };
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) usage_error("config '" + path + "': sections are not supported (" + item.fullname() + ")");
    if (item.name == "gcn_widths") {
      json arr = json::array();
      for (const auto& v : item.inputs) arr.push_back(scalar(v));
      j[item.name] = arr;
    } else if (item.inputs.size() == 1) {
      j[item.name] = scalar(item.inputs.front());
    } else {
      usage_error("config '" + path + "': key '" + item.name + "' expects one value");
    }
  }
  return j;
}

// Experiment flags shared by train and ablate-adjacency; unset flags leave the
// config file value in place.
struct ExperimentFlags {
  std::string config_path;
  std::optional<std::string> variant, ordering, train_path, test_path, init, output_mode, gcn_widths;
  std::optional<double> epsilon, scale, lr, momentum, clip_norm, alpha, beta, pretrain_lr;
  std::optional<int> adjacency;
  std::optional<std::size_t> epochs, batch_size, decoder_hidden, pretrain_epochs;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value experiment config file");
    cmd->add_option("--variant", variant, "none | oracle | eucl_dist_est | e2e | e2e_finetune");
    cmd->add_option("--ordering", ordering, "oracle ordering");
    cmd->add_option("--train", train_path, "training sequences (JSONL)");
    cmd->add_option("--test", test_path, "held-out sequences (JSONL)");
    cmd->add_option("--init", init, "pretrained eucl_dist_est checkpoint");
    cmd->add_option("--output-mode", output_mode, "absolute | offset");
    cmd->add_option("--gcn-widths", gcn_widths, "comma-separated GCN widths");
    cmd->add_option("--epsilon", epsilon, "soft-rank regularization");
    cmd->add_option("--scale", scale, "soft permutation scale");
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--momentum", momentum, "SGD momentum");
    cmd->add_option("--clip-norm", clip_norm, "global gradient-norm clip (0 = off)");
    cmd->add_option("--alpha", alpha, "initial alpha (adjacency 4-6)");
    cmd->add_option("--beta", beta, "initial beta (adjacency 6)");
    cmd->add_option("--adjacency", adjacency, "adjacency variant 1-8");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch-size", batch_size, "sequences per batch");
    cmd->add_option("--decoder-hidden", decoder_hidden, "decoder hidden channels");
    cmd->add_option("--pretrain-epochs", pretrain_epochs, "distance-estimator epochs");
    cmd->add_option("--pretrain-lr", pretrain_lr, "distance-estimator learning rate");
    cmd->add_option("--seed", seed, "experiment seed");
  }

  json resolve() const {
    json j = config_path.empty() ? json::object() : read_config_file(config_path);
    auto set = [&](const char* key, const auto& opt) {
      if (opt) j[key] = *opt;
    };
    set("variant", variant);
    set("ordering", ordering);
    set("train_path", train_path);
    set("test_path", test_path);
    set("init_checkpoint", init);
    set("output_mode", output_mode);
    set("epsilon", epsilon);
    set("scale", scale);
    set("learning_rate", lr);
    set("momentum", momentum);
    set("clip_norm", clip_norm);
    set("alpha", alpha);
    set("beta", beta);
    set("adjacency", adjacency);
    set("epochs", epochs);
    set("batch_size", batch_size);
    set("decoder_hidden", decoder_hidden);
    set("pretrain_epochs", pretrain_epochs);
    set("pretrain_learning_rate", pretrain_lr);
    set("seed", seed);
    if (gcn_widths) {
      json arr = json::array();
      for (double w : parse_doubles(*gcn_widths)) arr.push_back(static_cast<std::size_t>(w));
      j["gcn_widths"] = arr;
    }
    return j;
  }
};

// Validates and fills defaults through the library.
json normalize(const json& config) {
  char* text = nullptr;
  check(rolfor_config_normalize(config.dump().c_str(), &text), "config");
  return json::parse(take_string(text));
}

std::string run_id_of(const json& config) {
  char* text = nullptr;
  check(rolfor_config_run_id(config.dump().c_str(), &text), "config");
  return take_string(text);
}

// ---- SVG ------------------------------------------------------------------

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x, y;
};

// Log-log line chart.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::vector<Series>& series) {
  const double w = 640, h = 400, left = 70, right = 20, top = 40, bottom = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  auto lg = [](double v) { return std::log10(std::max(v, 1e-300)); };
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, lg(s.x[i]));
      xmax = std::max(xmax, lg(s.x[i]));
      if (s.y[i] > 0) {
        ymin = std::min(ymin, lg(s.y[i]));
        ymax = std::max(ymax, lg(s.y[i]));
      }
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) {
    ymin = ymin > 1e299 ? 0 : ymin - 1;
    ymax = ymin + 2;
  }
  auto px = [&](double v) { return left + (lg(v) - xmin) / (xmax - xmin) * (w - left - right); };
  auto py = [&](double v) { return h - bottom - (lg(v) - ymin) / (ymax - ymin) * (h - top - bottom); };

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " +
         fmt(w) + " " + fmt(h) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + escape_xml(title) +
         "</text>\n";
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(h - bottom) + "\" x2=\"" + fmt(w - right) + "\" y2=\"" +
         fmt(h - bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" + fmt(h - bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt(w / 2) + "\" y=\"" + fmt(h - 12) + "\" text-anchor=\"middle\" font-size=\"12\">" +
         escape_xml(x_label) + " (log10)</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(h / 2) + "\" font-size=\"12\" transform=\"rotate(-90 16 " + fmt(h / 2) +
         ")\" text-anchor=\"middle\">value (log10)</text>\n";
  for (int i = static_cast<int>(std::ceil(xmin)); i <= static_cast<int>(std::floor(xmax)); ++i) {
    const double x = px(std::pow(10.0, i));
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(h - bottom + 16) + "\" text-anchor=\"middle\" font-size=\"10\">" +
           std::to_string(i) + "</text>\n";
  }
  double legend_y = top + 10;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.y[i] <= 0) continue;
      pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
    }
    svg += "<polyline class=\"series\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\" points=\"" + pts +
           "\"/>\n";
    svg += "<text x=\"" + fmt(w - right - 150) + "\" y=\"" + fmt(legend_y) + "\" font-size=\"12\" fill=\"" + s.color +
           "\">" + escape_xml(s.name) + "</text>\n";
    legend_y += 16;
  }
  svg += "</svg>\n";
  return svg;
}

constexpr double kCourtLength = 28.65;
constexpr double kCourtWidth = 15.24;
constexpr double kPixelsPerMeter = 30.0;

std::string polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                     const std::string& dash, const std::string& cls) {
  std::string p;
  for (const auto& [x, y] : pts) p += fmt(x) + "," + fmt(y) + " ";
  std::string out = "<polyline class=\"" + cls + "\" fill=\"none\" stroke=\"" + color +
                    "\" stroke-width=\"0.08\" points=\"" + p + "\"";
  if (!dash.empty()) out += " stroke-dasharray=\"" + dash + "\"";
  return out + "/>\n";
}

// Court overlay: observed (solid), ground-truth future (dashed) and, when
// given, predicted future (dotted) per agent. Court units are meters.
std::string court_svg(const std::string& title, const std::vector<double>& frames, const std::vector<double>* pred) {
  auto at = [&](std::size_t t, std::size_t a) {
    const std::size_t i = (t * ROLFOR_AGENTS + a) * 2;
    return std::make_pair(frames[i], frames[i + 1]);
  };
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kCourtLength * kPixelsPerMeter) +
         "\" height=\"" + fmt(kCourtWidth * kPixelsPerMeter) + "\" viewBox=\"0 0 " + fmt(kCourtLength) + " " +
         fmt(kCourtWidth) + "\">\n";
  svg += "<title>" + escape_xml(title) + "</title>\n";
  svg += "<rect class=\"court\" x=\"0\" y=\"0\" width=\"" + fmt(kCourtLength) + "\" height=\"" + fmt(kCourtWidth) +
         "\" fill=\"#f4e4c8\" stroke=\"black\" stroke-width=\"0.1\"/>\n";
  svg += "<line x1=\"" + fmt(kCourtLength / 2) + "\" y1=\"0\" x2=\"" + fmt(kCourtLength / 2) + "\" y2=\"" +
         fmt(kCourtWidth) + "\" stroke=\"black\" stroke-width=\"0.05\"/>\n";
  svg += "<circle class=\"basket\" cx=\"26.750\" cy=\"7.620\" r=\"0.23\" fill=\"none\" stroke=\"orange\" "
         "stroke-width=\"0.08\"/>\n";
  for (std::size_t a = 0; a < ROLFOR_AGENTS; ++a) {
    const std::string color = a < 5 ? "#1f5fbf" : (a < 10 ? "#bf1f1f" : "#222222");
    std::vector<std::pair<double, double>> obs, fut, pr;
    for (std::size_t t = 0; t < ROLFOR_OBS_FRAMES; ++t) obs.push_back(at(t, a));
    fut.push_back(obs.back());
    for (std::size_t t = ROLFOR_OBS_FRAMES; t < ROLFOR_TOTAL_FRAMES; ++t) fut.push_back(at(t, a));
    svg += "<g class=\"agent\" id=\"agent-" + std::to_string(a) + "\">\n";
    svg += polyline(obs, color, "", "observed");
    svg += polyline(fut, color, "0.3,0.2", "future");
    if (pred && a < ROLFOR_PLAYERS) {
      pr.push_back(obs.back());
      for (std::size_t k = 0; k < ROLFOR_FUT_FRAMES; ++k) {
        const std::size_t i = (k * ROLFOR_PLAYERS + a) * 2;
        pr.emplace_back((*pred)[i], (*pred)[i + 1]);
      }
      svg += polyline(pr, color, "0.05,0.15", "predicted");
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// ---- commands ---------------------------------------------------------------

struct GenOptions {
  long long n = 2000;
  std::uint64_t seed = 0;
  double pass_probability = 0.08;
  double defender_gain = 0.3;
  double noise_sigma = 0.1;
  std::string out;
  std::string out_dir = ".";
};

int cmd_gen(const GenOptions& o) {
  if (o.n < 1) usage_error("--n must be >= 1");
  rolfor_synth_config c;
  rolfor_synth_config_default(&c);
  c.n_sequences = static_cast<std::size_t>(o.n);
  c.seed = o.seed;
  c.pass_probability = o.pass_probability;
  c.defender_gain = o.defender_gain;
  c.noise_sigma = o.noise_sigma;
  const json config = {{"n", c.n_sequences},
                       {"seed", c.seed},
                       {"pass_probability", c.pass_probability},
                       {"defender_gain", c.defender_gain},
                       {"noise_sigma", c.noise_sigma}};
  const fs::path out = fs::path(o.out).is_absolute() ? fs::path(o.out) : fs::path(o.out_dir) / o.out;
  char id[40];
  std::snprintf(id, sizeof id, "gen-%llu-%zu", static_cast<unsigned long long>(c.seed), c.n_sequences);
  Manifest manifest(o.out_dir, "gen", id, config);
  manifest.output(out);

  Dataset ds;
  const rolfor_status st = rolfor_dataset_generate(&c, &ds.ptr);
  if (st == ROLFOR_ERR_CONFIG) usage_error(rolfor_last_error());
  check(st, "generating dataset");
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  check(rolfor_dataset_save(ds.ptr, out.string().c_str()), "saving dataset");
  manifest.finish("ok");
  std::cerr << "wrote " << ds.size() << " sequences to " << out.string() << '\n';
  return kExitOk;
}

std::string evaluate_csv(const Model& model, const Dataset& data, const std::string& perturb, std::uint64_t seed) {
  char* csv = nullptr;
  check(rolfor_evaluate(model.ptr, data.ptr, perturb.c_str(), seed, &csv), "evaluation");
  return take_string(csv);
}

int cmd_train(const ExperimentFlags& flags, const std::string& out_dir) {
  const json config = normalize(flags.resolve());
  const std::string train_path = config.value("train_path", "");
  const std::string test_path = config.value("test_path", "");
  require_file(train_path, "training data");
  if (!test_path.empty()) require_file(test_path, "test data");
  const std::string init = config.value("init_checkpoint", "");
  if (!init.empty()) require_file(init, "init checkpoint");

  Manifest manifest(out_dir, "train", run_id_of(config), config);
  const fs::path ckpt = fs::path(out_dir) / "model.ckpt";
  const fs::path history = fs::path(out_dir) / "history.csv";
  manifest.output(ckpt);
  manifest.output(history);

  Dataset train(train_path);
  Model model;
  char* hist = nullptr;
  check(rolfor_train(config.dump().c_str(), train.ptr, log_line, nullptr, &model.ptr, &hist), "training");
  write_text(history, take_string(hist));
  check(rolfor_model_save(model.ptr, ckpt.string().c_str()), "saving checkpoint");
  if (!test_path.empty()) {
    Dataset test(test_path);
    const fs::path metrics = fs::path(out_dir) / "metrics.csv";
    manifest.output(metrics);
    write_text(metrics, evaluate_csv(model, test, "", 0));
  }
  manifest.finish("ok");
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_path, const std::string& perturb,
             std::uint64_t perturb_seed, const std::string& out_dir) {
  require_file(checkpoint, "checkpoint");
  require_file(data_path, "data");
  Model model(checkpoint);
  const json config = model.config();
  json snapshot = {{"checkpoint", checkpoint}, {"data", data_path}, {"perturb", perturb},
                   {"perturb_seed", perturb_seed}, {"model", config}};
  Manifest manifest(out_dir, "eval", run_id_of(config), snapshot);
  const fs::path metrics = fs::path(out_dir) / "metrics.csv";
  manifest.output(metrics);
  Dataset data(data_path);
  write_text(metrics, evaluate_csv(model, data, perturb, perturb_seed));
  manifest.finish("ok");
  return kExitOk;
}

int cmd_gradprobe(const std::string& checkpoint, const std::string& data_path, const std::string& eps_text,
                  std::size_t batch, const std::string& out_dir) {
  require_file(checkpoint, "checkpoint");
  require_file(data_path, "data");
  const auto eps = parse_doubles(eps_text);
  if (eps.empty()) usage_error("--epsilons must list at least one value");
  for (double e : eps)
    if (!(e > 0)) usage_error("--epsilons values must be > 0");
  if (batch < 1) usage_error("--batch must be >= 1");
  Model model(checkpoint);
  const json config = model.config();
  Manifest manifest(out_dir, "gradprobe", run_id_of(config),
                    {{"checkpoint", checkpoint}, {"data", data_path}, {"epsilons", eps}, {"batch", batch},
                     {"model", config}});
  const fs::path csv_path = fs::path(out_dir) / "gradprobe.csv";
  const fs::path svg_path = fs::path(out_dir) / "gradprobe.svg";
  manifest.output(csv_path);
  manifest.output(svg_path);

  Dataset data(data_path);
  Dataset head;
  check(rolfor_dataset_slice(data.ptr, 0, std::min(batch, data.size()), &head.ptr), "selecting batch");
  char* text = nullptr;
  check(rolfor_gradient_probe(model.ptr, head.ptr, eps.data(), eps.size(), &text), "gradient probe");
  const std::string csv = take_string(text);
  write_text(csv_path, csv);

  Series score{"OrderNN grad norm", "#bf1f1f", {}, {}}, gcn{"RoleGCN grad norm", "#1f5fbf", {}, {}},
      pooled{"pooled fraction", "#2a8f2a", {}, {}};
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) {
    const auto v = parse_doubles(line);
    if (v.size() != 4) continue;
    for (auto* s : {&score, &gcn, &pooled}) s->x.push_back(v[0]);
    score.y.push_back(v[1]);
    gcn.y.push_back(v[2]);
    pooled.y.push_back(v[3]);
  }
  write_text(svg_path, line_chart_svg("Gradient norm vs epsilon", "epsilon", {score, gcn, pooled}));
  manifest.finish("ok");
  return kExitOk;
}

int cmd_ablate(const ExperimentFlags& flags, const std::string& variants_text, const std::string& seeds_text,
               const std::string& out_dir) {
  json base = flags.resolve();
  base["variant"] = "oracle";
  if (!base.contains("ordering")) base["ordering"] = "ball_distance_marking";
  base = normalize(base);
  const std::string train_path = base.value("train_path", "");
  const std::string test_path = base.value("test_path", "");
  require_file(train_path, "training data");
  require_file(test_path, "test data");
  const auto variants = parse_ints(variants_text);
  const auto seeds = parse_ints(seeds_text);
  if (variants.empty() || seeds.empty()) usage_error("--variants and --seeds must not be empty");
  for (int v : variants)
    if (v < 1 || v > 8) usage_error("adjacency variants must lie in 1-8");

  json snapshot = base;
  snapshot["variants"] = variants;
  snapshot["seeds"] = seeds;
  Manifest manifest(out_dir, "ablate-adjacency", run_id_of(base), snapshot);
  const fs::path csv_path = fs::path(out_dir) / "ablation.csv";
  manifest.output(csv_path);

  Dataset train(train_path);
  Dataset test(test_path);
  std::string out;
  for (int v : variants)
    for (int s : seeds) {
      json config = base;
      config["adjacency"] = v;
      config["seed"] = s;
      std::cerr << "adjacency " << v << " seed " << s << '\n';
      Model model;
      check(rolfor_train(config.dump().c_str(), train.ptr, log_line, nullptr, &model.ptr, nullptr), "training");
      std::string csv = evaluate_csv(model, test, "", 0);
      std::stringstream ss(csv);
      std::string header, row;
      std::getline(ss, header);
      std::getline(ss, row);
      if (out.empty()) out = header + "\n";
      // variant column carries the adjacency configuration
      const auto c1 = row.find(','), c2 = row.find(',', c1 + 1);
      out += row.substr(0, c1 + 1) + "adjacency_" + std::to_string(v) + row.substr(c2) + "\n";
    }
  write_text(csv_path, out);
  manifest.finish("ok");
  return kExitOk;
}

int cmd_plot(const std::string& data_path, std::size_t index, const std::string& checkpoint,
             const std::string& out_dir) {
  require_file(data_path, "data");
  if (!checkpoint.empty()) require_file(checkpoint, "checkpoint");
  Manifest manifest(out_dir, "plot", "plot-" + std::to_string(index),
                    {{"data", data_path}, {"index", index}, {"checkpoint", checkpoint}});
  Dataset data(data_path);
  if (index >= data.size()) usage_error("--index out of range");
  std::vector<double> frames(ROLFOR_TOTAL_FRAMES * ROLFOR_AGENTS * 2);
  check(rolfor_dataset_frames(data.ptr, index, frames.data(), frames.size()), "reading sequence");
  char* id = nullptr;
  check(rolfor_dataset_sequence_id(data.ptr, index, &id), "reading sequence id");
  const std::string seq_id = take_string(id);

  std::optional<std::vector<double>> pred;
  if (!checkpoint.empty()) {
    Model model(checkpoint);
    pred.emplace(ROLFOR_FUT_FRAMES * ROLFOR_PLAYERS * 2);
    check(rolfor_predict(model.ptr, data.ptr, index, pred->data(), pred->size()), "prediction");
  }
  const fs::path svg = fs::path(out_dir) / (seq_id + ".svg");
  manifest.output(svg);
  write_text(svg, court_svg(seq_id, frames, pred ? &*pred : nullptr));
  manifest.finish("ok");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Role-based multi-agent trajectory forecasting experiments"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset");
  gen_cmd->add_option("--n", gen.n, "number of sequences")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--pass-probability", gen.pass_probability, "per-frame pass probability")->capture_default_str();
  gen_cmd->add_option("--defender-gain", gen.defender_gain, "marking attraction")->capture_default_str();
  gen_cmd->add_option("--noise-sigma", gen.noise_sigma, "motion noise (m)")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "output JSONL file")->required();
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->capture_default_str();

  ExperimentFlags train_flags;
  std::string train_out = ".";
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_flags.add_to(train_cmd);
  train_cmd->add_option("--out-dir", train_out, "output directory")->capture_default_str();

  std::string eval_ckpt, eval_data, eval_perturb, eval_out = ".";
  std::uint64_t eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval_cmd->add_option("--data", eval_data, "sequences (JSONL)")->required();
  eval_cmd->add_option("--perturb", eval_perturb, "comma-separated perturbation specs");
  eval_cmd->add_option("--perturb-seed", eval_seed, "perturbation seed")->capture_default_str();
  eval_cmd->add_option("--out-dir", eval_out, "output directory")->capture_default_str();

  std::string probe_ckpt, probe_data, probe_out = ".";
  std::string probe_eps = "1e-6,1e-3,1e-2,1e-1,1,10,100,1e4,1e6";
  std::size_t probe_batch = 32;
  auto* probe_cmd = app.add_subcommand("gradprobe", "gradient-flow probe over epsilon");
  probe_cmd->add_option("--checkpoint", probe_ckpt, "model checkpoint")->required();
  probe_cmd->add_option("--data", probe_data, "sequences (JSONL)")->required();
  probe_cmd->add_option("--epsilons", probe_eps, "comma-separated epsilons")->capture_default_str();
  probe_cmd->add_option("--batch", probe_batch, "sequences in the probe batch")->capture_default_str();
  probe_cmd->add_option("--out-dir", probe_out, "output directory")->capture_default_str();

  ExperimentFlags ablate_flags;
  std::string ablate_variants = "1-8", ablate_seeds = "1,2,3", ablate_out = ".";
  auto* ablate_cmd = app.add_subcommand("ablate-adjacency", "train adjacency variants under oracle ordering");
  ablate_flags.add_to(ablate_cmd);
  ablate_cmd->add_option("--variants", ablate_variants, "adjacency variants, e.g. 1-8 or 1,2,3")->capture_default_str();
  ablate_cmd->add_option("--seeds", ablate_seeds, "comma-separated seeds")->capture_default_str();
  ablate_cmd->add_option("--out-dir", ablate_out, "output directory")->capture_default_str();

  std::string plot_data, plot_ckpt, plot_out = ".";
  std::size_t plot_index = 0;
  auto* plot_cmd = app.add_subcommand("plot", "court overlay SVG of one sequence");
  plot_cmd->add_option("--data", plot_data, "sequences (JSONL)")->required();
  plot_cmd->add_option("--index", plot_index, "sequence index")->capture_default_str();
  plot_cmd->add_option("--checkpoint", plot_ckpt, "model checkpoint for predictions");
  plot_cmd->add_option("--out-dir", plot_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen);
    if (*train_cmd) return cmd_train(train_flags, train_out);
    if (*eval_cmd) return cmd_eval(eval_ckpt, eval_data, eval_perturb, eval_seed, eval_out);
    if (*probe_cmd) return cmd_gradprobe(probe_ckpt, probe_data, probe_eps, probe_batch, probe_out);
    if (*ablate_cmd) return cmd_ablate(ablate_flags, ablate_variants, ablate_seeds, ablate_out);
    if (*plot_cmd) return cmd_plot(plot_data, plot_index, plot_ckpt, plot_out);
  } catch (const CliError& e) {
    std::cerr << "rolfor: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "rolfor: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
