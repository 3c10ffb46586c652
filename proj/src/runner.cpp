// Copyright 2026 The Procwriter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procwriter/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "procwriter/baselines.hpp"
#include "procwriter/bow_generator.hpp"
#include "procwriter/coherence.hpp"
#include "procwriter/dataset.hpp"
#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kSubeventWriter: return "subeventwriter";
    case Method::kAllAtOnce: return "all-at-once";
    case Method::kTop1Similar: return "top1-similar";
    case Method::kZeroShot: return "zero-shot";
  }
  return "subeventwriter";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::kSubeventWriter, Method::kAllAtOnce, Method::kTop1Similar, Method::kZeroShot}) {
    if (s == to_string(m)) return m;
  }
  throw NotFound("unknown method '" + std::string(s) +
                 "' (expected subeventwriter, all-at-once, top1-similar or zero-shot)");
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string normalize_key(std::string_view key) {
  std::string k(trim(key));
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  const std::string v(trim(value));
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw InvalidArgument("config '" + std::string(key) + "': expected a non-negative integer, got '" + v + "'");
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw InvalidArgument("config '" + std::string(key) + "': integer out of range: '" + v + "'");
  }
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string v(trim(value));
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || !std::isfinite(d))
    throw InvalidArgument("config '" + std::string(key) + "': expected a number, got '" + v + "'");
  return d;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string v = to_lower(trim(value));
  if (v.empty() || v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("config '" + std::string(key) + "': expected a boolean, got '" + v + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> e = {
      {"method", std::string(to_string(c.method))},
      {"dataset", c.dataset.string()},
      {"split", c.split},
      {"backend", c.backend},
      {"scorer", c.scorer},
      {"k", std::to_string(c.k)},
  };
  if (c.lambda) e.emplace_back("lambda", format_double(*c.lambda));
  e.emplace_back("max_steps", std::to_string(c.max_steps));
  e.emplace_back("use_coherence", c.use_coherence ? "true" : "false");
  e.emplace_back("stop_policy", c.stop_policy == StopPolicy::kRerank ? "rerank" : "bypass");
  e.emplace_back("lr", format_double(c.learning_rate));
  e.emplace_back("batch_size", std::to_string(c.batch_size));
  e.emplace_back("epochs", std::to_string(c.epochs));
  e.emplace_back("scorer_lr", format_double(c.scorer_learning_rate));
  e.emplace_back("scorer_epochs", std::to_string(c.scorer_epochs));
  e.emplace_back("n_negatives", std::to_string(c.n_negatives));
  if (c.fewshot) e.emplace_back("fewshot", std::to_string(*c.fewshot));
  e.emplace_back("seed", std::to_string(c.seed));
  e.emplace_back("out", c.out.string());
  e.emplace_back("trace", c.trace ? "true" : "false");
  if (!c.mock_script.empty()) e.emplace_back("mock_script", c.mock_script);
  e.emplace_back("embed_dim", std::to_string(c.embed_dim));
  return e;
}

ojson config_json(const RunConfig& c) {
  ojson j = ojson::object();
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

}  // namespace

DecodingConfig RunConfig::decoding() const {
  DecodingConfig d;
  d.k = k;
  d.lambda = effective_lambda();
  d.max_steps = max_steps;
  d.use_coherence = use_coherence;
  d.stop_policy = stop_policy;
  return d;
}

void RunConfig::set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value(trim(raw_value));
  if (key == "method") method = method_from_string(value);
  else if (key == "dataset") dataset = value;
  else if (key == "split") split = value;
  else if (key == "backend") backend = value;
  else if (key == "scorer") scorer = value;
  else if (key == "k") k = parse_count(key, value);
  else if (key == "lambda") lambda = parse_real(key, value);
  else if (key == "max_steps") max_steps = parse_count(key, value);
  else if (key == "use_coherence") use_coherence = parse_bool(key, value);
  else if (key == "no_coherence") use_coherence = !parse_bool(key, value);
  else if (key == "stop_policy") {
    if (value == "rerank") stop_policy = StopPolicy::kRerank;
    else if (value == "bypass") stop_policy = StopPolicy::kBypass;
    else throw InvalidArgument("config 'stop_policy': expected rerank or bypass, got '" + value + "'");
  } else if (key == "lr" || key == "learning_rate") learning_rate = parse_real(key, value);
  else if (key == "batch_size") batch_size = parse_count(key, value);
  else if (key == "epochs") epochs = parse_count(key, value);
  else if (key == "scorer_lr") scorer_learning_rate = parse_real(key, value);
  else if (key == "scorer_epochs") scorer_epochs = parse_count(key, value);
  else if (key == "n_negatives") n_negatives = parse_count(key, value);
  else if (key == "fewshot") fewshot = parse_count(key, value);
  else if (key == "seed") seed = parse_count(key, value);
  else if (key == "out") out = value;
  else if (key == "trace") trace = parse_bool(key, value);
  else if (key == "mock_script") mock_script = value;
  else if (key == "embed_dim") embed_dim = parse_count(key, value);
  else throw InvalidArgument("unknown config key '" + std::string(trim(raw_key)) + "'");
}

void RunConfig::validate() const {
  if (dataset.empty()) throw InvalidArgument("config: dataset directory not set");
  if (split != "train" && split != "valid" && split != "test")
    throw InvalidArgument("config: split must be train, valid or test");
  decoding().validate();
  if (lambda && *lambda < 0.0) throw InvalidArgument("config: lambda must be >= 0");
  TrainingConfig{learning_rate, batch_size, epochs, seed}.validate();
  TrainingConfig{scorer_learning_rate, batch_size, scorer_epochs, seed}.validate();
  if (n_negatives == 0) throw InvalidArgument("config: n_negatives must be at least 1");
  if (embed_dim == 0) throw InvalidArgument("config: embed_dim must be at least 1");
  if (fewshot && *fewshot == 0 && method != Method::kZeroShot)
    throw InvalidArgument("config: fewshot must be at least 1 for methods that train");
  if (method != Method::kTop1Similar && !GeneratorRegistry::instance().contains(backend))
    throw NotFound("unknown generation backend '" + backend + "'");
  if (method == Method::kSubeventWriter && use_coherence && !scorer_exists(scorer))
    throw NotFound("unknown coherence scorer '" + scorer + "'");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : config_entries(*this)) out += k + " = " + v + "\n";
  return out;
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig c;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("config line " + std::to_string(n) + ": expected 'key = value'");
    try {
      c.set(t.substr(0, eq), t.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw ParseError("config line " + std::to_string(n) + ": " + e.what());
    }
  }
  return c;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_prediction(std::ostream& out, const PredictionRecord& record) {
  ojson j = {{"process", record.process}, {"prediction", record.prediction.texts()}};
  if (record.stop_reason) j["stop_reason"] = to_string(*record.stop_reason);
  out << j.dump() << '\n';
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions file " + path.string());
  std::vector<PredictionRecord> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    try {
      auto j = nlohmann::json::parse(text);
      PredictionRecord r{j.at("process").get<std::string>(),
                         SubEventSequence::from_texts(j.at("prediction").get<std::vector<std::string>>()),
                         std::nullopt};
      if (auto it = j.find("stop_reason"); it != j.end()) {
        const auto s = it->get<std::string>();
        if (s == "stop-literal") r.stop_reason = StopReason::kStopLiteral;
        else if (s == "max-steps") r.stop_reason = StopReason::kMaxSteps;
        else throw InvalidArgument("unknown stop_reason '" + s + "'");
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": line " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

namespace {

// Tracks the current pipeline stage in run_state.json.
class RunState {
 public:
  explicit RunState(fs::path dir) : path_(std::move(dir) / "run_state.json") {}

  void enter(std::string stage) {
    stage_ = std::move(stage);
    write("running", "");
  }
  void fail(const std::string& error) { write("failed", error); }
  void complete() {
    stage_ = "done";
    write("completed", "");
  }
  const std::string& stage() const { return stage_; }

 private:
  void write(std::string_view status, const std::string& error) const {
    ojson j = {{"stage", stage_}, {"status", status}};
    if (!error.empty()) j["error"] = error;
    std::ofstream(path_) << j.dump(2) << '\n';
  }

  fs::path path_;
  std::string stage_ = "init";
};

fs::path make_run_dir(const fs::path& out, Method method) {
  fs::create_directories(out);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream stamp;
  stamp << std::put_time(&tm, "%Y%m%d-%H%M%S");
  const std::string base = "run-" + stamp.str() + "-" + std::string(to_string(method));
  for (int attempt = 1;; ++attempt) {
    fs::path dir = out / (attempt == 1 ? base : base + "-" + std::to_string(attempt));
    if (fs::create_directory(dir)) return dir;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::uint64_t training_key(std::string_view kind, const TrainingConfig& tc, std::string_view extra,
                           const std::vector<std::string>& texts) {
  std::uint64_t h = fnv1a(kind);
  h = hash_combine(h, fnv1a(format_double(tc.learning_rate)));
  h = hash_combine(h, tc.batch_size);
  h = hash_combine(h, tc.epochs);
  h = hash_combine(h, tc.seed);
  h = hash_combine(h, fnv1a(extra));
  for (const auto& t : texts) h = hash_combine(h, fnv1a(t));
  return h;
}

std::optional<fs::path> cache_dir() {
  const char* env = std::getenv("PROCWRITER_CACHE");
  if (env == nullptr || *env == '\0') return std::nullopt;
  fs::path dir(env);
  fs::create_directories(dir);
  return dir;
}

std::shared_ptr<Generator> train_generator(const std::shared_ptr<Generator>& base,
                                           const std::vector<TrainingPair>& pairs, const TrainingConfig& tc,
                                           std::vector<std::string>& log) {
  auto bow = std::dynamic_pointer_cast<BowSoftmaxGenerator>(base);
  const auto cache = cache_dir();
  fs::path cached;
  if (bow && cache) {
    std::vector<std::string> texts;
    for (const auto& p : pairs) {
      texts.push_back(p.input);
      texts.push_back(p.output);
    }
    cached = *cache / ("bow-softmax-" + hex(training_key("bow-softmax", tc, "", texts)) + ".bin");
    if (fs::exists(cached)) {
      log.push_back("generator: loaded cached model " + cached.string());
      return BowSoftmaxGenerator::load(cached);
    }
  }
  const Hyperparameters hp = {{"learning_rate", tc.learning_rate},
                              {"batch_size", static_cast<double>(tc.batch_size)},
                              {"epochs", static_cast<double>(tc.epochs)},
                              {"seed", static_cast<double>(tc.seed)}};
  auto trained = fine_tune(base, pairs, hp);
  log.push_back("generator: fine-tuned '" + base->name() + "' on " + std::to_string(pairs.size()) + " pairs");
  if (!cached.empty()) {
    std::dynamic_pointer_cast<BowSoftmaxGenerator>(trained)->save(cached);
    log.push_back("generator: cached model at " + cached.string());
  }
  return trained;
}

std::shared_ptr<CoherenceScorer> train_scorer(const std::shared_ptr<CoherenceScorer>& base,
                                              const std::vector<CoherenceExample>& data, const TrainingConfig& tc,
                                              std::size_t n_negatives, std::vector<std::string>& log) {
  auto logistic = std::dynamic_pointer_cast<LogisticScorer>(base);
  const auto cache = cache_dir();
  fs::path cached;
  if (logistic && cache) {
    std::vector<std::string> texts;
    for (const auto& ex : data) texts.push_back(std::to_string(ex.label) + ex.text);
    cached = *cache / ("logistic-" + hex(training_key("logistic", tc, std::to_string(n_negatives), texts)) + ".bin");
    if (fs::exists(cached)) {
      log.push_back("scorer: loaded cached model " + cached.string());
      return LogisticScorer::load(cached);
    }
  }
  auto trained = base->train(data, tc, n_negatives);
  log.push_back("scorer: trained '" + base->name() + "' on " + std::to_string(data.size()) + " examples");
  if (!cached.empty()) {
    std::dynamic_pointer_cast<LogisticScorer>(trained)->save(cached);
    log.push_back("scorer: cached model at " + cached.string());
  }
  return trained;
}

std::vector<TrainingPair> method_pairs(Method method, const DatasetSplit& split, const PromptTemplate& tmpl) {
  std::vector<TrainingPair> pairs;
  for (const auto& ex : split.examples) {
    std::vector<TrainingPair> more;
    switch (method) {
      case Method::kSubeventWriter: more = expand_training_pairs(ex, tmpl); break;
      case Method::kAllAtOnce: more = all_at_once_pairs(ex); break;
      case Method::kZeroShot:
        for (const auto& ref : ex.references()) more.push_back({zero_shot_prompt(ex.process()), flatten(ref)});
        break;
      case Method::kTop1Similar: break;
    }
    pairs.insert(pairs.end(), more.begin(), more.end());
  }
  return pairs;
}

ojson trace_json(const std::string& process, const DecodeTrace& trace) {
  ojson iterations = ojson::array();
  for (const auto& it : trace.iterations) {
    ojson cands = ojson::array();
    for (const auto& c : it.candidates)
      cands.push_back({{"text", c.candidate.text},
                       {"logprob", c.candidate.logprob},
                       {"coherence", c.coherence},
                       {"combined", c.combined}});
    iterations.push_back({{"prompt", it.prompt}, {"candidates", std::move(cands)}, {"chosen", it.chosen}});
  }
  return {{"process", process}, {"iterations", std::move(iterations)}, {"stop_reason", to_string(trace.stop_reason)}};
}

}  // namespace

RunResult run_experiment(const RunConfig& config) {
  config.validate();

  RunResult result;
  std::vector<std::string> log;
  if (config.method != Method::kSubeventWriter && config.lambda)
    result.warnings.push_back("lambda is ignored by method '" + std::string(to_string(config.method)) + "'");
  if (config.method != Method::kSubeventWriter && !config.use_coherence)
    result.warnings.push_back("--no-coherence is ignored by method '" + std::string(to_string(config.method)) + "'");

  result.run_dir = make_run_dir(config.out, config.method);
  write_file(result.run_dir / "config.txt", config.to_text());
  write_file(result.run_dir / "seed.txt", std::to_string(config.seed) + "\n");
  RunState state(result.run_dir);
  auto flush_log = [&] {
    std::string text;
    for (const auto& w : result.warnings) text += "warning: " + w + "\n";
    for (const auto& l : log) text += l + "\n";
    write_file(result.run_dir / "run.log", text);
  };

  try {
    state.enter("load");
    const bool needs_train = config.method != Method::kZeroShot;
    DatasetSplit train = needs_train ? load_split(config.dataset, "train") : DatasetSplit{"train", {}};
    const DatasetSplit eval = load_split(config.dataset, config.split);
    log.push_back("loaded " + std::to_string(train.size()) + " training and " + std::to_string(eval.size()) + " " +
                  config.split + " examples");

    if (config.fewshot && needs_train) {
      state.enter("subsample");
      const std::size_t before = train.size();
      train = subsample_fewshot(train, *config.fewshot, config.seed);
      log.push_back("few-shot: training on " + std::to_string(train.size()) + " of " + std::to_string(before) +
                    " examples");
    }

    std::shared_ptr<Generator> generator;
    if (config.method != Method::kTop1Similar) {
      state.enter("train-generator");
      BackendOptions options;
      if (!config.mock_script.empty()) options.params["mock_script"] = config.mock_script;
      options.replay_pairs = method_pairs(config.method, eval, PromptTemplate{});
      generator = GeneratorRegistry::instance().create(config.backend, options);
      if (config.method != Method::kZeroShot) {
        const auto pairs = method_pairs(config.method, train, generator->prompt_template());
        if (!pairs.empty())
          generator = train_generator(generator, pairs,
                                      {config.learning_rate, config.batch_size, config.epochs, config.seed}, log);
      }
    }

    std::shared_ptr<CoherenceScorer> scorer;
    if (config.method == Method::kSubeventWriter && config.use_coherence) {
      state.enter("train-scorer");
      scorer = make_scorer(config.scorer);
      if (!train.empty()) {
        const auto data = build_coherence_dataset(train, config.n_negatives, config.seed);
        scorer = train_scorer(scorer, data,
                              {config.scorer_learning_rate, config.batch_size, config.scorer_epochs, config.seed},
                              config.n_negatives, log);
      }
    }

    state.enter("decode");
    const HashEmbedder embedder(config.embed_dim);
    std::vector<std::vector<double>> title_embeddings;
    if (config.method == Method::kTop1Similar) {
      for (const auto& ex : train.examples) title_embeddings.push_back(embedder.embed(ex.process().title()));
    }
    std::string trace_text;
    std::ostringstream predictions_out;
    const DecodingConfig decoding = config.decoding();
    for (std::size_t i = 0; i < eval.size(); ++i) {
      const Process& process = eval.examples[i].process();
      PredictionRecord record{process.title(), {}, std::nullopt};
      switch (config.method) {
        case Method::kSubeventWriter: {
          auto decoded = decode(process, *generator, scorer.get(), decoding);
          record.prediction = std::move(decoded.sequence);
          record.stop_reason = decoded.trace.stop_reason;
          if (config.trace) trace_text += trace_json(process.title(), decoded.trace).dump() + "\n";
          break;
        }
        case Method::kAllAtOnce: record.prediction = all_at_once_decode(process, *generator); break;
        case Method::kTop1Similar:
          record.prediction = top1_similar(embedder.embed(process.title()), train, title_embeddings,
                                           hash_combine(config.seed, i));
          break;
        case Method::kZeroShot: record.prediction = zero_shot_decode(process, *generator); break;
      }
      write_prediction(predictions_out, record);
      result.predictions.push_back(std::move(record.prediction));
    }
    log.push_back("decoded " + std::to_string(eval.size()) + " processes");

    state.enter("evaluate");
    result.report = corpus_report(result.predictions, eval.examples, &embedder);

    state.enter("write");
    write_file(result.run_dir / "predictions.jsonl", predictions_out.str());
    write_file(result.run_dir / "metrics.json", result.report.to_json() + "\n");
    if (config.trace) write_file(result.run_dir / "trace.jsonl", trace_text);
    flush_log();
    state.complete();
  } catch (const std::exception& e) {
    state.fail(e.what());
    log.push_back("failed in stage '" + state.stage() + "': " + e.what());
    try {
      flush_log();
    } catch (...) {
    }
    rethrow_with_context("run failed in stage '" + state.stage() + "': ");
  }
  return result;
}

Grid parse_grid(std::istream& in) {
  Grid grid;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError("grid line " + std::to_string(n) + ": expected 'key = v1, v2'");
    GridAxis axis{normalize_key(t.substr(0, eq)), {}};
    std::string_view values = t.substr(eq + 1);
    while (true) {
      const auto comma = values.find(',');
      const auto v = trim(values.substr(0, comma));
      if (v.empty()) throw ParseError("grid line " + std::to_string(n) + ": empty value");
      axis.values.emplace_back(v);
      if (comma == std::string_view::npos) break;
      values.remove_prefix(comma + 1);
    }
    grid.push_back(std::move(axis));
  }
  return grid;
}

Grid load_grid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file " + path.string());
  return parse_grid(in);
}

std::vector<RunConfig> expand_grid(const RunConfig& base, const Grid& grid) {
  std::vector<RunConfig> out{base};
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw InvalidArgument("grid axis '" + axis.key + "' has no values");
    std::vector<RunConfig> next;
    next.reserve(out.size() * axis.values.size());
    for (const auto& cfg : out) {
      for (const auto& v : axis.values) {
        RunConfig c = cfg;
        c.set(axis.key, v);
        next.push_back(std::move(c));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::size_t select_best(std::span<const MetricReport> reports) {
  if (reports.empty()) throw InvalidArgument("select_best: no reports");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].text_metric_sum() > reports[best].text_metric_sum()) best = i;
  }
  return best;
}

std::string GridResult::to_json() const {
  ojson board = ojson::array();
  for (const auto& e : leaderboard)
    board.push_back({{"config", config_json(e.config)},
                     {"metrics", ojson::parse(e.report.to_json())},
                     {"sum", e.report.text_metric_sum()}});
  ojson j = {{"best", config_json(best)}, {"leaderboard", std::move(board)}};
  return j.dump(2);
}

GridResult grid_search(const RunConfig& base, const Grid& grid, const Evaluator& evaluate) {
  if (grid.empty()) return {base, {}};
  RunConfig valid_base = base;
  valid_base.split = "valid";
  GridResult result{valid_base, {}};
  auto cells = expand_grid(valid_base, grid);
  for (auto& cell : cells) cell.split = "valid";
  std::vector<MetricReport> reports;
  for (const auto& cell : cells) {
    reports.push_back(evaluate(cell));
    result.leaderboard.push_back({cell, reports.back()});
  }
  result.best = cells[select_best(reports)];
  return result;
}

GridResult grid_search(const RunConfig& base, const Grid& grid) {
  return grid_search(base, grid, [](const RunConfig& cell) { return run_experiment(cell).report; });
}

MetricReport evaluate_predictions(const fs::path& predictions, const fs::path& dataset_dir, std::string_view split,
                                  std::size_t embed_dim) {
  const auto records = read_predictions(predictions);
  const auto data = load_split(dataset_dir, split);
  if (records.size() != data.size())
    throw InvalidArgument("predictions file has " + std::to_string(records.size()) + " rows but split '" +
                          std::string(split) + "' has " + std::to_string(data.size()) + " examples");
  std::vector<SubEventSequence> preds;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].process != data.examples[i].process().title())
      throw InvalidArgument("prediction row " + std::to_string(i + 1) + " is for '" + records[i].process +
                            "' but the split has '" + data.examples[i].process().title() + "'");
    preds.push_back(records[i].prediction);
  }
  const HashEmbedder embedder(embed_dim);
  return corpus_report(preds, data.examples, &embedder);
}

std::size_t synthesize_coherence(const fs::path& dataset_dir, std::string_view split, std::size_t n_negatives,
                                 std::uint64_t seed, const fs::path& out) {
  const auto data = load_split(dataset_dir, split);
  const auto examples = build_coherence_dataset(data, n_negatives, seed);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream os(out);
  if (!os) throw IoError("cannot write " + out.string());
  write_coherence_jsonl(os, examples);
  return examples.size();
}

}  // namespace procwriter
