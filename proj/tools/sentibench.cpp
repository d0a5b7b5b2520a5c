// Command-line surface for the toolkit: preprocess, train-ml, train-dl,
// tune, predict, benchmark. Report files are byte-deterministic for a fixed
// seed; wall times appear on stdout and enter files only on request.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sentibench/sentibench.hpp"

namespace fs = std::filesystem;
using namespace sentibench;

namespace {

// Seed streams: every source of randomness hangs off the user seed through
// derive_seed with a distinct stream id, so subcommands that share a stage
// (e.g. the train/test split) agree with each other.
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamCv = 2;
constexpr std::uint64_t kStreamDlTrain = 3;
constexpr std::uint64_t kStreamTune = 4;
constexpr std::uint64_t kStreamValSplit = 5;
constexpr std::uint64_t kStreamSvm = 6;

struct GlobalOpts {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string out_dir = "out";
};

void add_global_opts(CLI::App* sub, GlobalOpts& g) {
  sub->add_option("--seed", g.seed, "Seed for all randomness")->capture_default_str();
  sub->add_option("--threads", g.threads, "Worker threads for CV folds and batch prediction")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", g.out_dir, "Directory for output artifacts")
      ->capture_default_str();
  sub->set_config("--config", "", "Read options from an INI file (flags override)");
}

fs::path ensure_out_dir(const GlobalOpts& g) {
  fs::path dir(g.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

CorpusFormat detect_format(const std::string& path) {
  const fs::path p(path);
  const std::string ext = p.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" ? CorpusFormat::kJsonl : CorpusFormat::kCsv;
}

SlangDict load_dict(const std::string& slang_path) {
  if (slang_path.empty()) return builtin_slang_dict();
  return load_slang_dict(slang_path);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- preprocess

struct PreprocessOpts {
  GlobalOpts global;
  std::string input;
  std::string output;
  std::string slang;
  std::string text_field = "text";
  std::string label_field = "label";
};

void run_preprocess(const PreprocessOpts& opt) {
  const fs::path out_dir = ensure_out_dir(opt.global);
  const fs::path out_path =
      opt.output.empty() ? out_dir / "tokens.jsonl" : fs::path(opt.output);
  const SlangDict dict = load_dict(opt.slang);
  const std::vector<RawReview> raw =
      load_corpus(opt.input, detect_format(opt.input), opt.text_field, opt.label_field);

  std::vector<TokenDoc> docs;
  docs.reserve(raw.size());
  for (const auto& review : raw) docs.push_back(run_pipeline(review.text, dict, review.label));

  std::ostringstream buffer;
  save_token_docs(buffer, docs);
  write_text_file(out_path, buffer.str());

  std::size_t empty = 0, positive = 0;
  for (const auto& d : docs) {
    if (d.tokens.empty()) ++empty;
    if (d.label == 1) ++positive;
  }
  std::cout << "preprocessed " << docs.size() << " rows (" << positive << " positive, "
            << docs.size() - positive << " negative, " << empty
            << " empty after preprocessing) -> " << out_path.string() << "\n";
}

// ------------------------------------------------------------------ train-ml

struct MlHyper {
  std::optional<double> reg_lambda;
  std::size_t svm_epochs = 50;
  GbdtConfig gbdt;
};

struct TrainMlOpts {
  GlobalOpts global;
  std::string data;
  std::string model = "lr";
  bool all = false;
  std::size_t folds = 10;
  double train_fraction = 0.8;
  bool no_minmax = false;
  bool timings_in_files = false;
  MlHyper hyper;
};

struct TrainedMl {
  std::string name;       // display name
  std::string file_name;  // lowercase stem
  CvResult cv;
  nlohmann::json bundle;  // self-contained model for `predict`
};

std::vector<TokenDoc> take_docs(const std::vector<TokenDoc>& docs,
                                std::span<const std::size_t> idx) {
  std::vector<TokenDoc> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(docs[i]);
  return out;
}

std::vector<int> labels_of(std::span<const TokenDoc> docs) {
  std::vector<int> y;
  y.reserve(docs.size());
  for (const auto& d : docs) y.push_back(d.label);
  return y;
}

// Train one classical model on (x, y) and return (bundle json fragment,
// scorer for a transformed matrix).
TrainedMl train_ml_model(const std::string& kind, const std::vector<TokenDoc>& train_docs,
                         const TrainMlOpts& opt) {
  const std::uint64_t cv_seed = derive_seed(opt.global.seed, kStreamCv);
  const std::uint64_t svm_seed = derive_seed(opt.global.seed, kStreamSvm);
  const MlHyper& hyper = opt.hyper;
  const TfidfFeaturizer featurizer(TfidfConfig{}, !opt.no_minmax);

  auto trainer = [&](const CsrMatrix& x, const std::vector<int>& y,
                     const CsrMatrix& x_val) -> ScoredPrediction {
    std::vector<double> scores;
    if (kind == "lr") {
      const LinearModel model = lr_train(x, y, hyper.reg_lambda);
      scores = decision_scores(model, x_val);
    } else if (kind == "svm") {
      const LinearModel model = svm_train(x, y, hyper.reg_lambda, hyper.svm_epochs, svm_seed);
      scores = decision_scores(model, x_val);
    } else {
      const GbdtModel model = gbdt_train(x, y, hyper.gbdt);
      scores = gbdt_decision_scores(model, x_val);
    }
    std::vector<int> labels = predict_labels(scores);
    return {std::move(scores), std::move(labels)};
  };

  TrainedMl result;
  result.file_name = kind;
  result.name = kind == "lr" ? "LR" : kind == "svm" ? "SVM" : "GBDT";
  result.cv = cross_validate(trainer, featurizer, train_docs, opt.folds, cv_seed,
                             opt.global.threads);

  // Final model for `predict`: featurizer and trainer refit on the full
  // training split.
  const auto fitted = featurizer.fit(train_docs);
  const CsrMatrix x = fitted.transform(train_docs);
  const std::vector<int> y = labels_of(train_docs);
  nlohmann::json model_json;
  if (kind == "lr") {
    model_json = linear_to_json(lr_train(x, y, hyper.reg_lambda));
  } else if (kind == "svm") {
    model_json = linear_to_json(svm_train(x, y, hyper.reg_lambda, hyper.svm_epochs, svm_seed));
  } else {
    model_json = gbdt_to_json(gbdt_train(x, y, hyper.gbdt));
  }
  result.bundle = nlohmann::json{
      {"format_version", 1},
      {"type", kind},
      {"tfidf", tfidf_to_json(fitted.model, fitted.scaler ? &*fitted.scaler : nullptr)},
      {"model", std::move(model_json)},
  };
  return result;
}

std::vector<TrainedMl> run_ml_suite(const std::vector<TokenDoc>& train_docs,
                                    const TrainMlOpts& opt) {
  std::vector<std::string> kinds;
  if (opt.all) {
    kinds = {"lr", "svm", "gbdt"};
  } else {
    kinds = {opt.model};
  }
  std::vector<TrainedMl> models;
  for (const auto& kind : kinds) {
    std::cout << "cross-validating " << kind << " (" << opt.folds << " folds)...\n";
    models.push_back(train_ml_model(kind, train_docs, opt));
    const auto& cv = models.back().cv;
    std::cout << "  " << models.back().name << ": acc " << fmt_fixed(cv.mean.accuracy)
              << ", f1 " << fmt_fixed(cv.mean.f1) << ", mean fold time "
              << fmt_fixed(cv.mean.wall_time_s, 2) << " s\n";
  }
  std::sort(models.begin(), models.end(), [](const TrainedMl& a, const TrainedMl& b) {
    if (a.cv.mean.f1 != b.cv.mean.f1) return a.cv.mean.f1 > b.cv.mean.f1;
    return a.name < b.name;
  });
  return models;
}

void run_train_ml(const TrainMlOpts& opt) {
  const fs::path out_dir = ensure_out_dir(opt.global);
  const std::vector<TokenDoc> docs = load_token_docs(opt.data);
  const std::vector<int> labels = labels_of(docs);
  const SplitIndices split = stratified_split_indices(
      labels, opt.train_fraction, derive_seed(opt.global.seed, kStreamSplit));
  const std::vector<TokenDoc> train_docs = take_docs(docs, split.train);
  std::cout << "corpus: " << docs.size() << " docs; CV on " << train_docs.size()
            << " training docs\n";

  const std::vector<TrainedMl> models = run_ml_suite(train_docs, opt);

  std::vector<NamedReport> rows;
  nlohmann::json cv_json = nlohmann::json::object();
  for (const auto& m : models) {
    rows.push_back({m.name, m.cv.mean});
    cv_json[m.file_name] = cv_result_to_json(m.cv, opt.timings_in_files);
    write_json_file(out_dir / ("model_" + m.file_name + ".json"), m.bundle);
  }
  const std::string table = render_model_table(rows, opt.timings_in_files);
  write_text_file(out_dir / "cv_table.txt", table);
  write_json_file(out_dir / "cv_results.json", cv_json);

  std::cout << "\n" << render_model_table(rows, /*include_time=*/true);
  std::cout << "wrote " << (out_dir / "cv_table.txt").string() << ", "
            << (out_dir / "cv_results.json").string() << "\n";
}

// ------------------------------------------------------------------ train-dl

struct DlOpts {
  GlobalOpts global;
  std::string data;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::size_t vocab_cap = 13600;
  bool timings_in_files = false;
  HyperParams hp;
};

void add_hp_opts(CLI::App* sub, HyperParams& hp) {
  sub->add_option("--lr", hp.lr, "Learning rate")->capture_default_str();
  sub->add_option("--weight-decay", hp.weight_decay, "Decoupled weight decay")
      ->capture_default_str();
  sub->add_option("--label-smoothing", hp.label_smoothing, "Label smoothing epsilon")
      ->capture_default_str();
  sub->add_option("--dropout", hp.dropout, "Dropout probability")->capture_default_str();
  sub->add_option("--embed-dim", hp.embed_dim, "Embedding dimension")->capture_default_str();
  sub->add_option("--hidden-dim1", hp.hidden_dim1, "First BiLSTM hidden size")
      ->capture_default_str();
  sub->add_option("--hidden-dim2", hp.hidden_dim2, "Second BiLSTM hidden size")
      ->capture_default_str();
  sub->add_option("--batch-size", hp.batch_size, "Mini-batch size")->capture_default_str();
  sub->add_option("--max-len", hp.max_len, "Sequence length cap (tail truncation)")
      ->capture_default_str();
  sub->add_option("--max-epochs", hp.max_epochs, "Epoch cap")->capture_default_str();
  sub->add_option("--patience", hp.patience, "Early-stopping patience")->capture_default_str();
}

struct DlDataSplits {
  std::vector<TokenDoc> train;  // training split minus validation
  std::vector<TokenDoc> val;
  std::vector<TokenDoc> test;
  Vocabulary vocab;  // built from the full training split
};

DlDataSplits prepare_dl_data(const std::vector<TokenDoc>& docs, double train_fraction,
                             double val_fraction, std::size_t vocab_cap, std::uint64_t seed) {
  const std::vector<int> labels = labels_of(docs);
  const SplitIndices split =
      stratified_split_indices(labels, train_fraction, derive_seed(seed, kStreamSplit));
  const std::vector<TokenDoc> train_full = take_docs(docs, split.train);

  const std::vector<int> train_labels = labels_of(train_full);
  const SplitIndices val_split = stratified_split_indices(
      train_labels, 1.0 - val_fraction, derive_seed(seed, kStreamValSplit));

  DlDataSplits out;
  out.vocab = build_vocab(train_full, vocab_cap);
  out.train = take_docs(train_full, val_split.train);
  out.val = take_docs(train_full, val_split.test);
  out.test = take_docs(docs, split.test);
  return out;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string csv = "epoch,train_loss,val_loss,train_acc,val_acc\n";
  for (const auto& e : history) {
    csv += std::to_string(e.epoch) + "," + fmt_fixed(e.train_loss, 6) + "," +
           fmt_fixed(e.val_loss, 6) + "," + fmt_fixed(e.train_acc, 6) + "," +
           fmt_fixed(e.val_acc, 6) + "\n";
  }
  return csv;
}

EvalReport evaluate_dl_on(const NeuralParams<double>& params, const HyperParams& hp,
                          const std::vector<TokenDoc>& test_docs, const Vocabulary& vocab) {
  const std::vector<EncodedDoc> test_enc = encode_docs(test_docs, vocab, hp.max_len);
  const NetworkEval eval = evaluate_network(params, test_enc, hp);
  const std::vector<int> y = labels_of(test_docs);
  return evaluate(y, eval.p1, eval.predicted);
}

void run_train_dl(const DlOpts& opt) {
  validate_hyperparams(opt.hp);
  const fs::path out_dir = ensure_out_dir(opt.global);
  const std::vector<TokenDoc> docs = load_token_docs(opt.data);
  const DlDataSplits data = prepare_dl_data(docs, opt.train_fraction, opt.val_fraction,
                                            opt.vocab_cap, opt.global.seed);
  std::cout << "train " << data.train.size() << " / val " << data.val.size() << " / test "
            << data.test.size() << " docs, vocab " << data.vocab.size() << " (params "
            << count_params(opt.hp, data.vocab.size()) << ")\n";

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult result = train_network(data.vocab, data.train, data.val, opt.hp,
                                           derive_seed(opt.global.seed, kStreamDlTrain));
  const double train_time = seconds_since(t0);
  for (const auto& e : result.history) {
    std::cout << "epoch " << e.epoch << ": train loss " << fmt_fixed(e.train_loss, 4)
              << " acc " << fmt_fixed(e.train_acc, 4) << " | val loss "
              << fmt_fixed(e.val_loss, 4) << " acc " << fmt_fixed(e.val_acc, 4) << "\n";
  }
  std::cout << "best epoch " << result.best_epoch << " (val loss "
            << fmt_fixed(result.best_val_loss, 4) << "), trained in " << fmt_fixed(train_time, 1)
            << " s\n";

  const fs::path ckpt_path = out_dir / "model.ckpt";
  save_checkpoint(ckpt_path, result.best_params, opt.hp, vocab_hash(data.vocab),
                  data.vocab.size());
  write_json_file(out_dir / "vocab.json", vocab_to_json(data.vocab));
  write_text_file(out_dir / "history.csv", history_csv(result.history));

  // Test metrics come from the reloaded checkpoint, so what is reported is
  // exactly what `predict` will serve from disk.
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  EvalReport report = evaluate_dl_on(ckpt.params, ckpt.hp, data.test, data.vocab);
  report.wall_time_s = train_time;

  write_json_file(out_dir / "dl_report.json", eval_report_to_json(report, opt.timings_in_files));
  std::string text = render_per_class_table(report);
  text += "\n";
  text += render_model_table({{"BiLSTM+Attention", report}}, opt.timings_in_files);
  write_text_file(out_dir / "dl_report.txt", text);

  std::cout << "\n" << render_per_class_table(report) << "\n";
  std::cout << "test accuracy " << fmt_fixed(report.accuracy) << ", macro f1 "
            << fmt_fixed(report.f1) << "\n";
  std::cout << "wrote " << ckpt_path.string() << ", " << (out_dir / "dl_report.json").string()
            << ", " << (out_dir / "history.csv").string() << "\n";
}

// ---------------------------------------------------------------------- tune

struct TuneOpts {
  GlobalOpts global;
  std::string data;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::size_t vocab_cap = 13600;
  std::size_t trials = 13;
  std::size_t budget_epochs = 4;
  HyperParams base;
};

std::string trials_csv(const SearchResult& result) {
  std::string csv =
      "trial,lr,weight_decay,label_smoothing,dropout,hidden_dim1,val_loss,val_acc,best_epoch,"
      "epochs_ran\n";
  for (const auto& t : result.trials) {
    char line[256];
    std::snprintf(line, sizeof(line), "%zu,%.8g,%.8g,%.8g,%.8g,%zu,%.6f,%.6f,%zu,%zu\n",
                  t.index, t.hp.lr, t.hp.weight_decay, t.hp.label_smoothing, t.hp.dropout,
                  t.hp.hidden_dim1, t.val_loss, t.val_acc, t.best_epoch, t.epochs_ran);
    csv += line;
  }
  return csv;
}

std::string best_config_ini(const HyperParams& hp) {
  std::string ini = "# best hyperparameters found by `tune`; pass via --config\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "lr=%.8g\n", hp.lr);
  ini += buf;
  std::snprintf(buf, sizeof(buf), "weight-decay=%.8g\n", hp.weight_decay);
  ini += buf;
  std::snprintf(buf, sizeof(buf), "label-smoothing=%.8g\n", hp.label_smoothing);
  ini += buf;
  std::snprintf(buf, sizeof(buf), "dropout=%.8g\n", hp.dropout);
  ini += buf;
  ini += "hidden-dim1=" + std::to_string(hp.hidden_dim1) + "\n";
  return ini;
}

void run_tune(const TuneOpts& opt) {
  const fs::path out_dir = ensure_out_dir(opt.global);
  const std::vector<TokenDoc> docs = load_token_docs(opt.data);
  const DlDataSplits data = prepare_dl_data(docs, opt.train_fraction, opt.val_fraction,
                                            opt.vocab_cap, opt.global.seed);
  std::cout << "tuning on " << data.train.size() << " train / " << data.val.size()
            << " val docs, " << opt.trials << " trials x " << opt.budget_epochs << " epochs\n";

  const SearchResult result =
      random_search(data.vocab, data.train, data.val, opt.base, SearchSpace{}, opt.trials,
                    derive_seed(opt.global.seed, kStreamTune), opt.budget_epochs);
  for (const auto& t : result.trials) {
    std::cout << "trial " << t.index << ": lr " << t.hp.lr << ", wd " << t.hp.weight_decay
              << ", ls " << t.hp.label_smoothing << ", dropout " << t.hp.dropout << ", h1 "
              << t.hp.hidden_dim1 << " -> val loss " << fmt_fixed(t.val_loss, 4) << "\n";
  }
  std::cout << "best trial " << result.best_index << " (val loss "
            << fmt_fixed(result.trials[result.best_index].val_loss, 4) << ")\n";

  write_text_file(out_dir / "trials.csv", trials_csv(result));
  write_text_file(out_dir / "best_config.ini", best_config_ini(result.best));
  std::cout << "wrote " << (out_dir / "trials.csv").string() << ", "
            << (out_dir / "best_config.ini").string() << "\n";
}

// ------------------------------------------------------------------- predict

struct PredictOpts {
  GlobalOpts global;
  std::string model;
  std::string vocab;
  std::string input;
  std::string output;
  std::string slang;
};

bool is_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file: " + path);
  char magic[sizeof(kCheckpointMagic)] = {};
  in.read(magic, sizeof(magic));
  return in && std::memcmp(magic, kCheckpointMagic, sizeof(magic)) == 0;
}

struct PredictionRow {
  int label = 0;
  double p1 = 0.0;
  bool empty_doc = false;
};

// Chunked parallel map over docs; models are immutable so sharing is safe.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  const std::size_t workers = std::min(threads, n);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

void run_predict(const PredictOpts& opt) {
  const SlangDict dict = load_dict(opt.slang);

  std::vector<std::string> lines;
  if (opt.input.empty()) {
    std::string line;
    while (std::getline(std::cin, line)) lines.push_back(line);
  } else {
    std::ifstream in(opt.input, std::ios::binary);
    if (!in) throw InputError("cannot open input file: " + opt.input);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }

  std::vector<TokenDoc> docs;
  docs.reserve(lines.size());
  for (const auto& line : lines) docs.push_back(run_pipeline(line, dict, 0));

  std::vector<PredictionRow> rows(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) rows[i].empty_doc = docs[i].tokens.empty();

  if (is_checkpoint_file(opt.model)) {
    if (opt.vocab.empty()) {
      throw InputError("predict: a checkpoint model needs --vocab");
    }
    std::ifstream vin(opt.vocab, std::ios::binary);
    if (!vin) throw InputError("cannot open vocabulary: " + opt.vocab);
    nlohmann::json vj;
    try {
      vin >> vj;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("vocabulary JSON unreadable: ") + e.what());
    }
    const Vocabulary vocab = vocab_from_json(vj);
    const Checkpoint ckpt = load_checkpoint(opt.model);
    if (ckpt.vocab_hash != vocab_hash(vocab)) {
      throw InputError("predict: vocabulary does not match the checkpoint");
    }
    const std::vector<EncodedDoc> enc = encode_docs(docs, vocab, ckpt.hp.max_len);
    parallel_chunks(enc.size(), opt.global.threads, [&](std::size_t begin, std::size_t end) {
      if (begin >= end) return;
      const std::span<const EncodedDoc> part(enc.data() + begin, end - begin);
      const NetworkEval eval = evaluate_network(ckpt.params, part, ckpt.hp);
      for (std::size_t i = begin; i < end; ++i) {
        rows[i].p1 = eval.p1[i - begin];
        rows[i].label = eval.predicted[i - begin];
      }
    });
  } else {
    std::ifstream min(opt.model, std::ios::binary);
    nlohmann::json bundle;
    try {
      min >> bundle;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("model bundle unreadable: ") + e.what());
    }
    if (!bundle.contains("type") || !bundle.contains("tfidf") || !bundle.contains("model")) {
      throw InputError("model bundle missing type/tfidf/model fields");
    }
    const std::string type = bundle["type"].get<std::string>();
    MinMaxScaler scaler;
    const TfidfModel tfidf = tfidf_from_json(bundle["tfidf"], &scaler);
    CsrMatrix x = tfidf_transform(tfidf, docs);
    if (!scaler.col_max.empty()) x = apply_minmax(scaler, x);

    std::vector<double> scores;
    if (type == "lr" || type == "svm") {
      const LinearModel model = linear_from_json(bundle["model"]);
      scores.resize(x.rows);
      parallel_chunks(x.rows, opt.global.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          scores[i] = x.dot_row(i, model.weights) + model.bias;
        }
      });
    } else if (type == "gbdt") {
      const GbdtModel model = gbdt_from_json(bundle["model"]);
      scores.resize(x.rows);
      parallel_chunks(x.rows, opt.global.threads, [&](std::size_t begin, std::size_t end) {
        if (begin >= end) return;
        std::vector<std::size_t> idx(end - begin);
        std::iota(idx.begin(), idx.end(), begin);
        const CsrMatrix part = x.take_rows(idx);
        const std::vector<double> part_scores = gbdt_decision_scores(model, part);
        std::copy(part_scores.begin(), part_scores.end(), scores.begin() + begin);
      });
    } else {
      throw InputError("model bundle has unknown type: " + type);
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
      rows[i].label = scores[i] > 0.0 ? 1 : 0;
      rows[i].p1 = detail::sigmoid(scores[i]);
    }
  }

  std::ostringstream out;
  for (const auto& row : rows) {
    out << (row.label == 1 ? "positive" : "negative") << "\t" << fmt_fixed(row.p1, 6);
    if (row.empty_doc) out << "\tempty-after-preprocessing";
    out << "\n";
  }
  if (opt.output.empty()) {
    std::cout << out.str();
  } else {
    write_text_file(opt.output, out.str());
  }
}

// ----------------------------------------------------------------- benchmark

struct BenchmarkOpts {
  GlobalOpts global;
  std::string data;
  std::size_t folds = 10;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::size_t vocab_cap = 13600;
  bool no_minmax = false;
  bool timings_in_files = false;
  HyperParams hp;
};

void run_benchmark(const BenchmarkOpts& opt) {
  validate_hyperparams(opt.hp);
  const fs::path out_dir = ensure_out_dir(opt.global);
  const std::vector<TokenDoc> docs = load_token_docs(opt.data);

  // Classical models: 10-fold CV on the training split picks the winner,
  // which is then refit on the whole split and scored on the test split.
  TrainMlOpts ml;
  ml.global = opt.global;
  ml.all = true;
  ml.folds = opt.folds;
  ml.train_fraction = opt.train_fraction;
  ml.no_minmax = opt.no_minmax;

  const std::vector<int> labels = labels_of(docs);
  const SplitIndices split = stratified_split_indices(
      labels, opt.train_fraction, derive_seed(opt.global.seed, kStreamSplit));
  const std::vector<TokenDoc> train_docs = take_docs(docs, split.train);
  const std::vector<TokenDoc> test_docs = take_docs(docs, split.test);
  std::cout << "benchmark: " << train_docs.size() << " train / " << test_docs.size()
            << " test docs\n";

  const std::vector<TrainedMl> models = run_ml_suite(train_docs, ml);
  const TrainedMl& best = models.front();
  std::cout << "best classical model by CV F1: " << best.name << "\n";

  const TfidfFeaturizer featurizer(TfidfConfig{}, !opt.no_minmax);
  const auto fitted = featurizer.fit(train_docs);
  const CsrMatrix x_train = fitted.transform(train_docs);
  const CsrMatrix x_test = fitted.transform(test_docs);
  const std::vector<int> y_train = labels_of(train_docs);
  const std::vector<int> y_test = labels_of(test_docs);

  std::vector<double> ml_scores;
  if (best.file_name == "lr") {
    ml_scores = decision_scores(lr_train(x_train, y_train, ml.hyper.reg_lambda), x_test);
  } else if (best.file_name == "svm") {
    ml_scores = decision_scores(
        svm_train(x_train, y_train, ml.hyper.reg_lambda, ml.hyper.svm_epochs,
                  derive_seed(opt.global.seed, kStreamSvm)),
        x_test);
  } else {
    ml_scores = gbdt_decision_scores(gbdt_train(x_train, y_train, ml.hyper.gbdt), x_test);
  }
  const EvalReport ml_report = evaluate(y_test, ml_scores, predict_labels(ml_scores));

  // Deep model on the same split.
  const DlDataSplits data = prepare_dl_data(docs, opt.train_fraction, opt.val_fraction,
                                            opt.vocab_cap, opt.global.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult dl = train_network(data.vocab, data.train, data.val, opt.hp,
                                       derive_seed(opt.global.seed, kStreamDlTrain));
  const double dl_time = seconds_since(t0);
  EvalReport dl_report = evaluate_dl_on(dl.best_params, opt.hp, data.test, data.vocab);
  dl_report.wall_time_s = dl_time;
  std::cout << "DL trained in " << fmt_fixed(dl_time, 1) << " s (best epoch " << dl.best_epoch
            << ")\n";

  const std::string ml_label = "ML (" + best.name + ")";
  const std::string dl_label = "DL (BiLSTM + Attention)";
  const std::string comparison = render_comparison_table({
      {ml_label, ml_report.accuracy, ml_report.f1},
      {dl_label, dl_report.accuracy, dl_report.f1},
  });
  write_text_file(out_dir / "comparison.txt", comparison);

  nlohmann::json cv_json = nlohmann::json::object();
  for (const auto& m : models) cv_json[m.file_name] = cv_result_to_json(m.cv, opt.timings_in_files);
  write_json_file(out_dir / "benchmark.json",
                  nlohmann::json{{"ml", {{"name", best.name},
                                         {"report", eval_report_to_json(ml_report,
                                                                        opt.timings_in_files)}}},
                                 {"dl", eval_report_to_json(dl_report, opt.timings_in_files)},
                                 {"cv", std::move(cv_json)}});

  std::cout << "\n" << comparison;
  std::cout << "wrote " << (out_dir / "comparison.txt").string() << ", "
            << (out_dir / "benchmark.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sentibench: Indonesian review sentiment benchmark toolkit"};
  app.require_subcommand(1);

  PreprocessOpts pre;
  CLI::App* sub_pre = app.add_subcommand("preprocess", "Clean and tokenize a labeled corpus");
  add_global_opts(sub_pre, pre.global);
  sub_pre->add_option("--input", pre.input, "Raw corpus (CSV or JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  sub_pre->add_option("--output", pre.output, "Output JSONL path (default <out-dir>/tokens.jsonl)");
  sub_pre->add_option("--slang", pre.slang, "Slang dictionary TSV (default: builtin)")
      ->check(CLI::ExistingFile);
  sub_pre->add_option("--text-field", pre.text_field, "Text column/field name")
      ->capture_default_str();
  sub_pre->add_option("--label-field", pre.label_field, "Label column/field name")
      ->capture_default_str();
  sub_pre->callback([&pre] { run_preprocess(pre); });

  TrainMlOpts ml;
  CLI::App* sub_ml =
      app.add_subcommand("train-ml", "Cross-validate classical models on TF-IDF features");
  add_global_opts(sub_ml, ml.global);
  sub_ml->add_option("--data", ml.data, "Preprocessed corpus (JSONL from `preprocess`)")
      ->required()
      ->check(CLI::ExistingFile);
  sub_ml->add_option("--model", ml.model, "Model to train")
      ->check(CLI::IsMember({"lr", "svm", "gbdt"}))
      ->capture_default_str();
  sub_ml->add_flag("--all", ml.all, "Train all three models and sort by F1");
  sub_ml->add_option("--folds", ml.folds, "Cross-validation folds")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000}));
  sub_ml->add_option("--train-fraction", ml.train_fraction, "Training split fraction")
      ->capture_default_str();
  sub_ml->add_flag("--no-minmax", ml.no_minmax, "Skip MinMax feature scaling");
  sub_ml->add_flag("--timings-in-files", ml.timings_in_files,
                   "Write wall times into report files (breaks byte determinism)");
  double ml_lambda = 0.0;
  CLI::Option* ml_lambda_opt =
      sub_ml->add_option("--lambda", ml_lambda, "L2 strength for lr/svm (default 1/n)");
  sub_ml->add_option("--svm-epochs", ml.hyper.svm_epochs, "Pegasos epochs")
      ->capture_default_str();
  sub_ml->add_option("--gbdt-trees", ml.hyper.gbdt.n_trees, "Boosting rounds")
      ->capture_default_str();
  sub_ml->add_option("--gbdt-leaves", ml.hyper.gbdt.max_leaves, "Max leaves per tree")
      ->capture_default_str();
  sub_ml->add_option("--gbdt-shrinkage", ml.hyper.gbdt.shrinkage, "Learning rate of boosting")
      ->capture_default_str();
  sub_ml->callback([&ml, &ml_lambda, ml_lambda_opt] {
    if (ml_lambda_opt->count() > 0) ml.hyper.reg_lambda = ml_lambda;
    run_train_ml(ml);
  });

  DlOpts dl;
  CLI::App* sub_dl =
      app.add_subcommand("train-dl", "Train the BiLSTM+Attention model and report test metrics");
  add_global_opts(sub_dl, dl.global);
  sub_dl->add_option("--data", dl.data, "Preprocessed corpus (JSONL from `preprocess`)")
      ->required()
      ->check(CLI::ExistingFile);
  sub_dl->add_option("--train-fraction", dl.train_fraction, "Training split fraction")
      ->capture_default_str();
  sub_dl->add_option("--val-fraction", dl.val_fraction, "Validation share of the training split")
      ->capture_default_str();
  sub_dl->add_option("--vocab-cap", dl.vocab_cap, "Vocabulary cap including PAD/UNK")
      ->capture_default_str();
  sub_dl->add_flag("--timings-in-files", dl.timings_in_files,
                   "Write wall times into report files (breaks byte determinism)");
  add_hp_opts(sub_dl, dl.hp);
  sub_dl->callback([&dl] { run_train_dl(dl); });

  TuneOpts tune;
  CLI::App* sub_tune =
      app.add_subcommand("tune", "Random hyperparameter search for the deep model");
  add_global_opts(sub_tune, tune.global);
  sub_tune->add_option("--data", tune.data, "Preprocessed corpus (JSONL from `preprocess`)")
      ->required()
      ->check(CLI::ExistingFile);
  sub_tune->add_option("--trials", tune.trials, "Number of random trials")->capture_default_str();
  sub_tune->add_option("--budget-epochs", tune.budget_epochs, "Epoch budget per trial")
      ->capture_default_str();
  sub_tune->add_option("--train-fraction", tune.train_fraction, "Training split fraction")
      ->capture_default_str();
  sub_tune->add_option("--val-fraction", tune.val_fraction,
                       "Validation share of the training split")
      ->capture_default_str();
  sub_tune->add_option("--vocab-cap", tune.vocab_cap, "Vocabulary cap including PAD/UNK")
      ->capture_default_str();
  add_hp_opts(sub_tune, tune.base);
  sub_tune->callback([&tune] { run_tune(tune); });

  PredictOpts pred;
  CLI::App* sub_pred =
      app.add_subcommand("predict", "Classify raw text lines with a trained model");
  add_global_opts(sub_pred, pred.global);
  sub_pred->add_option("--model", pred.model, "Model bundle JSON or checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  sub_pred->add_option("--vocab", pred.vocab, "Vocabulary JSON (needed for checkpoints)")
      ->check(CLI::ExistingFile);
  sub_pred->add_option("--input", pred.input, "Text file, one document per line (default stdin)")
      ->check(CLI::ExistingFile);
  sub_pred->add_option("--output", pred.output, "Output path (default stdout)");
  sub_pred->add_option("--slang", pred.slang, "Slang dictionary TSV (default: builtin)")
      ->check(CLI::ExistingFile);
  sub_pred->callback([&pred] { run_predict(pred); });

  BenchmarkOpts bench;
  CLI::App* sub_bench =
      app.add_subcommand("benchmark", "Best classical model vs the deep model on one split");
  add_global_opts(sub_bench, bench.global);
  sub_bench->add_option("--data", bench.data, "Preprocessed corpus (JSONL from `preprocess`)")
      ->required()
      ->check(CLI::ExistingFile);
  sub_bench->add_option("--folds", bench.folds, "Cross-validation folds for model selection")
      ->capture_default_str();
  sub_bench->add_option("--train-fraction", bench.train_fraction, "Training split fraction")
      ->capture_default_str();
  sub_bench->add_option("--val-fraction", bench.val_fraction,
                        "Validation share of the training split")
      ->capture_default_str();
  sub_bench->add_option("--vocab-cap", bench.vocab_cap, "Vocabulary cap including PAD/UNK")
      ->capture_default_str();
  sub_bench->add_flag("--no-minmax", bench.no_minmax, "Skip MinMax feature scaling");
  sub_bench->add_flag("--timings-in-files", bench.timings_in_files,
                      "Write wall times into report files (breaks byte determinism)");
  add_hp_opts(sub_bench, bench.hp);
  sub_bench->callback([&bench] { run_benchmark(bench); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are user errors
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
