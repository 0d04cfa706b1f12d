// Copyright 2026 The actrec Authors.
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

// actrec command line: gen, train, eval, predict, gradcheck.
//
// Exit codes: 0 success, 1 usage or config error, 2 data error,
// 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "actrec/checkpoint.hpp"
#include "actrec/datapipe.hpp"
#include "actrec/errors.hpp"
#include "actrec/eval.hpp"
#include "actrec/gradcheck.hpp"
#include "actrec/model.hpp"
#include "actrec/synth.hpp"
#include "actrec/train.hpp"

namespace fs = std::filesystem;
using namespace actrec;

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kData = 2, kNumeric = 3 };

const std::vector<std::string> kVariants{"navigation", "early", "late", "clicks"};
const std::vector<std::string> kMasks{"all", "clicks_only"};

std::size_t default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

Variant to_variant(const std::string& s) {
  auto v = parse_variant(s);
  if (!v) throw ConfigError("unknown variant '" + s + "'");
  return *v;
}

MaskMode to_mask(const std::string& s) {
  if (s == "all") return MaskMode::kAll;
  if (s == "clicks_only") return MaskMode::kClicksOnly;
  throw ConfigError("unknown mask mode '" + s + "'");
}

std::ifstream open_in(const fs::path& p, bool binary = false) {
  std::ifstream in(p, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  std::ofstream out(p, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

ParseResult read_log(const fs::path& p) {
  auto in = open_in(p);
  ParseResult r = parse_log(in);
  if (r.rejected > 0)
    std::cerr << "warning: " << r.rejected << " record(s) with no events rejected\n";
  return r;
}

Checkpoint read_checkpoint(const fs::path& p) {
  auto in = open_in(p, true);
  return load_checkpoint(in);
}

void write_checkpoint(const fs::path& p, const ModelParams<double>& params,
                      Variant variant) {
  auto out = open_out(p, true);
  save_checkpoint(out, params, variant);
  if (!out.flush()) throw DataError("write failed: " + p.string());
}

Vocabulary read_vocab(const fs::path& p) {
  auto in = open_in(p);
  return Vocabulary::load(in);
}

fs::path vocab_beside(const std::string& checkpoint) {
  return fs::path(checkpoint).parent_path() / "vocab.tsv";
}

// Flat key=value lines become `--key value` pairs placed right after the
// subcommand, so anything given on the command line wins.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::vector<std::string> injected;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    for (char& c : key)
      if (c == '_') c = '-';
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

void echo_config(const CLI::App& sub, std::ostream& out) {
  out << "# actrec " << sub.get_name() << " resolved config\n"
      << sub.config_to_str(true, false);
}

void print_report(const MetricReport& r, const std::string& label) {
  auto fmt = [](const Breakdown& b) {
    if (!b.precision) return std::string("n/a");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", *b.precision);
    return std::string(buf);
  };
  std::cout << label << " P@" << r.K << " global=" << fmt(r.global)
            << " view=" << fmt(r.view) << " click=" << fmt(r.click)
            << " (n_view=" << r.view.count << ", n_click=" << r.click.count << ")\n";
}

// ---- gen ----

struct GenArgs {
  SynthConfig synth;
  std::string out = "synth.jsonl";
  std::string truth;
};

int run_gen(const GenArgs& a) {
  a.synth.validate();
  SynthLog log = generate(a.synth);
  {
    auto out = open_out(a.out);
    write_log(out, log.sessions);
  }
  const std::string truth_path = a.truth.empty() ? a.out + ".truth" : a.truth;
  {
    auto out = open_out(truth_path);
    log.truth.write(out);
  }
  std::cout << "wrote " << log.sessions.size() << " sessions to " << a.out
            << " (truth: " << truth_path << ")\n";
  return kOk;
}

// ---- train ----

struct TrainArgs {
  TrainConfig cfg;
  std::string variant = "late";
  std::string mask = "all";
  std::string data;
  std::string out_dir;
  std::size_t min_count = 10;
  EncodeOptions enc;
  double valid_fraction = 0.2;
  std::size_t top_k = 10;
  std::size_t n_boot = 30;
};

int run_train(TrainArgs a, const std::string& resolved) {
  a.cfg.variant = to_variant(a.variant);
  a.cfg.mask_mode = to_mask(a.mask);
  a.cfg.validate();
  if (!(a.valid_fraction > 0.0 && a.valid_fraction < 1.0))
    throw ConfigError("valid_fraction must be in (0, 1)");

  ParseResult parsed = read_log(a.data);
  if (parsed.sessions.empty()) throw DataError(a.data + ": no sessions");
  const Vocabulary vocab = build_vocab(parsed.sessions, a.min_count);

  Rng split_rng = Rng(a.cfg.seed).derive(2);
  auto parts = split<RawSession>(parsed.sessions, a.valid_fraction, split_rng);
  const auto train_seqs = encode_all(parts.train, vocab, a.enc);
  const auto valid_seqs = encode_all(parts.valid, vocab, a.enc);
  if (train_seqs.empty()) throw DataError(a.data + ": no training sequences with two or more events");

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  {
    auto out = open_out(dir / "config.ini");
    out << resolved;
  }
  {
    auto out = open_out(dir / "vocab.tsv");
    vocab.save(out);
  }
  {
    auto out = open_out(dir / "valid.jsonl");
    write_log(out, parts.valid);
  }
  std::cout << "vocabulary " << vocab.size() << " items; " << train_seqs.size()
            << " train / " << valid_seqs.size() << " validation sequences\n";

  EvalOptions eo;
  eo.K = a.top_k;
  eo.n_boot = a.n_boot;
  eo.seed = a.cfg.seed;
  eo.threads = a.cfg.threads;

  TrainHook hook;
  if (a.cfg.eval_every > 0) {
    hook = [&](std::size_t it, const ModelParams<double>& p) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_%06zu.ckpt", it);
      write_checkpoint(dir / name, p, a.cfg.variant);
      if (!valid_seqs.empty())
        print_report(evaluate(p, a.cfg.variant, valid_seqs, eo).report,
                     "iteration " + std::to_string(it) + " validation");
    };
  }

  TrainResult result = train(a.cfg, train_seqs, vocab.size(), hook);
  write_checkpoint(dir / "model.ckpt", result.params, a.cfg.variant);
  {
    auto out = open_out(dir / "history.csv");
    result.history.write_csv(out);
  }
  if (result.diverged) {
    std::cerr << "error: training diverged: " << result.message
              << "; last good parameters saved to " << (dir / "model.ckpt").string() << "\n";
    return kNumeric;
  }
  if (!result.history.entries.empty())
    std::cout << "final train loss " << result.history.entries.back().loss << "\n";
  if (valid_seqs.empty()) {
    std::cout << "no validation sequences; skipping evaluation\n";
  } else {
    print_report(evaluate(result.params, a.cfg.variant, valid_seqs, eo).report,
                 "final validation");
  }
  std::cout << "artifacts in " << dir.string() << "\n";
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::vector<std::string> names;
  std::string data;
  std::string vocab;
  std::string format = "csv";
  std::string out;
  EncodeOptions enc;
  EvalOptions opts;
};

int run_eval(const EvalArgs& a) {
  if (!a.names.empty() && a.names.size() != a.checkpoints.size())
    throw ConfigError("--name must be given once per checkpoint");
  const Vocabulary vocab =
      read_vocab(a.vocab.empty() ? vocab_beside(a.checkpoints.front()) : fs::path(a.vocab));
  ParseResult parsed = read_log(a.data);
  const auto seqs = encode_all(parsed.sessions, vocab, a.enc);
  if (seqs.empty()) throw DataError(a.data + ": no sequences with two or more events");

  std::ostringstream buf;
  if (a.format == "csv") buf << MetricReport::csv_header() << "\n";
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    const Checkpoint ck = read_checkpoint(a.checkpoints[i]);
    if (ck.params.V_embed.cols() != vocab.size())
      throw DataError(a.checkpoints[i] + ": vocabulary size " +
                      std::to_string(ck.params.V_embed.cols()) + " does not match vocab file (" +
                      std::to_string(vocab.size()) + ")");
    const MetricReport r = evaluate(ck.params, ck.variant, seqs, a.opts).report;
    const std::string name =
        a.names.empty() ? std::string(variant_name(ck.variant)) : a.names[i];
    if (a.format == "csv")
      buf << r.csv_row(name) << "\n";
    else
      buf << "{\"model\":\"" << name << "\",\"report\":" << r.to_json() << "}\n";
  }
  if (a.out.empty()) {
    std::cout << buf.str();
  } else {
    auto out = open_out(a.out);
    out << buf.str();
  }
  return kOk;
}

// ---- predict ----

struct PredictArgs {
  std::string checkpoint;
  std::string vocab;
  std::size_t top_k = 10;
  EncodeOptions enc;
};

int run_predict(const PredictArgs& a) {
  const Checkpoint ck = read_checkpoint(a.checkpoint);
  const Vocabulary vocab =
      read_vocab(a.vocab.empty() ? vocab_beside(a.checkpoint) : fs::path(a.vocab));
  if (ck.params.V_embed.cols() != vocab.size())
    throw DataError("checkpoint and vocabulary sizes differ");
  if (a.top_k < 1 || static_cast<Index>(a.top_k) > vocab.size())
    throw ConfigError("top_k must be in [1, " + std::to_string(vocab.size()) + "]");

  const ParseResult parsed = parse_log(std::cin);
  for (const RawSession& s : parsed.sessions) {
    const EncodedSequence seq = encode(s, vocab, a.enc);
    const Vector<double> probs = softmax(next_item_logits(ck.params, seq, ck.variant));
    for (Index i : topk(probs, static_cast<Index>(a.top_k))) {
      char p[32];
      std::snprintf(p, sizeof p, "%.6g", probs(i));
      std::cout << s.user_id << "\t" << vocab.id_of(static_cast<ItemIndex>(i)) << "\t" << p
                << "\n";
    }
  }
  return kOk;
}

// ---- gradcheck ----

struct GradcheckArgs {
  std::string variant = "late";
  std::string mask = "both";
  std::uint64_t seed = 0;
  bool corrupt = false;
};

int run_gradcheck(const GradcheckArgs& a) {
  constexpr double kTolerance = 1e-4;
  GradcheckOptions opts;
  if (a.mask != "both") opts.masks = {to_mask(a.mask)};
  opts.corrupt = a.corrupt;
  const FdReport r = run_gradcheck(to_variant(a.variant), a.seed, opts);
  std::printf("variant=%s seed=%llu mask=%s max_rel_error=%.6e worst=%s[%lld] checked=%lld\n",
              a.variant.c_str(), static_cast<unsigned long long>(a.seed), a.mask.c_str(),
              r.max_rel_error, r.worst_tensor.c_str(), static_cast<long long>(r.worst_entry),
              static_cast<long long>(r.checked));
  if (r.max_rel_error >= kTolerance) {
    std::fprintf(stderr, "gradcheck FAILED: %.3e >= %.0e\n", r.max_rel_error, kTolerance);
    return kNumeric;
  }
  return kOk;
}

void add_encode_options(CLI::App* sub, EncodeOptions& enc) {
  sub->add_option("--max-len", enc.max_len, "Keep only the last N events of a session")
      ->capture_default_str();
  sub->add_option("--max-recs", enc.max_recs, "Keep only the first N recommendations per event")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }

  CLI::App app{"Action-conditional recurrent recommender: synthetic data, training, evaluation"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  const std::string config_help = "Flat key=value file; command-line flags override it";

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic log and its truth sidecar");
  g->add_option("--config", config_help)->configurable(false);
  g->add_option("--out", gen.out, "Log file to write")->capture_default_str();
  g->add_option("--truth", gen.truth, "Truth file (default: <out>.truth)");
  g->add_option("--seed", gen.synth.seed)->capture_default_str();
  g->add_option("--sessions", gen.synth.n_sessions)->capture_default_str();
  g->add_option("--items", gen.synth.V, "Catalog size")->capture_default_str();
  g->add_option("--len-min", gen.synth.len_min)->capture_default_str();
  g->add_option("--len-max", gen.synth.len_max)->capture_default_str();
  g->add_option("--zipf-s", gen.synth.zipf_s)->capture_default_str();
  g->add_option("--clusters", gen.synth.n_clusters)->capture_default_str();
  g->add_option("--p-intra", gen.synth.p_intra)->capture_default_str();
  g->add_option("--rec-rate", gen.synth.rec_rate)->capture_default_str();
  g->add_option("--slate-size", gen.synth.slate_size)->capture_default_str();
  g->add_option("--p-follow", gen.synth.p_follow)->capture_default_str();

  TrainArgs tr;
  tr.cfg.threads = default_threads();
  auto* t = app.add_subcommand("train", "Train one model variant on a log file");
  t->add_option("--config", config_help)->configurable(false);
  t->add_option("--data", tr.data, "Log file")->required();
  t->add_option("--out-dir", tr.out_dir, "Directory for checkpoint, history, vocab")->required();
  t->add_option("--variant", tr.variant)->check(CLI::IsMember(kVariants))->capture_default_str();
  t->add_option("--d", tr.cfg.d, "Item embedding size")->capture_default_str();
  t->add_option("--k", tr.cfg.k, "Hidden state size")->capture_default_str();
  t->add_option("--batch-size", tr.cfg.batch_size)->capture_default_str();
  t->add_option("--iterations", tr.cfg.iterations)->capture_default_str();
  t->add_option("--lr-start", tr.cfg.lr_start)->capture_default_str();
  t->add_option("--lr-end", tr.cfg.lr_end)->capture_default_str();
  t->add_option("--seed", tr.cfg.seed)->capture_default_str();
  t->add_option("--mask", tr.mask, "Loss mask (clicks always uses clicks_only)")
      ->check(CLI::IsMember(kMasks))
      ->capture_default_str();
  t->add_option("--eval-every", tr.cfg.eval_every, "Checkpoint and validate every N iterations")
      ->capture_default_str();
  t->add_option("--min-count", tr.min_count)->capture_default_str();
  add_encode_options(t, tr.enc);
  t->add_option("--valid-fraction", tr.valid_fraction)->capture_default_str();
  t->add_option("--top-k", tr.top_k, "Cutoff for the validation report")->capture_default_str();
  t->add_option("--n-boot", tr.n_boot)->capture_default_str();
  t->add_option("--threads", tr.cfg.threads)->capture_default_str();

  EvalArgs ev;
  ev.opts.threads = default_threads();
  auto* e = app.add_subcommand("eval", "Precision@K of one or more checkpoints");
  e->add_option("--config", config_help)->configurable(false);
  e->add_option("--checkpoint", ev.checkpoints, "Checkpoint file(s)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  e->add_option("--name", ev.names, "Row label per checkpoint (default: variant)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  e->add_option("--data", ev.data, "Log file")->required();
  e->add_option("--vocab", ev.vocab, "Vocabulary (default: vocab.tsv beside the first checkpoint)");
  e->add_option("--top-k,-K", ev.opts.K)->capture_default_str();
  add_encode_options(e, ev.enc);
  e->add_option("--n-boot", ev.opts.n_boot)->capture_default_str();
  e->add_option("--level", ev.opts.level, "Confidence level")->capture_default_str();
  e->add_option("--seed", ev.opts.seed, "Bootstrap seed")->capture_default_str();
  e->add_option("--format", ev.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  e->add_option("--out", ev.out, "Output file (default: stdout)");
  e->add_option("--threads", ev.opts.threads)->capture_default_str();

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Top-K next items for sessions read from stdin");
  p->add_option("--config", config_help)->configurable(false);
  p->add_option("--checkpoint", pr.checkpoint)->required();
  p->add_option("--vocab", pr.vocab, "Vocabulary (default: vocab.tsv beside the checkpoint)");
  p->add_option("--top-k,-K", pr.top_k)->capture_default_str();
  add_encode_options(p, pr.enc);

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  c->add_option("--config", config_help)->configurable(false);
  c->add_option("--variant", gc.variant)->check(CLI::IsMember(kVariants))->capture_default_str();
  c->add_option("--mask", gc.mask)
      ->check(CLI::IsMember({"all", "clicks_only", "both"}))
      ->capture_default_str();
  c->add_option("--seed", gc.seed)->capture_default_str();
  c->add_flag("--corrupt", gc.corrupt, "Perturb one analytic gradient entry")->group("");

  std::vector<const char*> cargs;
  for (const auto& s : args) cargs.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::ostringstream resolved;
  echo_config(*sub, resolved);
  std::cerr << resolved.str();

  try {
    if (sub == g) return run_gen(gen);
    if (sub == t) return run_train(tr, resolved.str());
    if (sub == e) return run_eval(ev);
    if (sub == p) return run_predict(pr);
    return run_gradcheck(gc);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfig;
  } catch (const ContractViolation& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfig;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kData;
  } catch (const NumericError& err) {
    std::cerr << "numeric error: " << err.what() << "\n";
    return kNumeric;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kConfig;
  }
}
