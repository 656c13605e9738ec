// cscale: command-line front end for the complaint-intensity pipeline.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <pthread.h>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "complaintscale/baseline.hpp"
#include "complaintscale/corpus.hpp"
#include "complaintscale/error.hpp"
#include "complaintscale/http_api.hpp"
#include "complaintscale/io.hpp"
#include "complaintscale/lexicon.hpp"
#include "complaintscale/metrics.hpp"
#include "complaintscale/popularity.hpp"
#include "complaintscale/reliability.hpp"
#include "complaintscale/scoring.hpp"
#include "complaintscale/rng.hpp"
#include "complaintscale/service.hpp"
#include "complaintscale/tuples.hpp"

using namespace cscale;

namespace {

std::vector<std::string> read_word_list(const std::string& lexicon_csv) {
  std::vector<std::string> words;
  for (const auto& e : load_lexicon(lexicon_csv).entries()) words.push_back(e.word);
  return words;
}

void print_json(const Json& j) { std::cout << j.dump(2) << '\n'; }

Json profiles_json(const ProfileSet& set) {
  Json out = Json::array();
  for (const auto& p : set.profiles) {
    out.push_back({{"annotator_id", p.annotator_id},
                   {"gold_accuracy", p.gold_accuracy},
                   {"gold_judged", p.gold_judged},
                   {"status", p.status == AnnotatorStatus::kActive ? "active" : "rejected"}});
  }
  return out;
}

CountingMode parse_counting(const std::string& s) {
  return s == "majority" ? CountingMode::kPerTupleMajority : CountingMode::kPerJudgment;
}

// Gold screening shared by score and shr: returns the judgments to aggregate.
std::vector<Judgment> screened(const std::vector<Judgment>& judgments,
                               const std::string& gold_path, double threshold,
                               Json* report) {
  if (gold_path.empty()) return judgments;
  const GoldMap gold = gold_map(read_gold(gold_path));
  const ProfileSet profiles = profile_annotators(judgments, gold, threshold);
  const AnnotatorPartition part = filter_annotators(profiles.profiles, threshold);
  std::set<std::string> rejected;
  for (const auto& p : part.rejected) rejected.insert(p.annotator_id);
  for (const auto& id : profiles.unscreened) {
    std::cerr << "warning: annotator '" << id << "' judged no gold tuple; kept unscreened\n";
  }
  if (report) {
    (*report)["annotators"] = profiles_json(profiles);
    (*report)["unscreened"] = profiles.unscreened;
    (*report)["rejected"] = rejected;
  }
  return screen_judgments(judgments, gold, rejected);
}

Json eval_report_json(const EvalReport& r) {
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"hashtag", f.hashtag},
                     {"lambda", f.lambda},
                     {"gamma", f.gamma},
                     {"pearson", f.metrics.pearson},
                     {"mse", f.metrics.mse},
                     {"n_test", f.metrics.n_test}});
  }
  return {{"mode", r.mode == EvalMode::kMixHashtag ? "mix" : "cross"},
          {"folds", folds},
          {"mean_pearson", r.mean_pearson},
          {"mean_mse", r.mean_mse}};
}

Json model_json(const PopularityModel& m) {
  return {{"variant", m.variant == PopularityVariant::kBaseline ? "baseline" : "density"},
          {"coefficients", m.coefficients},
          {"rank_deficient", m.rank_deficient}};
}

std::vector<PopularitySeries> select_series(const std::string& corpus,
                                            const std::string& intensities, double hours,
                                            const std::string& hashtag) {
  const auto posts = read_posts(corpus);
  const auto scores = read_intensities(intensities);
  std::vector<Post> chosen;
  for (const auto& p : posts) {
    if (hashtag.empty() || p.hashtag == hashtag) chosen.push_back(p);
  }
  if (chosen.empty()) throw UnknownHashtag("no posts under hashtag '" + hashtag + "'");
  return build_all_series(chosen, scores, hours);
}

int run_serve(const std::string& corpus, const std::string& tuples, const std::string& gold,
              const std::string& journal, const std::string& host, int port,
              const ServiceConfig& config) {
  // Block termination signals in every thread; one thread waits for them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  AnnotationService service(read_posts(corpus), read_tuples(tuples),
                            gold.empty() ? std::vector<GoldTuple>{} : read_gold(gold), config,
                            journal);
  ApiServer server(service);
  const int bound = server.bind(host, port);
  std::cerr << "serving on http://" << host << ':' << bound << " (journal " << journal
            << ", " << service.journal_events() << " events replayed)\n";
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.run();
  // If run() returned on its own, release the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-worst scaling pipeline for complaint intensity"};
  app.require_subcommand(1);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Clean, tokenize and length-filter raw posts");
  std::string in_path, out_path, report_path, emoticons_path, tokenizer_mode = "characters",
                                                                 lexicon_path;
  std::size_t min_len = 10, max_len = 200;
  ingest_cmd->add_option("--input", in_path, "Raw posts, JSON lines")->required();
  ingest_cmd->add_option("--out", out_path, "Cleaned corpus, JSON lines")->required();
  ingest_cmd->add_option("--report", report_path, "Write the cleaning report here too");
  ingest_cmd->add_option("--min-len", min_len, "Minimum tokens (inclusive)");
  ingest_cmd->add_option("--max-len", max_len, "Maximum tokens (inclusive)");
  ingest_cmd->add_option("--emoticons", emoticons_path,
                         "JSON object of emoticon -> token (default: built-in table)");
  ingest_cmd->add_option("--tokenizer", tokenizer_mode)
      ->check(CLI::IsMember({"characters", "lexicon"}));
  ingest_cmd->add_option("--lexicon", lexicon_path, "Word list CSV for --tokenizer lexicon");

  // design
  auto* design_cmd = app.add_subcommand("design", "Generate balanced 4-tuples");
  std::string corpus_path, tuples_path, stats_path;
  std::size_t multiplier = 2, max_pair = 2, swap_budget = 0;
  std::uint64_t seed = 0;
  design_cmd->add_option("--corpus", corpus_path, "Corpus JSON lines")->required();
  design_cmd->add_option("--multiplier", multiplier, "Tuples per post");
  design_cmd->add_option("--seed", seed);
  design_cmd->add_option("--max-pair", max_pair, "Pair co-occurrence target");
  design_cmd->add_option("--swap-budget", swap_budget, "Pair-balancing swaps (0: 50n)");
  design_cmd->add_option("--out", tuples_path, "Tuples, JSON lines")->required();
  design_cmd->add_option("--stats", stats_path, "Write design statistics here too");

  // score
  auto* score_cmd = app.add_subcommand("score", "Aggregate judgments into intensity scores");
  std::string judgments_path, gold_path, counting = "judgment";
  double threshold = kDefaultGoldThreshold;
  score_cmd->add_option("--tuples", tuples_path)->required();
  score_cmd->add_option("--judgments", judgments_path)->required();
  score_cmd->add_option("--gold", gold_path, "Gold answers, JSON lines");
  score_cmd->add_option("--threshold", threshold, "Gold accuracy threshold");
  score_cmd->add_option("--counting", counting)->check(CLI::IsMember({"judgment", "majority"}));
  score_cmd->add_option("--out", out_path, "Scores CSV")->required();

  // shr
  auto* shr_cmd = app.add_subcommand("shr", "Split-half reliability");
  std::size_t repeats = 100;
  unsigned threads = 0;
  std::string split_mode = "random";
  shr_cmd->add_option("--tuples", tuples_path)->required();
  shr_cmd->add_option("--judgments", judgments_path)->required();
  shr_cmd->add_option("--gold", gold_path, "Screen annotators against gold first");
  shr_cmd->add_option("--threshold", threshold);
  shr_cmd->add_option("--repeats", repeats);
  shr_cmd->add_option("--seed", seed);
  shr_cmd->add_option("--threads", threads);
  shr_cmd->add_option("--mode", split_mode)->check(CLI::IsMember({"random", "mirrored"}));
  shr_cmd->add_option("--counting", counting)->check(CLI::IsMember({"judgment", "majority"}));

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Lexicon correlations and distribution");
  std::string scores_path;
  analyze_cmd->add_option("--corpus", corpus_path)->required();
  analyze_cmd->add_option("--scores", scores_path)->required();
  analyze_cmd->add_option("--lexicon", lexicon_path, "word,valence,arousal CSV");
  analyze_cmd->add_option("--out", out_path, "Report JSON")->required();

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "Character n-gram kernel ridge baseline");
  baseline_cmd->require_subcommand(1);
  std::string model_path, eval_mode = "mix", hashtag;
  std::optional<double> lambda, gamma;
  bool tune = false, binary = false;
  std::size_t hash_bits = 18;
  auto add_features = [&](CLI::App* c) {
    c->add_option("--hash-bits", hash_bits, "log2 of the hashed feature space")
        ->check(CLI::Range(10, 32));
    c->add_flag("--binary", binary, "Binary n-gram indicators instead of counts");
  };
  auto* b_train = baseline_cmd->add_subcommand("train", "Fit a model on all scored posts");
  b_train->add_option("--corpus", corpus_path)->required();
  b_train->add_option("--scores", scores_path)->required();
  b_train->add_option("--model", model_path)->required();
  b_train->add_option("--lambda", lambda);
  b_train->add_option("--gamma", gamma);
  b_train->add_flag("--tune", tune, "Grid-search lambda and gamma on a seeded 8:1 dev split");
  b_train->add_option("--seed", seed);
  add_features(b_train);
  auto* b_eval = baseline_cmd->add_subcommand("eval", "Mix- or cross-hashtag evaluation");
  b_eval->add_option("--corpus", corpus_path)->required();
  b_eval->add_option("--scores", scores_path)->required();
  b_eval->add_option("--mode", eval_mode)->check(CLI::IsMember({"mix", "cross"}));
  b_eval->add_option("--hashtag", hashtag, "Cross mode: evaluate only this held-out hashtag");
  b_eval->add_option("--seed", seed);
  b_eval->add_option("--out", out_path, "Report JSON");
  add_features(b_eval);
  auto* b_predict = baseline_cmd->add_subcommand("predict", "Score a corpus with a model");
  b_predict->add_option("--corpus", corpus_path)->required();
  b_predict->add_option("--model", model_path)->required();
  b_predict->add_option("--out", out_path, "CSV post_id,score")->required();

  // popularity
  auto* pop_cmd = app.add_subcommand("popularity", "Popularity series and log-linear forecasts");
  pop_cmd->require_subcommand(1);
  std::string intensities_path, variant = "density";
  double bucket_hours = 2.0, train_fraction = 0.8;
  auto add_series_opts = [&](CLI::App* c) {
    c->add_option("--corpus", corpus_path)->required();
    c->add_option("--intensities", intensities_path, "CSV with post_id and score columns")
        ->required();
    c->add_option("--bucket-hours", bucket_hours);
    c->add_option("--hashtag", hashtag, "Restrict to one hashtag");
  };
  auto* p_build = pop_cmd->add_subcommand("build", "Write a bucketed series CSV");
  add_series_opts(p_build);
  p_build->add_option("--out", out_path, "Series CSV (default stdout)");
  auto* p_fit = pop_cmd->add_subcommand("fit", "Fit on each whole series");
  add_series_opts(p_fit);
  p_fit->add_option("--variant", variant)->check(CLI::IsMember({"baseline", "density"}));
  auto* p_eval = pop_cmd->add_subcommand("eval", "Chronological train/test evaluation");
  add_series_opts(p_eval);
  p_eval->add_option("--variant", variant)->check(CLI::IsMember({"baseline", "density"}));
  p_eval->add_option("--train-fraction", train_fraction);
  p_eval->add_option("--out", out_path, "Per-bucket actual vs predicted CSV");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  std::string journal_path, host = "127.0.0.1";
  int port = 8080;
  ServiceConfig service_config;
  bool no_fsync = false;
  serve_cmd->add_option("--corpus", corpus_path)->required();
  serve_cmd->add_option("--tuples", tuples_path)->required();
  serve_cmd->add_option("--gold", gold_path, "Gold tuples with post_ids, JSON lines");
  serve_cmd->add_option("--journal", journal_path)->required();
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);
  serve_cmd->add_option("--gold-rate", service_config.gold_rate)->check(CLI::Range(0.0, 1.0));
  serve_cmd->add_option("--judgments-per-tuple", service_config.judgments_per_tuple);
  serve_cmd->add_option("--ttl", service_config.assignment_ttl, "Assignment lifetime, seconds");
  serve_cmd->add_option("--threshold", service_config.gold_threshold);
  serve_cmd->add_option("--min-gold", service_config.min_gold_judgments,
                        "Gold judgments before screening applies");
  serve_cmd->add_option("--seed", service_config.seed);
  serve_cmd->add_flag("--no-fsync", no_fsync, "Skip fsync after each journal append");

  CLI11_PARSE(app, argc, argv);

  try {
    FeatureConfig features;
    features.hash_dim = std::size_t{1} << hash_bits;
    features.binary_counts = binary;

    if (*ingest_cmd) {
      IngestOptions opts;
      opts.emoticons = emoticons_path.empty() ? default_emoticons() : read_emoticons(emoticons_path);
      opts.min_tokens = min_len;
      opts.max_tokens = max_len;
      if (tokenizer_mode == "lexicon" && lexicon_path.empty()) {
        throw std::invalid_argument("--tokenizer lexicon needs --lexicon");
      }
      const Tokenizer tok = tokenizer_mode == "lexicon"
                                ? Tokenizer::lexicon(read_word_list(lexicon_path))
                                : Tokenizer::characters();
      const FilterResult r = ingest(read_raw_posts(in_path), tok, opts);
      write_posts(out_path, r.posts);
      if (!report_path.empty()) write_json(report_path, r.report);
      print_json(r.report);
    } else if (*design_cmd) {
      DesignConfig cfg;
      cfg.n = read_posts(corpus_path).size();
      cfg.multiplier = multiplier;
      cfg.seed = seed;
      cfg.max_pair_spread = max_pair;
      cfg.pair_swap_budget = swap_budget;
      const Design d = design_tuples(cfg);
      write_tuples(tuples_path, d.tuples);
      if (!stats_path.empty()) write_json(stats_path, d.stats);
      print_json(d.stats);
    } else if (*score_cmd) {
      Json report = Json::object();
      const auto tuples = read_tuples(tuples_path);
      const auto kept = screened(read_judgments(judgments_path), gold_path, threshold, &report);
      const ScoreTable table = aggregate_scores(tuples, kept, parse_counting(counting));
      write_scores(out_path, table.scores);
      report["n_scored"] = table.scores.size();
      report["n_judgments_used"] = kept.size();
      report["unjudged_posts"] = table.unjudged_posts;
      print_json(report);
    } else if (*shr_cmd) {
      const auto tuples = read_tuples(tuples_path);
      const auto kept = screened(read_judgments(judgments_path), gold_path, threshold, nullptr);
      ShrOptions opts;
      opts.repeats = repeats;
      opts.seed = seed;
      opts.threads = threads;
      opts.mode = split_mode == "mirrored" ? SplitMode::kMirrored : SplitMode::kRandom;
      opts.counting = parse_counting(counting);
      const ShrResult r = split_half_reliability(tuples, kept, opts);
      print_json({{"mean_r", r.mean_r},
                  {"std_r", r.std_r},
                  {"repeats", r.repeats},
                  {"n_posts_used", r.n_posts_used},
                  {"n_degenerate", r.n_degenerate}});
    } else if (*analyze_cmd) {
      const auto posts = read_posts(corpus_path);
      std::ifstream sin(scores_path);
      if (!sin) throw ParseError("cannot open '" + scores_path + "'");
      const auto scores = read_scores(sin);
      const DistributionReport dist = distribution_report(posts, scores);
      Json bins = Json::array();
      for (std::size_t b = 0; b < 5; ++b) {
        bins.push_back({{"bin", b + 1},
                        {"count", dist.bin_counts[b]},
                        {"mean_length", dist.bin_mean_length[b]
                                            ? Json(*dist.bin_mean_length[b])
                                            : Json(nullptr)}});
      }
      Json hist = Json::array();
      for (const auto& h : dist.histogram) {
        hist.push_back({{"lo", h.lo},
                        {"hi", h.hi},
                        {"count", h.count},
                        {"mean_length", h.mean_length ? Json(*h.mean_length) : Json(nullptr)}});
      }
      auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
      Json report = {{"bins", bins},
                     {"modal_bin", dist.modal_bin()},
                     {"mean_length_positive", opt(dist.mean_length_positive)},
                     {"mean_length_negative", opt(dist.mean_length_negative)},
                     {"histogram", hist}};
      if (!lexicon_path.empty()) {
        const Lexicon lex = load_lexicon(lexicon_path);
        Json corr = Json::object();
        for (const auto& c : correlate_dimensions(posts, scores, lex)) {
          corr[std::string(dimension_name(c.dimension))] = {
              {"r", opt(c.r)}, {"n_used", c.n_used}, {"n_excluded", c.n_excluded}};
        }
        report["correlations"] = corr;
      }
      write_json(out_path, report);
      print_json({{"modal_bin", dist.modal_bin()}, {"bins", bins}});
    } else if (*baseline_cmd) {
      if (*b_train) {
        const auto posts = read_posts(corpus_path);
        const auto scores = read_intensities(scores_path);
        std::vector<SparseVector> xs;
        std::vector<double> ys;
        for (const auto& p : posts) {
          if (auto it = scores.find(p.id); it != scores.end()) {
            xs.push_back(extract_features(p.text, features));
            ys.push_back(it->second);
          }
        }
        double lam = lambda.value_or(1.0), gam = gamma.value_or(default_gamma(xs));
        Json info = Json::object();
        if (tune) {
          std::vector<std::size_t> idx(xs.size());
          for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
          Rng rng(seed);
          rng.shuffle(std::span(idx));
          const std::size_t n_train = idx.size() * 8 / 9;
          std::vector<SparseVector> tx, dx;
          std::vector<double> ty, dy;
          for (std::size_t k = 0; k < idx.size(); ++k) {
            (k < n_train ? tx : dx).push_back(xs[idx[k]]);
            (k < n_train ? ty : dy).push_back(ys[idx[k]]);
          }
          const EvalProtocol grid;
          const HyperChoice h =
              tune_hyperparameters(tx, ty, dx, dy, grid.lambda_grid, grid.gamma_grid);
          lam = h.lambda;
          gam = h.gamma;
          info["dev_mse"] = h.dev_mse;
        }
        const KrrModel model = train_krr(std::move(xs), ys, lam, gam, features);
        save_model(model, model_path);
        info["lambda"] = lam;
        info["gamma"] = gam;
        info["n_train"] = model.train.size();
        print_json(info);
      } else if (*b_eval) {
        EvalProtocol protocol;
        protocol.mode = eval_mode == "cross" ? EvalMode::kCrossHashtag : EvalMode::kMixHashtag;
        protocol.seed = seed;
        if (!hashtag.empty()) protocol.held_out_hashtag = hashtag;
        const EvalReport r = evaluate_baseline(read_posts(corpus_path),
                                               read_intensities(scores_path), protocol, features);
        const Json j = eval_report_json(r);
        if (!out_path.empty()) write_json(out_path, j);
        print_json(j);
      } else if (*b_predict) {
        const KrrModel model = load_model(model_path);
        const auto posts = read_posts(corpus_path);
        std::vector<std::string> texts;
        for (const auto& p : posts) texts.push_back(p.text);
        const auto pred = predict_texts(model, texts);
        std::ofstream out(out_path);
        if (!out) throw Error("cannot write '" + out_path + "'");
        out << "post_id,score\n";
        for (std::size_t i = 0; i < posts.size(); ++i) {
          out << posts[i].id << ',' << format_double(pred[i]) << '\n';
        }
      }
    } else if (*pop_cmd) {
      const auto all = select_series(corpus_path, intensities_path, bucket_hours, hashtag);
      const PopularityVariant v =
          variant == "baseline" ? PopularityVariant::kBaseline : PopularityVariant::kDensity;
      if (*p_build) {
        if (all.size() != 1) {
          throw std::invalid_argument("corpus spans " + std::to_string(all.size()) +
                                      " hashtags; choose one with --hashtag");
        }
        if (out_path.empty()) {
          write_series(std::cout, all.front());
        } else {
          std::ofstream out(out_path);
          if (!out) throw Error("cannot write '" + out_path + "'");
          write_series(out, all.front());
        }
      } else if (*p_fit) {
        Json out = Json::array();
        for (const auto& s : all) {
          Json m = model_json(fit(s, v));
          m["hashtag"] = s.hashtag;
          m["n_buckets"] = s.buckets.size();
          out.push_back(m);
        }
        print_json(out);
      } else if (*p_eval) {
        Json out = Json::array();
        std::vector<double> rmses, maes;
        std::ofstream csv;
        if (!out_path.empty()) {
          csv.open(out_path);
          if (!csv) throw Error("cannot write '" + out_path + "'");
          csv << "hashtag,t_index,actual,predicted,split\n";
        }
        for (const auto& s : all) {
          const PopularityReport r = fit_and_evaluate(s, v, train_fraction);
          Json m = model_json(r.model);
          m["hashtag"] = s.hashtag;
          m["rmse"] = r.metrics.rmse;
          m["mae"] = r.metrics.mae;
          m["n_test"] = r.metrics.n_test;
          out.push_back(m);
          rmses.push_back(r.metrics.rmse);
          maes.push_back(r.metrics.mae);
          if (csv.is_open()) {
            const auto split = static_cast<std::int64_t>(
                chronological_split(s.buckets.size(), train_fraction));
            for (const auto& pt : forecast(r.model, s)) {
              csv << s.hashtag << ',' << pt.t_index << ',' << format_double(pt.actual) << ','
                  << format_double(pt.predicted) << ','
                  << (pt.t_index < split ? "train" : "test") << '\n';
            }
          }
        }
        print_json({{"series", out},
                    {"mean_rmse", metrics::mean(rmses)},
                    {"mean_mae", metrics::mean(maes)}});
      }
    } else if (*serve_cmd) {
      service_config.fsync = !no_fsync;
      return run_serve(corpus_path, tuples_path, gold_path, journal_path, host, port,
                       service_config);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
