#pragma once

// Small annotation setups and a random operation driver for the service.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "complaintscale/io.hpp"
#include "complaintscale/rng.hpp"
#include "complaintscale/service.hpp"
#include "complaintscale/tuples.hpp"

namespace fixtures {

struct ServiceInputs {
  std::vector<cscale::Post> corpus;
  std::vector<cscale::Tuple4> tuples;
  std::vector<cscale::GoldTuple> gold;
};

// n posts, 2n designed tuples, and `n_gold` gold tuples with ids from 1e6
// whose answer is always (first, last) post.
inline ServiceInputs service_inputs(std::size_t n, std::size_t n_gold, std::uint64_t seed = 1) {
  ServiceInputs in;
  for (std::size_t i = 0; i < n; ++i) {
    cscale::Post p;
    p.id = i;
    p.external_id = "e" + std::to_string(i);
    p.text = "post number " + std::to_string(i);
    p.hashtag = "h";
    p.token_count = 10;
    in.corpus.push_back(p);
  }
  in.tuples = cscale::design_tuples({.n = n, .seed = seed}).tuples;
  for (std::size_t g = 0; g < n_gold; ++g) {
    cscale::GoldTuple gt;
    gt.tuple_id = 1'000'000 + g;
    const std::size_t a = (4 * g) % (n - 3);
    gt.post_ids = std::array<std::size_t, 4>{a, a + 1, a + 2, a + 3};
    gt.answer = {a, a + 3};
    in.gold.push_back(gt);
  }
  return in;
}

// A temporary journal path removed on destruction.
struct TempJournal {
  std::filesystem::path path;
  explicit TempJournal(const std::string& tag) {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("cscale_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++) + ".jsonl");
    std::filesystem::remove(path);
  }
  ~TempJournal() { std::filesystem::remove(path); }
  std::string str() const { return path.string(); }
};

struct ManualClock {
  std::shared_ptr<std::int64_t> now = std::make_shared<std::int64_t>(1'700'000'000);
  cscale::Clock clock() const {
    auto p = now;
    return [p] { return *p; };
  }
};

inline std::unique_ptr<cscale::AnnotationService> open_service(const ServiceInputs& in,
                                                               const cscale::ServiceConfig& cfg,
                                                               const std::string& journal,
                                                               const ManualClock& clock) {
  return std::make_unique<cscale::AnnotationService>(in.corpus, in.tuples, in.gold, cfg, journal,
                                                     clock.clock());
}

struct ReplayStats {
  std::size_t operations = 0;
  std::size_t restarts = 0;
  std::size_t torn_tails = 0;
  std::size_t mismatches = 0;
  std::size_t cap_violations = 0;
};

inline std::size_t cap_violations(const cscale::AnnotationService& s, std::size_t cap) {
  std::map<std::size_t, std::size_t> per_tuple;
  for (const auto& j : s.export_judgments(false)) {
    if (j.tuple_id < 1'000'000) ++per_tuple[j.tuple_id];
  }
  std::size_t bad = 0;
  for (const auto& [t, c] : per_tuple) bad += c > cap;
  return bad;
}

// Random register / next / submit traffic with the clock drifting so that
// assignments expire. At random points the service is destroyed and rebuilt
// from its journal (sometimes after appending a torn half-line), and the
// rebuilt snapshot is compared with the one taken just before.
inline ReplayStats random_kill_and_replay(std::size_t operations, std::uint64_t seed) {
  const ServiceInputs in = service_inputs(40, 6, seed);
  cscale::ServiceConfig cfg;
  cfg.gold_rate = 0.2;
  cfg.assignment_ttl = 120;
  cfg.seed = seed;
  cfg.fsync = false;
  TempJournal journal("replay");
  ManualClock clock;
  auto service = open_service(in, cfg, journal.str(), clock);
  cscale::Rng rng(seed);
  ReplayStats stats;
  std::vector<std::string> names;
  std::map<std::string, std::vector<cscale::Assignment>> held;

  for (std::size_t op = 0; op < operations; ++op) {
    *clock.now += static_cast<std::int64_t>(rng.below(40));
    const auto kind = rng.below(10);
    try {
      if (kind == 0 || names.empty()) {
        const std::string id = "ann" + std::to_string(rng.below(12));
        service->register_annotator(id);
        if (std::find(names.begin(), names.end(), id) == names.end()) names.push_back(id);
      } else if (kind < 5) {
        const auto& id = names[rng.below(names.size())];
        if (auto a = service->next_tuple(id)) held[id].push_back(*a);
      } else {
        const auto& id = names[rng.below(names.size())];
        auto& list = held[id];
        if (!list.empty()) {
          const auto k = rng.below(list.size());
          const cscale::Assignment a = list[k];
          list.erase(list.begin() + static_cast<std::ptrdiff_t>(k));
          auto order = a.display_order;
          std::size_t best = order[rng.below(4)], worst = order[rng.below(4)];
          if (rng.below(20) == 0) worst = best;  // invalid on purpose
          else if (worst == best) worst = best == order[0] ? order[1] : order[0];
          if (a.tuple_id >= 1'000'000 && rng.below(3)) {
            best = *std::min_element(order.begin(), order.end());
            worst = *std::max_element(order.begin(), order.end());
          }
          service->submit_judgment(id, a.tuple_id, best, worst);
        }
      }
    } catch (const cscale::Error&) {
      // Rejections, expiries, duplicates and invalid picks are all expected.
    }
    ++stats.operations;
    stats.cap_violations += cap_violations(*service, cfg.judgments_per_tuple) > 0;

    if (rng.below(50) == 0) {
      const cscale::Json before = service->snapshot();
      service.reset();
      if (rng.below(2) == 0) {
        std::ofstream torn(journal.path, std::ios::app | std::ios::binary);
        torn << R"({"type":"judgment","annotator_id":"ann)";
        ++stats.torn_tails;
      }
      service = open_service(in, cfg, journal.str(), clock);
      ++stats.restarts;
      stats.mismatches += service->snapshot() != before;
    }
  }
  const cscale::Json live = service->snapshot();
  service.reset();
  service = open_service(in, cfg, journal.str(), clock);
  ++stats.restarts;
  stats.mismatches += service->snapshot() != live;
  return stats;
}

struct ConcurrencyStats {
  std::size_t judgments = 0;
  std::size_t cap_violations = 0;
  std::size_t incomplete_tuples = 0;
};

// 16 clients drain the work queue in parallel, answering gold correctly.
inline ConcurrencyStats concurrent_clients(std::size_t clients, std::uint64_t seed) {
  const ServiceInputs in = service_inputs(60, 8, seed);
  cscale::ServiceConfig cfg;
  cfg.gold_rate = 0.1;
  cfg.seed = seed;
  cfg.fsync = false;
  TempJournal journal("concurrent");
  cscale::AnnotationService service(in.corpus, in.tuples, in.gold, cfg, journal.str());
  std::map<std::size_t, cscale::GoldAnswer> answers;
  for (const auto& g : in.gold) answers[g.tuple_id] = g.answer;

  std::vector<std::thread> threads;
  for (std::size_t c = 0; c < clients; ++c) {
    threads.emplace_back([&, c] {
      const std::string id = "client" + std::to_string(c);
      service.register_annotator(id);
      cscale::Rng rng(seed * 100 + c);
      while (auto a = service.next_tuple(id)) {
        std::size_t best = a->display_order[0], worst = a->display_order[3];
        if (auto it = answers.find(a->tuple_id); it != answers.end()) {
          best = it->second.best_post_id;
          worst = it->second.worst_post_id;
        } else if (rng.below(2)) {
          std::swap(best, worst);
        }
        service.submit_judgment(id, a->tuple_id, best, worst);
      }
    });
  }
  for (auto& t : threads) t.join();

  ConcurrencyStats stats;
  std::map<std::size_t, std::size_t> per_tuple;
  for (const auto& j : service.export_judgments(true)) {
    ++stats.judgments;
    if (j.tuple_id < 1'000'000) ++per_tuple[j.tuple_id];
  }
  for (const auto& t : in.tuples) {
    const auto c = per_tuple[t.id];
    stats.cap_violations += c > cfg.judgments_per_tuple;
    stats.incomplete_tuples += c != cfg.judgments_per_tuple;
  }
  return stats;
}

}  // namespace fixtures
