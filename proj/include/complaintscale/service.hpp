#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "complaintscale/corpus.hpp"
#include "complaintscale/io.hpp"
#include "complaintscale/scoring.hpp"
#include "complaintscale/tuples.hpp"

namespace cscale {

struct ServiceConfig {
  std::size_t judgments_per_tuple = 3;
  double gold_rate = 0.1;
  std::int64_t assignment_ttl = 1800;  // seconds
  double gold_threshold = kDefaultGoldThreshold;
  // Gold judgments an annotator needs before the threshold applies.
  std::size_t min_gold_judgments = 1;
  std::uint64_t seed = 0;
  // fsync(2) every journal append; otherwise the line is only written.
  bool fsync = true;
};

// Seconds since the epoch.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

struct Assignment {
  std::size_t tuple_id = 0;
  std::string annotator_id;
  std::int64_t issued_at = 0;
  std::int64_t expires_at = 0;
  std::array<std::size_t, 4> display_order{};
  bool gold = false;
  std::uint64_t seq = 0;  // position among all assignments ever issued

  bool operator==(const Assignment&) const = default;
};

struct ServiceProgress {
  std::size_t tuples_total = 0;  // regular tuples only
  std::size_t tuples_complete = 0;
  std::size_t judgments_total = 0;  // counted judgments, gold included
  std::size_t judgments_excluded = 0;
  std::size_t annotators_active = 0;
  std::size_t annotators_rejected = 0;
};

struct SubmitResult {
  Judgment judgment;
  std::optional<AnnotatorProfile> profile;  // set when the tuple was gold
};

// Annotation state machine backed by an append-only JSON-lines journal.
//
// Every state change is an event (register, assign, judgment). An event is
// appended to the journal before it is applied, and applying an event never
// reads the clock or a random generator, so replaying the journal rebuilds
// the state exactly. Assignments whose expires_at has passed are dropped
// when the next event is applied; until then they are ignored.
//
// A regular tuple is offered while its counted judgments plus live
// assignments are below judgments_per_tuple, so the cap holds under any
// interleaving of clients. All public methods are serialised by one mutex.
class AnnotationService {
 public:
  // Opens (creating if needed) the journal and replays it. A torn last line
  // is truncated. Throws ParseError for a corrupt journal or inconsistent
  // inputs: duplicate tuple ids, gold ids colliding with tuple ids, gold
  // without post_ids, or posts missing from the corpus.
  AnnotationService(std::vector<Post> corpus, std::vector<Tuple4> tuples,
                    std::vector<GoldTuple> gold, ServiceConfig config,
                    std::string journal_path, Clock clock = system_clock());
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // True when the annotator is new.
  bool register_annotator(const std::string& annotator_id);

  // nullopt means no work. Throws UnknownAnnotator or RejectedAnnotator.
  std::optional<Assignment> next_tuple(const std::string& annotator_id);

  // Throws UnknownAnnotator, RejectedAnnotator, DuplicateSubmission when the
  // annotator already judged the tuple, NoAssignment without a live
  // assignment, InvalidJudgment when the picks are bad (the assignment stays
  // live).
  SubmitResult submit_judgment(const std::string& annotator_id, std::size_t tuple_id,
                               std::size_t best_post_id, std::size_t worst_post_id);

  ServiceProgress progress() const;

  // Journal order. Without include_excluded, every judgment of a rejected
  // annotator is left out.
  std::vector<Judgment> export_judgments(bool include_excluded = false) const;

  std::optional<AnnotatorProfile> profile(const std::string& annotator_id) const;
  const Post* post(std::size_t post_id) const;

  // Canonical JSON of the whole mutable state, for equality checks.
  Json snapshot() const;

  std::size_t journal_events() const;
  const ServiceConfig& config() const { return config_; }

 private:
  struct TupleState {
    Tuple4 tuple;
    bool gold = false;
    GoldAnswer answer;
    std::size_t counted = 0;               // non-excluded judgments
    std::set<std::string> holders;         // live assignments
  };
  struct AnnotatorState {
    std::int64_t registered_at = 0;
    std::size_t gold_judged = 0;
    std::size_t gold_correct = 0;  // best and worst picks, separately
    AnnotatorStatus status = AnnotatorStatus::kActive;
    std::set<std::size_t> judged;
  };
  struct JudgmentRecord {
    Judgment judgment;
    bool gold = false;
    bool excluded = false;
  };
  using Key = std::pair<std::string, std::size_t>;  // annotator, tuple

  void open_journal();
  void append(const Json& event);
  void apply(const Json& event);
  void expire_before(std::int64_t now);
  std::optional<std::size_t> pick_regular(const std::string& annotator, std::int64_t now) const;
  std::vector<std::size_t> unseen_gold(const std::string& annotator, std::int64_t now) const;
  bool live(const Key& key, std::int64_t now) const;
  std::size_t live_holders(const TupleState& t, std::int64_t now) const;
  AnnotatorState& annotator(const std::string& id);
  const AnnotatorState& annotator(const std::string& id) const;
  AnnotatorProfile make_profile(const std::string& id, const AnnotatorState& a) const;

  ServiceConfig config_;
  std::string journal_path_;
  Clock clock_;
  int fd_ = -1;

  std::unordered_map<std::size_t, Post> posts_;
  std::map<std::size_t, TupleState> tuples_;
  std::map<std::string, AnnotatorState> annotators_;
  std::map<Key, Assignment> assignments_;
  std::vector<JudgmentRecord> judgments_;
  std::uint64_t next_seq_ = 0;
  std::size_t events_ = 0;

  mutable std::mutex mutex_;
};

}  // namespace cscale
