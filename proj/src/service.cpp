#include "complaintscale/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "complaintscale/error.hpp"
#include "complaintscale/rng.hpp"

namespace cscale {

namespace {

constexpr int kJournalVersion = 1;

std::string status_name(AnnotatorStatus s) {
  return s == AnnotatorStatus::kActive ? "active" : "rejected";
}

}  // namespace

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

AnnotationService::AnnotationService(std::vector<Post> corpus, std::vector<Tuple4> tuples,
                                     std::vector<GoldTuple> gold, ServiceConfig config,
                                     std::string journal_path, Clock clock)
    : config_(config), journal_path_(std::move(journal_path)), clock_(std::move(clock)) {
  if (config_.judgments_per_tuple == 0) {
    throw std::invalid_argument("judgments_per_tuple must be >= 1");
  }
  if (!(config_.gold_rate >= 0.0 && config_.gold_rate <= 1.0)) {
    throw std::invalid_argument("gold_rate must lie in [0, 1]");
  }
  if (config_.assignment_ttl <= 0) throw std::invalid_argument("assignment_ttl must be > 0");

  for (auto& p : corpus) {
    const std::size_t id = p.id;
    if (!posts_.emplace(id, std::move(p)).second) {
      throw ParseError("duplicate post id " + std::to_string(id) + " in corpus");
    }
  }
  auto check_posts = [&](const std::array<std::size_t, 4>& ids, std::size_t tid) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (!posts_.contains(ids[i])) {
        throw ParseError("tuple " + std::to_string(tid) + " references unknown post " +
                         std::to_string(ids[i]));
      }
      if (i > 0 && ids[i] == ids[i - 1]) {
        throw ParseError("tuple " + std::to_string(tid) + " repeats a post");
      }
    }
  };
  for (auto t : tuples) {
    std::sort(t.post_ids.begin(), t.post_ids.end());
    check_posts(t.post_ids, t.id);
    TupleState s;
    s.tuple = t;
    if (!tuples_.emplace(t.id, std::move(s)).second) {
      throw ParseError("duplicate tuple id " + std::to_string(t.id));
    }
  }
  for (const auto& g : gold) {
    if (!g.post_ids) {
      throw ParseError("gold tuple " + std::to_string(g.tuple_id) + " has no post_ids");
    }
    TupleState s;
    s.tuple = {g.tuple_id, *g.post_ids};
    std::sort(s.tuple.post_ids.begin(), s.tuple.post_ids.end());
    check_posts(s.tuple.post_ids, g.tuple_id);
    s.gold = true;
    s.answer = g.answer;
    if (!tuples_.emplace(g.tuple_id, std::move(s)).second) {
      throw ParseError("gold tuple id " + std::to_string(g.tuple_id) +
                       " collides with another tuple");
    }
  }
  open_journal();
}

AnnotationService::~AnnotationService() {
  if (fd_ >= 0) ::close(fd_);
}

void AnnotationService::open_journal() {
  std::string content;
  {
    std::ifstream in(journal_path_, std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
  }
  const std::size_t last_nl = content.rfind('\n');
  const std::size_t intact = last_nl == std::string::npos ? 0 : last_nl + 1;

  std::size_t gold_count = 0;
  for (const auto& [id, t] : tuples_) gold_count += t.gold;
  const Json header = {{"type", "header"},
                       {"version", kJournalVersion},
                       {"seed", config_.seed},
                       {"judgments_per_tuple", config_.judgments_per_tuple},
                       {"gold_threshold", config_.gold_threshold},
                       {"min_gold_judgments", config_.min_gold_judgments},
                       {"tuples", tuples_.size() - gold_count},
                       {"gold", gold_count}};

  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < intact) {
    const std::size_t nl = content.find('\n', pos);
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (line.empty()) continue;
    Json event;
    try {
      event = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(journal_path_ + ": corrupt journal record: " + e.what(), lineno);
    }
    if (!saw_header) {
      if (event != header) {
        throw ParseError(journal_path_ +
                             ": journal was written for different inputs or settings",
                         lineno);
      }
      saw_header = true;
      continue;
    }
    try {
      apply(event);
    } catch (const Json::exception& e) {
      throw ParseError(journal_path_ + ": bad journal event: " + e.what(), lineno);
    } catch (const std::out_of_range& e) {
      throw ParseError(journal_path_ + ": journal event references unknown state", lineno);
    }
  }

  fd_ = ::open(journal_path_.c_str(), O_WRONLY | O_CREAT, 0644);
  if (fd_ < 0) {
    throw Error("cannot open journal '" + journal_path_ + "': " + std::strerror(errno));
  }
  // Drop a torn trailing record left by a crash mid-append.
  if (intact < content.size() && ::ftruncate(fd_, static_cast<off_t>(intact)) != 0) {
    throw Error("cannot truncate journal '" + journal_path_ + "': " + std::strerror(errno));
  }
  if (::lseek(fd_, static_cast<off_t>(intact), SEEK_SET) < 0) {
    throw Error("cannot seek journal '" + journal_path_ + "'");
  }
  if (!saw_header) append(header);
}

void AnnotationService::append(const Json& event) {
  const std::string line = event.dump() + '\n';
  const off_t start = ::lseek(fd_, 0, SEEK_CUR);
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      const std::string why = std::strerror(errno);
      if (start >= 0 && ::ftruncate(fd_, start) == 0) ::lseek(fd_, start, SEEK_SET);
      throw Error("journal append failed: " + why);
    }
    done += static_cast<std::size_t>(n);
  }
  if (config_.fsync && ::fsync(fd_) != 0) {
    throw Error(std::string("journal fsync failed: ") + std::strerror(errno));
  }
}

void AnnotationService::expire_before(std::int64_t now) {
  for (auto it = assignments_.begin(); it != assignments_.end();) {
    if (it->second.expires_at <= now) {
      tuples_.at(it->first.second).holders.erase(it->first.first);
      it = assignments_.erase(it);
    } else {
      ++it;
    }
  }
}

void AnnotationService::apply(const Json& event) {
  const std::string type = event.at("type").get<std::string>();
  const auto ts = event.at("ts").get<std::int64_t>();
  expire_before(ts);

  if (type == "register") {
    AnnotatorState a;
    a.registered_at = ts;
    annotators_.emplace(event.at("annotator").get<std::string>(), std::move(a));
  } else if (type == "assign") {
    Assignment as;
    as.annotator_id = event.at("annotator").get<std::string>();
    as.tuple_id = event.at("tuple").get<std::size_t>();
    as.issued_at = event.at("issued_at").get<std::int64_t>();
    as.expires_at = event.at("expires_at").get<std::int64_t>();
    as.display_order = event.at("order").get<std::array<std::size_t, 4>>();
    as.gold = event.at("gold").get<bool>();
    as.seq = event.at("seq").get<std::uint64_t>();
    tuples_.at(as.tuple_id).holders.insert(as.annotator_id);
    next_seq_ = as.seq + 1;
    Key key{as.annotator_id, as.tuple_id};
    assignments_.insert_or_assign(std::move(key), std::move(as));
  } else if (type == "judgment") {
    JudgmentRecord rec;
    rec.judgment.annotator_id = event.at("annotator").get<std::string>();
    rec.judgment.tuple_id = event.at("tuple").get<std::size_t>();
    rec.judgment.best_post_id = event.at("best").get<std::size_t>();
    rec.judgment.worst_post_id = event.at("worst").get<std::size_t>();
    rec.judgment.timestamp = ts;
    const std::string& who = rec.judgment.annotator_id;
    TupleState& t = tuples_.at(rec.judgment.tuple_id);
    AnnotatorState& a = annotators_.at(who);

    assignments_.erase({who, t.tuple.id});
    t.holders.erase(who);
    a.judged.insert(t.tuple.id);
    rec.gold = t.gold;
    if (!t.gold) ++t.counted;
    judgments_.push_back(rec);

    if (t.gold) {
      ++a.gold_judged;
      a.gold_correct += (rec.judgment.best_post_id == t.answer.best_post_id) +
                        (rec.judgment.worst_post_id == t.answer.worst_post_id);
      const double acc =
          static_cast<double>(a.gold_correct) / (2.0 * static_cast<double>(a.gold_judged));
      if (a.status == AnnotatorStatus::kActive &&
          a.gold_judged >= config_.min_gold_judgments && acc < config_.gold_threshold) {
        a.status = AnnotatorStatus::kRejected;
        for (auto& r : judgments_) {
          if (r.judgment.annotator_id == who && !r.gold && !r.excluded) {
            r.excluded = true;
            --tuples_.at(r.judgment.tuple_id).counted;
          }
        }
        for (auto it = assignments_.begin(); it != assignments_.end();) {
          if (it->first.first == who) {
            tuples_.at(it->first.second).holders.erase(who);
            it = assignments_.erase(it);
          } else {
            ++it;
          }
        }
      }
    }
  } else {
    throw ParseError("unknown journal event type '" + type + "'");
  }
  ++events_;
}

bool AnnotationService::live(const Key& key, std::int64_t now) const {
  auto it = assignments_.find(key);
  return it != assignments_.end() && it->second.expires_at > now;
}

std::size_t AnnotationService::live_holders(const TupleState& t, std::int64_t now) const {
  std::size_t n = 0;
  for (const auto& h : t.holders) n += live({h, t.tuple.id}, now);
  return n;
}

AnnotationService::AnnotatorState& AnnotationService::annotator(const std::string& id) {
  auto it = annotators_.find(id);
  if (it == annotators_.end()) throw UnknownAnnotator("unknown annotator '" + id + "'");
  return it->second;
}

const AnnotationService::AnnotatorState& AnnotationService::annotator(
    const std::string& id) const {
  auto it = annotators_.find(id);
  if (it == annotators_.end()) throw UnknownAnnotator("unknown annotator '" + id + "'");
  return it->second;
}

std::optional<std::size_t> AnnotationService::pick_regular(const std::string& who,
                                                           std::int64_t now) const {
  const AnnotatorState& a = annotator(who);
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (const auto& [id, t] : tuples_) {
    if (t.gold || a.judged.contains(id) || live({who, id}, now)) continue;
    if (t.counted + live_holders(t, now) >= config_.judgments_per_tuple) continue;
    if (!best || t.counted < best_count) {
      best = id;
      best_count = t.counted;
    }
  }
  return best;
}

std::vector<std::size_t> AnnotationService::unseen_gold(const std::string& who,
                                                        std::int64_t now) const {
  const AnnotatorState& a = annotator(who);
  std::vector<std::size_t> out;
  for (const auto& [id, t] : tuples_) {
    if (t.gold && !a.judged.contains(id) && !live({who, id}, now)) out.push_back(id);
  }
  return out;
}

bool AnnotationService::register_annotator(const std::string& annotator_id) {
  if (annotator_id.empty()) throw std::invalid_argument("annotator id must be non-empty");
  std::lock_guard lock(mutex_);
  if (annotators_.contains(annotator_id)) return false;
  const Json event = {{"type", "register"}, {"annotator", annotator_id}, {"ts", clock_()}};
  append(event);
  apply(event);
  return true;
}

std::optional<Assignment> AnnotationService::next_tuple(const std::string& annotator_id) {
  std::lock_guard lock(mutex_);
  const std::int64_t now = clock_();
  if (annotator(annotator_id).status == AnnotatorStatus::kRejected) {
    throw RejectedAnnotator("annotator '" + annotator_id + "' was rejected by gold screening");
  }
  Rng rng(derive_seed(config_.seed, next_seq_));
  const bool want_gold = rng.uniform() < config_.gold_rate;

  std::optional<std::size_t> chosen;
  bool gold = false;
  if (want_gold) {
    const auto candidates = unseen_gold(annotator_id, now);
    if (!candidates.empty()) {
      chosen = candidates[rng.below(candidates.size())];
      gold = true;
    }
  }
  if (!chosen) chosen = pick_regular(annotator_id, now);
  if (!chosen) return std::nullopt;

  std::array<std::size_t, 4> order = tuples_.at(*chosen).tuple.post_ids;
  rng.shuffle(std::span<std::size_t>(order));
  const Json event = {{"type", "assign"},
                      {"annotator", annotator_id},
                      {"tuple", *chosen},
                      {"gold", gold},
                      {"order", order},
                      {"seq", next_seq_},
                      {"issued_at", now},
                      {"expires_at", now + config_.assignment_ttl},
                      {"ts", now}};
  append(event);
  apply(event);
  return assignments_.at({annotator_id, *chosen});
}

SubmitResult AnnotationService::submit_judgment(const std::string& annotator_id,
                                                std::size_t tuple_id, std::size_t best_post_id,
                                                std::size_t worst_post_id) {
  std::lock_guard lock(mutex_);
  const std::int64_t now = clock_();
  const AnnotatorState& a = annotator(annotator_id);
  if (a.status == AnnotatorStatus::kRejected) {
    throw RejectedAnnotator("annotator '" + annotator_id + "' was rejected by gold screening");
  }
  auto t = tuples_.find(tuple_id);
  if (t == tuples_.end()) throw NoAssignment("unknown tuple " + std::to_string(tuple_id));
  if (a.judged.contains(tuple_id)) {
    throw DuplicateSubmission("annotator '" + annotator_id + "' already judged tuple " +
                              std::to_string(tuple_id));
  }
  if (!live({annotator_id, tuple_id}, now)) {
    throw NoAssignment("annotator '" + annotator_id + "' holds no live assignment for tuple " +
                       std::to_string(tuple_id));
  }
  Judgment j;
  j.tuple_id = tuple_id;
  j.annotator_id = annotator_id;
  j.best_post_id = best_post_id;
  j.worst_post_id = worst_post_id;
  j.timestamp = now;
  validate_judgment(t->second.tuple, j);

  const Json event = {{"type", "judgment"}, {"annotator", annotator_id},
                      {"tuple", tuple_id},  {"best", best_post_id},
                      {"worst", worst_post_id}, {"ts", now}};
  append(event);
  apply(event);

  SubmitResult result;
  result.judgment = j;
  if (t->second.gold) result.profile = make_profile(annotator_id, annotators_.at(annotator_id));
  return result;
}

AnnotatorProfile AnnotationService::make_profile(const std::string& id,
                                                 const AnnotatorState& a) const {
  AnnotatorProfile p;
  p.annotator_id = id;
  p.gold_judged = a.gold_judged;
  p.gold_accuracy = a.gold_judged ? static_cast<double>(a.gold_correct) /
                                        (2.0 * static_cast<double>(a.gold_judged))
                                  : 0.0;
  p.status = a.status;
  return p;
}

std::optional<AnnotatorProfile> AnnotationService::profile(
    const std::string& annotator_id) const {
  std::lock_guard lock(mutex_);
  auto it = annotators_.find(annotator_id);
  if (it == annotators_.end()) return std::nullopt;
  return make_profile(it->first, it->second);
}

const Post* AnnotationService::post(std::size_t post_id) const {
  auto it = posts_.find(post_id);
  return it == posts_.end() ? nullptr : &it->second;
}

ServiceProgress AnnotationService::progress() const {
  std::lock_guard lock(mutex_);
  ServiceProgress p;
  for (const auto& [id, t] : tuples_) {
    if (t.gold) continue;
    ++p.tuples_total;
    p.tuples_complete += t.counted >= config_.judgments_per_tuple;
  }
  for (const auto& r : judgments_) {
    if (r.excluded) {
      ++p.judgments_excluded;
    } else {
      ++p.judgments_total;
    }
  }
  for (const auto& [id, a] : annotators_) {
    if (a.status == AnnotatorStatus::kActive) {
      ++p.annotators_active;
    } else {
      ++p.annotators_rejected;
    }
  }
  return p;
}

std::vector<Judgment> AnnotationService::export_judgments(bool include_excluded) const {
  std::lock_guard lock(mutex_);
  std::vector<Judgment> out;
  for (const auto& r : judgments_) {
    const bool rejected =
        annotators_.at(r.judgment.annotator_id).status == AnnotatorStatus::kRejected;
    if (include_excluded || !rejected) out.push_back(r.judgment);
  }
  return out;
}

Json AnnotationService::snapshot() const {
  std::lock_guard lock(mutex_);
  Json annotators = Json::object();
  for (const auto& [id, a] : annotators_) {
    annotators[id] = {{"registered_at", a.registered_at},
                      {"gold_judged", a.gold_judged},
                      {"gold_correct", a.gold_correct},
                      {"status", status_name(a.status)},
                      {"judged", a.judged}};
  }
  Json assignments = Json::array();
  for (const auto& [key, as] : assignments_) {
    assignments.push_back({{"annotator", as.annotator_id},
                           {"tuple", as.tuple_id},
                           {"issued_at", as.issued_at},
                           {"expires_at", as.expires_at},
                           {"order", as.display_order},
                           {"gold", as.gold},
                           {"seq", as.seq}});
  }
  Json tuples = Json::object();
  for (const auto& [id, t] : tuples_) {
    if (t.counted || !t.holders.empty()) {
      tuples[std::to_string(id)] = {{"counted", t.counted}, {"holders", t.holders}};
    }
  }
  Json judgments = Json::array();
  for (const auto& r : judgments_) {
    Json j = r.judgment;
    j["gold"] = r.gold;
    j["excluded"] = r.excluded;
    judgments.push_back(std::move(j));
  }
  return {{"annotators", annotators}, {"assignments", assignments},
          {"tuples", tuples},         {"judgments", judgments},
          {"next_seq", next_seq_},    {"events", events_}};
}

std::size_t AnnotationService::journal_events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

}  // namespace cscale
