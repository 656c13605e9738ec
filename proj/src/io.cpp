#include "complaintscale/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "complaintscale/error.hpp"

namespace cscale {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

template <typename T>
std::vector<T> read_jsonl_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_jsonl<T>(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

template <typename T>
void write_jsonl_file(const std::string& path, const std::vector<T>& items) {
  auto out = open_out(path);
  write_jsonl(out, items);
  if (!out) throw Error("failed writing '" + path + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + s + "'", line);
  }
  return v;
}

struct Csv {
  std::map<std::string, std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;

  std::size_t column(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) throw ParseError("missing CSV column '" + name + "'", 1);
    return it->second;
  }
};

Csv read_csv(std::istream& in) {
  Csv csv;
  std::string line;
  std::size_t lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv(line);
    if (header) {
      for (std::size_t i = 0; i < fields.size(); ++i) csv.columns[fields[i]] = i;
      header = false;
      continue;
    }
    if (fields.size() != csv.columns.size()) {
      throw ParseError("expected " + std::to_string(csv.columns.size()) + " fields", lineno);
    }
    csv.rows.emplace_back(lineno, std::move(fields));
  }
  if (header) throw ParseError("empty CSV");
  return csv;
}

}  // namespace

void to_json(Json& j, const RawPost& p) {
  j = Json{{"external_id", p.external_id},
           {"text", p.text},
           {"hashtag", p.hashtag},
           {"timestamp", p.timestamp}};
  if (p.author) j["author"] = *p.author;
}

void from_json(const Json& j, RawPost& p) {
  j.at("external_id").get_to(p.external_id);
  j.at("text").get_to(p.text);
  p.hashtag = j.value("hashtag", "");
  j.at("timestamp").get_to(p.timestamp);
  if (auto it = j.find("author"); it != j.end() && !it->is_null()) {
    p.author = it->get<std::string>();
  } else {
    p.author.reset();
  }
  if (p.external_id.empty()) throw ParseError("empty external_id");
  if (p.timestamp < 0) throw ParseError("negative timestamp");
}

void to_json(Json& j, const Post& p) {
  j = Json{{"id", p.id},           {"external_id", p.external_id},
           {"text", p.text},       {"hashtag", p.hashtag},
           {"timestamp", p.timestamp}, {"token_count", p.token_count}};
}

void from_json(const Json& j, Post& p) {
  j.at("id").get_to(p.id);
  j.at("external_id").get_to(p.external_id);
  j.at("text").get_to(p.text);
  j.at("hashtag").get_to(p.hashtag);
  j.at("timestamp").get_to(p.timestamp);
  j.at("token_count").get_to(p.token_count);
}

void to_json(Json& j, const CleaningReport& r) {
  j = Json{{"n_input", r.n_input},
           {"n_too_short", r.n_too_short},
           {"n_too_long", r.n_too_long},
           {"n_empty_after_clean", r.n_empty_after_clean},
           {"n_kept", r.n_kept}};
}

void to_json(Json& j, const Tuple4& t) {
  j = Json{{"id", t.id}, {"post_ids", t.post_ids}};
}

void from_json(const Json& j, Tuple4& t) {
  j.at("id").get_to(t.id);
  const auto ids = j.at("post_ids").get<std::vector<std::size_t>>();
  if (ids.size() != 4) throw ParseError("post_ids must hold 4 ids");
  std::copy(ids.begin(), ids.end(), t.post_ids.begin());
}

void to_json(Json& j, const DesignStats& s) {
  Json hist = Json::object();
  for (const auto& [count, freq] : s.pair_count_histogram) hist[std::to_string(count)] = freq;
  j = Json{{"item_count_min", s.item_count_min},
           {"item_count_max", s.item_count_max},
           {"pair_count_max", s.pair_count_max},
           {"pair_count_histogram", hist}};
}

void to_json(Json& j, const Judgment& x) {
  j = Json{{"tuple_id", x.tuple_id},
           {"annotator_id", x.annotator_id},
           {"best_post_id", x.best_post_id},
           {"worst_post_id", x.worst_post_id},
           {"timestamp", x.timestamp}};
}

void from_json(const Json& j, Judgment& x) {
  j.at("tuple_id").get_to(x.tuple_id);
  j.at("annotator_id").get_to(x.annotator_id);
  j.at("best_post_id").get_to(x.best_post_id);
  j.at("worst_post_id").get_to(x.worst_post_id);
  x.timestamp = j.value("timestamp", std::int64_t{0});
}

void to_json(Json& j, const IntensityScore& s) {
  j = Json{{"post_id", s.post_id},
           {"score", s.score},
           {"n_appearances", s.n_appearances},
           {"n_best", s.n_best},
           {"n_worst", s.n_worst}};
}

void to_json(Json& j, const GoldTuple& g) {
  j = Json{{"tuple_id", g.tuple_id},
           {"best_post_id", g.answer.best_post_id},
           {"worst_post_id", g.answer.worst_post_id}};
  if (g.post_ids) j["post_ids"] = *g.post_ids;
}

void from_json(const Json& j, GoldTuple& g) {
  j.at("tuple_id").get_to(g.tuple_id);
  j.at("best_post_id").get_to(g.answer.best_post_id);
  j.at("worst_post_id").get_to(g.answer.worst_post_id);
  if (g.answer.best_post_id == g.answer.worst_post_id) {
    throw ParseError("gold best and worst are the same post");
  }
  g.post_ids.reset();
  if (auto it = j.find("post_ids"); it != j.end() && !it->is_null()) {
    auto ids = it->get<std::vector<std::size_t>>();
    if (ids.size() != 4) throw ParseError("gold post_ids must hold 4 ids");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw ParseError("gold post_ids repeat a post");
    }
    std::array<std::size_t, 4> arr{};
    std::copy(ids.begin(), ids.end(), arr.begin());
    auto in = [&](std::size_t p) { return std::find(arr.begin(), arr.end(), p) != arr.end(); };
    if (!in(g.answer.best_post_id) || !in(g.answer.worst_post_id)) {
      throw ParseError("gold answer is not in its tuple");
    }
    g.post_ids = arr;
  }
}

GoldMap gold_map(const std::vector<GoldTuple>& gold) {
  GoldMap m;
  for (const auto& g : gold) {
    if (!m.emplace(g.tuple_id, g.answer).second) {
      throw ParseError("duplicate gold tuple id " + std::to_string(g.tuple_id));
    }
  }
  return m;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<RawPost> read_raw_posts(const std::string& path) {
  return read_jsonl_file<RawPost>(path);
}
std::vector<Post> read_posts(const std::string& path) { return read_jsonl_file<Post>(path); }
std::vector<Tuple4> read_tuples(const std::string& path) {
  return read_jsonl_file<Tuple4>(path);
}
std::vector<Judgment> read_judgments(const std::string& path) {
  return read_jsonl_file<Judgment>(path);
}
std::vector<GoldTuple> read_gold(const std::string& path) {
  return read_jsonl_file<GoldTuple>(path);
}

void write_posts(const std::string& path, const std::vector<Post>& posts) {
  write_jsonl_file(path, posts);
}
void write_tuples(const std::string& path, const std::vector<Tuple4>& tuples) {
  write_jsonl_file(path, tuples);
}
void write_judgments(const std::string& path, const std::vector<Judgment>& judgments) {
  write_jsonl_file(path, judgments);
}

void write_json(const std::string& path, const Json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
}

EmoticonTable read_emoticons(const std::string& path) {
  auto in = open_in(path);
  try {
    return Json::parse(in).get<EmoticonTable>();
  } catch (const Json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_scores(std::ostream& out, const std::vector<IntensityScore>& scores) {
  out << "post_id,score,n_appearances,n_best,n_worst\n";
  for (const auto& s : scores) {
    out << s.post_id << ',' << format_double(s.score) << ',' << s.n_appearances << ','
        << s.n_best << ',' << s.n_worst << '\n';
  }
}

void write_scores(const std::string& path, const std::vector<IntensityScore>& scores) {
  auto out = open_out(path);
  write_scores(out, scores);
}

std::vector<IntensityScore> read_scores(std::istream& in) {
  const Csv csv = read_csv(in);
  const std::size_t c_id = csv.column("post_id"), c_score = csv.column("score"),
                    c_app = csv.column("n_appearances"), c_best = csv.column("n_best"),
                    c_worst = csv.column("n_worst");
  std::vector<IntensityScore> out;
  for (const auto& [line, f] : csv.rows) {
    IntensityScore s;
    s.post_id = parse_number<std::size_t>(f[c_id], line);
    s.score = parse_number<double>(f[c_score], line);
    s.n_appearances = parse_number<std::size_t>(f[c_app], line);
    s.n_best = parse_number<std::size_t>(f[c_best], line);
    s.n_worst = parse_number<std::size_t>(f[c_worst], line);
    out.push_back(s);
  }
  return out;
}

std::map<std::size_t, double> read_intensities(std::istream& in) {
  const Csv csv = read_csv(in);
  const std::size_t c_id = csv.column("post_id"), c_score = csv.column("score");
  std::map<std::size_t, double> out;
  for (const auto& [line, f] : csv.rows) {
    const auto id = parse_number<std::size_t>(f[c_id], line);
    const double v = parse_number<double>(f[c_score], line);
    if (!(v >= -1.0 && v <= 1.0)) throw ParseError("score outside [-1, 1]", line);
    if (!out.emplace(id, v).second) {
      throw ParseError("duplicate post_id " + std::to_string(id), line);
    }
  }
  return out;
}

std::map<std::size_t, double> read_intensities(const std::string& path) {
  auto in = open_in(path);
  return read_intensities(in);
}

void write_series(std::ostream& out, const PopularitySeries& series) {
  out << "t_index,post_count,density\n";
  for (const auto& b : series.buckets) {
    out << b.t_index << ',' << b.post_count << ',' << format_double(b.density) << '\n';
  }
}

PopularitySeries read_series(std::istream& in) {
  const Csv csv = read_csv(in);
  const std::size_t c_t = csv.column("t_index"), c_n = csv.column("post_count"),
                    c_d = csv.column("density");
  PopularitySeries s;
  for (const auto& [line, f] : csv.rows) {
    PopularityBucket b;
    b.t_index = parse_number<std::int64_t>(f[c_t], line);
    b.post_count = parse_number<std::size_t>(f[c_n], line);
    b.density = parse_number<double>(f[c_d], line);
    if (b.t_index != static_cast<std::int64_t>(s.buckets.size())) {
      throw ParseError("t_index must run 0, 1, 2, ... without gaps", line);
    }
    s.buckets.push_back(b);
  }
  return s;
}

}  // namespace cscale
