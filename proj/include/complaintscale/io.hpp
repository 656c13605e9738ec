#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "complaintscale/corpus.hpp"
#include "complaintscale/error.hpp"
#include "complaintscale/popularity.hpp"
#include "complaintscale/scoring.hpp"
#include "complaintscale/tuples.hpp"

// File formats shared by the CLI, the service and the Python bindings.
// JSON-lines readers skip blank lines and report the 1-based line of the
// first bad record through ParseError.
namespace cscale {

using Json = nlohmann::json;

void to_json(Json& j, const RawPost& p);
void from_json(const Json& j, RawPost& p);
void to_json(Json& j, const Post& p);
void from_json(const Json& j, Post& p);
void to_json(Json& j, const CleaningReport& r);
void to_json(Json& j, const Tuple4& t);
void from_json(const Json& j, Tuple4& t);
void to_json(Json& j, const DesignStats& s);
void to_json(Json& j, const Judgment& x);
void from_json(const Json& j, Judgment& x);
void to_json(Json& j, const IntensityScore& s);

// A gold tuple as supplied by experts. post_ids is needed when the tuple has
// to be shown (the service); scoring only needs the answer.
struct GoldTuple {
  std::size_t tuple_id = 0;
  std::optional<std::array<std::size_t, 4>> post_ids;
  GoldAnswer answer;
};

void to_json(Json& j, const GoldTuple& g);
void from_json(const Json& j, GoldTuple& g);

GoldMap gold_map(const std::vector<GoldTuple>& gold);

// Shortest representation that round-trips.
std::string format_double(double v);

template <typename T>
std::vector<T> read_jsonl(std::istream& in) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<T>());
    } catch (const Json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

template <typename T>
void write_jsonl(std::ostream& out, const std::vector<T>& items) {
  for (const auto& item : items) out << Json(item).dump() << '\n';
}

// Path wrappers; throw ParseError when the file cannot be opened.
std::vector<RawPost> read_raw_posts(const std::string& path);
std::vector<Post> read_posts(const std::string& path);
std::vector<Tuple4> read_tuples(const std::string& path);
std::vector<Judgment> read_judgments(const std::string& path);
std::vector<GoldTuple> read_gold(const std::string& path);

void write_posts(const std::string& path, const std::vector<Post>& posts);
void write_tuples(const std::string& path, const std::vector<Tuple4>& tuples);
void write_judgments(const std::string& path, const std::vector<Judgment>& judgments);
void write_json(const std::string& path, const Json& value);

// JSON object mapping emoticon sequences to tokens.
EmoticonTable read_emoticons(const std::string& path);

// CSV "post_id,score,n_appearances,n_best,n_worst".
void write_scores(std::ostream& out, const std::vector<IntensityScore>& scores);
void write_scores(const std::string& path, const std::vector<IntensityScore>& scores);
std::vector<IntensityScore> read_scores(std::istream& in);

// Any CSV with "post_id" and "score" columns (a scores file or the
// baseline's predictions) as a post -> intensity map.
std::map<std::size_t, double> read_intensities(std::istream& in);
std::map<std::size_t, double> read_intensities(const std::string& path);

// CSV "t_index,post_count,density".
void write_series(std::ostream& out, const PopularitySeries& series);
PopularitySeries read_series(std::istream& in);

}  // namespace cscale
