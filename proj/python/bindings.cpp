#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "complaintscale/baseline.hpp"
#include "complaintscale/corpus.hpp"
#include "complaintscale/error.hpp"
#include "complaintscale/metrics.hpp"
#include "complaintscale/popularity.hpp"
#include "complaintscale/reliability.hpp"
#include "complaintscale/scoring.hpp"
#include "complaintscale/tuples.hpp"

namespace py = pybind11;
using namespace cscale;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Best-worst scaling, reliability, baselines and popularity models.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<RangeError>(m, "RangeError", error.ptr());
  py::register_exception<InfeasibleDesign>(m, "InfeasibleDesign", error.ptr());
  py::register_exception<InvalidJudgment>(m, "InvalidJudgment", error.ptr());
  py::register_exception<ZeroVariance>(m, "ZeroVariance", error.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", error.ptr());

  py::class_<Tuple4>(m, "Tuple4")
      .def(py::init<>())
      .def(py::init([](std::size_t id, std::array<std::size_t, 4> ids) { return Tuple4{id, ids}; }),
           py::arg("id"), py::arg("post_ids"))
      .def_readwrite("id", &Tuple4::id)
      .def_readwrite("post_ids", &Tuple4::post_ids)
      .def("__repr__", [](const Tuple4& t) {
        return "Tuple4(" + std::to_string(t.id) + ", [" + std::to_string(t.post_ids[0]) + ", " +
               std::to_string(t.post_ids[1]) + ", " + std::to_string(t.post_ids[2]) + ", " +
               std::to_string(t.post_ids[3]) + "])";
      });

  py::class_<Judgment>(m, "Judgment")
      .def(py::init([](std::size_t tuple_id, std::string annotator_id, std::size_t best,
                       std::size_t worst) {
             return Judgment{tuple_id, std::move(annotator_id), best, worst, 0};
           }),
           py::arg("tuple_id"), py::arg("annotator_id"), py::arg("best_post_id"),
           py::arg("worst_post_id"))
      .def_readwrite("tuple_id", &Judgment::tuple_id)
      .def_readwrite("annotator_id", &Judgment::annotator_id)
      .def_readwrite("best_post_id", &Judgment::best_post_id)
      .def_readwrite("worst_post_id", &Judgment::worst_post_id);

  py::class_<IntensityScore>(m, "IntensityScore")
      .def_readonly("post_id", &IntensityScore::post_id)
      .def_readonly("n_appearances", &IntensityScore::n_appearances)
      .def_readonly("n_best", &IntensityScore::n_best)
      .def_readonly("n_worst", &IntensityScore::n_worst)
      .def_readonly("score", &IntensityScore::score);

  py::class_<DesignStats>(m, "DesignStats")
      .def_readonly("item_count_min", &DesignStats::item_count_min)
      .def_readonly("item_count_max", &DesignStats::item_count_max)
      .def_readonly("pair_count_max", &DesignStats::pair_count_max)
      .def_readonly("pair_count_histogram", &DesignStats::pair_count_histogram);

  py::enum_<CountingMode>(m, "CountingMode")
      .value("PER_JUDGMENT", CountingMode::kPerJudgment)
      .value("PER_TUPLE_MAJORITY", CountingMode::kPerTupleMajority);

  m.def(
      "design_tuples",
      [](std::size_t n, std::size_t multiplier, std::uint64_t seed) {
        Design d = design_tuples({.n = n, .multiplier = multiplier, .seed = seed});
        return py::make_tuple(d.tuples, d.stats);
      },
      py::arg("n"), py::arg("multiplier") = 2, py::arg("seed") = 0,
      "Returns (tuples, stats).");
  m.def(
      "verify_design",
      [](const std::vector<Tuple4>& tuples, std::size_t n, std::size_t max_pair_spread) {
        const DesignCheck c = verify_design(tuples, n, max_pair_spread);
        std::vector<std::pair<int, std::string>> v;
        for (const auto& x : c.violations) v.emplace_back(x.criterion, x.message);
        return py::make_tuple(c.stats, v);
      },
      py::arg("tuples"), py::arg("n"), py::arg("max_pair_spread") = 2,
      "Returns (stats, [(criterion, message), ...]).");

  m.def(
      "aggregate_scores",
      [](const std::vector<Tuple4>& tuples, const std::vector<Judgment>& judgments,
         CountingMode mode) { return aggregate_scores(tuples, judgments, mode).scores; },
      py::arg("tuples"), py::arg("judgments"), py::arg("mode") = CountingMode::kPerJudgment);
  m.def("bin_score", &bin_score, py::arg("score"));

  m.def(
      "simulate_judgments",
      [](const std::vector<double>& latent, const std::vector<Tuple4>& tuples,
         std::size_t annotators, double sigma, std::uint64_t seed) {
        return simulate_judgments(latent, tuples, annotators, sigma, seed);
      },
      py::arg("latent"), py::arg("tuples"), py::arg("annotators_per_tuple") = 3,
      py::arg("noise_sigma") = 0.1, py::arg("seed") = 0);
  m.def(
      "split_half_reliability",
      [](const std::vector<Tuple4>& tuples, const std::vector<Judgment>& judgments,
         std::size_t repeats, std::uint64_t seed, bool mirrored) {
        const ShrResult r = split_half_reliability(
            tuples, judgments,
            {.repeats = repeats, .seed = seed,
             .mode = mirrored ? SplitMode::kMirrored : SplitMode::kRandom});
        py::dict d;
        d["mean_r"] = r.mean_r;
        d["std_r"] = r.std_r;
        d["repeats"] = r.repeats;
        d["n_posts_used"] = r.n_posts_used;
        d["n_degenerate"] = r.n_degenerate;
        return d;
      },
      py::arg("tuples"), py::arg("judgments"), py::arg("repeats") = 100, py::arg("seed") = 0,
      py::arg("mirrored") = false);

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return metrics::pearson(x, y);
  });
  m.def("mse", [](const std::vector<double>& x, const std::vector<double>& y) {
    return metrics::mse(x, y);
  });
  m.def("rmse", [](const std::vector<double>& x, const std::vector<double>& y) {
    return metrics::rmse(x, y);
  });
  m.def("mae", [](const std::vector<double>& x, const std::vector<double>& y) {
    return metrics::mae(x, y);
  });

  m.def(
      "clean_text",
      [](const std::string& text, const std::optional<std::string>& author) {
        RawPost raw;
        raw.text = text;
        raw.author = author;
        auto c = clean_post(raw, default_emoticons());
        return c ? std::optional<std::string>(c->text) : std::nullopt;
      },
      py::arg("text"), py::arg("author") = std::nullopt);
  m.def(
      "tokenize",
      [](const std::string& text) { return Tokenizer::characters().tokenize(text); },
      py::arg("text"));

  py::class_<KrrModel>(m, "KrrModel")
      .def_readonly("lambda_", &KrrModel::lambda)
      .def_readonly("gamma", &KrrModel::gamma)
      .def("predict", [](const KrrModel& model, const std::vector<std::string>& texts) {
        return predict_texts(model, texts);
      })
      .def("save", [](const KrrModel& model, const std::string& path) { save_model(model, path); });
  m.def(
      "train_baseline",
      [](const std::vector<std::string>& texts, const std::vector<double>& targets,
         double lambda, std::optional<double> gamma) {
        const FeatureConfig config;
        std::vector<SparseVector> rows;
        for (const auto& t : texts) rows.push_back(extract_features(t, config));
        const double g = gamma ? *gamma : default_gamma(rows);
        return train_krr(std::move(rows), targets, lambda, g, config);
      },
      py::arg("texts"), py::arg("targets"), py::arg("lambda_") = 1.0,
      py::arg("gamma") = std::nullopt);
  m.def("load_baseline", &load_model, py::arg("path"));

  m.def(
      "fit_popularity",
      [](const std::vector<std::size_t>& counts, const std::vector<double>& density,
         bool use_density) {
        if (counts.size() != density.size()) {
          throw std::invalid_argument("counts and density differ in length");
        }
        PopularitySeries s;
        for (std::size_t i = 0; i < counts.size(); ++i) {
          s.buckets.push_back({static_cast<std::int64_t>(i), counts[i], density[i]});
        }
        const PopularityModel model =
            fit(s, use_density ? PopularityVariant::kDensity : PopularityVariant::kBaseline);
        return py::make_tuple(model.coefficients, model.rank_deficient);
      },
      py::arg("counts"), py::arg("density"), py::arg("use_density") = true,
      "Returns (coefficients, rank_deficient).");
}
