// Copyright 2026 The stackkd Authors.
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

#include "stackkd/metrics.hpp"

#include <cstdio>
#include <map>

namespace stackkd {

double crr(const GraphemeSequence& pred, const GraphemeSequence& label) {
  if (label.empty()) throw Error("crr: empty label");
  // integer numerator keeps round anchors such as 4/5 -> 80 exact
  const std::size_t ed = edit_distance(pred, label);
  const double hits = ed >= label.size() ? 0.0 : static_cast<double>(label.size() - ed);
  return 100.0 * hits / static_cast<double>(label.size());
}

double wrr(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw Error("wrr: no pairs");
  std::size_t hit = 0;
  for (const auto& p : pairs) hit += p.pred == p.label ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(pairs.size());
}

NedResult ned(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw Error("ned: no pairs");
  NedResult r;
  std::uint64_t len = 0;
  for (const auto& p : pairs) {
    r.total += edit_distance(p.pred, p.label);
    len += p.label.size();
  }
  r.normalized = len ? static_cast<double>(r.total) / static_cast<double>(len) : 0.0;
  return r;
}

std::vector<AlignStep> align(const GraphemeSequence& pred, const GraphemeSequence& label) {
  const std::size_t n = pred.size(), m = label.size();
  // d(i, j): distance between pred[0, i) and label[0, j)
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (pred[i - 1] == label[j - 1] ? 0 : 1), at(i, j - 1) + 1,
                           at(i - 1, j) + 1});

  std::vector<AlignStep> steps;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && pred[i - 1] == label[j - 1] && at(i, j) == at(i - 1, j - 1)) {
      steps.push_back({AlignOp::match, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
      steps.push_back({AlignOp::substitute, i - 1, j - 1});
      --i, --j;
    } else if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      steps.push_back({AlignOp::del, 0, j - 1});
      --j;
    } else {
      steps.push_back({AlignOp::insert, i - 1, 0});
      --i;
    }
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

F1Summary per_class_f1(std::span<const PredictionPair> pairs, const MinorMajorSplit& split) {
  std::map<Grapheme, ClassScore> acc;
  auto cls = [&](const Grapheme& g) -> ClassScore& {
    auto& s = acc[g];
    s.grapheme = g;
    return s;
  };
  for (const auto& p : pairs) {
    for (const auto& g : p.label) ++cls(g).support;
    for (const AlignStep& st : align(p.pred, p.label)) {
      switch (st.op) {
        case AlignOp::match: ++cls(p.label[st.label_pos]).tp; break;
        case AlignOp::substitute:
          ++cls(p.label[st.label_pos]).fn;
          ++cls(p.pred[st.pred_pos]).fp;
          break;
        case AlignOp::del: ++cls(p.label[st.label_pos]).fn; break;
        case AlignOp::insert: ++cls(p.pred[st.pred_pos]).fp; break;
      }
    }
  }
  F1Summary out;
  std::vector<double> all, minor, major;
  for (auto& [g, s] : acc) {
    s.precision = ratio(s.tp, s.tp + s.fp);
    s.recall = ratio(s.tp, s.tp + s.fn);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    s.minor = !split.major.contains(g);
    all.push_back(s.f1);
    (s.minor ? minor : major).push_back(s.f1);
    out.per_class.push_back(s);
  }
  out.f1_all = mean(all);
  out.f1_minor = mean(minor);
  out.f1_major = mean(major);
  return out;
}

EvalReport evaluate_pairs(std::span<const PredictionPair> pairs, const MinorMajorSplit& split) {
  EvalReport r;
  const NedResult n = ned(pairs);
  r.ned_total = n.total;
  r.ned_normalized = n.normalized;
  double c = 0.0;
  for (const auto& p : pairs) c += crr(p.pred, p.label);
  r.crr = c / static_cast<double>(pairs.size());
  r.wrr = wrr(pairs);
  F1Summary f = per_class_f1(pairs, split);
  r.f1_all = f.f1_all;
  r.f1_minor = f.f1_minor;
  r.f1_major = f.f1_major;
  r.per_class = std::move(f.per_class);
  r.num_words = pairs.size();
  return r;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["ned_total"] = r.ned_total;
  j["ned_normalized"] = r.ned_normalized;
  j["crr"] = r.crr;
  j["wrr"] = r.wrr;
  j["f1_all"] = r.f1_all;
  j["f1_minor"] = r.f1_minor;
  j["f1_major"] = r.f1_major;
  j["num_words"] = r.num_words;
  auto& pc = j["per_class"] = nlohmann::ordered_json::array();
  for (const auto& s : r.per_class)
    pc.push_back({{"grapheme", s.grapheme.text()},
                  {"precision", s.precision},
                  {"recall", s.recall},
                  {"f1", s.f1},
                  {"support", s.support},
                  {"tp", s.tp},
                  {"fp", s.fp},
                  {"fn", s.fn},
                  {"minor", s.minor}});
  return j;
}

EvalReport report_from_json(const nlohmann::ordered_json& j) {
  EvalReport r;
  r.ned_total = j.at("ned_total").get<std::uint64_t>();
  r.ned_normalized = j.at("ned_normalized").get<double>();
  r.crr = j.at("crr").get<double>();
  r.wrr = j.at("wrr").get<double>();
  r.f1_all = j.at("f1_all").get<double>();
  r.f1_minor = j.at("f1_minor").get<double>();
  r.f1_major = j.at("f1_major").get<double>();
  r.num_words = j.value("num_words", std::size_t{0});
  for (const auto& e : j.value("per_class", nlohmann::ordered_json::array())) {
    ClassScore s;
    s.grapheme = Grapheme(e.at("grapheme").get<std::string>());
    s.precision = e.at("precision").get<double>();
    s.recall = e.at("recall").get<double>();
    s.f1 = e.at("f1").get<double>();
    s.support = e.at("support").get<std::uint64_t>();
    s.tp = e.value("tp", std::uint64_t{0});
    s.fp = e.value("fp", std::uint64_t{0});
    s.fn = e.value("fn", std::uint64_t{0});
    s.minor = e.value("minor", false);
    r.per_class.push_back(std::move(s));
  }
  return r;
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string summary_tsv_header() { return "name\tNED\tCRR\tWRR\tF1-all\tF1-minor\tF1-major"; }

std::string summary_tsv_row(const std::string& name, const EvalReport& r) {
  return name + "\t" + std::to_string(r.ned_total) + "\t" + fmt2(r.crr) + "\t" + fmt2(r.wrr) + "\t" +
         fmt2(r.f1_all) + "\t" + fmt2(r.f1_minor) + "\t" + fmt2(r.f1_major);
}

std::string summary_markdown_header() {
  return "| name | NED | CRR | WRR | F1-all | F1-minor | F1-major |\n"
         "|---|---:|---:|---:|---:|---:|---:|";
}

std::string summary_markdown_row(const std::string& name, const EvalReport& r) {
  return "| " + name + " | " + std::to_string(r.ned_total) + " | " + fmt2(r.crr) + " | " + fmt2(r.wrr) +
         " | " + fmt2(r.f1_all) + " | " + fmt2(r.f1_minor) + " | " + fmt2(r.f1_major) + " |";
}

}  // namespace stackkd
