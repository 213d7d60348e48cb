#include "sead/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace sead {

bool acc_lf(const SqlQuery& pred, const SqlQuery& gold) {
  return canonicalize(pred) == canonicalize(gold);
}

bool acc_ex(const SqlQuery& pred, const SqlQuery& gold, const Table& table) {
  auto p = execute(pred, table);
  if (!p.ok()) return false;
  auto g = execute(gold, table);
  if (!g.ok()) return false;
  return results_equal(*p.result, *g.result);
}

ComponentFlags component_scores(const SqlQuery& pred, const SqlQuery& gold) {
  ComponentFlags f;
  f.s_col = pred.select_column == gold.select_column;
  f.s_agg = pred.aggregation == gold.aggregation;

  SqlQuery p = canonicalize(pred);
  SqlQuery g = canonicalize(gold);
  using ColKey = int;
  using OpKey = std::tuple<int, int>;
  using ValKey = std::tuple<int, int, std::string>;
  std::vector<ColKey> pc, gc;
  std::vector<OpKey> po, go;
  std::vector<ValKey> pv, gv;
  for (const auto& c : p.conditions) {
    pc.push_back(c.column);
    po.emplace_back(c.column, static_cast<int>(c.op));
    pv.emplace_back(c.column, static_cast<int>(c.op), c.value);
  }
  for (const auto& c : g.conditions) {
    gc.push_back(c.column);
    go.emplace_back(c.column, static_cast<int>(c.op));
    gv.emplace_back(c.column, static_cast<int>(c.op), c.value);
  }
  std::sort(pc.begin(), pc.end());
  std::sort(gc.begin(), gc.end());
  std::sort(po.begin(), po.end());
  std::sort(go.begin(), go.end());
  std::sort(pv.begin(), pv.end());
  std::sort(gv.begin(), gv.end());
  f.w_col = pc == gc;
  f.w_op = po == go;
  f.w_val = pv == gv;
  return f;
}

void EvalReport::recompute() {
  n = verdicts.size();
  size_t lf = 0, ex = 0, sc = 0, sa = 0, wc = 0, wo = 0, wv = 0;
  for (const auto& v : verdicts) {
    lf += v.lf;
    ex += v.ex;
    sc += v.components.s_col;
    sa += v.components.s_agg;
    wc += v.components.w_col;
    wo += v.components.w_op;
    wv += v.components.w_val;
  }
  const double d = n ? static_cast<double>(n) : 1.0;
  acc_lf = lf / d;
  acc_ex = ex / d;
  s_col = sc / d;
  s_agg = sa / d;
  w_col = wc / d;
  w_op = wo / d;
  w_val = wv / d;
}

std::string report_json(const EvalReport& rep) {
  nlohmann::json j;
  j["n"] = rep.n;
  j["acc_lf"] = rep.acc_lf;
  j["acc_ex"] = rep.acc_ex;
  j["components"] = {{"s_col", rep.s_col},
                     {"s_agg", rep.s_agg},
                     {"w_col", rep.w_col},
                     {"w_op", rep.w_op},
                     {"w_val", rep.w_val}};
  j["bleu"] = rep.bleu;
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : rep.verdicts) {
    verdicts.push_back({{"index", v.index},
                        {"parsed", v.parsed},
                        {"lf", v.lf},
                        {"ex", v.ex},
                        {"s_col", v.components.s_col},
                        {"s_agg", v.components.s_agg},
                        {"w_col", v.components.w_col},
                        {"w_op", v.components.w_op},
                        {"w_val", v.components.w_val},
                        {"prediction", v.prediction},
                        {"note", v.decode_note}});
  }
  j["verdicts"] = std::move(verdicts);
  return j.dump(2);
}

std::string report_table(const EvalReport& rep, const std::string& title) {
  auto pct = [](double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%5.1f", f * 100.0);
    return std::string(buf);
  };
  std::ostringstream out;
  if (!title.empty()) out << title << "\n";
  out << "  n       " << rep.n << "\n";
  out << "  acc_lf  " << pct(rep.acc_lf) << "\n";
  out << "  acc_ex  " << pct(rep.acc_ex) << "\n";
  out << "  s_col   " << pct(rep.s_col) << "\n";
  out << "  s_agg   " << pct(rep.s_agg) << "\n";
  out << "  w_col   " << pct(rep.w_col) << "\n";
  out << "  w_op    " << pct(rep.w_op) << "\n";
  out << "  w_val   " << pct(rep.w_val) << "\n";
  out << "  bleu    " << pct(rep.bleu / 100.0) << "\n";
  return out.str();
}

}  // namespace sead
