#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rpl/common/error.hpp"
#include "rpl/harness/experiment.hpp"

namespace rpl::harness {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("csv: bad number '" + s + "'");
  return v;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

bool RunRecord::operator==(const RunRecord& o) const {
  return method == o.method && task == o.task && seed == o.seed && epoch == o.epoch && env_steps == o.env_steps &&
         same(eval_success_rate, o.eval_success_rate) && same(train_success_rate, o.train_success_rate) &&
         same(critic_loss_mean, o.critic_loss_mean) && actor_frozen == o.actor_frozen &&
         same(wall_seconds, o.wall_seconds);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"method",           "task",          "seed",
                                                "epoch",            "env_steps",     "eval_success_rate",
                                                "train_success_rate", "critic_loss_mean", "actor_frozen",
                                                "wall_seconds"};
  return cols;
}

void write_csv_header(std::ostream& os) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_csv_row(std::ostream& os, const RunRecord& r) {
  os << r.method << ',' << r.task << ',' << r.seed << ',' << r.epoch << ',' << r.env_steps << ','
     << number(r.eval_success_rate) << ',' << number(r.train_success_rate) << ',' << number(r.critic_loss_mean) << ','
     << (r.actor_frozen ? 1 : 0) << ',' << number(r.wall_seconds) << '\n';
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  write_csv_header(os);
  for (const RunRecord& r : records) write_csv_row(os, r);
}

std::vector<RunRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: missing header");
  if (split(line) != csv_columns()) throw ConfigError("csv: unexpected header '" + line + "'");
  std::vector<RunRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != csv_columns().size()) throw ConfigError("csv: wrong field count in '" + line + "'");
    try {
      RunRecord r;
      r.method = f[0];
      r.task = f[1];
      r.seed = std::stoull(f[2]);
      r.epoch = std::stoi(f[3]);
      r.env_steps = std::stol(f[4]);
      r.eval_success_rate = parse_number(f[5]);
      r.train_success_rate = parse_number(f[6]);
      r.critic_loss_mean = parse_number(f[7]);
      if (f[8] != "0" && f[8] != "1") throw ConfigError("csv: actor_frozen must be 0 or 1");
      r.actor_frozen = f[8] == "1";
      r.wall_seconds = parse_number(f[9]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("csv: malformed row '" + line + "'");
    }
  }
  return out;
}

std::vector<RunRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

std::vector<CurvePoint> aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) return {};
  std::map<std::uint64_t, std::vector<const RunRecord*>> by_seed;
  for (const RunRecord& r : records) {
    require(r.method == records.front().method && r.task == records.front().task,
            "aggregate: records mix methods or tasks");
    by_seed[r.seed].push_back(&r);
  }
  const auto& first = by_seed.begin()->second;
  for (const auto& [seed, rows] : by_seed) {
    require(rows.size() == first.size(), "aggregate: seed " + std::to_string(seed) + " has a different epoch count");
    for (std::size_t i = 0; i < rows.size(); ++i)
      require(rows[i]->epoch == first[i]->epoch, "aggregate: seeds report different epochs");
  }
  std::vector<CurvePoint> curve;
  for (std::size_t i = 0; i < first.size(); ++i) {
    CurvePoint p;
    p.method = first[i]->method;
    p.task = first[i]->task;
    p.epoch = first[i]->epoch;
    p.env_steps = first[i]->env_steps;
    p.seeds = static_cast<int>(by_seed.size());
    double sum = 0.0;
    for (const auto& [seed, rows] : by_seed) sum += rows[i]->eval_success_rate;
    p.mean = sum / p.seeds;
    double sq = 0.0;
    for (const auto& [seed, rows] : by_seed) sq += (rows[i]->eval_success_rate - p.mean) * (rows[i]->eval_success_rate - p.mean);
    p.std = std::sqrt(sq / p.seeds);
    curve.push_back(p);
  }
  return curve;
}

std::vector<CurvePoint> aggregate_groups(const std::vector<RunRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<RunRecord>> groups;
  for (const RunRecord& r : records) groups[{r.method, r.task}].push_back(r);
  std::vector<CurvePoint> out;
  for (const auto& [key, rows] : groups) {
    const auto curve = aggregate(rows);
    out.insert(out.end(), curve.begin(), curve.end());
  }
  return out;
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve) {
  os << "method,task,epoch,env_steps,mean,std,seeds\n";
  for (const CurvePoint& p : curve)
    os << p.method << ',' << p.task << ',' << p.epoch << ',' << p.env_steps << ',' << number(p.mean) << ','
       << number(p.std) << ',' << p.seeds << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "size,mean,std,trials\n";
  for (const SweepRow& r : rows) os << r.size << ',' << number(r.mean) << ',' << number(r.std) << ',' << r.trials << '\n';
}

}  // namespace rpl::harness
