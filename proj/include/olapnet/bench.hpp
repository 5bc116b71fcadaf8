/*
 * Copyright 2026 The olapnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file bench.hpp
 * @brief Benchmark harness: single runs, weak scaling, oracle verification.
 */

#pragma once

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "olapnet/queries.hpp"

namespace olapnet::bench {

using queries::QueryParams;

/// One measured execution. Byte counts are summed over all nodes.
struct BenchReport {
  int query = 0;
  std::string variant;
  int P = 1;
  double sf = 0;
  double walltime_ms = 0;       // slowest node, barrier to result
  double comm_blocked_ms = 0;   // mean over nodes of time blocked in collectives
  double comm_fraction = 0;     // comm_blocked_ms / walltime_ms
  std::uint64_t bytes_sent_total = 0;
  std::map<std::string, std::uint64_t> bytes_per_phase;
  std::vector<std::uint64_t> rows_scanned_per_node;
};

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> c = {"query",           "variant",          "P",
                                             "sf",              "walltime_ms",      "comm_blocked_ms",
                                             "comm_fraction",   "bytes_sent_total", "bytes_per_phase",
                                             "rows_scanned_per_node"};
  return c;
}

/// "phase=bytes;phase=bytes", unnamed phase as "main".
inline std::string format_phases(const std::map<std::string, std::uint64_t>& m) {
  std::string s;
  for (const auto& [k, v] : m) {
    if (!s.empty()) s += ';';
    s += (k.empty() ? std::string("main") : k) + "=" + std::to_string(v);
  }
  return s;
}

inline std::string format_rows(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

inline void write_report_header(std::ostream& os) {
  const auto& c = report_columns();
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
  os << "\r\n";
}

inline void write_report_row(std::ostream& os, const BenchReport& r) {
  std::ostringstream num;
  num << std::fixed << std::setprecision(3);
  auto fixed = [&](double x) {
    num.str("");
    num << x;
    return num.str();
  };
  std::ostringstream sfs;
  sfs << r.sf;
  os << r.query << ',' << csv_field(r.variant) << ',' << r.P << ',' << sfs.str() << ',' << fixed(r.walltime_ms) << ','
     << fixed(r.comm_blocked_ms) << ',' << fixed(r.comm_fraction) << ',' << r.bytes_sent_total << ','
     << csv_field(format_phases(r.bytes_per_phase)) << ',' << csv_field(format_rows(r.rows_scanned_per_node)) << "\r\n";
}

inline void write_report(std::ostream& os, const std::vector<BenchReport>& rows) {
  write_report_header(os);
  for (const auto& r : rows) write_report_row(os, r);
}

/// Rough resident size of a full generated database at scale factor sf.
inline std::uint64_t estimate_bytes(double sf) {
  const auto c = tpch::cardinalities(sf);
  const double lines = 4.0 * static_cast<double>(c.orders);
  const double cells = lines * 13 + static_cast<double>(c.orders) * 8 + static_cast<double>(c.partsupp) * 4 +
                       static_cast<double>(c.part) * 5 + static_cast<double>(c.customer) * 7 +
                       static_cast<double>(c.supplier) * 6;
  // values, join indexes and string payloads
  return static_cast<std::uint64_t>(cells * 8 * 1.6);
}

/// Budget from OLAPNET_MEM_BUDGET_MB, default 4096 MiB.
inline std::uint64_t memory_budget() {
  if (const char* s = std::getenv("OLAPNET_MEM_BUDGET_MB"); s != nullptr && *s != '\0') {
    try {
      return std::stoull(s) << 20;
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("OLAPNET_MEM_BUDGET_MB='") + s + "' is not a number");
    }
  }
  return std::uint64_t{4096} << 20;
}

inline void check_budget(double sf, int P) {
  if (!(sf > 0)) throw InvalidArgument("scale factor must be positive");
  if (P < 1) throw InvalidArgument("node count must be at least 1");
  const auto need = estimate_bytes(sf);
  const auto have = memory_budget();
  if (need > have) {
    std::ostringstream m;
    m << "sf=" << sf << " needs about " << (need >> 20) << " MiB, over the " << (have >> 20)
      << " MiB budget (set OLAPNET_MEM_BUDGET_MB to raise it)";
    throw InvalidArgument(m.str());
  }
}

struct RunOptions {
  std::uint64_t seed = tpch::kDefaultSeed;
  ClusterOptions cluster;
};

struct RunOutput {
  QueryResult result;
  BenchReport report;
  std::vector<CommStats> stats;  // per node, measured region only
};

/// Generates the database on P nodes, prepares the plan, synchronizes with a
/// barrier and runs the query once with accounting.
inline RunOutput run_single(int query, const std::string& variant, int P, double sf, const QueryParams& params = {},
                            const RunOptions& opt = {}) {
  queries::check_variant(query, variant);
  check_budget(sf, P);
  std::vector<double> wall(static_cast<std::size_t>(P), 0);
  RunOutput out;
  out.stats = run_cluster(
      P,
      [&](ClusterCtx& ctx) {
        auto db = tpch::generate_database({sf, P, ctx.rank(), opt.seed});
        queries::prepare(ctx, db, query, variant);
        ctx.barrier();
        ctx.stats() = CommStats{};
        auto t0 = std::chrono::steady_clock::now();
        auto r = queries::run_query(ctx, db, query, variant, params);
        wall[static_cast<std::size_t>(ctx.rank())] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (ctx.rank() == 0) out.result = std::move(r);
      },
      opt.cluster);

  auto& rep = out.report;
  rep.query = query;
  rep.variant = variant;
  rep.P = P;
  rep.sf = sf;
  rep.walltime_ms = *std::max_element(wall.begin(), wall.end());
  for (const auto& s : out.stats) {
    rep.comm_blocked_ms += s.blocked_ms / P;
    rep.bytes_sent_total += s.bytes_sent;
    rep.rows_scanned_per_node.push_back(s.rows_scanned);
    for (const auto& c : s.per_collective) rep.bytes_per_phase[c.phase] += c.payload_bytes;
  }
  rep.comm_fraction = rep.walltime_ms > 0 ? std::clamp(rep.comm_blocked_ms / rep.walltime_ms, 0.0, 1.0) : 0.0;
  return out;
}

/// Runs each P with sf = base_sf * P, repeats times; reports the median
/// walltime. Byte counts must agree across repeats.
inline std::vector<BenchReport> run_weak_scaling(int query, const std::string& variant, double base_sf,
                                                 const std::vector<int>& P_list, int repeats = 3,
                                                 const QueryParams& params = {}, const RunOptions& opt = {}) {
  if (repeats < 1) throw InvalidArgument("repeats must be at least 1");
  queries::check_variant(query, variant);
  for (int P : P_list) check_budget(base_sf * P, P);
  std::vector<BenchReport> out;
  for (int P : P_list) {
    std::vector<BenchReport> runs;
    for (int i = 0; i < repeats; ++i) runs.push_back(run_single(query, variant, P, base_sf * P, params, opt).report);
    for (const auto& r : runs)
      if (r.bytes_sent_total != runs.front().bytes_sent_total || r.bytes_per_phase != runs.front().bytes_per_phase)
        throw ProtocolError("byte counts differ between repeats at P=" + std::to_string(P));
    std::vector<double> w;
    double blocked = 0;
    for (const auto& r : runs) {
      w.push_back(r.walltime_ms);
      blocked += r.comm_blocked_ms / repeats;
    }
    std::sort(w.begin(), w.end());
    auto rep = runs.front();
    rep.walltime_ms = w.size() % 2 ? w[w.size() / 2] : (w[w.size() / 2 - 1] + w[w.size() / 2]) / 2;
    rep.comm_blocked_ms = blocked;
    rep.comm_fraction = rep.walltime_ms > 0 ? std::clamp(blocked / rep.walltime_ms, 0.0, 1.0) : 0.0;
    out.push_back(std::move(rep));
  }
  return out;
}

/// Upper bounds on result rows per query; exact for Q14.
inline std::pair<std::size_t, std::size_t> result_shape(int query) {
  switch (query) {
    case 1: return {0, 6};
    case 3: return {0, 10};
    case 4:
    case 5: return {0, 5};
    case 14: return {1, 1};
    case 2:
    case 18:
    case 21: return {0, 100};
    default: return {0, std::numeric_limits<std::size_t>::max()};
  }
}

enum class Fault { None, FlipTieBreak };

struct VerifyOptions {
  std::uint64_t seed = tpch::kDefaultSeed;
  Fault fault = Fault::None;
  std::ostream* log = nullptr;
};

struct VerifySummary {
  int checks = 0;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  int shape_violations = 0;
  bool passed() const { return failures.empty(); }
};

namespace detail {

/// Swaps the last two rows: the order a reversed tie-break would give on a tie at the cut.
inline void flip_tiebreak(QueryResult& r) {
  if (r.rows.size() >= 2) std::swap(r.rows[r.rows.size() - 1], r.rows[r.rows.size() - 2]);
}

}  // namespace detail

/// Every query and variant on every P against the single-node oracle, plus
/// the result-shape bounds.
inline VerifySummary verify_all(double sf, const std::vector<int>& P_list, const VerifyOptions& opt = {}) {
  VerifySummary sum;
  if (P_list.empty()) {
    sum.warnings.push_back("no node counts given; nothing verified");
    return sum;
  }
  for (int P : P_list) check_budget(sf, P);
  const auto ref = tpch::generate_database({sf, 1, 0, opt.seed});
  std::map<int, QueryResult> want;
  for (int q : queries::kQueryIds) want[q] = queries::oracle::run(ref, q);

  for (int P : P_list) {
    std::vector<tpch::Database> dbs(static_cast<std::size_t>(P));
    run_cluster(P, [&](ClusterCtx& ctx) {
      dbs[static_cast<std::size_t>(ctx.rank())] = tpch::generate_database({sf, P, ctx.rank(), opt.seed});
    });
    for (int q : queries::kQueryIds)
      for (const auto& v : queries::variants(q)) {
        QueryResult got;
        run_cluster(P, [&](ClusterCtx& ctx) {
          auto& db = dbs[static_cast<std::size_t>(ctx.rank())];
          queries::prepare(ctx, db, q, v);
          auto r = queries::run_query(ctx, db, q, v);
          if (ctx.rank() == 0) got = std::move(r);
        });
        if (opt.fault == Fault::FlipTieBreak) detail::flip_tiebreak(got);
        const std::string tag = "q" + std::to_string(q) + "/" + v + " P=" + std::to_string(P) + " sf=" + [&] {
          std::ostringstream s;
          s << sf;
          return s.str();
        }();
        ++sum.checks;
        if (got != want[q]) sum.failures.push_back(tag + ": " + first_difference(got, want[q]));
        auto [lo, hi] = result_shape(q);
        ++sum.checks;
        if (got.size() < lo || got.size() > hi) {
          ++sum.shape_violations;
          sum.failures.push_back(tag + ": " + std::to_string(got.size()) + " rows, expected between " +
                                 std::to_string(lo) + " and " + std::to_string(hi));
        }
        if (opt.log) *opt.log << (sum.failures.empty() || !sum.failures.back().starts_with(tag) ? "ok   " : "FAIL ") << tag << "\n";
      }
  }
  return sum;
}

}  // namespace olapnet::bench
