#include "scengraph/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>

#include "scengraph/concretizer.hpp"

namespace scengraph {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string outcome_label(const OutcomeSummary& s) {
  std::string out(to_string(s.kind));
  if (s.collision_pair) out += "(" + s.collision_pair->first + "," + s.collision_pair->second + ")";
  return out;
}

std::vector<SweepRow> sweep(const ScenarioGraph& g, const TickConfig& config, unsigned threads, const Registry& reg) {
  const auto p = plan(g, reg);
  std::vector<SweepRow> rows(p.total_count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, p.total_count)));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (auto i = next++; i < p.total_count && !failed; i = next++) {
      try {
        rows[i] = SweepRow{i, outcome(run(enumerate(g, p, i), config, reg))};
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "index,outcome,min_distance,completion_time\n";
  for (const auto& r : rows) {
    const auto label = outcome_label(r.summary);
    out += std::to_string(r.index) + ",";
    out += label.find(',') == std::string::npos ? label : "\"" + label + "\"";
    out += "," + (r.summary.min_distance ? fixed3(*r.summary.min_distance) : std::string());
    out += "," + (r.summary.completion_time ? fixed3(*r.summary.completion_time) : std::string()) + "\n";
  }
  return out;
}

}  // namespace scengraph
