#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scengraph/executor.hpp"

namespace scengraph {

struct SweepRow {
  std::uint64_t index = 0;
  OutcomeSummary summary;
};

/// Runs every enumeration index of a logical (or concrete) scenario.
/// Rows come back in index order whatever the thread count; threads = 0
/// picks the hardware concurrency.
std::vector<SweepRow> sweep(const ScenarioGraph& g, const TickConfig& config = {}, unsigned threads = 0,
                            const Registry& reg = Registry::builtin());

/// "index,outcome,min_distance,completion_time" with millimetre/millisecond
/// precision; collision outcomes are quoted, e.g. "Collision(ego,bike)".
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Outcome label as used in sweep tables, e.g. Collision(ego,bike).
std::string outcome_label(const OutcomeSummary& s);

}  // namespace scengraph
