#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nlslab/dissipation.hpp"
#include "nlslab/experiment.hpp"
#include "nlslab/flow.hpp"
#include "nlslab/noise.hpp"
#include "nlslab/sde.hpp"

namespace nlslab::detail {

// Stream keys passed to RandomStream::derive(seed, key). SDE path n uses key n.
inline constexpr std::uint64_t kCellStream = 1ULL << 32;      // + cell index (kb, inviscid)
inline constexpr std::uint64_t kCorpusStream = 1ULL << 33;    // ensemble corpus
inline constexpr std::uint64_t kVerifyStream = 1ULL << 34;    // + suite index
inline constexpr std::uint64_t kInitialStream = 1ULL << 40;   // gaussian initial datum

nlohmann::json stream_layout();

struct WorkItem {
  std::string id;
  // Receives the worker budget left for the item itself.
  std::function<ItemResult(int workers)> run;
};

std::vector<WorkItem> plan(const ExperimentConfig& config);

// Checks that need every item, e.g. bounded families across grid cells.
void cross_checks(const ExperimentConfig& config, const std::vector<ItemResult>& items,
                  std::map<std::string, Table>& tables, std::vector<CheckRow>& checks);

std::shared_ptr<const Lattice> make_lattice(const ExperimentConfig& c, double cutoff);
FlowConfig flow_config(const ExperimentConfig& c);
SdeConfig sde_config(const ExperimentConfig& c, double alpha);
DissipationParams dissipation_params(const ExperimentConfig& c);
NoiseProfile noise_profile(const ExperimentConfig& c, const Lattice& lattice);

inline std::string num(double x) { return format_number(x); }

}  // namespace nlslab::detail
