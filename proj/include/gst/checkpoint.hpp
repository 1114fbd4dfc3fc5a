#pragma once

#include <map>
#include <string>
#include <vector>

#include "gst/bytesio.hpp"
#include "gst/netcore.hpp"
#include "gst/schedule.hpp"

namespace gst {

// Versioned self-describing checkpoint container (.gstc): magic "GSTC",
// version, then named sections in a fixed order. Loaders read the whole file
// before touching any state, so a failed load leaves nothing half-written.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  // insertion-ordered
  std::vector<std::pair<std::string, std::vector<uint8_t>>> sections;

  void add(const std::string& name, std::vector<uint8_t> payload);
  bool has(const std::string& name) const;
  const std::vector<uint8_t>& get(const std::string& name) const;  // throws CodecError
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;

  std::vector<uint8_t> serialize() const;
  static Checkpoint parse(const std::vector<uint8_t>& bytes);

  void write_file(const std::string& path) const;
  static Checkpoint read_file(const std::string& path);
};

// section payload codecs
void write_mlp(ByteWriter& w, const Mlp& mlp);
Mlp read_mlp(ByteReader& r);
void write_optim(ByteWriter& w, const OptimState& opt);
OptimState read_optim(ByteReader& r);
void write_scheduler(ByteWriter& w, const SchedulerState& s);
SchedulerState read_scheduler(ByteReader& r);

// Single-model convenience pair: enough state that a reloaded model computes
// identical forward passes and identical next optimizer steps.
void save_checkpoint(const Mlp& mlp, const OptimState& opt, const SchedulerState& sched,
                     const std::string& path);
struct LoadedCheckpoint {
  Mlp mlp;
  OptimState optim;
  SchedulerState scheduler;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace gst
