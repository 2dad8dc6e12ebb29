#pragma once

#include <filesystem>

#include "fcoh/model.hpp"

namespace fcoh {

// Checkpoint layout, little-endian throughout:
//   "FCOH" magic, u32 version,
//   u64 d, u64 r, d*r f64 weights row-major,
//   u64 class count, then per class: i32 label, u64 count, d f64 center.
// Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const HashModel& model,
                     const ClassRunningStats& stats);

struct Checkpoint {
  HashModel model;
  ClassRunningStats stats;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fcoh
