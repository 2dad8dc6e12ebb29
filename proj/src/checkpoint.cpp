#include "fcoh/checkpoint.hpp"

#include <fstream>

#include "fcoh/errors.hpp"
#include "fcoh/io_util.hpp"

namespace fcoh {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

void save_checkpoint(const std::filesystem::path& path, const HashModel& model,
                     const ClassRunningStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot open " + path.string());
  out.write("FCOH", 4);
  io::write_u32(out, kCheckpointVersion);
  io::write_u64(out, model.dim());
  io::write_u64(out, model.bits());
  for (std::size_t i = 0; i < model.weights().size(); ++i) {
    io::write_f64(out, model.weights().data()[i]);
  }
  io::write_u64(out, stats.entries().size());
  for (const auto& [label, entry] : stats.entries()) {
    io::write_i32(out, label);
    io::write_u64(out, entry.count);
    for (std::size_t i = 0; i < entry.center.size(); ++i) {
      io::write_f64(out, entry.center.data()[i]);
    }
  }
  if (!out) throw DataError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "FCOH") {
    throw DataError("checkpoint: bad magic in " + path.string());
  }
  const std::uint32_t version = io::read_u32(in, path, "version");
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version in " + path.string());
  }
  const std::uint64_t d = io::read_u64(in, path, "feature dimension");
  const std::uint64_t r = io::read_u64(in, path, "code length");
  if (d == 0 || r == 0) {
    throw DataError("checkpoint: zero dimensions in " + path.string());
  }

  Matrix w(d, r);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.data()[i] = io::read_f64(in, path, "weights");
  }

  Checkpoint ckpt;
  ckpt.model = HashModel(std::move(w));
  const std::uint64_t classes = io::read_u64(in, path, "class count");
  for (std::uint64_t c = 0; c < classes; ++c) {
    const std::int32_t label = io::read_i32(in, path, "class label");
    ClassRunningStats::Entry entry;
    entry.count = io::read_u64(in, path, "class sample count");
    entry.center = Matrix(d, 1);
    for (std::size_t i = 0; i < d; ++i) {
      entry.center(i, 0) = io::read_f64(in, path, "class center");
    }
    ckpt.stats.entries()[label] = std::move(entry);
  }
  return ckpt;
}

}  // namespace fcoh
