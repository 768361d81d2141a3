#include "pimrl/data.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <set>

#ifdef _WIN32
#include <io.h>
#else
#include <unistd.h>
#endif

#include "pimrl/errors.hpp"

namespace pimrl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32_le(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32_le(std::string& buf, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32_le(buf, v);
}

void put_f64_le(std::string& buf, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u32_le(buf, static_cast<std::uint32_t>(v & 0xffffffffull));
  put_u32_le(buf, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32_le(const unsigned char* p) {
  const std::uint32_t v = get_u32_le(p);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

double get_f64_le(const unsigned char* p) {
  const std::uint64_t v =
      static_cast<std::uint64_t>(get_u32_le(p)) | (static_cast<std::uint64_t>(get_u32_le(p + 4)) << 32);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

// Write the buffer and fsync before returning.
void write_file_synced(const fs::path& path, const std::string& buf) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::size_t n = std::fwrite(buf.data(), 1, buf.size(), f);
  if (n != buf.size()) {
    std::fclose(f);
    throw IoError("short write to '" + path.string() + "'");
  }
  std::fflush(f);
#ifndef _WIN32
  ::fsync(fileno(f));
#endif
  std::fclose(f);
}

std::vector<unsigned char> read_file(const fs::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::fseek(f, 0, SEEK_END);
  const long sz = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<unsigned char> buf(static_cast<std::size_t>(sz));
  const std::size_t n = std::fread(buf.data(), 1, buf.size(), f);
  std::fclose(f);
  if (n != buf.size()) throw IoError("short read from '" + path.string() + "'");
  return buf;
}

struct Preamble {
  json header;
  std::size_t payload_offset = 0;
};

Preamble parse_preamble(const std::vector<unsigned char>& buf, const char* magic,
                        const fs::path& path) {
  if (buf.size() < 9 || std::memcmp(buf.data(), magic, 4) != 0)
    throw FormatError(FormatError::Kind::bad_magic,
                      "'" + path.string() + "' is not a " + magic + " file");
  if (buf[4] != 1)
    throw FormatError(FormatError::Kind::bad_version,
                      "'" + path.string() + "': unsupported version " + std::to_string(buf[4]));
  const std::uint32_t hlen = get_u32_le(buf.data() + 5);
  if (buf.size() < 9 + static_cast<std::size_t>(hlen))
    throw FormatError(FormatError::Kind::truncated,
                      "'" + path.string() + "': header extends past end of file");
  Preamble p;
  try {
    p.header = json::parse(buf.begin() + 9, buf.begin() + 9 + hlen);
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent_header,
                      "'" + path.string() + "': bad JSON header (" + e.what() + ")");
  }
  p.payload_offset = 9 + hlen;
  return p;
}

}  // namespace

void write_mstd(const MultiScaleTrajectory& traj, const fs::path& path) {
  const PdeCase& c = traj.pde;
  if (traj.macro_frames.empty()) throw ConfigError("write_mstd: no macro frames");
  json bursts = json::array();
  for (const Burst& b : traj.bursts)
    bursts.push_back({{"start_macro_index", b.start_macro_index},
                      {"n_frames", static_cast<long>(b.frames.size())}});
  json header = {
      {"case", case_name_str(c.name)},
      {"n_fields", c.n_fields},
      {"field_names", c.field_names()},
      {"grid", c.extents()},
      {"domain_length", c.domain_length()},
      {"dx", c.dx},
      {"dt_micro", c.dt_micro},
      {"dt_macro", traj.k * c.dt_micro},
      {"k", traj.k},
      {"n_macro_frames", static_cast<long>(traj.macro_frames.size())},
      {"bursts", bursts},
      {"dtype", "f32le"},
      {"layout", "C"},
      {"seed", traj.seed},
      {"params", c.params},
  };
  if (!traj.frame_macro_indices.empty()) header["frame_macro_indices"] = traj.frame_macro_indices;
  const std::string htxt = header.dump();

  std::string buf;
  buf.reserve(9 + htxt.size() + 1024);
  buf += "MSTD";
  buf.push_back(1);
  put_u32_le(buf, static_cast<std::uint32_t>(htxt.size()));
  buf += htxt;
  auto put_frame = [&](const Field& f) {
    for (double v : f.data) put_f32_le(buf, static_cast<float>(v));
  };
  for (const Field& f : traj.macro_frames) put_frame(f);
  for (const Burst& b : traj.bursts)
    for (const Field& f : b.frames) put_frame(f);
  write_file_synced(path, buf);
}

nlohmann::json read_mstd_header(const fs::path& path) {
  return parse_preamble(read_file(path), "MSTD", path).header;
}

MultiScaleTrajectory read_mstd(const fs::path& path) {
  const std::vector<unsigned char> buf = read_file(path);
  const Preamble pre = parse_preamble(buf, "MSTD", path);
  const json& h = pre.header;

  MultiScaleTrajectory traj;
  try {
    PdeCase c = make_case(h.at("case").get<std::string>(), h.at("grid")[0].get<int>());
    const auto grid = h.at("grid").get<std::vector<int>>();
    if (static_cast<int>(grid.size()) != c.dims || grid != c.extents())
      throw FormatError(FormatError::Kind::inconsistent_header,
                        "'" + path.string() + "': grid does not match case dimensionality");
    c.dx = h.at("dx").get<double>();
    c.dt_micro = h.at("dt_micro").get<double>();
    c.params = h.at("params").get<std::map<std::string, double>>();
    if (h.at("n_fields").get<int>() != c.n_fields)
      throw FormatError(FormatError::Kind::inconsistent_header,
                        "'" + path.string() + "': n_fields does not match case");
    validate_params(c);
    traj.pde = c;
    traj.seed = h.at("seed").get<std::uint64_t>();
    traj.k = h.at("k").get<int>();
    if (h.at("dt_macro").get<double>() != traj.k * c.dt_micro)
      throw FormatError(FormatError::Kind::inconsistent_header,
                        "'" + path.string() + "': dt_macro != k * dt_micro");
    const long n_macro = h.at("n_macro_frames").get<long>();
    if (n_macro < 1)
      throw FormatError(FormatError::Kind::inconsistent_header,
                        "'" + path.string() + "': n_macro_frames < 1");
    if (h.contains("frame_macro_indices")) {
      traj.frame_macro_indices = h.at("frame_macro_indices").get<std::vector<long>>();
      if (static_cast<long>(traj.frame_macro_indices.size()) != n_macro)
        throw FormatError(FormatError::Kind::inconsistent_header,
                          "'" + path.string() + "': frame_macro_indices length mismatch");
    }

    long n_burst_frames = 0;
    std::vector<std::pair<long, long>> burst_meta;
    for (const json& b : h.at("bursts")) {
      burst_meta.emplace_back(b.at("start_macro_index").get<long>(),
                              b.at("n_frames").get<long>());
      n_burst_frames += burst_meta.back().second;
    }

    const long frame_elems = c.n_fields * (c.dims == 1 ? c.grid : static_cast<long>(c.grid) * c.grid);
    const std::size_t expected_payload =
        4u * static_cast<std::size_t>((n_macro + n_burst_frames) * frame_elems);
    const std::size_t actual_payload = buf.size() - pre.payload_offset;
    if (actual_payload < expected_payload)
      throw FormatError(FormatError::Kind::truncated,
                        "'" + path.string() + "': payload truncated (" +
                            std::to_string(actual_payload) + " of " +
                            std::to_string(expected_payload) + " bytes)");
    if (actual_payload > expected_payload)
      throw FormatError(FormatError::Kind::inconsistent_header,
                        "'" + path.string() + "': payload larger than header declares");

    const unsigned char* p = buf.data() + pre.payload_offset;
    auto get_frame = [&]() {
      Field f(c.n_fields, c.extents());
      for (double& v : f.data) {
        v = static_cast<double>(get_f32_le(p));
        p += 4;
      }
      return f;
    };
    traj.macro_frames.reserve(static_cast<std::size_t>(n_macro));
    for (long i = 0; i < n_macro; ++i) traj.macro_frames.push_back(get_frame());
    for (const auto& [start, n_frames] : burst_meta) {
      Burst b;
      b.start_macro_index = start;
      b.frames.reserve(static_cast<std::size_t>(n_frames));
      for (long i = 0; i < n_frames; ++i) b.frames.push_back(get_frame());
      traj.bursts.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent_header,
                      "'" + path.string() + "': header field error (" + e.what() + ")");
  }
  return traj;
}

// ---------------------------------------------------------------------------

const Param* Checkpoint::find(const std::string& name) const {
  for (const Param& p : entries)
    if (p.name == name) return &p;
  return nullptr;
}

void write_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  json manifest = json::array();
  long offset = 0;
  for (const Param& p : ckpt.entries) {
    manifest.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}});
    offset += 8 * static_cast<long>(p.value.size());
  }
  json header = {
      {"config", ckpt.config},
      {"epoch", ckpt.epoch},
      {"adam_t", ckpt.adam_t},
      {"best_val_loss",
       std::isnan(ckpt.best_val_loss) ? json(nullptr) : json(ckpt.best_val_loss)},
      {"manifest", manifest},
  };
  const std::string htxt = header.dump();

  std::string buf;
  buf.reserve(9 + htxt.size() + static_cast<std::size_t>(offset));
  buf += "PMCK";
  buf.push_back(1);
  put_u32_le(buf, static_cast<std::uint32_t>(htxt.size()));
  buf += htxt;
  for (const Param& p : ckpt.entries)
    for (double v : p.value) put_f64_le(buf, v);
  write_file_synced(path, buf);
}

Checkpoint read_checkpoint(const fs::path& path) {
  const std::vector<unsigned char> buf = read_file(path);
  const Preamble pre = parse_preamble(buf, "PMCK", path);
  const json& h = pre.header;
  Checkpoint ckpt;
  try {
    ckpt.config = h.at("config");
    ckpt.epoch = h.at("epoch").get<long>();
    ckpt.adam_t = h.at("adam_t").get<long>();
    ckpt.best_val_loss = h.at("best_val_loss").is_null()
                             ? std::numeric_limits<double>::quiet_NaN()
                             : h.at("best_val_loss").get<double>();
    long expected_offset = 0;
    for (const json& e : h.at("manifest")) {
      Param p(e.at("name").get<std::string>(), e.at("shape").get<Shape>());
      if (e.at("offset").get<long>() != expected_offset)
        throw FormatError(FormatError::Kind::inconsistent_header,
                          "'" + path.string() + "': manifest offsets must be contiguous");
      expected_offset += 8 * static_cast<long>(p.value.size());
      ckpt.entries.push_back(std::move(p));
    }
    const std::size_t actual_payload = buf.size() - pre.payload_offset;
    if (actual_payload < static_cast<std::size_t>(expected_offset))
      throw FormatError(FormatError::Kind::truncated,
                        "'" + path.string() + "': payload truncated");
    if (actual_payload > static_cast<std::size_t>(expected_offset))
      throw FormatError(FormatError::Kind::inconsistent_header,
                        "'" + path.string() + "': payload larger than manifest declares");
    const unsigned char* p = buf.data() + pre.payload_offset;
    for (Param& param : ckpt.entries)
      for (double& v : param.value) {
        v = get_f64_le(p);
        p += 8;
      }
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent_header,
                      "'" + path.string() + "': header field error (" + e.what() + ")");
  }
  return ckpt;
}

// ---------------------------------------------------------------------------

SplitFiles split_dataset(std::vector<fs::path> files, const SplitSpec& spec) {
  if (spec.n_train < 0 || spec.n_val < 0 || spec.n_test < 0)
    throw ConfigError("split_dataset: negative split count");
  const long want = static_cast<long>(spec.n_train) + spec.n_val + spec.n_test;
  if (want > static_cast<long>(files.size()))
    throw ConfigError("split_dataset: requested " + std::to_string(want) + " trajectories from " +
                      std::to_string(files.size()) + " files");
  std::sort(files.begin(), files.end());

  std::set<std::uint64_t> seeds;
  for (const fs::path& f : files) {
    const std::uint64_t seed = read_mstd_header(f).at("seed").get<std::uint64_t>();
    if (!seeds.insert(seed).second)
      throw ConfigError("split_dataset: duplicate seed " + std::to_string(seed) + " in '" +
                        f.string() + "'");
  }

  SplitFiles out;
  std::size_t i = 0;
  for (int n = 0; n < spec.n_train; ++n) out.train.push_back(files[i++]);
  for (int n = 0; n < spec.n_val; ++n) out.val.push_back(files[i++]);
  for (int n = 0; n < spec.n_test; ++n) out.test.push_back(files[i++]);
  return out;
}

}  // namespace pimrl
