#include "bpeps/snapshot.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bpeps/errors.hpp"

namespace bpeps {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

namespace {

using nlohmann::json;

constexpr std::string_view kStateMagic = "BPEPSNAP";
constexpr std::string_view kCheckpointMagic = "BPEPSCKP";

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::uint32_t crc(std::string_view bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    c = crc32(c, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(c);
}

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    std::string_view v = b_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > b_.size() - pos_) throw SnapshotError("snapshot truncated");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

// Checks magic, version and trailing crc; returns the payload between the version field and the crc.
std::string_view open_container(std::string_view bytes, std::string_view magic) {
  if (bytes.size() < magic.size() + 8 || bytes.substr(0, magic.size()) != magic)
    throw SnapshotError("not a " + std::string(magic) + " file");
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (crc(bytes.substr(0, bytes.size() - 4)) != stored) throw SnapshotError("checksum mismatch (file corrupted)");
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + magic.size(), 4);
  if (version != kSnapshotVersion)
    throw SnapshotError("unsupported format version " + std::to_string(version) + " (expected " +
                        std::to_string(kSnapshotVersion) + ")");
  return bytes.substr(magic.size() + 4, bytes.size() - magic.size() - 8);
}

void close_container(std::string& out) { put(out, crc(out)); }

}  // namespace

std::string encode_state(const BlockIsoPeps& s) {
  json h;
  h["lx"] = s.lx;
  h["ly"] = s.ly;
  h["d"] = s.d;
  h["p"] = s.p;
  h["center"] = {s.center.i, s.center.j};
  h["chi_max"] = s.chi_max;
  h["eta_max"] = s.eta_max;
  h["cum_discard"] = s.cum_discard;
  h["rotation"] = s.rotation;
  h["label"] = s.label;
  std::vector<int> v, hz;
  for (VArrow a : s.vert) v.push_back(static_cast<int>(a));
  for (HArrow a : s.horiz) hz.push_back(static_cast<int>(a));
  h["vert"] = v;
  h["horiz"] = hz;
  const std::string header = h.dump();

  std::string out(kStateMagic);
  put(out, kSnapshotVersion);
  put<std::uint64_t>(out, header.size());
  out += header;
  for (const Tensor& t : s.grid) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (Index d : t.shape()) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    out.append(reinterpret_cast<const char*>(t.raw()), static_cast<std::size_t>(t.size()) * sizeof(cplx));
  }
  close_container(out);
  return out;
}

BlockIsoPeps decode_state(std::string_view bytes) {
  Reader r(open_container(bytes, kStateMagic));
  const auto hlen = r.get<std::uint64_t>();
  if (hlen > r.remaining()) throw SnapshotError("snapshot header truncated");
  BlockIsoPeps s;
  try {
    const json h = json::parse(r.take(static_cast<std::size_t>(hlen)));
    s.lx = h.at("lx").get<int>();
    s.ly = h.at("ly").get<int>();
    s.d = h.at("d").get<int>();
    s.p = h.at("p").get<Index>();
    s.center = {h.at("center").at(0).get<int>(), h.at("center").at(1).get<int>()};
    s.chi_max = h.at("chi_max").get<Index>();
    s.eta_max = h.at("eta_max").get<Index>();
    s.cum_discard = h.at("cum_discard").get<double>();
    s.rotation = h.at("rotation").get<int>();
    s.label = h.at("label").get<std::vector<int>>();
    for (int a : h.at("vert").get<std::vector<int>>()) s.vert.push_back(static_cast<VArrow>(a != 0));
    for (int a : h.at("horiz").get<std::vector<int>>()) s.horiz.push_back(static_cast<HArrow>(a != 0));
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("bad snapshot header: ") + e.what());
  }
  if (s.lx < 1 || s.ly < 1 || s.label.size() != static_cast<std::size_t>(s.lx * s.ly) ||
      s.vert.size() != static_cast<std::size_t>((s.lx - 1) * s.ly) ||
      s.horiz.size() != static_cast<std::size_t>(s.lx * (s.ly - 1)))
    throw SnapshotError("snapshot header is inconsistent");
  for (int q = 0; q < s.lx * s.ly; ++q) {
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw SnapshotError("tensor rank out of range");
    Shape shape;
    Index n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const auto d = r.get<std::uint64_t>();
      if (d == 0 || d > (std::uint64_t(1) << 32) || static_cast<std::uint64_t>(n) * d > r.remaining())
        throw SnapshotError("tensor dimension out of range");
      shape.push_back(static_cast<Index>(d));
      n *= static_cast<Index>(d);
    }
    std::string_view raw = r.take(static_cast<std::size_t>(n) * sizeof(cplx));
    std::vector<cplx> data(static_cast<std::size_t>(n));
    std::memcpy(data.data(), raw.data(), raw.size());
    try {
      s.grid.emplace_back(std::move(shape), std::move(data));
    } catch (const std::exception& e) {
      throw SnapshotError(std::string("bad tensor data: ") + e.what());
    }
  }
  if (r.remaining() != 0) throw SnapshotError("trailing bytes in snapshot");
  const AuditReport a = audit(s);
  if (!a.shapes_ok || !a.arrows_ok) throw SnapshotError("snapshot fails the structural audit: " + a.message);
  return s;
}

std::string encode_checkpoint(const Checkpoint& c) {
  const std::string state = encode_state(c.state);
  std::string out(kCheckpointMagic);
  put(out, kSnapshotVersion);
  put<std::uint64_t>(out, c.metadata.size());
  out += c.metadata;
  put<std::uint64_t>(out, state.size());
  out += state;
  close_container(out);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  Reader r(open_container(bytes, kCheckpointMagic));
  Checkpoint c;
  const auto mlen = r.get<std::uint64_t>();
  if (mlen > r.remaining()) throw SnapshotError("checkpoint metadata truncated");
  c.metadata = std::string(r.take(static_cast<std::size_t>(mlen)));
  const auto slen = r.get<std::uint64_t>();
  if (slen != r.remaining()) throw SnapshotError("checkpoint state length mismatch");
  c.state = decode_state(r.take(static_cast<std::size_t>(slen)));
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace bpeps
