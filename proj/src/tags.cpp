#include "hsps/tags.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsps/errors.hpp"

namespace hsps {

void TagStream::validate() const {
  if (resolution_fs == 0) throw DataError("TagStream: resolution must be > 0");
  if (n_channels == 0 || n_channels > 3)
    throw DataError("TagStream: n_channels must be 1..3");
  if (ticks.size() != channels.size())
    throw DataError("TagStream: ticks/channels size mismatch");
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    if (channels[i] >= n_channels)
      throw DataError("TagStream: channel out of range at record " +
                      std::to_string(i));
    if (i > 0 && ticks[i] < ticks[i - 1])
      throw DataError("TagStream: tags not time-sorted at record " +
                      std::to_string(i));
  }
}

namespace {

void put_u32le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void save_tags_binary(const TagStream& s, const std::string& path) {
  s.validate();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  std::string header;
  header.append("HTAG");
  put_u32le(header, 1);
  put_u64le(header, s.resolution_fs);
  header.push_back(static_cast<char>(s.n_channels));
  put_u64le(header, s.size());
  f.write(header.data(), static_cast<std::streamsize>(header.size()));
  std::string buf;
  buf.reserve(9 << 16);
  for (std::size_t i = 0; i < s.size(); ++i) {
    buf.push_back(static_cast<char>(s.channels[i]));
    put_u64le(buf, s.ticks[i]);
    if (buf.size() >= (9 << 16)) {
      f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw DataError("write failed: " + path);
}

TagStream load_tags_binary(const std::string& path, double duration_override) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  std::array<unsigned char, 25> head{};
  f.read(reinterpret_cast<char*>(head.data()), head.size());
  if (!f || std::memcmp(head.data(), "HTAG", 4) != 0)
    throw DataError("not an HTAG file: " + path);
  const std::uint32_t version = get_u32le(head.data() + 4);
  if (version != 1)
    throw DataError("unsupported HTAG version " + std::to_string(version));
  TagStream s;
  s.resolution_fs = get_u64le(head.data() + 8);
  s.n_channels = head[16];
  const std::uint64_t n = get_u64le(head.data() + 17);
  s.ticks.reserve(n);
  s.channels.reserve(n);
  std::vector<unsigned char> buf(9 * 4096);
  std::uint64_t remaining = n;
  while (remaining > 0) {
    const std::size_t take =
        static_cast<std::size_t>(std::min<std::uint64_t>(remaining, 4096));
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(take * 9));
    if (!f) throw DataError("truncated HTAG file: " + path);
    for (std::size_t i = 0; i < take; ++i) {
      s.channels.push_back(buf[i * 9]);
      s.ticks.push_back(get_u64le(buf.data() + i * 9 + 1));
    }
    remaining -= take;
  }
  s.duration = duration_override > 0.0
                   ? duration_override
                   : (s.ticks.empty()
                          ? 0.0
                          : static_cast<double>(s.ticks.back() + 1) *
                                s.resolution_s());
  s.validate();
  return s;
}

void save_tags_csv(const TagStream& s, const std::string& path,
                   const std::vector<std::string>& comments) {
  s.validate();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  f << "# hsps tag stream\n";
  for (const auto& line : comments) f << "# " << line << "\n";
  f << "# resolution_fs=" << s.resolution_fs << "\n";
  f << "# n_channels=" << static_cast<int>(s.n_channels) << "\n";
  char dur[64];
  std::snprintf(dur, sizeof dur, "%.17g", s.duration);
  f << "# duration_s=" << dur << "\n";
  f << "channel,ticks\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    f << static_cast<int>(s.channels[i]) << ',' << s.ticks[i] << '\n';
  if (!f) throw DataError("write failed: " + path);
}

TagStream load_tags_csv(const std::string& path, double duration_override) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open: " + path);
  TagStream s;
  bool have_duration = false;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      const std::string value = line.substr(eq + 1);
      if (key == "resolution_fs")
        s.resolution_fs = std::stoull(value);
      else if (key == "n_channels")
        s.n_channels = static_cast<std::uint8_t>(std::stoi(value));
      else if (key == "duration_s") {
        s.duration = std::stod(value);
        have_duration = true;
      }
      continue;
    }
    if (line.rfind("channel", 0) == 0) continue;  // column header
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("malformed tag CSV row: " + line);
    s.channels.push_back(
        static_cast<std::uint8_t>(std::stoi(line.substr(0, comma))));
    s.ticks.push_back(std::stoull(line.substr(comma + 1)));
  }
  if (duration_override > 0.0) {
    s.duration = duration_override;
  } else if (!have_duration) {
    s.duration = s.ticks.empty() ? 0.0
                                 : static_cast<double>(s.ticks.back() + 1) *
                                       s.resolution_s();
  }
  s.validate();
  return s;
}

TagStream load_tags(const std::string& path, double duration_override) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  char magic[4] = {};
  f.read(magic, 4);
  f.close();
  if (std::memcmp(magic, "HTAG", 4) == 0)
    return load_tags_binary(path, duration_override);
  return load_tags_csv(path, duration_override);
}

}  // namespace hsps
