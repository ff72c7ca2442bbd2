// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/nn/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace aesmpn::nn {

using numerics::Shape;
using numerics::Tensor;

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out << "aesmpn-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [key, value] : checkpoint.meta) {
    if (key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw CheckpointError("meta entry '" + key + "' cannot be stored on one line");
    }
    out << "meta " << key << ' ' << value << '\n';
  }
  const auto& params = checkpoint.params;
  for (std::size_t id = 0; id < params.size(); ++id) {
    const Tensor& t = params.value(id);
    out << "param " << params.name(id) << ' ' << t.rank();
    for (std::size_t d : t.shape()) out << ' ' << d;
    out << ' ' << t.size() << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i != 0) out << ' ';
      out << format_double(t[i]);
    }
    out << '\n';
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint checkpoint;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> CheckpointError {
    return CheckpointError("checkpoint line " + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line)) throw CheckpointError("empty checkpoint");
  ++line_no;
  {
    std::istringstream header(line);
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != "aesmpn-checkpoint") throw fail("not an aesmpn checkpoint");
    if (version != kCheckpointVersion) throw fail("unsupported checkpoint version " + std::to_string(version));
  }

  bool ended = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "end") {
      ended = true;
      break;
    }
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls >> std::ws, value);
      checkpoint.meta[key] = value;
      continue;
    }
    if (tag != "param") throw fail("unexpected record '" + tag + "'");

    std::string name;
    std::size_t rank = 0;
    ls >> name >> rank;
    Shape shape(rank);
    for (auto& d : shape) ls >> d;
    std::size_t count = 0;
    ls >> count;
    if (!ls || rank == 0) throw fail("malformed param header for '" + name + "'");

    if (!std::getline(in, line)) throw fail("missing values for '" + name + "'");
    ++line_no;
    std::vector<double> values;
    values.reserve(count);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw fail("bad number in '" + name + "'");
      values.push_back(v);
      p = next;
    }
    if (values.size() != count) {
      throw fail("'" + name + "' declares " + std::to_string(count) + " values, found " +
                 std::to_string(values.size()));
    }
    try {
      checkpoint.params.add(name, Tensor(shape, std::move(values)));
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  if (!ended) throw CheckpointError("checkpoint truncated (no end marker)");
  return checkpoint;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    write_checkpoint(out, checkpoint);
    if (!out) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace aesmpn::nn
