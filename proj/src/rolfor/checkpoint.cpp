// Copyright 2026 The RolFor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rolfor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rolfor/errors.hpp"

namespace rolfor {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'R', 'L', 'F', 'R', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto view = bytes_.substr(pos_, n);
    pos_ += n;
    return view;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::kParse, "checkpoint is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json header;
  header["config"] = nlohmann::json::parse(to_json(ckpt.config));
  header["epoch"] = ckpt.epoch;
  header["rng_state"] = ckpt.rng_state;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;

  std::uint32_t count = 0;
  ckpt.model.for_each_tensor([&](const std::string&, const Tensor&) { ++count; });
  put<std::uint32_t>(out, count);
  ckpt.model.for_each_tensor([&](const std::string& name, const Tensor& t) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::uint64_t>(out, d);
    for (double v : t.data()) put<double>(out, v);
  });
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    fail(ErrorKind::kParse, "not a checkpoint file (bad magic)");
  }
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::kParse, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = in.get<std::uint64_t>();
  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(in.take(header_len));
    ckpt.config = config_from_json(header.at("config").dump());
    ckpt.epoch = header.at("epoch").get<std::uint64_t>();
    ckpt.rng_state = header.at("rng_state").get<Rng::State>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("checkpoint header: ") + e.what());
  }

  std::map<std::string, Tensor> tensors;
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(in.take(in.get<std::uint32_t>()));
    Shape shape(in.get<std::uint32_t>());
    for (auto& d : shape) d = in.get<std::uint64_t>();
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = in.get<double>();
    tensors.emplace(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!in.done()) fail(ErrorKind::kParse, "checkpoint has trailing bytes");

  Rng scratch(0);
  ckpt.model = RolFor::initialized(ckpt.config.model, scratch);
  ckpt.model.for_each_tensor([&](const std::string& name, Tensor& t) {
    auto it = tensors.find(name);
    if (it == tensors.end()) fail(ErrorKind::kParse, "checkpoint is missing tensor '" + name + "'");
    if (it->second.shape() != t.shape()) {
      fail(ErrorKind::kParse, "checkpoint tensor '" + name + "' has shape " + it->second.shape_string() +
                                  ", expected " + t.shape_string());
    }
    t = std::move(it->second);
    tensors.erase(it);
  });
  if (!tensors.empty()) fail(ErrorKind::kParse, "checkpoint has unexpected tensor '" + tensors.begin()->first + "'");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write checkpoint '" + path.string() + "'");
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace rolfor
