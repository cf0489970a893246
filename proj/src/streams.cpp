#include "bfdedup/streams.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "bfdedup/rng.hpp"

namespace bfdedup {

namespace {

// IDs are scrambled through a seeded bijection so that streams for different
// seeds do not share their element set.
class IdScrambler {
public:
  explicit IdScrambler(std::uint64_t seed) : salt_(mix64(seed ^ 0xA0761D6478BD642FULL)) {}
  [[nodiscard]] auto operator()(std::uint64_t index) const noexcept -> std::uint64_t {
    return mix64(index + salt_);
  }

private:
  std::uint64_t salt_;
};

class SyntheticStream : public ElementStream {
public:
  auto next() -> std::optional<std::string_view> final {
    if (position_ == length_) {
      return std::nullopt;
    }
    buffer_ = encode_id(next_id());
    ++position_;
    return std::string_view(buffer_.data(), buffer_.size());
  }

protected:
  SyntheticStream(std::uint64_t length, std::uint64_t seed)
      : length_(length), rng_(mix64(seed ^ 0xE7037ED1A0B428DBULL)), scramble_(seed) {}
  virtual auto next_id() -> std::uint64_t = 0;

  std::uint64_t length_;
  std::uint64_t position_ = 0;
  Rng rng_;
  IdScrambler scramble_;

private:
  std::array<char, 8> buffer_{};
};

class UniformStream final : public SyntheticStream {
public:
  explicit UniformStream(const StreamSpec& spec)
      : SyntheticStream(spec.length, spec.seed), universe_(spec.universe) {}

private:
  auto next_id() -> std::uint64_t override { return scramble_(rng_.below(universe_)); }
  std::uint64_t universe_;
};

class ControlledStream final : public SyntheticStream {
public:
  explicit ControlledStream(const StreamSpec& spec)
      : SyntheticStream(spec.length, spec.seed), new_left_(spec.controlled_distinct_count()) {}

private:
  auto next_id() -> std::uint64_t override {
    const std::uint64_t remaining = length_ - position_;
    const bool fresh = position_ == 0 || rng_.below(remaining) < new_left_;
    if (fresh) {
      --new_left_;
      return scramble_(emitted_++);
    }
    return scramble_(rng_.below(emitted_));
  }

  std::uint64_t new_left_;
  std::uint64_t emitted_ = 0;
};

class FileStream final : public ElementStream {
public:
  explicit FileStream(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) {
      throw std::runtime_error("cannot open stream file '" + path.string() + "'");
    }
  }

  auto next() -> std::optional<std::string_view> override {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty()) {
        return std::string_view(line_);
      }
    }
    if (in_.bad()) {
      throw std::runtime_error("read error in '" + path_.string() + "' after line " +
                               std::to_string(line_no_));
    }
    return std::nullopt;
  }

private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string line_;
  std::uint64_t line_no_ = 0;
};

} // namespace

auto to_string(StreamMode mode) -> std::string_view {
  switch (mode) {
  case StreamMode::uniform_universe:
    return "uniform";
  case StreamMode::controlled_distinct:
    return "controlled";
  case StreamMode::file:
    return "file";
  }
  return "unknown";
}

auto parse_stream_mode(std::string_view name) -> StreamMode {
  if (name == "uniform") {
    return StreamMode::uniform_universe;
  }
  if (name == "controlled") {
    return StreamMode::controlled_distinct;
  }
  if (name == "file") {
    return StreamMode::file;
  }
  throw std::invalid_argument("unknown stream mode '" + std::string(name) + "'");
}

auto StreamSpec::controlled_distinct_count() const -> std::uint64_t {
  return static_cast<std::uint64_t>(std::llround(distinct_fraction * static_cast<double>(length)));
}

void StreamSpec::validate() const {
  switch (mode) {
  case StreamMode::uniform_universe:
    if (universe == 0) {
      throw std::invalid_argument("uniform stream needs a universe size >= 1");
    }
    return;
  case StreamMode::controlled_distinct:
    if (!(distinct_fraction > 0.0 && distinct_fraction <= 1.0)) {
      throw std::invalid_argument("distinct fraction must lie in (0, 1]");
    }
    if (length > 0 && controlled_distinct_count() == 0) {
      throw std::invalid_argument("round(d * N) is 0; a non-empty stream needs one distinct element");
    }
    return;
  case StreamMode::file:
    if (path.empty()) {
      throw std::invalid_argument("file stream needs a path");
    }
    return;
  }
}

auto encode_id(std::uint64_t id) -> std::array<char, 8> {
  std::array<char, 8> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<char>((id >> (8 * i)) & 0xFFU);
  }
  return out;
}

auto decode_id(std::string_view element) -> std::uint64_t {
  if (element.size() != 8) {
    throw std::invalid_argument("synthetic elements are 8 bytes");
  }
  std::uint64_t id = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    id |= static_cast<std::uint64_t>(static_cast<unsigned char>(element[i])) << (8 * i);
  }
  return id;
}

auto generate(const StreamSpec& spec) -> std::unique_ptr<ElementStream> {
  spec.validate();
  switch (spec.mode) {
  case StreamMode::uniform_universe:
    return std::make_unique<UniformStream>(spec);
  case StreamMode::controlled_distinct:
    return std::make_unique<ControlledStream>(spec);
  case StreamMode::file:
    return ingest_file(spec.path);
  }
  throw std::invalid_argument("unsupported stream mode");
}

auto ingest_file(const std::filesystem::path& path) -> std::unique_ptr<ElementStream> {
  return std::make_unique<FileStream>(path);
}

} // namespace bfdedup
