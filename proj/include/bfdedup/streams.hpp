#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace bfdedup {

enum class StreamMode : std::uint8_t { uniform_universe, controlled_distinct, file };

[[nodiscard]] auto to_string(StreamMode mode) -> std::string_view;
// Accepts "uniform", "controlled", "file".
[[nodiscard]] auto parse_stream_mode(std::string_view name) -> StreamMode;

struct StreamSpec {
  StreamMode mode = StreamMode::controlled_distinct;
  std::uint64_t length = 0;             // synthetic modes
  std::uint64_t universe = 0;           // uniform_universe
  double distinct_fraction = 1.0;       // controlled_distinct, in (0, 1]
  std::filesystem::path path;           // file
  std::uint64_t seed = 0;

  // Number of distinct elements a controlled stream emits: round(d * N).
  [[nodiscard]] auto controlled_distinct_count() const -> std::uint64_t;
  // Throws std::invalid_argument on an unusable spec.
  void validate() const;
};

// Single-consumer element source. The returned view stays valid until the
// next call to next().
class ElementStream {
public:
  virtual ~ElementStream() = default;
  virtual auto next() -> std::optional<std::string_view> = 0;
};

// Synthetic elements are 8-byte little-endian encodings of 64-bit IDs.
[[nodiscard]] auto encode_id(std::uint64_t id) -> std::array<char, 8>;
[[nodiscard]] auto decode_id(std::string_view element) -> std::uint64_t;

// uniform_universe: i.i.d. draws from a universe of U scrambled IDs.
// controlled_distinct: exactly round(d*N) distinct IDs. Position 1 is always
//   new; the other new positions form a uniform random subset (selection
//   sampling). Every other position repeats an ID drawn uniformly from the
//   distinct IDs emitted so far.
// file: see ingest_file().
[[nodiscard]] auto generate(const StreamSpec& spec) -> std::unique_ptr<ElementStream>;

// One element per newline-terminated record; the newline is stripped and
// empty records are skipped. Throws std::runtime_error when the file cannot
// be opened or a read fails (the message carries the line number).
[[nodiscard]] auto ingest_file(const std::filesystem::path& path) -> std::unique_ptr<ElementStream>;

} // namespace bfdedup
