#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eigenfed/linalg.hpp"

namespace eigenfed::federation {

inline constexpr std::uint8_t kProtocolVersion = 1;

// Frame layout, all integers little-endian:
//   magic "DEES" | version u8 | kind u8 | node_id u32 | rows u32 | cols u32 |
//   payload_len u64 | payload (rows·cols binary64, row-major)
inline constexpr std::size_t kHeaderSize = 26;
inline constexpr std::size_t kPayloadLenOffset = 18;

enum class MessageKind : std::uint8_t {
  Hello = 0,
  SubmitSolution = 1,
  BroadcastReference = 2,
  SubmitAligned = 3,
  Done = 4,
  Error = 5,
};

struct Message {
  MessageKind kind = MessageKind::Hello;
  std::uint32_t node_id = 0;
  std::optional<Matrix> payload;
  std::uint8_t protocol_version = kProtocolVersion;

  friend bool operator==(const Message &a, const Message &b);
};

using Bytes = std::vector<std::uint8_t>;

/// Size of the frame encode_message would produce.
std::size_t encoded_size(const Message &msg);

Bytes encode_message(const Message &msg);

/// Parses exactly one frame. Throws MalformedFrame on bad magic, unknown kind,
/// truncation, trailing bytes, or inconsistent dimensions.
Message decode_message(std::span<const std::uint8_t> bytes);

/// Total frame length announced by a complete header.
std::size_t frame_length_from_header(std::span<const std::uint8_t> header);

} // namespace eigenfed::federation
