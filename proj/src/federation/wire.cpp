#include "eigenfed/federation/wire.hpp"

#include <bit>
#include <limits>

#include "eigenfed/errors.hpp"

namespace eigenfed::federation {

namespace {

constexpr std::uint8_t kMagic[4] = {'D', 'E', 'E', 'S'};

template <typename T> void put_le(Bytes &out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T> T get_le(std::span<const std::uint8_t> in, std::size_t at) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(in[at + i]) << (8 * i);
  return value;
}

bool valid_kind(std::uint8_t k) {
  return k <= static_cast<std::uint8_t>(MessageKind::Error);
}

} // namespace

bool operator==(const Message &a, const Message &b) {
  if (a.kind != b.kind || a.node_id != b.node_id ||
      a.protocol_version != b.protocol_version ||
      a.payload.has_value() != b.payload.has_value())
    return false;
  if (!a.payload)
    return true;
  const Matrix &pa = *a.payload;
  const Matrix &pb = *b.payload;
  if (pa.rows() != pb.rows() || pa.cols() != pb.cols())
    return false;
  for (Eigen::Index i = 0; i < pa.size(); ++i)
    if (std::bit_cast<std::uint64_t>(pa.data()[i]) !=
        std::bit_cast<std::uint64_t>(pb.data()[i]))
      return false;
  return true;
}

std::size_t encoded_size(const Message &msg) {
  return kHeaderSize +
         (msg.payload ? static_cast<std::size_t>(msg.payload->size()) * 8 : 0);
}

Bytes encode_message(const Message &msg) {
  std::uint64_t rows = 0, cols = 0;
  if (msg.payload) {
    rows = static_cast<std::uint64_t>(msg.payload->rows());
    cols = static_cast<std::uint64_t>(msg.payload->cols());
    if (rows > std::numeric_limits<std::uint32_t>::max() ||
        cols > std::numeric_limits<std::uint32_t>::max())
      throw MalformedFrame("dimension overflow");
  }
  Bytes out;
  out.reserve(encoded_size(msg));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(msg.protocol_version);
  out.push_back(static_cast<std::uint8_t>(msg.kind));
  put_le<std::uint32_t>(out, msg.node_id);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cols));
  put_le<std::uint64_t>(out, rows * cols * 8);
  if (msg.payload) {
    const Matrix &p = *msg.payload;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j)
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p(i, j)));
  }
  return out;
}

std::size_t frame_length_from_header(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize)
    throw MalformedFrame("truncated header");
  for (std::size_t i = 0; i < 4; ++i)
    if (header[i] != kMagic[i])
      throw MalformedFrame("bad magic");
  const auto rows = get_le<std::uint32_t>(header, 10);
  const auto cols = get_le<std::uint32_t>(header, 14);
  const auto len = get_le<std::uint64_t>(header, kPayloadLenOffset);
  const unsigned __int128 expected = static_cast<unsigned __int128>(rows) * cols * 8;
  if (expected > std::numeric_limits<std::uint64_t>::max() ||
      len > std::numeric_limits<std::size_t>::max() - kHeaderSize)
    throw MalformedFrame("dimension overflow");
  if (len != static_cast<std::uint64_t>(expected))
    throw MalformedFrame("payload length does not match dimensions");
  return kHeaderSize + static_cast<std::size_t>(len);
}

Message decode_message(std::span<const std::uint8_t> bytes) {
  const std::size_t total = frame_length_from_header(bytes);
  if (bytes.size() < total)
    throw MalformedFrame("truncated payload");
  if (bytes.size() > total)
    throw MalformedFrame("trailing bytes after frame");

  Message msg;
  msg.protocol_version = bytes[4];
  if (!valid_kind(bytes[5]))
    throw MalformedFrame("unknown message kind");
  msg.kind = static_cast<MessageKind>(bytes[5]);
  msg.node_id = get_le<std::uint32_t>(bytes, 6);
  const auto rows = get_le<std::uint32_t>(bytes, 10);
  const auto cols = get_le<std::uint32_t>(bytes, 14);
  if ((rows == 0) != (cols == 0))
    throw MalformedFrame("half-empty payload dimensions");
  if (rows > 0) {
    Matrix p(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t at = kHeaderSize;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j, at += 8)
        p(i, j) = std::bit_cast<double>(get_le<std::uint64_t>(bytes, at));
    msg.payload = std::move(p);
  }
  return msg;
}

} // namespace eigenfed::federation
