#pragma once

// Binary wire protocol. Every multi-byte integer and float is little-endian.
//
//   connection preamble : "SAIL" 0x01            (client sends, server echoes)
//   message             : opcode u8 | body_length u32 | body
//   packed views        : count u8 | count x ViewBlock
//   ViewBlock           : view_id u8 | compression u8 | uncompressed_length u32
//                         | payload_length u32 | payload

#include "visenv/render.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace visenv::wire {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::array<std::uint8_t, 5> kPreamble = {'S', 'A', 'I', 'L', 0x01};
inline constexpr std::uint32_t kMaxBodyLength = 64u * 1024u * 1024u;
inline constexpr std::size_t kMessageHeaderSize = 5;
inline constexpr std::size_t kViewBlockHeaderSize = 10;
inline constexpr std::uint16_t kDefaultPort = 8085;

enum class Opcode : std::uint8_t {
  kRegister = 0x01,
  kChangeScene = 0x02,
  kGetFrame = 0x03,
  kSetPosition = 0x04,
  kSetRotation = 0x05,
  kToggleFollow = 0x06,
  kDelete = 0x07,
  kRegisterReply = 0x81,
  kChangeSceneReply = 0x82,
  kFrameReply = 0x83,
  kSetPositionAck = 0x84,
  kSetRotationAck = 0x85,
  kToggleFollowReply = 0x86,
  kDeleteAck = 0x87,
  kError = 0xFF,
};

enum class ErrorCode : std::uint8_t { kBadRequest = 1, kUnknownScene = 2, kInternal = 3 };

enum class ViewId : std::uint8_t { kMain = 1, kCategory = 2, kObject = 3, kFlow = 4, kDepth = 5 };

enum class Compression : std::uint8_t { kRaw = 0, kGzip = 1 };

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind {
    kBadMagic,
    kTruncated,
    kOversized,
    kLengthMismatch,
    kInflateFailed,
    kDuplicateView,
    kMalformed,
  };
  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct WireMessage {
  std::uint8_t opcode = 0;
  Bytes body;
  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

Bytes encode_message(std::uint8_t opcode, ByteView body);
inline Bytes encode_message(Opcode opcode, ByteView body = {}) {
  return encode_message(static_cast<std::uint8_t>(opcode), body);
}

struct DecodedMessage {
  WireMessage message;
  std::size_t consumed = 0;
};

// Decodes one message from the front of `bytes`.
DecodedMessage decode_message(ByteView bytes);

// Validates the connection preamble; throws kTruncated or kBadMagic.
void check_preamble(ByteView bytes);

// body_length field of a 5-byte message header, validated against the cap.
std::uint32_t body_length_from_header(ByteView header);

struct Handshake {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint8_t view_mask = kViewAll;
  Compression compression = Compression::kRaw;
  friend bool operator==(const Handshake&, const Handshake&) = default;
};

using CategoryList = std::vector<std::pair<std::uint8_t, std::string>>;

struct RegisterReply {
  std::uint32_t agent_id = 0;
  std::vector<std::string> scenes;
  CategoryList categories;
  friend bool operator==(const RegisterReply&, const RegisterReply&) = default;
};

struct Vec3f {
  float x = 0, y = 0, z = 0;
  friend bool operator==(const Vec3f&, const Vec3f&) = default;
};

struct ErrorReply {
  ErrorCode code = ErrorCode::kInternal;
  std::string message;
  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};

Bytes encode_handshake(const Handshake& h);
Handshake decode_handshake(ByteView body);

Bytes encode_register_reply(const RegisterReply& r);
RegisterReply decode_register_reply(ByteView body);

Bytes encode_category_list(const CategoryList& categories);
CategoryList decode_category_list(ByteView body);

Bytes encode_scene_index(std::uint8_t index);
std::uint8_t decode_scene_index(ByteView body);

Bytes encode_vec3f(const Vec3f& v);
Vec3f decode_vec3f(ByteView body);

Bytes encode_follow_state(bool following);
bool decode_follow_state(ByteView body);

Bytes encode_error(const ErrorReply& e);
ErrorReply decode_error(ByteView body);

void expect_empty(ByteView body);

// Uncompressed payload size of a view at W x H.
std::size_t view_budget(ViewId id, std::uint32_t width, std::uint32_t height);

Bytes pack_views(const FrameViews& views, Compression compression);
FrameViews unpack_views(ByteView bytes, std::uint32_t width, std::uint32_t height);

// RFC 1952 gzip container around DEFLATE.
Bytes gzip_compress(ByteView data, int level = 6);
Bytes gzip_decompress(ByteView data, std::size_t expected_size);

}  // namespace visenv::wire
