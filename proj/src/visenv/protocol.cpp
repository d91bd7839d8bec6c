#include "visenv/protocol.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>

namespace visenv::wire {

namespace {

using Kind = ProtocolError::Kind;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void str16(const std::string& s) {
    if (s.size() > 0xFFFF) throw ProtocolError(Kind::kOversized, "string longer than 65535 bytes");
    u16(static_cast<std::uint16_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  Bytes take() { return std::move(out_); }
  Bytes& buffer() { return out_; }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint16_t u16() {
    const auto b = need(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    const auto b = need(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  ByteView bytes(std::size_t n) { return need(n); }
  std::string str16() {
    const auto n = u16();
    const auto b = need(n);
    return {b.begin(), b.end()};
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void finish(const char* what) const {
    if (remaining() != 0) {
      throw ProtocolError(Kind::kMalformed, std::string(what) + ": trailing bytes");
    }
  }

 private:
  ByteView need(std::size_t n) {
    if (remaining() < n) throw ProtocolError(Kind::kTruncated, "truncated input");
    const auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

ViewId view_id_of(std::uint8_t raw) {
  if (raw < 1 || raw > 5) {
    throw ProtocolError(Kind::kMalformed, "unknown view id " + std::to_string(raw));
  }
  return static_cast<ViewId>(raw);
}

}  // namespace

Bytes encode_message(std::uint8_t opcode, ByteView body) {
  if (body.size() > kMaxBodyLength) throw ProtocolError(Kind::kOversized, "message body over 64 MiB");
  Writer w;
  w.buffer().reserve(kMessageHeaderSize + body.size());
  w.u8(opcode);
  w.u32(static_cast<std::uint32_t>(body.size()));
  w.bytes(body);
  return w.take();
}

std::uint32_t body_length_from_header(ByteView header) {
  Reader r(header);
  r.u8();
  const auto len = r.u32();
  if (len > kMaxBodyLength) {
    throw ProtocolError(Kind::kOversized, "message body of " + std::to_string(len) + " bytes over cap");
  }
  return len;
}

DecodedMessage decode_message(ByteView bytes) {
  Reader r(bytes);
  DecodedMessage out;
  out.message.opcode = r.u8();
  const auto len = r.u32();
  if (len > kMaxBodyLength) {
    throw ProtocolError(Kind::kOversized, "message body of " + std::to_string(len) + " bytes over cap");
  }
  const auto body = r.bytes(len);
  out.message.body.assign(body.begin(), body.end());
  out.consumed = kMessageHeaderSize + len;
  return out;
}

void check_preamble(ByteView bytes) {
  const std::size_t n = std::min(bytes.size(), kPreamble.size());
  if (!std::equal(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n), kPreamble.begin())) {
    throw ProtocolError(Kind::kBadMagic, "stream does not start with the SAIL v1 preamble");
  }
  if (n < kPreamble.size()) throw ProtocolError(Kind::kTruncated, "truncated preamble");
}

Bytes encode_handshake(const Handshake& h) {
  Writer w;
  w.u32(h.width);
  w.u32(h.height);
  w.u8(h.view_mask);
  w.u8(static_cast<std::uint8_t>(h.compression));
  return w.take();
}

Handshake decode_handshake(ByteView body) {
  Reader r(body);
  Handshake h;
  h.width = r.u32();
  h.height = r.u32();
  h.view_mask = r.u8();
  const auto comp = r.u8();
  r.finish("handshake");
  if (h.width < 1 || h.height < 1) throw ProtocolError(Kind::kMalformed, "handshake: zero resolution");
  if (h.view_mask == 0 || (h.view_mask & ~kViewAll) != 0) {
    throw ProtocolError(Kind::kMalformed, "handshake: invalid view mask");
  }
  if (comp > 1) throw ProtocolError(Kind::kMalformed, "handshake: unknown compression");
  h.compression = static_cast<Compression>(comp);
  return h;
}

Bytes encode_category_list(const CategoryList& categories) {
  if (categories.size() > 0xFFFF) throw ProtocolError(Kind::kOversized, "too many categories");
  Writer w;
  w.u16(static_cast<std::uint16_t>(categories.size()));
  for (const auto& [id, name] : categories) {
    w.u8(id);
    w.str16(name);
  }
  return w.take();
}

namespace {

CategoryList read_category_list(Reader& r) {
  CategoryList out;
  const auto n = r.u16();
  for (std::uint16_t i = 0; i < n; ++i) {
    const auto id = r.u8();
    out.emplace_back(id, r.str16());
  }
  return out;
}

}  // namespace

CategoryList decode_category_list(ByteView body) {
  Reader r(body);
  auto out = read_category_list(r);
  r.finish("category table");
  return out;
}

Bytes encode_register_reply(const RegisterReply& reply) {
  if (reply.scenes.size() > 0xFF) throw ProtocolError(Kind::kOversized, "more than 255 scenes");
  Writer w;
  w.u32(reply.agent_id);
  w.u8(static_cast<std::uint8_t>(reply.scenes.size()));
  for (const auto& s : reply.scenes) w.str16(s);
  w.bytes(encode_category_list(reply.categories));
  return w.take();
}

RegisterReply decode_register_reply(ByteView body) {
  Reader r(body);
  RegisterReply out;
  out.agent_id = r.u32();
  const auto n = r.u8();
  for (std::uint8_t i = 0; i < n; ++i) out.scenes.push_back(r.str16());
  out.categories = read_category_list(r);
  r.finish("register reply");
  return out;
}

Bytes encode_scene_index(std::uint8_t index) { return {index}; }

std::uint8_t decode_scene_index(ByteView body) {
  Reader r(body);
  const auto v = r.u8();
  r.finish("change scene");
  return v;
}

Bytes encode_vec3f(const Vec3f& v) {
  Writer w;
  w.f32(v.x);
  w.f32(v.y);
  w.f32(v.z);
  return w.take();
}

Vec3f decode_vec3f(ByteView body) {
  Reader r(body);
  Vec3f v;
  v.x = r.f32();
  v.y = r.f32();
  v.z = r.f32();
  r.finish("vector");
  return v;
}

Bytes encode_follow_state(bool following) { return {static_cast<std::uint8_t>(following ? 1 : 0)}; }

bool decode_follow_state(ByteView body) {
  Reader r(body);
  const auto v = r.u8();
  r.finish("follow state");
  if (v > 1) throw ProtocolError(Kind::kMalformed, "follow state must be 0 or 1");
  return v == 1;
}

Bytes encode_error(const ErrorReply& e) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(e.code));
  w.str16(e.message);
  return w.take();
}

ErrorReply decode_error(ByteView body) {
  Reader r(body);
  ErrorReply e;
  const auto code = r.u8();
  if (code < 1 || code > 3) throw ProtocolError(Kind::kMalformed, "unknown error code");
  e.code = static_cast<ErrorCode>(code);
  e.message = r.str16();
  r.finish("error");
  return e;
}

void expect_empty(ByteView body) {
  if (!body.empty()) throw ProtocolError(Kind::kMalformed, "expected an empty body");
}

std::size_t view_budget(ViewId id, std::uint32_t width, std::uint32_t height) {
  const std::size_t px = static_cast<std::size_t>(width) * height;
  switch (id) {
    case ViewId::kMain:
    case ViewId::kObject: return 3 * px;
    case ViewId::kCategory:
    case ViewId::kDepth: return px;
    case ViewId::kFlow: return 8 * px;
  }
  return 0;
}

Bytes gzip_compress(ByteView data, int level) {
  z_stream zs{};
  if (deflateInit2(&zs, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("deflateInit2 failed");
  }
  Bytes out(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("gzip compression failed");
  out.resize(produced);
  return out;
}

Bytes gzip_decompress(ByteView data, std::size_t expected_size) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  // One spare byte so an over-long stream is detected rather than truncated.
  Bytes out(expected_size + 1);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  const auto unused = zs.avail_in;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || unused != 0) {
    throw ProtocolError(Kind::kInflateFailed, "gzip payload did not inflate cleanly");
  }
  if (produced != expected_size) {
    throw ProtocolError(Kind::kLengthMismatch, "gzip payload inflated to " +
                                                   std::to_string(produced) + " bytes, expected " +
                                                   std::to_string(expected_size));
  }
  out.resize(produced);
  return out;
}

Bytes pack_views(const FrameViews& views, Compression compression) {
  const auto w = static_cast<std::uint32_t>(views.width);
  const auto h = static_cast<std::uint32_t>(views.height);
  Writer out;
  std::uint8_t count = 0;
  out.u8(0);  // patched below

  auto block = [&](ViewId id, ByteView raw) {
    if (raw.size() != view_budget(id, w, h)) {
      throw ProtocolError(Kind::kLengthMismatch, "view " + std::to_string(static_cast<int>(id)) +
                                                     " has the wrong size for the frame");
    }
    out.u8(static_cast<std::uint8_t>(id));
    out.u8(static_cast<std::uint8_t>(compression));
    out.u32(static_cast<std::uint32_t>(raw.size()));
    if (compression == Compression::kGzip) {
      const Bytes packed = gzip_compress(raw);
      out.u32(static_cast<std::uint32_t>(packed.size()));
      out.bytes(packed);
    } else {
      out.u32(static_cast<std::uint32_t>(raw.size()));
      out.bytes(raw);
    }
    ++count;
  };

  if (views.main) block(ViewId::kMain, *views.main);
  if (views.category) block(ViewId::kCategory, *views.category);
  if (views.object) block(ViewId::kObject, *views.object);
  if (views.flow) {
    static_assert(std::endian::native == std::endian::little);
    const auto* p = reinterpret_cast<const std::uint8_t*>(views.flow->data());
    block(ViewId::kFlow, ByteView(p, views.flow->size() * sizeof(float)));
  }
  if (views.depth) block(ViewId::kDepth, *views.depth);

  Bytes bytes = out.take();
  bytes[0] = count;
  return bytes;
}

FrameViews unpack_views(ByteView bytes, std::uint32_t width, std::uint32_t height) {
  Reader r(bytes);
  FrameViews views;
  views.width = static_cast<int>(width);
  views.height = static_cast<int>(height);
  const auto count = r.u8();
  std::uint8_t seen = 0;
  for (std::uint8_t i = 0; i < count; ++i) {
    const ViewId id = view_id_of(r.u8());
    const auto comp = r.u8();
    const auto raw_len = r.u32();
    const auto payload_len = r.u32();
    const std::uint8_t bit = static_cast<std::uint8_t>(1u << (static_cast<int>(id) - 1));
    if (seen & bit) {
      throw ProtocolError(Kind::kDuplicateView, "duplicate view id " + std::to_string(static_cast<int>(id)));
    }
    seen |= bit;
    if (comp > 1) throw ProtocolError(Kind::kMalformed, "unknown compression " + std::to_string(comp));
    if (raw_len != view_budget(id, width, height)) {
      throw ProtocolError(Kind::kLengthMismatch, "view " + std::to_string(static_cast<int>(id)) +
                                                     " length does not match the frame size");
    }
    if (comp == 0 && payload_len != raw_len) {
      throw ProtocolError(Kind::kLengthMismatch, "raw payload length differs from view length");
    }
    const ByteView payload = r.bytes(payload_len);
    Bytes raw = comp == 0 ? Bytes(payload.begin(), payload.end()) : gzip_decompress(payload, raw_len);

    switch (id) {
      case ViewId::kMain: views.main = std::move(raw); break;
      case ViewId::kCategory: views.category = std::move(raw); break;
      case ViewId::kObject: views.object = std::move(raw); break;
      case ViewId::kDepth: views.depth = std::move(raw); break;
      case ViewId::kFlow: {
        std::vector<float> flow(raw.size() / sizeof(float));
        std::memcpy(flow.data(), raw.data(), raw.size());
        views.flow = std::move(flow);
        break;
      }
    }
  }
  r.finish("packed views");
  return views;
}

}  // namespace visenv::wire
