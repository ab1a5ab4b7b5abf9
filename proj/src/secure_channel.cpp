#include "vssd/secure_channel.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <memory>
#include <string>

#include "vssd/error.hpp"

namespace vssd {

namespace {

using Key32 = std::array<std::uint8_t, 32>;

Key32 hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> msg) {
  Key32 out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(),
           msg.size(), out.data(), &len) == nullptr ||
      len != out.size()) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }
  return out;
}

Key32 derive(const DeviceKey& key, std::string_view label) {
  return hmac_sha256(
      key.bytes(),
      {reinterpret_cast<const std::uint8_t*>(label.data()), label.size()});
}

Bytes aes256_ctr(const Key32& key,
                 const std::array<std::uint8_t, SecureEnvelope::kNonceSize>& iv,
                 std::span<const std::uint8_t> in) {
  std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(
      EVP_CIPHER_CTX_new(), &EVP_CIPHER_CTX_free);
  Bytes out(in.size());
  int len = 0;
  int tail = 0;
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ctr(), nullptr, key.data(),
                         iv.data()) != 1 ||
      EVP_EncryptUpdate(ctx.get(), out.data(), &len, in.data(),
                        static_cast<int>(in.size())) != 1 ||
      EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1) {
    throw std::runtime_error("AES-256-CTR failed");
  }
  return out;
}

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

/// Bounds-checked big-endian reader; every overrun throws `errc`.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, Errc errc)
      : bytes_(bytes), errc_(errc) {}

  std::uint64_t uint(std::size_t width) {
    need(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += width;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void finish() const {
    if (pos_ != bytes_.size()) throw Error(errc_, "trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(errc_, "truncated message");
  }

  std::span<const std::uint8_t> bytes_;
  Errc errc_;
  std::size_t pos_ = 0;
};

Bytes authenticated_region(const SecureEnvelope& env) {
  Bytes out(env.nonce.begin(), env.nonce.end());
  put_u64(out, env.seq);
  put_u32(out, static_cast<std::uint32_t>(env.ciphertext.size()));
  out.insert(out.end(), env.ciphertext.begin(), env.ciphertext.end());
  return out;
}

constexpr std::string_view kEncLabel = "vssd/policy-channel/enc/v1";
constexpr std::string_view kMacLabel = "vssd/policy-channel/mac/v1";
constexpr std::uint8_t kCodecVersion = 1;

}  // namespace

DeviceKey DeviceKey::random() {
  std::array<std::uint8_t, kSize> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
  return DeviceKey(bytes);
}

DeviceKey DeviceKey::vendor() {
  constexpr std::string_view kSeed = "vssd vendor provisioning secret, unit 0";
  auto bytes = hmac_sha256(
      {reinterpret_cast<const std::uint8_t*>(kSeed.data()), kSeed.size()},
      {});
  return DeviceKey(bytes);
}

Bytes SecureEnvelope::serialize() const {
  Bytes out = authenticated_region(*this);
  out.insert(out.end(), mac.begin(), mac.end());
  return out;
}

SecureEnvelope SecureEnvelope::parse(std::span<const std::uint8_t> wire) {
  Reader r(wire, Errc::kMacVerificationFailed);
  SecureEnvelope env;
  auto nonce = r.take(kNonceSize);
  std::copy(nonce.begin(), nonce.end(), env.nonce.begin());
  env.seq = r.uint(8);
  const auto len = static_cast<std::size_t>(r.uint(4));
  auto ct = r.take(len);
  env.ciphertext.assign(ct.begin(), ct.end());
  auto mac = r.take(kMacSize);
  std::copy(mac.begin(), mac.end(), env.mac.begin());
  r.finish();
  return env;
}

SecureEnvelope seal(std::span<const std::uint8_t> payload, const DeviceKey& key,
                    std::uint64_t seq) {
  if (payload.empty()) throw Error(Errc::kMalformedPayload, "empty payload");
  if (payload.size() > kMaxMessageSize) {
    throw Error(Errc::kMalformedPayload,
                "payload of " + std::to_string(payload.size()) + " bytes");
  }
  SecureEnvelope env;
  if (RAND_bytes(env.nonce.data(), static_cast<int>(env.nonce.size())) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
  env.seq = seq;
  env.ciphertext = aes256_ctr(derive(key, kEncLabel), env.nonce, payload);
  env.mac = hmac_sha256(derive(key, kMacLabel), authenticated_region(env));
  return env;
}

Bytes open(const SecureEnvelope& envelope, const DeviceKey& key) {
  const auto expected =
      hmac_sha256(derive(key, kMacLabel), authenticated_region(envelope));
  if (CRYPTO_memcmp(expected.data(), envelope.mac.data(), expected.size()) !=
      0) {
    throw Error(Errc::kMacVerificationFailed, "envelope rejected");
  }
  return aes256_ctr(derive(key, kEncLabel), envelope.nonce,
                    envelope.ciphertext);
}

std::string_view response_status_name(ResponseStatus status) noexcept {
  switch (status) {
    case ResponseStatus::kSuccess: return "SUCCESS";
    case ResponseStatus::kDuplicatePolicy: return "DuplicatePolicy";
    case ResponseStatus::kPolicyNotFound: return "PolicyNotFound";
    case ResponseStatus::kMalformed: return "Malformed";
    case ResponseStatus::kMacVerificationFailed: return "MacVerificationFailed";
    case ResponseStatus::kReplayed: return "Replayed";
  }
  return "?";
}

Bytes encode_command(const PolicyCommand& cmd) {
  cmd.validate();
  if (cmd.path.size() > 0xFFFF) {
    throw Error(Errc::kMalformedCommand, "path longer than 65535 bytes");
  }
  Bytes out{kCodecVersion, static_cast<std::uint8_t>(cmd.kind)};
  put_u16(out, static_cast<std::uint16_t>(cmd.path.size()));
  out.insert(out.end(), cmd.path.begin(), cmd.path.end());
  if (cmd.cp) {
    put_u64(out, static_cast<std::uint64_t>(cmd.cp->rt));
    put_u64(out, static_cast<std::uint64_t>(cmd.cp->bc));
    put_u32(out, cmd.cp->v_max);
  }
  return out;
}

PolicyCommand decode_command(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, Errc::kMalformedPlaintext);
  if (r.uint(1) != kCodecVersion) {
    throw Error(Errc::kMalformedPlaintext, "unknown command codec version");
  }
  const auto kind = r.uint(1);
  if (kind < 1 || kind > 3) {
    throw Error(Errc::kMalformedPlaintext, "unknown command kind");
  }
  PolicyCommand cmd;
  cmd.kind = static_cast<CommandKind>(kind);
  auto path = r.take(static_cast<std::size_t>(r.uint(2)));
  cmd.path.assign(path.begin(), path.end());
  if (cmd.kind != CommandKind::kDelete) {
    ConfigParams cp;
    cp.rt = static_cast<Duration>(r.uint(8));
    cp.bc = static_cast<Duration>(r.uint(8));
    cp.v_max = static_cast<std::uint32_t>(r.uint(4));
    cmd.cp = cp;
  }
  r.finish();
  try {
    cmd.validate();
  } catch (const Error& e) {
    throw Error(Errc::kMalformedPlaintext, e.what());
  }
  return cmd;
}

Bytes encode_response(const ResponseMessage& msg) {
  Bytes out{kCodecVersion, static_cast<std::uint8_t>(msg.status)};
  put_u64(out, msg.request_seq);
  return out;
}

ResponseMessage decode_response(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, Errc::kMalformedPlaintext);
  if (r.uint(1) != kCodecVersion) {
    throw Error(Errc::kMalformedPlaintext, "unknown response codec version");
  }
  const auto status = r.uint(1);
  if (status > static_cast<std::uint8_t>(ResponseStatus::kReplayed)) {
    throw Error(Errc::kMalformedPlaintext, "unknown response status");
  }
  ResponseMessage msg;
  msg.status = static_cast<ResponseStatus>(status);
  msg.request_seq = r.uint(8);
  r.finish();
  return msg;
}

SecureEnvelope SecurePolicyManager::seal_command(const PolicyCommand& cmd) {
  return seal(encode_command(cmd), key_, next_seq_++);
}

ResponseMessage SecurePolicyManager::open_response(
    const SecureEnvelope& envelope) {
  auto plain = open(envelope, key_);
  if (envelope.seq <= last_response_seq_) {
    throw Error(Errc::kReplayedMessage,
                "response seq " + std::to_string(envelope.seq));
  }
  auto msg = decode_response(plain);
  if (msg.request_seq >= next_seq_) {
    throw Error(Errc::kMalformedPlaintext, "response to an unsent request");
  }
  last_response_seq_ = envelope.seq;
  return msg;
}

PolicyCommand PolicyVerifier::open_command(const SecureEnvelope& envelope) {
  auto plain = open(envelope, key_);
  if (envelope.seq <= last_request_seq_) {
    throw Error(Errc::kReplayedMessage,
                "request seq " + std::to_string(envelope.seq) +
                    " <= " + std::to_string(last_request_seq_));
  }
  last_request_seq_ = envelope.seq;
  return decode_command(plain);
}

SecureEnvelope PolicyVerifier::seal_response(const ResponseMessage& msg) {
  return seal(encode_response(msg), key_, ++response_seq_);
}

}  // namespace vssd
