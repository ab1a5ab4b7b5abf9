#include <gtest/gtest.h>

#include <random>

#include "vssd/error.hpp"
#include "vssd/secure_channel.hpp"

namespace vssd {
namespace {

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

// Flips one bit of the wire form and tries to open the result.
bool opens_after_flip(const SecureEnvelope& env, std::size_t bit,
                      const DeviceKey& key) {
  auto wire = env.serialize();
  wire[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  try {
    open(SecureEnvelope::parse(wire), key);
    return true;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMacVerificationFailed);
    return false;
  }
}

TEST(Envelope, WireLayoutSize) {
  const auto key = DeviceKey::random();
  const Bytes msg{1, 2, 3};
  const auto env = seal(msg, key, 9);
  const auto wire = env.serialize();
  EXPECT_EQ(wire.size(), SecureEnvelope::kOverhead + msg.size());
  EXPECT_EQ(SecureEnvelope::parse(wire), env);
  EXPECT_EQ(env.seq, 9u);
  // Big-endian sequence number right after the nonce.
  EXPECT_EQ(wire[SecureEnvelope::kNonceSize + 7], 9);
}

TEST(Envelope, EveryBitIsAuthenticated) {
  const auto key = DeviceKey::random();
  std::mt19937_64 rng(5);
  const auto env = seal(random_bytes(rng, 40), key, 3);
  const auto bits = env.serialize().size() * 8;
  for (std::size_t bit = 0; bit < bits; ++bit) {
    EXPECT_FALSE(opens_after_flip(env, bit, key)) << "bit " << bit;
  }
}

TEST(EnvelopeProperty, RandomFlipsAlwaysRejected) {
  const auto key = DeviceKey::random();
  std::mt19937_64 rng(6);
  for (int i = 0; i < 500; ++i) {
    const auto env = seal(random_bytes(rng, 1 + rng() % 512), key, rng());
    const auto bits = env.serialize().size() * 8;
    ASSERT_FALSE(opens_after_flip(env, rng() % bits, key));
  }
}

TEST(EnvelopeProperty, RoundTripUpToMaxSize) {
  const auto key = DeviceKey::random();
  std::mt19937_64 rng(7);
  std::vector<std::size_t> sizes{1, 2, 15, 16, 17, 4096, kMaxMessageSize};
  for (int i = 0; i < 200; ++i) sizes.push_back(1 + rng() % kMaxMessageSize);
  for (auto n : sizes) {
    const auto msg = random_bytes(rng, n);
    const auto env = seal(msg, key, n);
    ASSERT_EQ(open(SecureEnvelope::parse(env.serialize()), key), msg) << n;
  }
}

TEST(EnvelopeProperty, KeysAreIsolated) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto k1 = DeviceKey::random();
    const auto k2 = DeviceKey::random();
    ASSERT_NE(k1, k2);
    const auto env = seal(random_bytes(rng, 1 + rng() % 100), k1);
    EXPECT_THROW(open(env, k2), Error);
  }
}

TEST(Envelope, RejectsBadPayloadsAndFraming) {
  const auto key = DeviceKey::vendor();
  try {
    seal(Bytes{}, key);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kMalformedPayload);
  }
  EXPECT_THROW(seal(Bytes(kMaxMessageSize + 1), key), Error);
  auto wire = seal(Bytes{1}, key).serialize();
  wire.pop_back();
  EXPECT_THROW(SecureEnvelope::parse(wire), Error);
  wire.push_back(0);
  wire.push_back(0);
  EXPECT_THROW(SecureEnvelope::parse(wire), Error);
}

TEST(Envelope, NoncesDiffer) {
  const auto key = DeviceKey::vendor();
  EXPECT_NE(seal(Bytes{1}, key).nonce, seal(Bytes{1}, key).nonce);
}

TEST(Codec, CommandRoundTrip) {
  for (const auto& cmd : {PolicyCommand::create("/a/b", {5, 6, 7}),
                          PolicyCommand::change("x", {0, 0, 0}),
                          PolicyCommand::remove(std::string(300, 'p'))}) {
    EXPECT_EQ(decode_command(encode_command(cmd)), cmd);
  }
  const ResponseMessage r{ResponseStatus::kReplayed, 77};
  EXPECT_EQ(decode_response(encode_response(r)), r);
}

TEST(Codec, GarbageIsMalformed) {
  for (const Bytes& b : {Bytes{}, Bytes{2, 1, 0, 0}, Bytes{1, 9, 0, 0},
                         Bytes{1, 1, 0, 5, 'a'}, Bytes{1, 3, 0, 1, 'a', 0}}) {
    try {
      decode_command(b);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kMalformedPlaintext);
    }
  }
  EXPECT_THROW(decode_response(Bytes{1, 99, 0, 0, 0, 0, 0, 0, 0, 0}), Error);
}

TEST(Verifier, RejectsReplayAndStaleSequence) {
  const auto key = DeviceKey::random();
  SecurePolicyManager spm(key);
  PolicyVerifier v(key);
  const auto first = spm.seal_command(PolicyCommand::remove("/a"));
  const auto second = spm.seal_command(PolicyCommand::remove("/b"));
  EXPECT_EQ(v.open_command(second).path, "/b");
  for (const auto& env : {second, first}) {
    try {
      v.open_command(env);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kReplayedMessage);
    }
  }
  EXPECT_EQ(v.last_request_seq(), second.seq);
}

TEST(Verifier, ResponsesAreCheckedByTheManager) {
  const auto key = DeviceKey::random();
  SecurePolicyManager spm(key);
  PolicyVerifier v(key);
  const auto req = spm.seal_command(PolicyCommand::remove("/a"));
  v.open_command(req);
  const auto resp = v.seal_response({ResponseStatus::kPolicyNotFound, req.seq});
  EXPECT_EQ(spm.open_response(resp).status, ResponseStatus::kPolicyNotFound);
  // The same response cannot be accepted twice.
  EXPECT_THROW(spm.open_response(resp), Error);
  PolicyVerifier impostor(DeviceKey::random());
  EXPECT_THROW(spm.open_response(impostor.seal_response({})), Error);
}

}  // namespace
}  // namespace vssd
