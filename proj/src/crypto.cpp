#include "f4ms/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace f4ms {

namespace {

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
  });
}

Bytes draw(SplitMix64& rng, std::size_t n) {
  Bytes out;
  rng.fill(out, n);
  return out;
}

class SodiumSuite final : public CryptoSuite {
 public:
  std::string name() const override { return "sodium"; }

  Bytes gen_content_key(SplitMix64& rng) const override {
    ensure_sodium();
    return draw(rng, crypto_secretbox_KEYBYTES);
  }

  Bytes sym_encrypt(const Bytes& plaintext, const Bytes& key,
                    SplitMix64& rng) const override {
    ensure_sodium();
    if (key.size() != crypto_secretbox_KEYBYTES)
      throw std::invalid_argument("bad symmetric key size");
    Bytes nonce = draw(rng, crypto_secretbox_NONCEBYTES);
    Bytes out(nonce.size() + plaintext.size() + crypto_secretbox_MACBYTES);
    std::memcpy(out.data(), nonce.data(), nonce.size());
    crypto_secretbox_easy(out.data() + nonce.size(), plaintext.data(),
                          plaintext.size(), nonce.data(), key.data());
    return out;
  }

  std::optional<Bytes> sym_decrypt(const Bytes& ciphertext,
                                   const Bytes& key) const override {
    ensure_sodium();
    if (key.size() != crypto_secretbox_KEYBYTES) return std::nullopt;
    if (ciphertext.size() < crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES)
      return std::nullopt;
    const std::size_t body = ciphertext.size() - crypto_secretbox_NONCEBYTES;
    Bytes out(body - crypto_secretbox_MACBYTES);
    if (crypto_secretbox_open_easy(out.data(),
                                   ciphertext.data() + crypto_secretbox_NONCEBYTES,
                                   body, ciphertext.data(), key.data()) != 0)
      return std::nullopt;
    return out;
  }

  KeyPair gen_wrap_keypair(SplitMix64& rng) const override {
    ensure_sodium();
    Bytes seed = draw(rng, crypto_box_SEEDBYTES);
    KeyPair kp;
    kp.public_key.resize(crypto_box_PUBLICKEYBYTES);
    kp.private_key.resize(crypto_box_SECRETKEYBYTES);
    crypto_box_seed_keypair(kp.public_key.data(), kp.private_key.data(), seed.data());
    return kp;
  }

  Bytes wrap_key(const Bytes& content_key, const Bytes& public_key,
                 SplitMix64& rng) const override {
    ensure_sodium();
    (void)rng;  // sealed boxes generate their ephemeral key internally
    if (public_key.size() != crypto_box_PUBLICKEYBYTES)
      throw std::invalid_argument("bad wrap public key size");
    Bytes out(content_key.size() + crypto_box_SEALBYTES);
    crypto_box_seal(out.data(), content_key.data(), content_key.size(),
                    public_key.data());
    return out;
  }

  std::optional<Bytes> unwrap_key(const Bytes& wrapped,
                                  const KeyPair& pair) const override {
    ensure_sodium();
    if (pair.public_key.size() != crypto_box_PUBLICKEYBYTES ||
        pair.private_key.size() != crypto_box_SECRETKEYBYTES ||
        wrapped.size() < crypto_box_SEALBYTES)
      return std::nullopt;
    Bytes out(wrapped.size() - crypto_box_SEALBYTES);
    if (crypto_box_seal_open(out.data(), wrapped.data(), wrapped.size(),
                             pair.public_key.data(), pair.private_key.data()) != 0)
      return std::nullopt;
    return out;
  }

  KeyPair gen_sign_keypair(SplitMix64& rng) const override {
    ensure_sodium();
    Bytes seed = draw(rng, crypto_sign_SEEDBYTES);
    KeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.private_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.private_key.data(), seed.data());
    return kp;
  }

  Bytes sign(const Bytes& message, const Bytes& signing_key) const override {
    ensure_sodium();
    if (signing_key.size() != crypto_sign_SECRETKEYBYTES)
      throw std::invalid_argument("bad signing key size");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         signing_key.data());
    return sig;
  }

  bool verify(const Bytes& signature, const Bytes& message,
              const Bytes& verify_key) const override {
    ensure_sodium();
    if (signature.size() != crypto_sign_BYTES ||
        verify_key.size() != crypto_sign_PUBLICKEYBYTES)
      return false;
    return crypto_sign_verify_detached(signature.data(), message.data(),
                                       message.size(), verify_key.data()) == 0;
  }
};

// --- deterministic test construction -----------------------------------

constexpr std::size_t kTestKeyLen = 16;
constexpr std::size_t kTestNonceLen = 8;
constexpr std::size_t kTestTagLen = 16;
constexpr std::size_t kTestSigLen = 32;

// FNV over (key, domain, data) seeding a generator that emits the digest.
// Same-length tampering always changes the digest: each absorption step is
// injective in the running state.
Bytes keyed_digest(const Bytes& key, char domain, const Bytes& data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  auto absorb = [&](const std::uint8_t* p, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  absorb(key.data(), key.size());
  const std::uint8_t d = static_cast<std::uint8_t>(domain);
  absorb(&d, 1);
  absorb(data.data(), data.size());
  SplitMix64 g{mix64(h)};
  Bytes out;
  g.fill(out, n);
  return out;
}

Bytes xor_stream(const Bytes& data, const Bytes& key, const Bytes& nonce) {
  std::uint64_t seed = fnv1a64(to_hex(key) + ":" + to_hex(nonce));
  SplitMix64 g{seed};
  Bytes ks;
  g.fill(ks, data.size());
  Bytes out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out[i] = static_cast<std::uint8_t>(data[i] ^ ks[i]);
  return out;
}

class TestSuite final : public CryptoSuite {
 public:
  std::string name() const override { return "test"; }

  Bytes gen_content_key(SplitMix64& rng) const override {
    return draw(rng, kTestKeyLen);
  }

  Bytes sym_encrypt(const Bytes& plaintext, const Bytes& key,
                    SplitMix64& rng) const override {
    Bytes nonce = draw(rng, kTestNonceLen);
    Bytes body = xor_stream(plaintext, key, nonce);
    Bytes tagged = nonce;
    tagged.insert(tagged.end(), body.begin(), body.end());
    Bytes tag = keyed_digest(key, 'T', tagged, kTestTagLen);
    Bytes out = std::move(tagged);
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
  }

  std::optional<Bytes> sym_decrypt(const Bytes& ciphertext,
                                   const Bytes& key) const override {
    if (ciphertext.size() < kTestNonceLen + kTestTagLen) return std::nullopt;
    Bytes tagged(ciphertext.begin(), ciphertext.end() - kTestTagLen);
    Bytes tag(ciphertext.end() - kTestTagLen, ciphertext.end());
    if (keyed_digest(key, 'T', tagged, kTestTagLen) != tag) return std::nullopt;
    Bytes nonce(tagged.begin(), tagged.begin() + kTestNonceLen);
    Bytes body(tagged.begin() + kTestNonceLen, tagged.end());
    return xor_stream(body, key, nonce);
  }

  KeyPair gen_wrap_keypair(SplitMix64& rng) const override {
    Bytes k = draw(rng, kTestKeyLen);
    return KeyPair{k, k};  // symmetric stand-in: both halves identical
  }

  Bytes wrap_key(const Bytes& content_key, const Bytes& public_key,
                 SplitMix64& rng) const override {
    return sym_encrypt(content_key, public_key, rng);
  }

  std::optional<Bytes> unwrap_key(const Bytes& wrapped,
                                  const KeyPair& pair) const override {
    return sym_decrypt(wrapped, pair.private_key);
  }

  KeyPair gen_sign_keypair(SplitMix64& rng) const override {
    Bytes k = draw(rng, kTestKeyLen);
    return KeyPair{k, k};
  }

  Bytes sign(const Bytes& message, const Bytes& signing_key) const override {
    return keyed_digest(signing_key, 'S', message, kTestSigLen);
  }

  bool verify(const Bytes& signature, const Bytes& message,
              const Bytes& verify_key) const override {
    return signature == keyed_digest(verify_key, 'S', message, kTestSigLen);
  }
};

}  // namespace

const CryptoSuite& sodium_suite() {
  static const SodiumSuite suite;
  return suite;
}

const CryptoSuite& test_suite() {
  static const TestSuite suite;
  return suite;
}

const CryptoSuite* suite_by_name(std::string_view name) {
  if (name == "sodium") return &sodium_suite();
  if (name == "test") return &test_suite();
  return nullptr;
}

}  // namespace f4ms
