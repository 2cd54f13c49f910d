// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/crypto.hpp"

#include <cstring>
#include <stdexcept>

namespace glitchlab::crypto {

namespace {

const uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

uint8_t inv_sbox_table[256];
bool inv_sbox_ready = false;

const uint8_t *inv_sbox() {
  if (!inv_sbox_ready) {
    for (int i = 0; i < 256; i++) inv_sbox_table[kSbox[i]] = uint8_t(i);
    inv_sbox_ready = true;
  }
  return inv_sbox_table;
}

inline uint8_t xtime(uint8_t x) { return uint8_t((x << 1) ^ ((x >> 7) * 0x1b)); }

inline uint8_t gmul(uint8_t a, uint8_t b) {
  uint8_t p = 0;
  for (int i = 0; i < 8; i++) {
    if (b & 1) p ^= a;
    a = xtime(a);
    b >>= 1;
  }
  return p;
}

}  // namespace

Aes128::Aes128(const Key128 &key) {
  for (int i = 0; i < 4; i++)
    rk_[i] = uint32_t(key[4 * i]) << 24 | uint32_t(key[4 * i + 1]) << 16 |
             uint32_t(key[4 * i + 2]) << 8 | uint32_t(key[4 * i + 3]);
  uint32_t rcon = 0x01000000;
  for (int i = 4; i < 44; i++) {
    uint32_t t = rk_[i - 1];
    if (i % 4 == 0) {
      t = (t << 8) | (t >> 24);  // rotword
      t = uint32_t(kSbox[t >> 24]) << 24 | uint32_t(kSbox[(t >> 16) & 0xff]) << 16 |
          uint32_t(kSbox[(t >> 8) & 0xff]) << 8 | uint32_t(kSbox[t & 0xff]);
      t ^= rcon;
      rcon = uint32_t(xtime(uint8_t(rcon >> 24))) << 24;
    }
    rk_[i] = rk_[i - 4] ^ t;
  }
}

void Aes128::encrypt_block(const uint8_t in[16], uint8_t out[16]) const {
  uint8_t s[16];
  std::memcpy(s, in, 16);
  auto add_rk = [&](int round) {
    for (int c = 0; c < 4; c++) {
      uint32_t w = rk_[4 * round + c];
      s[4 * c + 0] ^= uint8_t(w >> 24);
      s[4 * c + 1] ^= uint8_t(w >> 16);
      s[4 * c + 2] ^= uint8_t(w >> 8);
      s[4 * c + 3] ^= uint8_t(w);
    }
  };
  add_rk(0);
  for (int round = 1; round <= 10; round++) {
    for (auto &b : s) b = kSbox[b];
    // shift rows; state is column-major
    uint8_t t;
    t = s[1]; s[1] = s[5]; s[5] = s[9]; s[9] = s[13]; s[13] = t;
    t = s[2]; s[2] = s[10]; s[10] = t; t = s[6]; s[6] = s[14]; s[14] = t;
    t = s[15]; s[15] = s[11]; s[11] = s[7]; s[7] = s[3]; s[3] = t;
    if (round != 10) {
      for (int c = 0; c < 4; c++) {
        uint8_t *col = s + 4 * c;
        uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        col[0] = uint8_t(xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3);
        col[1] = uint8_t(a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3);
        col[2] = uint8_t(a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3));
        col[3] = uint8_t((xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3));
      }
    }
    add_rk(round);
  }
  std::memcpy(out, s, 16);
}

void Aes128::decrypt_block(const uint8_t in[16], uint8_t out[16]) const {
  const uint8_t *isb = inv_sbox();
  uint8_t s[16];
  std::memcpy(s, in, 16);
  auto add_rk = [&](int round) {
    for (int c = 0; c < 4; c++) {
      uint32_t w = rk_[4 * round + c];
      s[4 * c + 0] ^= uint8_t(w >> 24);
      s[4 * c + 1] ^= uint8_t(w >> 16);
      s[4 * c + 2] ^= uint8_t(w >> 8);
      s[4 * c + 3] ^= uint8_t(w);
    }
  };
  add_rk(10);
  for (int round = 9; round >= 0; round--) {
    uint8_t t;
    t = s[13]; s[13] = s[9]; s[9] = s[5]; s[5] = s[1]; s[1] = t;
    t = s[2]; s[2] = s[10]; s[10] = t; t = s[6]; s[6] = s[14]; s[14] = t;
    t = s[3]; s[3] = s[7]; s[7] = s[11]; s[11] = s[15]; s[15] = t;
    for (auto &b : s) b = isb[b];
    add_rk(round);
    if (round != 0) {
      for (int c = 0; c < 4; c++) {
        uint8_t *col = s + 4 * c;
        uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        col[0] = uint8_t(gmul(a0, 14) ^ gmul(a1, 11) ^ gmul(a2, 13) ^ gmul(a3, 9));
        col[1] = uint8_t(gmul(a0, 9) ^ gmul(a1, 14) ^ gmul(a2, 11) ^ gmul(a3, 13));
        col[2] = uint8_t(gmul(a0, 13) ^ gmul(a1, 9) ^ gmul(a2, 14) ^ gmul(a3, 11));
        col[3] = uint8_t(gmul(a0, 11) ^ gmul(a1, 13) ^ gmul(a2, 9) ^ gmul(a3, 14));
      }
    }
  }
  std::memcpy(out, s, 16);
}

Bytes cbc_encrypt(const Key128 &key, const Key128 &iv, const Bytes &plain) {
  if (plain.size() % 16 != 0)
    throw std::invalid_argument("cbc_encrypt: length not a multiple of 16");
  Aes128 aes(key);
  Bytes out(plain.size());
  uint8_t chain[16];
  std::memcpy(chain, iv.data(), 16);
  for (size_t i = 0; i < plain.size(); i += 16) {
    uint8_t buf[16];
    for (int j = 0; j < 16; j++) buf[j] = plain[i + j] ^ chain[j];
    aes.encrypt_block(buf, out.data() + i);
    std::memcpy(chain, out.data() + i, 16);
  }
  return out;
}

Bytes cbc_decrypt(const Key128 &key, const Key128 &iv, const Bytes &cipher) {
  if (cipher.size() % 16 != 0)
    throw std::invalid_argument("cbc_decrypt: length not a multiple of 16");
  Aes128 aes(key);
  Bytes out(cipher.size());
  uint8_t chain[16];
  std::memcpy(chain, iv.data(), 16);
  for (size_t i = 0; i < cipher.size(); i += 16) {
    uint8_t buf[16];
    aes.decrypt_block(cipher.data() + i, buf);
    for (int j = 0; j < 16; j++) out[i + j] = buf[j] ^ chain[j];
    std::memcpy(chain, cipher.data() + i, 16);
  }
  return out;
}

Key128 cbc_mac(const Key128 &key, const Bytes &data) {
  if (data.size() % 16 != 0)
    throw std::invalid_argument("cbc_mac: length not a multiple of 16");
  Aes128 aes(key);
  Key128 chain{};
  for (size_t i = 0; i < data.size(); i += 16) {
    uint8_t buf[16];
    for (int j = 0; j < 16; j++) buf[j] = data[i + j] ^ chain[j];
    aes.encrypt_block(buf, chain.data());
  }
  return chain;
}

const char *to_string(EngineStatus s) {
  switch (s) {
    case EngineStatus::OK: return "OK";
    case EngineStatus::ALREADY_LOADED: return "ALREADY_LOADED";
    case EngineStatus::FEKS_NOT_LOADED: return "FEKS_NOT_LOADED";
    case EngineStatus::BAD_BLOB_LENGTH: return "BAD_BLOB_LENGTH";
    case EngineStatus::BAD_SLOT_INDEX: return "BAD_SLOT_INDEX";
    case EngineStatus::SLOT_EMPTY: return "SLOT_EMPTY";
    case EngineStatus::AUTH_FAILED: return "AUTH_FAILED";
    case EngineStatus::BAD_IMAGE: return "BAD_IMAGE";
  }
  return "?";
}

Bytes build_key_blob(const Key128 &fek1, const std::vector<BlobEntry> &entries,
                     size_t blob_size) {
  if (entries.size() * 32 > blob_size)
    throw std::invalid_argument("key blob overflow");
  Bytes blob(blob_size, 0);
  size_t off = 0;
  for (const auto &e : entries) {
    if (e.label.empty() || e.label.size() > 12)
      throw std::invalid_argument("blob label must be 1..12 chars");
    if (e.slot < 0 || e.slot >= kNumSlots)
      throw std::invalid_argument("blob slot out of range");
    std::memcpy(blob.data() + off, e.label.data(), e.label.size());
    blob[off + 12] = uint8_t(e.slot);
    Bytes enc = cbc_encrypt(fek1, kZeroIv, Bytes(e.key.begin(), e.key.end()));
    std::memcpy(blob.data() + off + 16, enc.data(), 16);
    off += 32;
  }
  return blob;
}

EngineStatus CryptoEngine::load_feks(const FekSource &source) {
  if (feks_loaded_) return EngineStatus::ALREADY_LOADED;
  source_ = source;
  slots_[kSlotFek1] = {true, "FEK1", source.fek1};
  slots_[kSlotFek2] = {true, "FEK2", source.effective_fek2()};
  feks_loaded_ = true;
  readout_protect_ = true;
  return EngineStatus::OK;
}

EngineStatus CryptoEngine::decrypt_key_blob(const Bytes &blob) {
  if (!feks_loaded_) return EngineStatus::FEKS_NOT_LOADED;
  if (blob.size() % 16 != 0) return EngineStatus::BAD_BLOB_LENGTH;
  const Key128 &fek1 = slots_[kSlotFek1].key;
  for (size_t off = 0; off + 32 <= blob.size(); off += 32) {
    const uint8_t *desc = blob.data() + off;
    bool all_zero = true;
    for (int i = 0; i < 16; i++) all_zero &= desc[i] == 0;
    if (all_zero) break;
    size_t n = 0;
    while (n < 12 && desc[n] != 0) n++;
    int slot = desc[12];
    if (slot >= kNumSlots) return EngineStatus::BAD_SLOT_INDEX;
    Bytes enc(blob.begin() + off + 16, blob.begin() + off + 32);
    Bytes dec = cbc_decrypt(fek1, kZeroIv, enc);
    KeySlot ks;
    ks.populated = true;
    ks.label.assign(reinterpret_cast<const char *>(desc), n);
    std::memcpy(ks.key.data(), dec.data(), 16);
    slots_[slot] = ks;
  }
  return EngineStatus::OK;
}

const KeySlot &CryptoEngine::slot(int i) const {
  if (i < 0 || i >= kNumSlots) throw std::out_of_range("key slot index");
  return slots_[i];
}

void CryptoEngine::clear_slot(int i) {
  if (i < 0 || i >= kNumSlots) throw std::out_of_range("key slot index");
  slots_[i] = KeySlot{};
}

int CryptoEngine::populated_count() const {
  int n = 0;
  for (const auto &s : slots_) n += s.populated;
  return n;
}

Bytes wrap_layer(const Key128 &key, const Bytes &plain) {
  if (plain.empty() || plain.size() % 16 != 0)
    throw std::invalid_argument("wrap_layer: bad plaintext length");
  Bytes out = cbc_encrypt(key, kZeroIv, plain);
  Key128 tag = cbc_mac(key, plain);
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

std::optional<Bytes> unwrap_layer(const Key128 &key, const Bytes &wrapped) {
  if (wrapped.size() < 32 || wrapped.size() % 16 != 0) return std::nullopt;
  Bytes ct(wrapped.begin(), wrapped.end() - 16);
  Bytes plain = cbc_decrypt(key, kZeroIv, ct);
  Key128 tag = cbc_mac(key, plain);
  if (!std::equal(tag.begin(), tag.end(), wrapped.end() - 16)) return std::nullopt;
  return plain;
}

Bytes build_mb1_image(const Key128 &mb1_key, const Key128 &fek2,
                      bool odm_enabled, const Bytes &plain) {
  Bytes inner = wrap_layer(mb1_key, plain);
  return odm_enabled ? wrap_layer(fek2, inner) : inner;
}

Mb1Result decrypt_mb1(CryptoEngine &engine, const Bytes &mb1_image,
                      bool odm_enabled) {
  Mb1Result result;
  if (!engine.feks_loaded()) {
    result.status = EngineStatus::FEKS_NOT_LOADED;
    return result;
  }
  if (!engine.slot(kSlotMb1).populated) {
    result.status = EngineStatus::SLOT_EMPTY;
    return result;
  }
  Bytes stage = mb1_image;
  if (odm_enabled) {
    auto peeled = unwrap_layer(engine.slot(kSlotFek2).key, stage);
    if (!peeled) {
      result.status = EngineStatus::AUTH_FAILED;
      return result;
    }
    stage = std::move(*peeled);
  }
  auto plain = unwrap_layer(engine.slot(kSlotMb1).key, stage);
  if (!plain) {
    result.status = EngineStatus::AUTH_FAILED;
    return result;
  }
  result.plain = std::move(*plain);
  engine.clear_slot(kSlotMb1);
  return result;
}

}  // namespace glitchlab::crypto
