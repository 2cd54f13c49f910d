// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace glitchlab::payload {

// Wire format accepted by the hidden UART bootloader:
//   header (24 bytes) ‖ code (code_length bytes) ‖ checksum (4 bytes)
// every field little-endian. The id fields are opaque and never checked.
struct UartHeader {
  uint32_t entry_addr = 0;  // load address == first instruction
  uint32_t code_length = 0;
  std::array<uint32_t, 4> id{};
};

constexpr size_t kHeaderBytes = 24;

struct UartPayload {
  UartHeader header;
  std::vector<uint8_t> code;
  uint32_t checksum = 0;  // as transmitted

  bool operator==(const UartPayload &o) const {
    return header.entry_addr == o.header.entry_addr &&
           header.code_length == o.header.code_length &&
           header.id == o.header.id && code == o.code &&
           checksum == o.checksum;
  }
};

enum class DecodeError { OK, TRUNCATED, CHECKSUM_MISMATCH };
const char *to_string(DecodeError e);

struct DecodeResult {
  DecodeError error = DecodeError::OK;
  UartPayload payload;
};

// One's complement of the 32-bit wrapping sum of every header and code
// byte, each zero-extended.
uint32_t payload_checksum(const UartHeader &h, const std::vector<uint8_t> &code);

// header.code_length must equal code size (std::invalid_argument otherwise).
std::vector<uint8_t> encode(const UartHeader &h, const std::vector<uint8_t> &code);
std::vector<uint8_t> encode(const UartPayload &p);  // re-emits as transmitted

// Parses and verifies. Trailing bytes beyond the checksum are ignored so a
// raw capture stream can be fed directly.
DecodeResult decode(const std::vector<uint8_t> &wire);

// ------------------------------------------------------------ builders --

struct DumpRange {
  uint32_t start = 0;
  uint32_t count = 0;
};

// Default load/entry point for uploaded code: 4 KiB into RAM, clear of the
// download stack.
constexpr uint32_t kDefaultEntry = 0x40001000;

// Code that streams [start, start+count) byte-by-byte to the UART data
// register for each range in order, then halts.
std::vector<uint8_t> dump_code(const std::vector<DumpRange> &ranges,
                               uint32_t uart_addr, uint32_t entry_addr);

UartPayload build_dump_payload(uint32_t start_addr, uint32_t byte_count,
                               uint32_t uart_addr,
                               uint32_t entry_addr = kDefaultEntry);

UartPayload build_multi_dump_payload(const std::vector<DumpRange> &ranges,
                                     uint32_t uart_addr,
                                     uint32_t entry_addr = kDefaultEntry);

}  // namespace glitchlab::payload
