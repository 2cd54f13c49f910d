// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/payload.hpp"

#include <cstring>
#include <stdexcept>

#include "glitchlab/assembler.hpp"

namespace glitchlab::payload {

const char *to_string(DecodeError e) {
  switch (e) {
    case DecodeError::OK: return "OK";
    case DecodeError::TRUNCATED: return "TRUNCATED";
    case DecodeError::CHECKSUM_MISMATCH: return "CHECKSUM_MISMATCH";
  }
  return "?";
}

namespace {

void put32(std::vector<uint8_t> &out, uint32_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 24));
}

uint32_t get32(const uint8_t *p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::vector<uint8_t> header_bytes(const UartHeader &h) {
  std::vector<uint8_t> out;
  out.reserve(kHeaderBytes);
  put32(out, h.entry_addr);
  put32(out, h.code_length);
  for (uint32_t id : h.id) put32(out, id);
  return out;
}

}  // namespace

uint32_t payload_checksum(const UartHeader &h, const std::vector<uint8_t> &code) {
  uint32_t sum = 0;
  for (uint8_t b : header_bytes(h)) sum += b;
  for (uint8_t b : code) sum += b;
  return ~sum;
}

std::vector<uint8_t> encode(const UartHeader &h, const std::vector<uint8_t> &code) {
  if (h.code_length != code.size()) {
    throw std::invalid_argument("header code_length does not match code size");
  }
  std::vector<uint8_t> wire = header_bytes(h);
  wire.insert(wire.end(), code.begin(), code.end());
  put32(wire, payload_checksum(h, code));
  return wire;
}

std::vector<uint8_t> encode(const UartPayload &p) {
  std::vector<uint8_t> wire = header_bytes(p.header);
  wire.insert(wire.end(), p.code.begin(), p.code.end());
  put32(wire, p.checksum);
  return wire;
}

DecodeResult decode(const std::vector<uint8_t> &wire) {
  DecodeResult r;
  if (wire.size() < kHeaderBytes + 4) {
    r.error = DecodeError::TRUNCATED;
    return r;
  }
  UartHeader h;
  h.entry_addr = get32(wire.data());
  h.code_length = get32(wire.data() + 4);
  for (int i = 0; i < 4; ++i) h.id[i] = get32(wire.data() + 8 + 4 * i);
  size_t need = kHeaderBytes + size_t(h.code_length) + 4;
  if (wire.size() < need) {
    r.error = DecodeError::TRUNCATED;
    return r;
  }
  r.payload.header = h;
  r.payload.code.assign(wire.begin() + kHeaderBytes,
                        wire.begin() + kHeaderBytes + h.code_length);
  r.payload.checksum = get32(wire.data() + need - 4);
  if (r.payload.checksum != payload_checksum(h, r.payload.code)) {
    r.error = DecodeError::CHECKSUM_MISMATCH;
  }
  return r;
}

std::vector<uint8_t> dump_code(const std::vector<DumpRange> &ranges,
                               uint32_t uart_addr, uint32_t entry_addr) {
  using namespace sim;
  Asm a(entry_addr);
  a.mov(R3, uart_addr);
  for (const DumpRange &rg : ranges) {
    a.mov(R0, rg.start);
    a.mov(R1, rg.start + rg.count);
    int loop = a.label(), done = a.label();
    a.bind(loop);
    a.cmp(R0, R1);
    a.beq(done);
    a.ldrb(R2, R0);
    a.strb(R2, R3);
    a.add(R0, R0, 1);
    a.b(loop);
    a.bind(done);
  }
  a.halt();
  return a.assemble();
}

UartPayload build_dump_payload(uint32_t start_addr, uint32_t byte_count,
                               uint32_t uart_addr, uint32_t entry_addr) {
  return build_multi_dump_payload({{start_addr, byte_count}}, uart_addr,
                                  entry_addr);
}

UartPayload build_multi_dump_payload(const std::vector<DumpRange> &ranges,
                                     uint32_t uart_addr, uint32_t entry_addr) {
  UartPayload p;
  p.code = dump_code(ranges, uart_addr, entry_addr);
  p.header.entry_addr = entry_addr;
  p.header.code_length = uint32_t(p.code.size());
  p.checksum = payload_checksum(p.header, p.code);
  return p;
}

}  // namespace glitchlab::payload
