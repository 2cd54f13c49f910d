// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include <vector>

#include "doctest.h"
#include "glitchlab/gen.hpp"
#include "glitchlab/machine.hpp"
#include "glitchlab/payload.hpp"
#include "glitchlab/rng.hpp"

using namespace glitchlab;
using payload::DecodeError;
using payload::UartHeader;
using payload::UartPayload;

TEST_CASE("checksum worked examples") {
  // All fields zero, no code: sum 0, complement all-ones.
  CHECK(payload::payload_checksum(UartHeader{}, {}) == 0xFFFFFFFFu);
  // code_length 2 with bytes 0x01 0x02: sum 2 + 1 + 2 = 5.
  UartHeader h;
  h.code_length = 2;
  CHECK(payload::payload_checksum(h, {0x01, 0x02}) == 0xFFFFFFFAu);
}

TEST_CASE("wire layout: little-endian header, code, checksum") {
  UartHeader h;
  h.entry_addr = 0x40001000;
  h.code_length = 4;
  h.id = {0x11223344, 0, 0, 0xaabbccdd};
  const std::vector<uint8_t> code{0xde, 0xad, 0xbe, 0xef};
  const auto wire = payload::encode(h, code);
  REQUIRE(wire.size() == payload::kHeaderBytes + 4 + 4);
  CHECK(wire[0] == 0x00);  // entry LE
  CHECK(wire[1] == 0x10);
  CHECK(wire[2] == 0x00);
  CHECK(wire[3] == 0x40);
  CHECK(wire[4] == 4);     // code_length LE
  CHECK(wire[8] == 0x44);  // id[0] LE
  CHECK(wire[11] == 0x11);
  CHECK(wire[20] == 0xdd);  // id[3] LE
  CHECK(wire[24] == 0xde);  // code verbatim
  const uint32_t sum = payload::payload_checksum(h, code);
  CHECK(wire[28] == uint8_t(sum));
  CHECK(wire[31] == uint8_t(sum >> 24));
}

TEST_CASE("encode insists the declared length matches the code") {
  UartHeader h;
  h.code_length = 3;
  CHECK_THROWS_AS(payload::encode(h, {0x01}), std::invalid_argument);
}

TEST_CASE("decode round-trips random payloads and ignores trailing noise") {
  Rng rng(0xFEED);
  for (int i = 0; i < 300; i++) {
    UartHeader h;
    h.entry_addr = uint32_t(rng.next());
    for (auto &id : h.id) id = uint32_t(rng.next());
    std::vector<uint8_t> code(rng.below(200));
    for (auto &b : code) b = uint8_t(rng.below(256));
    h.code_length = uint32_t(code.size());

    auto wire = payload::encode(h, code);
    const size_t junk = rng.below(32);
    for (size_t j = 0; j < junk; j++) wire.push_back(uint8_t(rng.below(256)));

    const auto res = payload::decode(wire);
    REQUIRE(res.error == DecodeError::OK);
    CHECK(res.payload.header.entry_addr == h.entry_addr);
    CHECK(res.payload.header.code_length == h.code_length);
    CHECK(res.payload.header.id == h.id);
    CHECK(res.payload.code == code);
    CHECK(res.payload.checksum == payload::payload_checksum(h, code));
    // Re-encoding the decoded payload reproduces the original wire image.
    const auto again = payload::encode(res.payload);
    CHECK(std::equal(again.begin(), again.end(), wire.begin()));
  }
}

TEST_CASE("decode rejects corruption and truncation") {
  UartHeader h;
  h.entry_addr = payload::kDefaultEntry;
  const std::vector<uint8_t> code{1, 2, 3, 4, 5, 6, 7, 8};
  h.code_length = uint32_t(code.size());
  const auto wire = payload::encode(h, code);

  SUBCASE("every single-byte change in the message body is caught") {
    Rng rng(5);
    for (size_t pos = 0; pos < wire.size(); pos++) {
      auto bad = wire;
      bad[pos] ^= uint8_t(1 + rng.below(255));
      CHECK(payload::decode(bad).error != DecodeError::OK);
    }
  }
  SUBCASE("checksum mismatch is reported as such for payload-body damage") {
    auto bad = wire;
    bad[25] ^= 0x40;  // code byte, structure intact
    CHECK(payload::decode(bad).error == DecodeError::CHECKSUM_MISMATCH);
  }
  SUBCASE("short input is truncation, not a checksum complaint") {
    for (size_t n : {size_t(0), size_t(10), payload::kHeaderBytes,
                     wire.size() - 1}) {
      std::vector<uint8_t> cut(wire.begin(), wire.begin() + n);
      CHECK(payload::decode(cut).error == DecodeError::TRUNCATED);
    }
  }
}

TEST_CASE("dump payload builders target the requested window") {
  const auto p = payload::build_dump_payload(sim::kIromBase, 0x40,
                                             sim::kMmioUartThr);
  CHECK(p.header.entry_addr == payload::kDefaultEntry);
  CHECK(p.header.code_length == p.code.size());
  CHECK(p.header.id == std::array<uint32_t, 4>{});
  CHECK(p.code.size() % sim::kInstrBytes == 0);
  CHECK(p.checksum == payload::payload_checksum(p.header, p.code));

  // The multi-range builder with one range is the single-range payload.
  const auto q = payload::build_multi_dump_payload(
      {{sim::kIromBase, 0x40}}, sim::kMmioUartThr);
  CHECK(p == q);
}

TEST_CASE("dump payload code streams the exact byte window when executed") {
  // Synthetic ROM: recognizable bytes, executed straight from RAM.
  sim::MachineConfig cfg;
  std::vector<uint8_t> rom(0x200);
  for (size_t i = 0; i < rom.size(); i++) rom[i] = uint8_t(i * 7 + 3);
  sim::Machine m{cfg};
  m.load_irom(rom);
  m.release_reset(sim::kIromBase);

  const auto p = payload::build_dump_payload(sim::kIromBase + 0x20, 0x30,
                                             sim::kMmioUartThr);
  REQUIRE(uint32_t(p.code.size()) == p.header.code_length);
  for (size_t i = 0; i < p.code.size(); i++)
    m.ram[p.header.entry_addr - sim::kRamBase + i] = p.code[i];
  m.regs[sim::PC] = p.header.entry_addr;
  uint64_t cap = 100'000;
  while (m.state == sim::MachState::RUNNING && !m.trapped && cap--)
    m.step(nullptr, nullptr);
  CHECK(m.state == sim::MachState::HALTED);
  CHECK(m.uart_out == std::vector<uint8_t>(rom.begin() + 0x20,
                                           rom.begin() + 0x20 + 0x30));
}

TEST_CASE("multi-range dump walks the ranges in order") {
  sim::MachineConfig cfg;
  std::vector<uint8_t> rom(0x100);
  for (size_t i = 0; i < rom.size(); i++) rom[i] = uint8_t(0xff - i);
  sim::Machine m{cfg};
  m.load_irom(rom);
  m.release_reset(sim::kIromBase);

  const auto p = payload::build_multi_dump_payload(
      {{sim::kIromBase + 0x10, 8}, {sim::kIromBase, 4}}, sim::kMmioUartThr);
  for (size_t i = 0; i < p.code.size(); i++)
    m.ram[p.header.entry_addr - sim::kRamBase + i] = p.code[i];
  m.regs[sim::PC] = p.header.entry_addr;
  uint64_t cap = 100'000;
  while (m.state == sim::MachState::RUNNING && !m.trapped && cap--)
    m.step(nullptr, nullptr);
  CHECK(m.state == sim::MachState::HALTED);
  std::vector<uint8_t> expect(rom.begin() + 0x10, rom.begin() + 0x18);
  expect.insert(expect.end(), rom.begin(), rom.begin() + 4);
  CHECK(m.uart_out == expect);
}

TEST_CASE("protected tail: a locked-down part dumps only the open stretch") {
  // Post-boot personality: protection raised to the lockdown boundary and
  // the secure world already left behind.
  sim::MachineConfig cfg;
  std::vector<uint8_t> rom(0x2000);
  for (size_t i = 0; i < rom.size(); i++) rom[i] = uint8_t(i ^ (i >> 8));
  sim::Machine m{cfg};
  m.load_irom(rom);
  m.release_reset(sim::kIromBase, sim::Mode::NON_SECURE);
  m.prot.secure_boot = 0;
  m.prot.pirom_start = 0x1200;
  m.prot.access_pirom = 0;

  // Ask for more than the open window: 0x10000..0x11200 streams, the next
  // load faults.
  const auto p = payload::build_dump_payload(sim::kIromBase, 0x1400,
                                             sim::kMmioUartThr);
  for (size_t i = 0; i < p.code.size(); i++)
    m.ram[p.header.entry_addr - sim::kRamBase + i] = p.code[i];
  m.regs[sim::PC] = p.header.entry_addr;
  uint64_t cap = 200'000;
  while (m.state == sim::MachState::RUNNING && !m.trapped && cap--)
    m.step(nullptr, nullptr);
  CHECK(m.trapped);
  CHECK(m.trap_reason == sim::TrapReason::PROTECTED_LOAD);
  CHECK(m.uart_out.size() == 0x1200);
  CHECK(m.uart_out == std::vector<uint8_t>(rom.begin(), rom.begin() + 0x1200));
}

TEST_CASE("canonical dump payload is byte-stable") {
  // Frozen golden image of the default boot-ROM dump request. Catches any
  // unintended change to the builder, the assembler or the wire format.
  const auto p = payload::build_dump_payload(sim::kIromBase, 0x1200,
                                             sim::kMmioUartThr);
  const auto wire = payload::encode(p);
  CHECK(wire.size() == 108);
  CHECK(p.checksum == 0xfffffc96u);
  CHECK(gen::to_hex(wire) ==
        "00100040500000000000000000000000000000000000000003032000000000"
        "6003002000000001000301200000120100050001000000000008002000481000"
        "400c021000000000000d3210000000000004002000010000000600200018100"
        "040020000000000000096fcffff");
}
