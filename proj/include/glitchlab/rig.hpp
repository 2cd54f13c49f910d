// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "glitchlab/rail.hpp"
#include "glitchlab/rng.hpp"

namespace glitchlab::rig {

// The glitch controller's wire protocol: 5-byte commands (opcode +
// 32-bit little-endian argument), 1-byte replies. This byte boundary is
// where a physical controller would be substituted.
constexpr uint8_t kCmdSetOffset = 0x01;  // arg: offset in ticks
constexpr uint8_t kCmdSetLength = 0x02;  // arg: length in ticks
constexpr uint8_t kCmdArm = 0x03;        // arg ignored (0)
constexpr uint8_t kCmdResetPulse = 0x04; // arg: reset hold in ticks
constexpr uint8_t kCmdStatus = 0x05;     // arg ignored (0)

constexpr uint8_t kReplyAck = 0x06;
constexpr uint8_t kErrMalformed = 0xFF;   // unknown opcode / short command
constexpr uint8_t kErrSetWhileArmed = 0xFE;
constexpr uint8_t kErrBadState = 0xFD;    // ARM while armed, fire while idle
constexpr uint8_t kErrOutOfRange = 0xFC;  // argument exceeds rig bounds

constexpr size_t kCommandBytes = 5;

enum class RigState : uint8_t { IDLE = 0x00, ARMED = 0x01, FIRED = 0x02 };
const char *to_string(RigState s);

struct RigConfig {
  uint32_t tick_ns = 20;
  uint32_t max_offset_ticks = 8'600'000;  // the full first-stage window
  uint32_t max_length_ticks = 1'000;      // 20 us
  bool jitter_enabled = false;            // reset-release to first-instruction
  uint32_t jitter_max_ns = 2'000;         // uniform [0, max] when enabled
  size_t transcript_limit = SIZE_MAX;     // entries kept (from the start)

  void validate() const;
};

struct TranscriptEntry {
  uint64_t time_ns = 0;  // rig clock when the command executed
  uint8_t opcode = 0;
  uint32_t arg = 0;
  uint8_t reply = 0;
};

// Backend boundary: a campaign only ever issues wire commands, so an
// implementation backed by real hardware sees the identical sequence.
class RigBackend {
 public:
  virtual ~RigBackend() = default;
  virtual uint8_t execute(const uint8_t *cmd, size_t len) = 0;
};

class EmulatedRig : public RigBackend {
 public:
  explicit EmulatedRig(const RigConfig &cfg, uint64_t jitter_seed = 0);

  // Executes one wire command; returns the reply byte. Any byte sequence
  // yields either a legal transition or an error reply.
  uint8_t execute(const uint8_t *cmd, size_t len) override;
  uint8_t execute(const std::vector<uint8_t> &cmd);

  // Convenience driver used by campaigns (still goes through execute()).
  // Throws std::runtime_error if the rig replies with an error.
  void set_pulse(uint32_t offset_ticks, uint32_t length_ticks);
  void arm();
  // ARM must have been issued. Asserts reset for hold_ticks, releases it,
  // and returns the release (trigger) timestamp on the rig clock.
  uint64_t reset_and_trigger(uint32_t hold_ticks);

  // Programmed pulse in nanoseconds.
  rail::GlitchPulse pulse() const;
  RigState state() const { return state_; }
  // Jitter drawn for the most recent trigger (0 when disabled): the delay
  // between reset release and the target's first instruction.
  uint32_t last_jitter_ns() const { return last_jitter_ns_; }
  uint64_t now_ns() const { return now_ns_; }
  // Advances the rig clock to account for simulated target run time.
  void advance_ns(uint64_t ns) { now_ns_ += ns; }
  // Replays n trigger-jitter draws without firing; used when resuming a
  // campaign so the jitter stream continues where the previous run left it.
  void skip_jitter_draws(uint64_t n);

  const RigConfig &config() const { return cfg_; }
  const std::vector<TranscriptEntry> &transcript() const { return log_; }
  uint64_t transcript_total() const { return log_total_; }

 private:
  uint8_t apply(uint8_t opcode, uint32_t arg);
  void record(uint8_t opcode, uint32_t arg, uint8_t reply);

  RigConfig cfg_;
  RigState state_ = RigState::IDLE;
  uint32_t offset_ticks_ = 0;
  uint32_t length_ticks_ = 0;
  uint64_t now_ns_ = 0;
  uint32_t last_jitter_ns_ = 0;
  Rng jitter_rng_;
  std::vector<TranscriptEntry> log_;
  uint64_t log_total_ = 0;  // including dropped entries
};

// Encodes one command into its 5-byte wire form.
std::vector<uint8_t> encode_command(uint8_t opcode, uint32_t arg);

}  // namespace glitchlab::rig
