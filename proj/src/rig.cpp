// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/rig.hpp"

#include <stdexcept>

namespace glitchlab::rig {

const char *to_string(RigState s) {
  switch (s) {
    case RigState::IDLE: return "IDLE";
    case RigState::ARMED: return "ARMED";
    case RigState::FIRED: return "FIRED";
  }
  return "?";
}

void RigConfig::validate() const {
  if (tick_ns == 0) throw std::invalid_argument("rig tick must be positive");
  if (max_offset_ticks == 0 || max_length_ticks == 0) {
    throw std::invalid_argument("rig bounds must be positive");
  }
}

std::vector<uint8_t> encode_command(uint8_t opcode, uint32_t arg) {
  return {opcode, uint8_t(arg), uint8_t(arg >> 8), uint8_t(arg >> 16),
          uint8_t(arg >> 24)};
}

EmulatedRig::EmulatedRig(const RigConfig &cfg, uint64_t jitter_seed)
    : cfg_(cfg), jitter_rng_(jitter_seed) {
  cfg_.validate();
}

uint8_t EmulatedRig::execute(const uint8_t *cmd, size_t len) {
  if (len != kCommandBytes) {
    record(len > 0 ? cmd[0] : 0, 0, kErrMalformed);
    return kErrMalformed;
  }
  uint32_t arg = uint32_t(cmd[1]) | uint32_t(cmd[2]) << 8 |
                 uint32_t(cmd[3]) << 16 | uint32_t(cmd[4]) << 24;
  uint8_t reply = apply(cmd[0], arg);
  record(cmd[0], arg, reply);
  return reply;
}

uint8_t EmulatedRig::execute(const std::vector<uint8_t> &cmd) {
  return execute(cmd.data(), cmd.size());
}

uint8_t EmulatedRig::apply(uint8_t opcode, uint32_t arg) {
  switch (opcode) {
    case kCmdSetOffset:
      if (state_ == RigState::ARMED) return kErrSetWhileArmed;
      if (arg > cfg_.max_offset_ticks) return kErrOutOfRange;
      offset_ticks_ = arg;
      return kReplyAck;
    case kCmdSetLength:
      if (state_ == RigState::ARMED) return kErrSetWhileArmed;
      if (arg > cfg_.max_length_ticks) return kErrOutOfRange;
      length_ticks_ = arg;
      return kReplyAck;
    case kCmdArm:
      if (state_ == RigState::ARMED) return kErrBadState;
      state_ = RigState::ARMED;
      return kReplyAck;
    case kCmdResetPulse: {
      if (state_ != RigState::ARMED) return kErrBadState;
      uint32_t hold = arg == 0 ? 1 : arg;  // release is always a fresh edge
      now_ns_ += uint64_t(hold) * cfg_.tick_ns;
      last_jitter_ns_ =
          cfg_.jitter_enabled && cfg_.jitter_max_ns > 0
              ? uint32_t(jitter_rng_.below(uint64_t(cfg_.jitter_max_ns) + 1))
              : 0;
      state_ = RigState::FIRED;
      return kReplyAck;
    }
    case kCmdStatus:
      return uint8_t(state_);
    default:
      return kErrMalformed;
  }
}

void EmulatedRig::record(uint8_t opcode, uint32_t arg, uint8_t reply) {
  ++log_total_;
  if (log_.size() >= cfg_.transcript_limit) return;  // keep the head
  log_.push_back({now_ns_, opcode, arg, reply});
}

void EmulatedRig::skip_jitter_draws(uint64_t n) {
  if (!cfg_.jitter_enabled || cfg_.jitter_max_ns == 0) return;
  for (uint64_t i = 0; i < n; ++i) {
    last_jitter_ns_ = uint32_t(jitter_rng_.below(uint64_t(cfg_.jitter_max_ns) + 1));
  }
}

namespace {

void expect_ack(uint8_t reply, const char *what) {
  if (reply != kReplyAck) {
    throw std::runtime_error(std::string("rig rejected ") + what +
                             " with reply " + std::to_string(reply));
  }
}

}  // namespace

void EmulatedRig::set_pulse(uint32_t offset_ticks, uint32_t length_ticks) {
  expect_ack(execute(encode_command(kCmdSetOffset, offset_ticks)),
             "SET_OFFSET");
  expect_ack(execute(encode_command(kCmdSetLength, length_ticks)),
             "SET_LENGTH");
}

void EmulatedRig::arm() {
  expect_ack(execute(encode_command(kCmdArm, 0)), "ARM");
}

uint64_t EmulatedRig::reset_and_trigger(uint32_t hold_ticks) {
  expect_ack(execute(encode_command(kCmdResetPulse, hold_ticks)),
             "RESET_PULSE");
  return now_ns_;
}

rail::GlitchPulse EmulatedRig::pulse() const {
  return {int64_t(offset_ticks_) * cfg_.tick_ns,
          int64_t(length_ticks_) * cfg_.tick_ns};
}

}  // namespace glitchlab::rig
