// Copyright (c) 2026 the glitchlab authors.
// SPDX-License-Identifier: Apache-2.0
#include "glitchlab/fixtures.hpp"

#include <stdexcept>

#include "glitchlab/assembler.hpp"
#include "glitchlab/boot.hpp"
#include "glitchlab/rng.hpp"

namespace glitchlab::fixtures {

using sim::Asm;
using sim::Machine;
using sim::MachState;
using sim::PendingFault;

const char *to_string(FixtureName n) {
  switch (n) {
    case FixtureName::ADD_LOOP: return "ADD_LOOP";
    case FixtureName::SIGCHECK: return "SIGCHECK";
    case FixtureName::FUSECHECK_POC: return "FUSECHECK_POC";
    case FixtureName::FUSECHECK_HARDENED: return "FUSECHECK_HARDENED";
  }
  return "?";
}

FixtureName fixture_from_name(const std::string &name) {
  if (name == "ADD_LOOP") return FixtureName::ADD_LOOP;
  if (name == "SIGCHECK") return FixtureName::SIGCHECK;
  if (name == "FUSECHECK_POC") return FixtureName::FUSECHECK_POC;
  if (name == "FUSECHECK_HARDENED") return FixtureName::FUSECHECK_HARDENED;
  throw std::invalid_argument("unknown fixture: " + name);
}

uint32_t Fixture::addr(const std::string &label) const {
  auto it = labels.find(label);
  if (it == labels.end()) {
    throw std::invalid_argument("unknown fixture label: " + label);
  }
  return it->second;
}

namespace {

constexpr uint32_t kAddLoopIters = 20'000;

void collect(Asm &a, Fixture &f) {
  f.irom = a.assemble();
  for (const auto &[n, l] : a.names()) f.labels[n] = a.addr_of(l);
}

// A bounded run of identical additions, each result emitted on UART. The
// fault-free stream is kAddLoopIters copies of 0x33; wrong bytes, missing
// bytes, and extra bytes are all visible.
Fixture build_add_loop() {
  using namespace sim;
  Fixture f;
  f.name = "ADD_LOOP";
  f.step_cap = 200'000;
  Asm a(kIromBase);
  a.mov(R0, 0x11);
  a.mov(R1, 0x22);
  a.mov(R6, kAddLoopIters);
  int lp = a.bind_new();
  a.add(R2, R0, R1);
  a.out_uart(R2);
  a.add(R6, R6, -1);
  a.cbnz(R6, lp);
  a.halt();
  boot::emit_zero_barrier(a);
  collect(a, f);
  f.entry = kIromBase;
  f.expected_uart.assign(kAddLoopIters, 0x33);
  f.expected_final_state = MachState::HALTED;
  return f;
}

// The classic signature gate: verification fails on this device, so the
// clean path reports the error and parks. The authenticated call is the
// attacker's target.
Fixture build_sigcheck() {
  using namespace sim;
  Fixture f;
  f.name = "SIGCHECK";
  Asm a(kIromBase);
  int load_code = a.label(), verify = a.label();
  int auth_call = a.label(), auth_err = a.label();
  int failed = a.label(), hang = a.label();

  int sc = a.bind_new();
  a.name(sc, "sigcheck");
  a.push((1u << FP) | (1u << LR));
  a.bl(load_code);
  a.bl(verify);
  int cbz = a.bind_new();
  a.name(cbz, "sc_cbz");
  a.cbz(R0, failed);
  a.bl(auth_call);
  a.bind(failed);
  a.name(failed, "sigcheck_failed");
  a.bl(auth_err);
  a.bind(hang);
  a.name(hang, "hang");
  a.b(hang);
  boot::emit_zero_barrier(a);

  a.bind(load_code);
  a.name(load_code, "load_further_code");
  a.mov(R0, 1);  // image staged
  a.ret();
  boot::emit_zero_barrier(a);

  a.bind(verify);
  a.name(verify, "sig_verify");
  a.mov(R0, 0);  // signature invalid on this device
  a.ret();
  boot::emit_zero_barrier(a);

  a.bind(auth_err);
  a.name(auth_err, "signify_auth_error");
  a.mov(R1, 'E');
  a.out_uart(R1);
  a.ret();
  boot::emit_zero_barrier(a);

  a.bind(auth_call);
  a.name(auth_call, "call_authenticated_code");
  a.mov(R1, 'A');
  a.out_uart(R1);
  a.halt();
  boot::emit_zero_barrier(a);

  collect(a, f);
  f.entry = kIromBase;
  f.target_label = "call_authenticated_code";
  f.hang_label = "hang";
  f.expected_uart = {'E'};
  f.expected_final_state = MachState::RUNNING;  // parked on the hang loop
  return f;
}

Fixture build_fusecheck(bool hardened, uint32_t samples) {
  using namespace sim;
  Fixture f;
  f.name = hardened ? "FUSECHECK_HARDENED" : "FUSECHECK_POC";
  Asm a(kIromBase);
  int check = a.label(), dl = a.label();
  int isfam = a.label(), isppm = a.label();

  int entry = a.bind_new();
  a.name(entry, "entry");
  a.mov(R1, 1);
  int begin_mark = a.bind_new();
  a.name(begin_mark, "critical_begin");
  a.out_gpio(R1);
  a.bl(check);
  a.mov(R1, 2);
  a.out_gpio(R1);
  a.halt();
  boot::emit_zero_barrier(a);

  int prompt_lbl = a.bind_new();
  a.name(prompt_lbl, "prompt_data");
  const char *prompt = "FIXTURE-DOWNLOAD>";
  std::vector<uint8_t> pd(prompt, prompt + 17);
  pd.push_back(0);
  a.bytes(pd);
  a.align();
  boot::emit_zero_barrier(a);

  if (!hardened) {
    boot::emit_fuse_check_gate(a, check, isfam, isppm, dl);
  } else {
    boot::emit_fuse_check_gate_hardened(a, check, isfam, isppm, dl);
  }
  boot::emit_zero_barrier(a);

  a.bind(isfam);
  a.name(isfam, "is_fam");
  boot::emit_fuse_sampler(a, kMmioFuseFam, samples);
  boot::emit_zero_barrier(a);
  a.bind(isppm);
  a.name(isppm, "is_ppm");
  boot::emit_fuse_sampler(a, kMmioFusePpm, samples);
  boot::emit_zero_barrier(a);

  a.bind(dl);
  a.name(dl, "download_entry");
  a.mov(R0, a.addr_of(prompt_lbl));
  int lp = a.bind_new();
  int done = a.label();
  a.ldrb(R1, R0);
  a.cbz(R1, done);
  a.out_uart(R1);
  a.add(R0, R0, 1);
  a.b(lp);
  a.bind(done);
  a.halt();
  boot::emit_zero_barrier(a);

  collect(a, f);
  f.entry = kIromBase;
  f.target_label = "download_entry";
  f.expected_uart = {};
  f.expected_final_state = MachState::HALTED;
  return f;
}

}  // namespace

Fixture build_fixture(FixtureName n, uint32_t fuse_samples) {
  switch (n) {
    case FixtureName::ADD_LOOP: return build_add_loop();
    case FixtureName::SIGCHECK: return build_sigcheck();
    case FixtureName::FUSECHECK_POC: return build_fusecheck(false, fuse_samples);
    case FixtureName::FUSECHECK_HARDENED:
      return build_fusecheck(true, fuse_samples);
  }
  throw std::invalid_argument("unknown fixture");
}

namespace {

FixtureResult run_resolved(const Fixture &f, const rail::RailOutcome &out,
                           uint64_t seed) {
  FixtureResult r;
  if (out.kind == rail::RailRegime::CRASH) {
    r.final_state = MachState::CRASHED;
    r.end_time_ns = uint64_t(out.window_start_ns);
    return r;
  }
  if (out.kind == rail::RailRegime::DETECTED) {
    r.final_state = MachState::DETECT_SHUTDOWN;
    r.end_time_ns = uint64_t(out.window_start_ns);
    return r;
  }
  Machine m(f.mcfg);
  m.load_irom(f.irom);
  m.release_reset(f.entry);
  uint32_t target = f.target_label.empty() ? 0 : f.addr(f.target_label);
  uint32_t hang = f.hang_label.empty() ? 0 : f.addr(f.hang_label);
  PendingFault pf{};
  pf.consumed = true;
  if (out.kind == rail::RailRegime::FAULT_WINDOW) {
    pf = PendingFault{out.window_start_ns, out.window_end_ns,
                      out.fault_probability, false};
  }
  Rng rng(seed);
  bool capped = false;
  while (m.state == MachState::RUNNING && !m.trapped) {
    uint32_t pc = m.regs[sim::PC];
    if (target != 0 && pc == target) r.reached_target = true;
    if (hang != 0 && pc == hang) break;
    if (m.instr_count >= f.step_cap) {
      capped = true;
      break;
    }
    sim::FaultEvent ev;
    m.step(&pf, &rng, &ev);
    if (ev.applied && !r.fault.applied) r.fault = ev;
  }
  r.final_state = m.state;
  r.trapped = m.trapped;
  r.trap_reason = m.trap_reason;
  r.uart = m.uart_out;
  r.gpio_events = m.gpio_events;
  r.end_time_ns = m.clock_ns;
  r.instrs = m.instr_count;
  bool parked = (hang != 0 && m.regs[sim::PC] == hang);
  r.hung = m.trapped || capped || parked;
  r.corruption = r.uart != f.expected_uart ||
                 (!r.hung && !r.reached_target &&
                  m.state != f.expected_final_state);
  return r;
}

}  // namespace

FixtureResult run_fixture(const Fixture &f,
                          const std::optional<rail::GlitchPulse> &pulse,
                          const rail::RailConfig &rail, uint64_t seed) {
  rail::RailOutcome out;  // defaults to NONE
  if (pulse) out = rail::resolve_rail(*pulse, rail, 0);
  return run_resolved(f, out, seed);
}

FixtureResult run_fixture(FixtureName n,
                          const std::optional<rail::GlitchPulse> &pulse,
                          const rail::RailConfig &rail, uint64_t seed) {
  return run_fixture(build_fixture(n), pulse, rail, seed);
}

FixtureResult run_fixture_gpio_triggered(
    const Fixture &f, const std::optional<rail::GlitchPulse> &pulse,
    const rail::RailConfig &rail, uint64_t seed) {
  if (!pulse) return run_fixture(f, pulse, rail, seed);
  FixtureResult clean = run_fixture(f, std::nullopt, rail, seed);
  if (clean.gpio_events.empty()) {
    throw std::invalid_argument(
        "fixture emits no GPIO edge to trigger from");
  }
  rail::RailOutcome out =
      rail::resolve_rail(*pulse, rail, int64_t(clean.gpio_events[0].time_ns));
  return run_resolved(f, out, seed);
}

}  // namespace glitchlab::fixtures
