#pragma once

// Self-check suite behind the `verify` CLI subcommand: the numeric lemma
// checks, the wealth invariants, scale-freeness, the first-step identity,
// and the network gradient check, each reported as one pass/fail line.

#include <string>
#include <vector>

namespace cocob {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // filled in on failure, or a short summary on success
};

// quick = reduced trial counts (roughly 10x fewer), for smoke testing.
std::vector<CheckResult> verification_suite(bool quick = false);

}  // namespace cocob
